#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

namespace metastable {

/// Closed interval [lo, hi] on the real line. Degenerate (lo == hi) is
/// allowed; callers that care about measure drop zero-length pieces.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    double length() const { return hi - lo; }
    bool empty() const { return hi < lo; }
    bool degenerate() const { return hi <= lo; }
    bool contains(double x) const { return lo <= x && x <= hi; }
    double midpoint() const { return 0.5 * (lo + hi); }
};

inline Interval intersect(const Interval& a, const Interval& b) {
    return {std::max(a.lo, b.lo), std::min(a.hi, b.hi)};
}

/// Exact image of [lo, hi] under x -> slope*x + intercept, endpoint ordered.
inline Interval affine_image(const Interval& iv, double slope, double intercept) {
    double y0 = slope * iv.lo + intercept;
    double y1 = slope * iv.hi + intercept;
    if (y0 <= y1) return {y0, y1};
    return {y1, y0};
}

/// Exact preimage of [lo, hi] under x -> slope*x + intercept (slope != 0).
inline Interval affine_preimage(const Interval& iv, double slope, double intercept) {
    double x0 = (iv.lo - intercept) / slope;
    double x1 = (iv.hi - intercept) / slope;
    if (x0 <= x1) return {x0, x1};
    return {x1, x0};
}

using IntervalList = std::vector<Interval>;

/// Sort by left endpoint, merge touching/overlapping pieces, drop
/// zero-length ones.
inline IntervalList normalize(IntervalList list) {
    IntervalList out;
    std::erase_if(list, [](const Interval& iv) { return iv.degenerate(); });
    std::sort(list.begin(), list.end(),
              [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    for (const Interval& iv : list) {
        if (!out.empty() && iv.lo <= out.back().hi)
            out.back().hi = std::max(out.back().hi, iv.hi);
        else
            out.push_back(iv);
    }
    return out;
}

inline double total_length(const IntervalList& list) {
    double s = 0.0;
    for (const Interval& iv : list) s += std::max(0.0, iv.length());
    return s;
}

inline IntervalList intersect(const IntervalList& a, const Interval& b) {
    IntervalList out;
    for (const Interval& iv : a) {
        Interval c = intersect(iv, b);
        if (!c.degenerate()) out.push_back(c);
    }
    return out;
}

inline IntervalList intersect(const IntervalList& a, const IntervalList& b) {
    IntervalList out;
    for (const Interval& ia : a)
        for (const Interval& ib : b) {
            Interval c = intersect(ia, ib);
            if (!c.degenerate()) out.push_back(c);
        }
    return normalize(std::move(out));
}

/// Set difference whole \ parts, assuming parts are inside whole.
inline IntervalList complement_within(const Interval& whole, IntervalList parts) {
    parts = normalize(std::move(parts));
    IntervalList out;
    double cursor = whole.lo;
    for (const Interval& h : parts) {
        Interval left{cursor, std::min(h.lo, whole.hi)};
        if (!left.degenerate()) out.push_back(left);
        cursor = std::max(cursor, h.hi);
    }
    Interval tail{cursor, whole.hi};
    if (!tail.degenerate()) out.push_back(tail);
    return out;
}

}  // namespace metastable
