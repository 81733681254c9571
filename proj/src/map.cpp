#include "metastable/map.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace metastable {

namespace {

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

PiecewiseAffineMap::PiecewiseAffineMap(Interval state_space,
                                       std::vector<AffineBranch> branches,
                                       std::vector<double> boundary_points,
                                       std::vector<double> fixed_points)
    : state_space_(state_space),
      branches_(std::move(branches)),
      boundary_points_(std::move(boundary_points)),
      fixed_points_(std::move(fixed_points)) {
    require(!branches_.empty(), "map needs at least one branch");
    require(state_space_.lo < state_space_.hi, "state space must have positive length");
    require(branches_.front().domain.lo == state_space_.lo &&
                branches_.back().domain.hi == state_space_.hi,
            "branch domains must span the state space");
    for (std::size_t i = 0; i < branches_.size(); ++i) {
        const AffineBranch& b = branches_[i];
        require(b.domain.lo < b.domain.hi, "branch domain must have positive length");
        require(std::abs(b.slope) > 1.0, "branch slope must be expanding (|slope| > 1)");
        if (i + 1 < branches_.size())
            require(b.domain.hi == branches_[i + 1].domain.lo,
                    "branch domains must tile without gaps or overlaps");
        Interval img = affine_image(b.domain, b.slope, b.intercept);
        require(img.lo >= state_space_.lo - 1e-12 && img.hi <= state_space_.hi + 1e-12,
                "branch image must lie within the state space");
    }
    require(boundary_points_.size() >= 2, "need at least boundary points b_0, b_1");
    require(std::is_sorted(boundary_points_.begin(), boundary_points_.end()),
            "boundary points must be ordered");
    require(boundary_points_.front() == state_space_.lo &&
                boundary_points_.back() == state_space_.hi,
            "boundary points must start and end at the state space endpoints");
    std::set<double> endpoints;
    for (const AffineBranch& b : branches_) {
        endpoints.insert(b.domain.lo);
        endpoints.insert(b.domain.hi);
    }
    for (double bp : boundary_points_)
        require(endpoints.count(bp) == 1, "boundary points must be branch endpoints");
}

Interval PiecewiseAffineMap::state_interval(std::size_t j) const {
    require(j + 1 < boundary_points_.size(), "invalid state index");
    return {boundary_points_[j], boundary_points_[j + 1]};
}

std::size_t PiecewiseAffineMap::state_of(double x) const {
    require(state_space_.contains(x), "point outside state space");
    // boundary points belong to the left interval
    auto it = std::lower_bound(boundary_points_.begin(), boundary_points_.end(), x);
    std::size_t idx = static_cast<std::size_t>(it - boundary_points_.begin());
    if (idx == 0) return 0;
    return std::min(idx - 1, state_count() - 1);
}

std::size_t PiecewiseAffineMap::branch_index(double x) const {
    // half-open convention: branch i owns [lo_i, lo_{i+1}), last branch closed
    auto it = std::upper_bound(branches_.begin(), branches_.end(), x,
                               [](double v, const AffineBranch& b) { return v < b.domain.lo; });
    if (it == branches_.begin()) return 0;
    std::size_t idx = static_cast<std::size_t>(it - branches_.begin()) - 1;
    return std::min(idx, branches_.size() - 1);
}

double PiecewiseAffineMap::eval(double x) const {
    require(state_space_.contains(x), "point outside state space");
    for (double fp : fixed_points_)
        if (x == fp) return x;
    return branches_[branch_index(x)](x);
}

IntervalList PiecewiseAffineMap::preimage(const Interval& target) const {
    IntervalList out;
    for (const AffineBranch& b : branches_) {
        Interval pre = affine_preimage(target, b.slope, b.intercept);
        Interval piece = intersect(pre, b.domain);
        if (!piece.degenerate()) out.push_back(piece);
    }
    return out;
}

IntervalList PiecewiseAffineMap::holes(std::size_t i, std::size_t j) const {
    require(i < state_count() && j < state_count(), "invalid state index");
    require(i != j, "holes are defined for i != j only");
    Interval source = state_interval(i);
    Interval target = state_interval(j);
    IntervalList out;
    for (const AffineBranch& b : branches_) {
        Interval pre = affine_preimage(target, b.slope, b.intercept);
        Interval piece = intersect(intersect(pre, b.domain), source);
        if (!piece.degenerate()) out.push_back(piece);
    }
    return out;
}

IntervalList PiecewiseAffineMap::holes_from(std::size_t i) const {
    IntervalList all;
    for (std::size_t j = 0; j < state_count(); ++j) {
        if (j == i) continue;
        IntervalList h = holes(i, j);
        all.insert(all.end(), h.begin(), h.end());
    }
    return normalize(std::move(all));
}

double PiecewiseAffineMap::hole_measure(std::size_t i, std::size_t j) const {
    Interval source = state_interval(i);
    // built-in families have uniform invariant density 1/|I_i| on I_i
    return total_length(normalize(holes(i, j))) / source.length();
}

std::vector<double> PiecewiseAffineMap::alignment_points() const {
    std::set<double> pts(boundary_points_.begin(), boundary_points_.end());
    for (const AffineBranch& b : branches_) {
        pts.insert(b.domain.lo);
        pts.insert(b.domain.hi);
    }
    for (std::size_t i = 0; i < state_count(); ++i)
        for (std::size_t j = 0; j < state_count(); ++j) {
            if (i == j) continue;
            for (const Interval& h : holes(i, j)) {
                pts.insert(h.lo);
                pts.insert(h.hi);
            }
        }
    return {pts.begin(), pts.end()};
}

PiecewiseAffineMap paired_tent_build(const PairedTentParams& params, double eps) {
    require(params.a > 0.0 && params.b > 0.0, "paired tent parameters must be positive");
    require(eps >= 0.0 && eps * params.a <= 1.0 && eps * params.b <= 1.0,
            "eps*a and eps*b must not exceed 1");
    const double ea = eps * params.a;
    const double eb = eps * params.b;
    std::vector<AffineBranch> branches = {
        {{-1.0, -0.5}, 2.0 * (1.0 + eb), 2.0 * (1.0 + eb) - 1.0},
        {{-0.5, 0.0}, -2.0 * (1.0 + eb), -1.0},
        {{0.0, 0.5}, -2.0 * (1.0 + ea), 1.0},
        {{0.5, 1.0}, 2.0 * (1.0 + ea), 1.0 - 2.0 * (1.0 + ea)},
    };
    return PiecewiseAffineMap({-1.0, 1.0}, std::move(branches), {-1.0, 0.0, 1.0},
                              {-1.0, 0.0, 1.0});
}

PiecewiseAffineMap mwell_build(const MWellSpec& spec, double eps, double symbol_scale) {
    require(spec.m >= 2, "m-well map needs m >= 2 wells");
    require(spec.well_slope > 1.0, "well slope must exceed 1");
    require(eps >= 0.0 && symbol_scale > 0.0, "eps >= 0 and symbol_scale > 0 required");
    const std::size_t m = spec.m;
    require(spec.hole_lengths.size() == m, "hole_lengths must be m x m");
    for (const auto& row : spec.hole_lengths)
        require(row.size() == m, "hole_lengths must be m x m");
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            require(spec.hole_lengths[i][j] >= 0.0, "hole lengths must be nonnegative");
            bool neighbour = (j + 1 == i) || (i + 1 == j);
            if (!neighbour && i != j)
                require(spec.hole_lengths[i][j] == 0.0,
                        "non-neighbour beta entry must be zero");
        }

    const int branches_per_well =
        std::max(2, static_cast<int>(std::lround(spec.well_slope)));
    const double k = static_cast<double>(branches_per_well);
    const double sub = 1.0 / k;  // width of one full branch domain

    std::vector<AffineBranch> branches;
    std::vector<double> boundary;
    boundary.reserve(m + 1);
    for (std::size_t j = 0; j <= m; ++j) boundary.push_back(static_cast<double>(j));

    for (std::size_t well = 0; well < m; ++well) {
        const double lo = static_cast<double>(well);

        // holes are carved out of the first branch [lo, lo + sub)
        struct Carve {
            Interval dom;
            double slope;
            double intercept;
        };
        std::vector<Carve> carves;
        double cursor = lo + 0.25 * sub;
        double carved = 0.0;
        for (std::size_t target : {well >= 1 ? well - 1 : m, well + 1}) {
            if (target >= m) continue;
            double len = eps * spec.hole_lengths[well][target] * symbol_scale;
            if (len <= 0.0) continue;
            carved += len;
            require(carved <= 0.5 * sub, "holes exceed well capacity");
            // re-route onto an interval of length 2*len centred in the
            // target well, slope 2 (still expanding)
            double centre = static_cast<double>(target) + 0.5;
            carves.push_back({{cursor, cursor + len}, 2.0, centre - len - 2.0 * cursor});
            cursor += len;
        }

        // first branch, split around the carved holes
        const double slope0 = k;
        const double icpt0 = lo - k * lo;  // maps [lo, lo+sub) onto [lo, lo+1)
        double pos = lo;
        for (const Carve& c : carves) {
            if (pos < c.dom.lo)
                branches.push_back({{pos, c.dom.lo}, slope0, icpt0});
            branches.push_back({c.dom, c.slope, c.intercept});
            pos = c.dom.hi;
        }
        branches.push_back({{pos, lo + sub}, slope0, icpt0});

        // remaining full branches of the sawtooth
        for (int t = 1; t < branches_per_well; ++t) {
            double dlo = lo + t * sub;
            double dhi = lo + (t + 1) * sub;
            if (t + 1 == branches_per_well) dhi = lo + 1.0;
            branches.push_back({{dlo, dhi}, k, lo - k * dlo});
        }
    }
    return PiecewiseAffineMap({0.0, static_cast<double>(m)}, std::move(branches),
                              std::move(boundary));
}

}  // namespace metastable
