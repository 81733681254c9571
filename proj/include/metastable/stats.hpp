#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace metastable {
namespace stats {

/// Compensated (Kahan) accumulator; fixed-order reductions with it are
/// deterministic to ~1e-16 relative.
class KahanSum {
public:
    void add(double x) {
        double y = x - comp_;
        double t = sum_ + y;
        comp_ = (t - sum_) - y;
        sum_ = t;
    }
    double value() const { return sum_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline double mean(const std::vector<double>& xs) {
    KahanSum s;
    for (double x : xs) s.add(x);
    return xs.empty() ? 0.0 : s.value() / static_cast<double>(xs.size());
}

inline double sample_variance(const std::vector<double>& xs) {
    if (xs.size() < 2) return 0.0;
    double mu = mean(xs);
    KahanSum s;
    for (double x : xs) s.add((x - mu) * (x - mu));
    return s.value() / static_cast<double>(xs.size() - 1);
}

/// Standard error of the mean via leave-one-out jackknife.
inline double jackknife_stderr(const std::vector<double>& xs) {
    const std::size_t n = xs.size();
    if (n < 2) return 0.0;
    return std::sqrt(sample_variance(xs) / static_cast<double>(n));
}

struct WilsonInterval {
    double estimate = 0.0;
    double lo = 0.0;
    double hi = 0.0;
};

/// Wilson score interval for a binomial proportion (z = 1.96 -> 95%).
inline WilsonInterval wilson_interval(std::size_t hits, std::size_t n, double z = 1.959963984540054) {
    WilsonInterval w;
    if (n == 0) return w;
    double nn = static_cast<double>(n);
    double p = static_cast<double>(hits) / nn;
    w.estimate = p;
    double z2 = z * z;
    double denom = 1.0 + z2 / nn;
    double centre = p + z2 / (2.0 * nn);
    double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn));
    w.lo = (centre - half) / denom;
    w.hi = (centre + half) / denom;
    return w;
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// Kolmogorov-Smirnov distance between the sample and N(0, sigma^2).
inline double ks_distance_normal(std::vector<double> samples, double sigma) {
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        double f = normal_cdf(samples[i] / sigma);
        d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
        d = std::max(d, std::abs(f - static_cast<double>(i) / n));
    }
    return d;
}

struct MomentSummary {
    double mean = 0.0;
    double variance = 0.0;
    double skewness = 0.0;
    double excess_kurtosis = 0.0;
};

inline MomentSummary moments(const std::vector<double>& xs) {
    MomentSummary m;
    if (xs.size() < 2) return m;
    m.mean = mean(xs);
    KahanSum m2, m3, m4;
    for (double x : xs) {
        double d = x - m.mean;
        m2.add(d * d);
        m3.add(d * d * d);
        m4.add(d * d * d * d);
    }
    double n = static_cast<double>(xs.size());
    double v = m2.value() / n;
    m.variance = m2.value() / (n - 1.0);
    if (v > 0.0) {
        m.skewness = (m3.value() / n) / std::pow(v, 1.5);
        m.excess_kurtosis = (m4.value() / n) / (v * v) - 3.0;
    }
    return m;
}

}  // namespace stats
}  // namespace metastable
