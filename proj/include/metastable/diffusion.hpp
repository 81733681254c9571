#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "metastable/environment.hpp"
#include "metastable/observable.hpp"
#include "metastable/ulam.hpp"

namespace metastable {

/// Closed-cocycle equivariant density at fiber 0 plus the per-fiber means
/// mu_k(psi) along fibers 0..count-1 (the eps-centering shifts).
struct FiberMeans {
    DensityVector phi0;         // closed-cocycle density at fiber 0, unit mass
    std::vector<double> means;  // mu_{sigma^k omega}(psi_k) for k = 0..count-1
};

/// Pull the uniform density back through the closed cocycle (depth per the
/// ulam default), then push forward recording per-fiber means of psi.
FiberMeans closed_fiber_means(const Environment& env, const FiberPath& path,
                              const Observable& psi, double eps, GridPtr grid,
                              std::size_t count, std::size_t pullback_depth = 0);

/// Residual |integral of (psi - mean) d mu_k| for each computed fiber.
double eps_center_residual(const FiberMeans& fm);

struct VarianceEstimate {
    double eps = 0.0;
    double sigma2 = 0.0;
    std::string route;          // "trajectory" or "operator-series"
    double stderr_ = 0.0;
    std::size_t replicas = 0;
    std::size_t steps = 0;
    // series route only:
    std::size_t truncation = 0;
    double tail_bound = 0.0;
    double decay_rate = 0.0;
};

struct TrajectoryVarianceOptions {
    std::size_t inner_samples = 4;   // trajectories per omega replica
    std::size_t grid_cells = 1024;   // grid for the eps-centering means
    std::size_t pullback_depth = 0;  // 0: ulam default ceil(40/eps)
    int jobs = 0;
};

/// Monte Carlo route: Sigma^2 = mean over omega replicas of the per-replica
/// sample variance of S_n, divided by n. psi must be fibrewise centered.
VarianceEstimate variance_trajectory(const Environment& env, const Observable& psi,
                                     double eps, std::size_t n, std::size_t n_replicas,
                                     std::uint64_t seed,
                                     const TrajectoryVarianceOptions& opts = {});

struct SeriesVarianceOptions {
    std::size_t n_max = 0;          // 0: ceil(8/(eps*beta*))
    std::size_t fiber_samples = 32;
    std::size_t grid_cells = 4096;
    std::size_t pullback_depth = 0;
    int jobs = 0;
};

/// Operator route: variance term plus twice the truncated autocovariance
/// series, pushed through the closed Ulam cocycle; the truncation tail is
/// bounded by geometric extrapolation of the fitted decay.
VarianceEstimate variance_series(const Environment& env, const Observable& psi, double eps,
                                 std::uint64_t seed, const SeriesVarianceOptions& opts = {});

struct NormalityReport {
    double ks_distance = 0.0;
    double skewness = 0.0;
    double excess_kurtosis = 0.0;
    double sigma2_used = 0.0;
    bool degenerate = false;
    std::size_t samples = 0;
};

struct CltOptions {
    std::size_t grid_cells = 1024;
    std::size_t pullback_depth = 0;
    int jobs = 0;
};

/// Empirical distribution of S_n/sqrt(n) on one quenched path against
/// N(0, sigma2). If sigma2 is absent the sample variance is used.
NormalityReport clt_check(const Environment& env, const Observable& psi, double eps,
                          std::size_t n, std::size_t n_samples, std::uint64_t seed,
                          std::optional<double> sigma2 = std::nullopt,
                          const CltOptions& opts = {});

struct SweepRow {
    double eps = 0.0;
    double sigma2 = 0.0;
    double eps_sigma2 = 0.0;
    double stderr_ = 0.0;
    std::string route;
    double limit_value = 0.0;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    double limit_value = 0.0;            // markov variance_limit companion
    double richardson_extrapolation = 0.0;  // linear-in-eps extrapolation to 0
};

struct SweepOptions {
    std::size_t n = 20000;
    std::size_t n_replicas = 2000;
    TrajectoryVarianceOptions trajectory;
};

/// eps sweep of the trajectory-route estimate with the Theorem-3 limit
/// column and a Richardson extrapolation of eps*Sigma^2.
SweepResult diffusion_sweep(const Environment& env, const Observable& psi,
                            const std::vector<double>& eps_list, std::uint64_t seed,
                            const SweepOptions& opts = {});

}  // namespace metastable
