#pragma once

#include <cstdint>
#include <vector>

#include "metastable/environment.hpp"
#include "metastable/markov.hpp"
#include "metastable/stats.hpp"

namespace metastable {

/// One simulated orbit with its per-step state labels.
struct Trajectory {
    double x0 = 0.0;
    double eps = 0.0;
    std::vector<std::uint8_t> labels;  // z(x_0), z(x_1), ..., z(x_n)
    std::size_t boundary_hits = 0;     // iterates landing exactly on a boundary point
};

/// Jump times, holding times and visited states of one trajectory.
struct JumpTrace {
    std::vector<std::uint64_t> times;     // t_i, strictly increasing, t_0 = 0 omitted
    std::vector<std::uint64_t> holdings;  // T_i = t_i - t_{i-1}
    std::vector<std::size_t> states;      // z after each jump
};

/// Deterministic orbit of x0 under the fiber maps at indices 0..n-1.
Trajectory simulate(const Environment& env, const FiberPath& path, double eps, double x0,
                    std::size_t n);

/// First-difference scan of the label sequence.
JumpTrace extract_jumps(const Trajectory& traj);

/// Query in the scaled time variable: eps*T_k in [lo_k, hi_k] and
/// z_k == target_k for k = 1..p.
struct JumpQuery {
    std::vector<markov::TimeWindow> deltas;
    std::vector<std::size_t> targets;
};

struct JumpSampleRecord {
    std::vector<std::uint64_t> holdings;
    std::vector<std::size_t> states;
    bool censored = false;
};

struct EmpiricalJumpDist {
    std::size_t samples = 0;    // uncensored sample count
    std::size_t censored = 0;   // horizon hit before p jumps
    std::size_t hits = 0;
    stats::WilsonInterval wilson;
    std::size_t boundary_hits = 0;
    std::vector<JumpSampleRecord> records;  // filled when keep_samples is set
};

struct JumpSamplingOptions {
    bool annealed = false;          // fresh path per sample instead of one fixed omega
    double horizon_factor = 50.0;   // budget: horizon_factor/(eps*beta*) steps per jump
    int jobs = 0;                   // 0: all threads, 1: serial reference
    bool keep_samples = false;      // collect per-sample traces for CSV output
};

/// Monte Carlo estimate of the jump-law probability: x0 drawn i.i.d. from
/// the uniform mu_{j0}; quenched mode fixes one omega path for all samples.
EmpiricalJumpDist jump_distribution(const Environment& env, double eps, std::size_t j0,
                                    std::size_t n_samples, const JumpQuery& query,
                                    std::uint64_t seed,
                                    const JumpSamplingOptions& opts = {});

struct HoldingLawReport {
    double sup_distance = 0.0;
    bool degenerate = false;       // eps == 0: no jumps ever
    std::size_t censored = 0;
    std::vector<double> t_grid;
    std::vector<double> empirical_survival;
    std::vector<double> oracle_survival;
};

/// Sup over the t grid of |P_hat(eps*T_1 > t) - e^{-t r_j0}|.
HoldingLawReport compare_holding_law(const Environment& env, double eps, std::size_t j0,
                                     std::size_t n_samples, const std::vector<double>& t_grid,
                                     std::uint64_t seed,
                                     const JumpSamplingOptions& opts = {});

}  // namespace metastable
