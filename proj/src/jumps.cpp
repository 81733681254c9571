#include "metastable/jumps.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "metastable/parallel.hpp"

namespace metastable {

namespace {

bool is_boundary_point(const PiecewiseAffineMap& map, double x) {
    const auto& bps = map.boundary_points();
    return std::binary_search(bps.begin(), bps.end(), x);
}

/// Streaming jump scan: iterate until `wanted` jumps or the step budget is
/// exhausted. Returns the trace plus a censored flag. SymbolFn maps a step
/// index to an alphabet symbol.
struct ScanResult {
    JumpTrace trace;
    bool censored = false;
    std::size_t boundary_hits = 0;
};

template <typename SymbolFn>
ScanResult scan_jumps(const std::vector<PiecewiseAffineMap>& maps, SymbolFn&& symbol_at,
                      double x0, std::size_t wanted, std::uint64_t max_steps) {
    ScanResult res;
    double x = x0;
    std::size_t label = maps[0].state_of(x);
    std::uint64_t last_jump = 0;
    for (std::uint64_t step = 1; step <= max_steps; ++step) {
        const PiecewiseAffineMap& map = maps[symbol_at(static_cast<long>(step - 1))];
        x = map.eval(x);
        if (is_boundary_point(map, x)) ++res.boundary_hits;
        std::size_t z = map.state_of(x);
        if (z != label) {
            res.trace.times.push_back(step);
            res.trace.holdings.push_back(step - last_jump);
            res.trace.states.push_back(z);
            last_jump = step;
            label = z;
            if (res.trace.times.size() == wanted) return res;
        }
    }
    res.censored = res.trace.times.size() < wanted;
    return res;
}

}  // namespace

Trajectory simulate(const Environment& env, const FiberPath& path, double eps, double x0,
                    std::size_t n) {
    auto maps = env.maps_per_symbol(eps);
    if (!maps[0].state_space().contains(x0))
        throw std::invalid_argument("x0 outside state space");
    Trajectory traj;
    traj.x0 = x0;
    traj.eps = eps;
    traj.labels.reserve(n + 1);
    double x = x0;
    traj.labels.push_back(static_cast<std::uint8_t>(maps[path.symbol_at(0)].state_of(x)));
    for (std::size_t k = 0; k < n; ++k) {
        const PiecewiseAffineMap& map = maps[path.symbol_at(static_cast<long>(k))];
        x = map.eval(x);
        if (is_boundary_point(map, x)) ++traj.boundary_hits;
        traj.labels.push_back(static_cast<std::uint8_t>(map.state_of(x)));
    }
    return traj;
}

JumpTrace extract_jumps(const Trajectory& traj) {
    JumpTrace trace;
    if (traj.labels.empty()) return trace;
    std::uint8_t label = traj.labels[0];
    std::uint64_t last_jump = 0;
    for (std::size_t k = 1; k < traj.labels.size(); ++k) {
        if (traj.labels[k] != label) {
            trace.times.push_back(k);
            trace.holdings.push_back(k - last_jump);
            trace.states.push_back(traj.labels[k]);
            last_jump = k;
            label = traj.labels[k];
        }
    }
    return trace;
}

EmpiricalJumpDist jump_distribution(const Environment& env, double eps, std::size_t j0,
                                    std::size_t n_samples, const JumpQuery& query,
                                    std::uint64_t seed, const JumpSamplingOptions& opts) {
    if (query.deltas.size() != query.targets.size() || query.deltas.empty())
        throw std::invalid_argument("query needs one target per holding window");
    if (j0 >= env.state_count()) throw std::invalid_argument("invalid start state");
    if (eps <= 0.0) throw std::invalid_argument("jump sampling needs eps > 0");

    const std::size_t p = query.deltas.size();
    const std::uint64_t horizon = static_cast<std::uint64_t>(
        std::ceil(opts.horizon_factor / (eps * env.beta_star())));
    const std::uint64_t max_steps = horizon * p;

    auto maps = env.maps_per_symbol(eps);
    const Interval ij = maps[0].state_interval(j0);

    FiberPath shared_path = sample_path(env.alphabet(), seed, 0, static_cast<long>(max_steps));

    struct Sample {
        std::uint8_t hit = 0;
        std::uint8_t censored = 0;
        std::uint32_t boundary_hits = 0;
        JumpSampleRecord record;
    };
    auto run_one = [&](std::size_t i) -> Sample {
        double x0 = rng::Sequence(seed, rng::kInitialPoint, i).uniform(ij.lo, ij.hi);
        ScanResult res;
        if (opts.annealed) {
            std::uint64_t path_seed = rng::keyed(seed, rng::kReplicaPath, i);
            res = scan_jumps(
                maps,
                [&](long k) { return FiberPath::draw_symbol(env.alphabet(), path_seed, k); },
                x0, p, max_steps);
        } else {
            res = scan_jumps(maps, [&](long k) { return shared_path.symbol_at(k); }, x0, p,
                             max_steps);
        }
        Sample s;
        s.boundary_hits = static_cast<std::uint32_t>(res.boundary_hits);
        if (opts.keep_samples) {
            s.record.holdings = res.trace.holdings;
            s.record.states = res.trace.states;
            s.record.censored = res.censored;
        }
        if (res.censored) {
            s.censored = 1;
            return s;
        }
        bool ok = true;
        for (std::size_t k = 0; k < p && ok; ++k) {
            double scaled = eps * static_cast<double>(res.trace.holdings[k]);
            ok = scaled >= query.deltas[k].lo && scaled <= query.deltas[k].hi &&
                 res.trace.states[k] == query.targets[k];
        }
        s.hit = ok ? 1 : 0;
        return s;
    };

    auto samples = map_indexed<Sample>(n_samples, opts.jobs, run_one);

    EmpiricalJumpDist out;
    if (opts.keep_samples) out.records.reserve(samples.size());
    for (Sample& s : samples) {
        out.censored += s.censored;
        out.hits += s.hit;
        out.boundary_hits += s.boundary_hits;
        if (opts.keep_samples) out.records.push_back(std::move(s.record));
    }
    out.samples = n_samples - out.censored;
    out.wilson = stats::wilson_interval(out.hits, out.samples);
    return out;
}

HoldingLawReport compare_holding_law(const Environment& env, double eps, std::size_t j0,
                                     std::size_t n_samples, const std::vector<double>& t_grid,
                                     std::uint64_t seed, const JumpSamplingOptions& opts) {
    HoldingLawReport report;
    report.t_grid = t_grid;
    if (eps == 0.0) {
        report.degenerate = true;
        return report;
    }
    if (j0 >= env.state_count()) throw std::invalid_argument("invalid start state");

    const std::uint64_t max_steps = static_cast<std::uint64_t>(
        std::ceil(opts.horizon_factor / (eps * env.beta_star())));
    auto maps = env.maps_per_symbol(eps);
    const Interval ij = maps[0].state_interval(j0);
    FiberPath shared_path = sample_path(env.alphabet(), seed, 0, static_cast<long>(max_steps));

    auto run_one = [&](std::size_t i) -> double {
        double x0 = rng::Sequence(seed, rng::kInitialPoint, i).uniform(ij.lo, ij.hi);
        ScanResult res;
        if (opts.annealed) {
            std::uint64_t path_seed = rng::keyed(seed, rng::kReplicaPath, i);
            res = scan_jumps(
                maps,
                [&](long k) { return FiberPath::draw_symbol(env.alphabet(), path_seed, k); },
                x0, 1, max_steps);
        } else {
            res = scan_jumps(maps, [&](long k) { return shared_path.symbol_at(k); }, x0, 1,
                             max_steps);
        }
        if (res.censored) return -1.0;
        return eps * static_cast<double>(res.trace.holdings[0]);
    };

    auto holding = map_indexed<double>(n_samples, opts.jobs, run_one);

    std::vector<double> kept;
    kept.reserve(holding.size());
    for (double h : holding) {
        if (h < 0.0)
            ++report.censored;
        else
            kept.push_back(h);
    }
    std::sort(kept.begin(), kept.end());

    const double rate = -markov::generator(env.averaged_beta())(static_cast<Eigen::Index>(j0),
                                                                static_cast<Eigen::Index>(j0));
    const double n_kept = static_cast<double>(kept.size());
    for (double t : t_grid) {
        auto it = std::upper_bound(kept.begin(), kept.end(), t);
        double survival = static_cast<double>(kept.end() - it) / n_kept;
        double oracle = std::exp(-t * rate);
        report.empirical_survival.push_back(survival);
        report.oracle_survival.push_back(oracle);
        report.sup_distance = std::max(report.sup_distance, std::abs(survival - oracle));
    }
    return report;
}

}  // namespace metastable
