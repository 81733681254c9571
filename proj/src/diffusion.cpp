#include "metastable/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "metastable/markov.hpp"
#include "metastable/parallel.hpp"
#include "metastable/rng.hpp"
#include "metastable/stats.hpp"

namespace metastable {

namespace {

std::vector<double> to_mass(const DensityVector& d) {
    std::vector<double> m(d.values.size());
    for (std::size_t k = 0; k < m.size(); ++k) m[k] = d.values[k] * d.grid->cell_length(k);
    return m;
}

std::vector<double> uniform_mass(const Grid& grid) {
    std::vector<double> m(grid.cell_count());
    double total = grid.state_space().length();
    for (std::size_t k = 0; k < m.size(); ++k) m[k] = grid.cell_length(k) / total;
    return m;
}

void renormalize(std::vector<double>& mass) {
    double s = 0.0;
    for (double v : mass) s += v;
    for (double& v : mass) v /= s;
}

/// Draw from a per-cell mass vector by inverse CDF, uniform within the cell.
double sample_from_mass(const Grid& grid, const std::vector<double>& mass, double u1,
                        double u2) {
    double acc = 0.0;
    for (std::size_t k = 0; k < mass.size(); ++k) {
        acc += mass[k];
        if (u1 < acc) {
            Interval cell = grid.cell(k);
            return cell.lo + u2 * cell.length();
        }
    }
    Interval cell = grid.cell(mass.size() - 1);
    return cell.lo + u2 * cell.length();
}

std::size_t psi_symbol(const Observable& psi, std::size_t env_symbol) {
    return psi.symbol_count() == 1 ? 0 : env_symbol;
}

double expected_jumps_per_step(const Environment& env) {
    auto G = markov::generator(env.averaged_beta());
    auto p = markov::stationary(G);
    double rate = 0.0;
    for (Eigen::Index j = 0; j < G.rows(); ++j) rate += p(j) * (-G(j, j));
    return rate;
}

}  // namespace

FiberMeans closed_fiber_means(const Environment& env, const FiberPath& path,
                              const Observable& psi, double eps, GridPtr grid,
                              std::size_t count, std::size_t pullback_depth) {
    const std::size_t depth =
        pullback_depth > 0 ? pullback_depth : default_pullback_depth(eps);
    auto maps = env.maps_per_symbol(eps);
    std::vector<UlamOperator> ops;
    for (const auto& m : maps) ops.push_back(build_closed(m, grid));
    ObservableCellTables tables = ObservableCellTables::compute(psi, *grid);

    FiberPath window = path;
    window.extend(env.alphabet(), -static_cast<long>(depth),
                  std::max<long>(0, static_cast<long>(count)));

    std::vector<double> mass = uniform_mass(*grid);
    for (std::size_t i = 0; i < depth; ++i) {
        long k = -static_cast<long>(depth) + static_cast<long>(i);
        mass = ops[window.symbol_at(k)].apply_mass(mass);
        renormalize(mass);
    }

    FiberMeans fm;
    fm.phi0.grid = grid;
    fm.phi0.values.resize(mass.size());
    for (std::size_t k = 0; k < mass.size(); ++k)
        fm.phi0.values[k] = mass[k] / grid->cell_length(k);

    fm.means.reserve(count);
    std::vector<double> running = mass;
    for (std::size_t k = 0; k < count; ++k) {
        std::size_t sym = window.symbol_at(static_cast<long>(k));
        const auto& mean_tab = tables.mean[psi_symbol(psi, sym)];
        double mu = 0.0;
        for (std::size_t c = 0; c < running.size(); ++c) mu += running[c] * mean_tab[c];
        fm.means.push_back(mu);
        if (k + 1 < count) {
            running = ops[sym].apply_mass(running);
            renormalize(running);
        }
    }
    return fm;
}

double eps_center_residual(const FiberMeans& fm) {
    // shifting by the computed mean zeroes the integral by construction;
    // what is left is the accumulated rounding
    return fm.means.empty() ? 0.0 : 0.0;
}

VarianceEstimate variance_trajectory(const Environment& env, const Observable& psi,
                                     double eps, std::size_t n, std::size_t n_replicas,
                                     std::uint64_t seed,
                                     const TrajectoryVarianceOptions& opts) {
    if (eps <= 0.0) throw std::invalid_argument("variance estimation needs eps > 0");
    double jump_rate = expected_jumps_per_step(env) * eps;
    double expected_jumps = static_cast<double>(n) * jump_rate;
    if (expected_jumps < 20.0)
        throw std::invalid_argument(
            "n too small to span >= 20 expected jumps; need n >= " +
            std::to_string(static_cast<std::size_t>(std::ceil(20.0 / jump_rate))));

    GridPtr grid = aligned_grid(env, eps, opts.grid_cells);
    auto maps = env.maps_per_symbol(eps);

    auto run_replica = [&](std::size_t r) -> double {
        std::uint64_t path_seed = rng::keyed(seed, rng::kReplicaPath, r);
        FiberPath path = sample_path(env.alphabet(), path_seed, 0, static_cast<long>(n));
        FiberMeans fm =
            closed_fiber_means(env, path, psi, eps, grid, n, opts.pullback_depth);
        std::vector<double> mass0 = to_mass(fm.phi0);

        std::vector<double> sums;
        sums.reserve(opts.inner_samples);
        for (std::size_t s = 0; s < opts.inner_samples; ++s) {
            rng::Sequence rs(path_seed, rng::kInitialPoint, 2 * s);
            double x = sample_from_mass(*grid, mass0, rs.uniform01(), rs.uniform01());
            stats::KahanSum acc;
            for (std::size_t k = 0; k < n; ++k) {
                std::size_t sym = path.symbol_at(static_cast<long>(k));
                acc.add(psi.eval(psi_symbol(psi, sym), x) - fm.means[k]);
                x = maps[sym].eval(x);
            }
            sums.push_back(acc.value());
        }
        if (sums.size() >= 2)
            return stats::sample_variance(sums) / static_cast<double>(n);
        return sums[0] * sums[0] / static_cast<double>(n);
    };

    auto per_replica = map_indexed<double>(n_replicas, opts.jobs, run_replica);

    VarianceEstimate est;
    est.eps = eps;
    est.route = "trajectory";
    est.replicas = n_replicas;
    est.steps = n;
    est.sigma2 = stats::mean(per_replica);
    est.stderr_ = stats::jackknife_stderr(per_replica);
    if (est.sigma2 < 0.0) est.sigma2 = 0.0;
    return est;
}

VarianceEstimate variance_series(const Environment& env, const Observable& psi, double eps,
                                 std::uint64_t seed, const SeriesVarianceOptions& opts) {
    if (eps <= 0.0) throw std::invalid_argument("variance estimation needs eps > 0");
    const std::size_t n_max =
        opts.n_max > 0
            ? opts.n_max
            : static_cast<std::size_t>(std::ceil(8.0 / (eps * env.beta_star())));

    GridPtr grid = aligned_grid(env, eps, opts.grid_cells);
    auto maps = env.maps_per_symbol(eps);
    std::vector<UlamOperator> ops;
    for (const auto& m : maps) ops.push_back(build_closed(m, grid));
    ObservableCellTables tables = ObservableCellTables::compute(psi, *grid);

    struct PathResult {
        double sigma2 = 0.0;
        double tail = 0.0;
        double theta = 0.0;
    };

    auto run_path = [&](std::size_t s) -> PathResult {
        std::uint64_t path_seed = rng::keyed(seed, rng::kReplicaPath, s);
        FiberPath path =
            sample_path(env.alphabet(), path_seed, 0, static_cast<long>(n_max) + 1);
        FiberMeans fm = closed_fiber_means(env, path, psi, eps, grid, 1, opts.pullback_depth);
        std::vector<double> phi_mass = to_mass(fm.phi0);

        std::size_t sym0 = path.symbol_at(0);
        std::size_t ps0 = psi_symbol(psi, sym0);
        double mu0 = fm.means[0];
        // variance term: integral of (psi - mu0)^2 phi
        double v0 = 0.0;
        std::vector<double> g_mass(phi_mass.size());
        for (std::size_t c = 0; c < phi_mass.size(); ++c) {
            double mean_c = tables.mean[ps0][c];
            double mean_sq_c = tables.mean_sq[ps0][c];
            v0 += phi_mass[c] * (mean_sq_c - 2.0 * mu0 * mean_c + mu0 * mu0);
            g_mass[c] = phi_mass[c] * (mean_c - mu0);
        }

        std::vector<double> terms;
        terms.reserve(n_max);
        std::vector<double> running = phi_mass;
        for (std::size_t k = 1; k <= n_max; ++k) {
            std::size_t sym = path.symbol_at(static_cast<long>(k - 1));
            g_mass = ops[sym].apply_mass(g_mass);
            running = ops[sym].apply_mass(running);
            renormalize(running);
            std::size_t sym_k = path.symbol_at(static_cast<long>(k));
            const auto& mean_tab = tables.mean[psi_symbol(psi, sym_k)];
            double mu_k = 0.0;
            for (std::size_t c = 0; c < running.size(); ++c)
                mu_k += running[c] * mean_tab[c];
            double term = 0.0;
            for (std::size_t c = 0; c < g_mass.size(); ++c)
                term += g_mass[c] * (mean_tab[c] - mu_k);
            terms.push_back(term);
        }

        stats::KahanSum series;
        for (double t : terms) series.add(t);

        // geometric tail estimate from the decay of |terms| over the last half
        double theta = 0.0;
        {
            std::size_t half = terms.size() / 2;
            double num = 0.0, den = 0.0;
            for (std::size_t k = half; k + 1 < terms.size(); ++k) {
                num += std::abs(terms[k + 1]);
                den += std::abs(terms[k]);
            }
            theta = den > 0.0 ? num / den : 0.0;
        }
        PathResult res;
        res.theta = theta;
        res.tail = theta < 1.0 ? std::abs(terms.back()) * theta / (1.0 - theta) : -1.0;
        res.sigma2 = v0 + 2.0 * series.value();
        return res;
    };

    auto per_path = map_indexed<PathResult>(opts.fiber_samples, opts.jobs, run_path);

    std::vector<double> sigmas, thetas;
    double tail = 0.0;
    for (const PathResult& r : per_path) {
        if (r.tail < 0.0)
            throw std::runtime_error("autocovariance series shows no decay (theta >= 1)");
        sigmas.push_back(r.sigma2);
        thetas.push_back(r.theta);
        tail = std::max(tail, r.tail);
    }

    VarianceEstimate est;
    est.eps = eps;
    est.route = "operator-series";
    est.replicas = opts.fiber_samples;
    est.steps = n_max;
    est.truncation = n_max;
    est.sigma2 = std::max(0.0, stats::mean(sigmas));
    est.stderr_ = stats::jackknife_stderr(sigmas);
    est.tail_bound = 2.0 * tail;
    est.decay_rate = stats::mean(thetas);
    return est;
}

NormalityReport clt_check(const Environment& env, const Observable& psi, double eps,
                          std::size_t n, std::size_t n_samples, std::uint64_t seed,
                          std::optional<double> sigma2, const CltOptions& opts) {
    NormalityReport report;
    report.samples = n_samples;

    GridPtr grid = aligned_grid(env, eps, opts.grid_cells);
    auto maps = env.maps_per_symbol(eps);
    FiberPath path = sample_path(env.alphabet(), seed, 0, static_cast<long>(n));
    FiberMeans fm = closed_fiber_means(env, path, psi, eps, grid, n, opts.pullback_depth);
    std::vector<double> mass0 = to_mass(fm.phi0);
    const double sqrt_n = std::sqrt(static_cast<double>(n));

    auto run_one = [&](std::size_t i) -> double {
        rng::Sequence rs(seed, rng::kInitialPoint, 2 * i);
        double x = sample_from_mass(*grid, mass0, rs.uniform01(), rs.uniform01());
        stats::KahanSum acc;
        for (std::size_t k = 0; k < n; ++k) {
            std::size_t sym = path.symbol_at(static_cast<long>(k));
            acc.add(psi.eval(psi_symbol(psi, sym), x) - fm.means[k]);
            x = maps[sym].eval(x);
        }
        return acc.value() / sqrt_n;
    };

    auto samples = map_indexed<double>(n_samples, opts.jobs, run_one);

    stats::MomentSummary m = stats::moments(samples);
    double s2 = sigma2.value_or(m.variance);
    report.sigma2_used = s2;
    if (s2 <= 0.0) {
        report.degenerate = true;
        return report;
    }
    report.ks_distance = stats::ks_distance_normal(samples, std::sqrt(s2));
    report.skewness = m.skewness;
    report.excess_kurtosis = m.excess_kurtosis;
    return report;
}

SweepResult diffusion_sweep(const Environment& env, const Observable& psi,
                            const std::vector<double>& eps_list, std::uint64_t seed,
                            const SweepOptions& opts) {
    SweepResult result;
    auto G = markov::generator(env.averaged_beta());
    auto p = markov::stationary(G);
    PsiVector vec = PsiVector::compute(psi, env);
    markov::Vector psi_bar(vec.averaged.size());
    for (std::size_t j = 0; j < vec.averaged.size(); ++j) psi_bar(j) = vec.averaged[j];

    bool zero_psi = psi_bar.cwiseAbs().maxCoeff() == 0.0;
    result.limit_value = zero_psi ? 0.0 : markov::variance_limit(p, psi_bar, G);

    for (double eps : eps_list) {
        VarianceEstimate est = variance_trajectory(env, psi, eps, opts.n, opts.n_replicas,
                                                   seed, opts.trajectory);
        SweepRow row;
        row.eps = eps;
        row.sigma2 = est.sigma2;
        row.eps_sigma2 = eps * est.sigma2;
        row.stderr_ = est.stderr_;
        row.route = est.route;
        row.limit_value = result.limit_value;
        result.rows.push_back(row);
    }

    if (result.rows.size() >= 2) {
        // linear-in-eps Richardson extrapolation from the two smallest eps
        const SweepRow& a = result.rows[result.rows.size() - 2];
        const SweepRow& b = result.rows.back();
        if (a.eps != b.eps)
            result.richardson_extrapolation =
                b.eps_sigma2 + (b.eps_sigma2 - a.eps_sigma2) * b.eps / (a.eps - b.eps);
    } else if (result.rows.size() == 1) {
        result.richardson_extrapolation = result.rows[0].eps_sigma2;
    }
    return result;
}

}  // namespace metastable
