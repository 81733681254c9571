#include "metastable/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <map>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "metastable/diffusion.hpp"
#include "metastable/environment.hpp"
#include "metastable/json_io.hpp"
#include "metastable/jumps.hpp"
#include "metastable/markov.hpp"
#include "metastable/observable.hpp"
#include "metastable/parallel.hpp"
#include "metastable/rng.hpp"
#include "metastable/stats.hpp"
#include "metastable/ulam.hpp"

namespace metastable {
namespace harness {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// ---------------------------------------------------------------- plumbing

class ArtifactWriter {
public:
    explicit ArtifactWriter(std::string root) : root_(std::move(root)) {}

    void write(const std::string& relpath, const std::string& content) {
        fs::path full = fs::path(root_) / relpath;
        fs::create_directories(full.parent_path());
        write_file(full.string(), content);
        hashes_[relpath] = fnv1a64(content);
    }

    const std::map<std::string, std::uint64_t>& hashes() const { return hashes_; }

private:
    std::string root_;
    std::map<std::string, std::uint64_t> hashes_;
};

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& content) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(content);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::string field;
        std::istringstream ls(line);
        while (std::getline(ls, field, ',')) fields.push_back(field);
        rows.push_back(std::move(fields));
    }
    return rows;
}

bool artifact_exists(const std::string& root, const std::string& relpath) {
    return fs::exists(fs::path(root) / relpath);
}

std::string load_artifact(const std::string& root, const std::string& relpath) {
    return read_file((fs::path(root) / relpath).string());
}

// ------------------------------------------------------- shared scenarios

Environment tent_b1_env() { return make_tent_environment({{1.0, 1.0}}, {1.0}); }

Environment tent_two_symbol_env() {
    return make_tent_environment({{1.0, 0.5}, {1.0, 1.5}}, {0.5, 0.5});
}

std::vector<std::vector<double>> m3_beta() {
    return {{0.0, 1.0, 0.0}, {1.0, 0.0, 2.0}, {0.0, 1.0, 0.0}};
}

Environment m3_env() { return make_mwell_environment(3, m3_beta()); }

// ----------------------------------------------------- independent oracles

/// Direct simulation of the averaged Markov jump process (exponential
/// holding times, categorical jump targets).
std::pair<double, double> simulate_jump_chain(const markov::JumpOracle& oracle,
                                              std::size_t j0,
                                              const std::vector<markov::TimeWindow>& deltas,
                                              const std::vector<std::size_t>& targets,
                                              std::size_t n_samples, std::uint64_t seed,
                                              int jobs) {
    const std::size_t p = deltas.size();
    auto run_one = [&](std::size_t i) -> std::uint8_t {
        rng::Sequence rs(seed, rng::kMarkovChain, 2 * p * i);
        std::size_t state = j0;
        for (std::size_t k = 0; k < p; ++k) {
            double r = oracle.exit_rates[state];
            double holding = -std::log(1.0 - rs.uniform01()) / r;
            double u = rs.uniform01();
            std::size_t target = state;
            double acc = 0.0;
            for (std::size_t cand = 0; cand < oracle.target_probs[state].size(); ++cand) {
                acc += oracle.target_probs[state][cand];
                if (u < acc) {
                    target = cand;
                    break;
                }
            }
            if (holding < deltas[k].lo || holding > deltas[k].hi || target != targets[k])
                return 0;
            state = target;
        }
        return 1;
    };
    auto hits = map_indexed<std::uint8_t>(n_samples, jobs, run_one);
    std::size_t total = 0;
    for (std::uint8_t h : hits) total += h;
    double est = static_cast<double>(total) / static_cast<double>(n_samples);
    double se = std::sqrt(est * (1.0 - est) / static_cast<double>(n_samples));
    return {est, se};
}

/// Composite-Simpson quadrature of integral e^{tG} v dt over [0, T] using a
/// powered step matrix; an independent route against fundamental_solve.
markov::Vector quadrature_integral(const markov::Matrix& G, const markov::Vector& v, double T,
                                   std::size_t intervals) {
    if (intervals % 2 == 1) ++intervals;
    const double h = T / static_cast<double>(intervals);
    markov::Matrix step = markov::expm(G, h);
    markov::Matrix power = markov::Matrix::Identity(G.rows(), G.cols());
    markov::Vector sum = markov::Vector::Zero(G.rows());
    for (std::size_t i = 0; i <= intervals; ++i) {
        double w = (i == 0 || i == intervals) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        sum += w * (power * v);
        if (i < intervals) power = power * step;
    }
    return (h / 3.0) * sum;
}

// --------------------------------------------------------------- theorem1

void run_theorem1(const ExperimentConfig& cfg, ArtifactWriter& writer) {
    const Theorem1Params& prm = cfg.theorem1;

    // criterion 1: hole measure against the closed form eps*b/(1+eps*b)
    {
        std::string csv = csv_row({"eps", "measured", "oracle", "abs_err"});
        for (double eps : prm.hole_eps) {
            PiecewiseAffineMap map = paired_tent_build({1.0, 1.0}, eps);
            double measured = map.hole_measure(kStateLeft, kStateRight);
            double oracle = eps * 1.0 / (1.0 + eps * 1.0);
            csv += csv_row({format_double(eps), format_double(measured),
                            format_double(oracle), format_double(std::abs(measured - oracle))});
        }
        writer.write("theorem1/hole_asymptotics.csv", csv);
    }

    // criterion 2: open/closed composition identity
    {
        Environment env = tent_two_symbol_env();
        FiberPath path = sample_path(env.alphabet(), cfg.seed, 0, 8);
        std::string csv = csv_row({"n", "max_discrepancy", "survivor_length", "refined_cells"});
        for (std::size_t n : prm.composition_n) {
            auto report = open_composition_check(env, path, kStateLeft, prm.composition_eps,
                                                 n, prm.composition_cells);
            csv += csv_row({format_double(static_cast<double>(n)),
                            format_double(report.max_discrepancy),
                            format_double(report.survivor_length),
                            format_double(static_cast<double>(report.refined_cells))});
        }
        writer.write("theorem1/composition.csv", csv);
    }

    // criterion 3: multiplier expansion (1 - lambda)/eps -> beta sum
    {
        Environment env = tent_b1_env();
        FiberPath path = sample_path(env.alphabet(), cfg.seed, 0, 1);
        std::string csv = csv_row({"eps", "lambda_hat", "ratio", "abs_err", "decay_rate"});
        for (double eps : prm.lambda_eps) {
            GridPtr grid = aligned_grid(env, eps, prm.lambda_cells);
            SpectralTriple triple = equivariant_triple(env, path, kStateLeft, eps, grid);
            double lambda = triple.lambda_seq.back();
            double ratio = (1.0 - lambda) / eps;
            csv += csv_row({format_double(eps), format_double(lambda), format_double(ratio),
                            format_double(std::abs(ratio - 1.0)),
                            format_double(triple.residual_decay)});
        }
        writer.write("theorem1/lambda.csv", csv);
    }

    // criterion 4: Birkhoff window product against e^{-t * averaged rate}
    {
        Environment env = tent_two_symbol_env();
        FiberPath path = sample_path(env.alphabet(), cfg.seed, 0, 1);
        GridPtr grid = aligned_grid(env, prm.birkhoff_eps, prm.birkhoff_cells);
        double product = lambda_window_product(env, path, kStateLeft, prm.birkhoff_eps,
                                               prm.birkhoff_t, grid);
        double target = std::exp(-prm.birkhoff_t * 1.0);  // averaged b = 1
        std::string csv = csv_row({"eps", "t", "product", "target", "rel_err"});
        csv += csv_row({format_double(prm.birkhoff_eps), format_double(prm.birkhoff_t),
                        format_double(product), format_double(target),
                        format_double(std::abs(product - target) / target)});
        writer.write("theorem1/birkhoff.csv", csv);
    }
}

std::vector<Verdict> judge_theorem1(const std::string& root) {
    std::vector<Verdict> out;

    {
        Verdict v{1, "hole asymptotics (closed-form oracle)", VerdictStatus::skipped, ""};
        if (artifact_exists(root, "theorem1/hole_asymptotics.csv")) {
            auto rows = parse_csv(load_artifact(root, "theorem1/hole_asymptotics.csv"));
            bool pass = rows.size() > 1;
            double worst = 0.0;
            for (std::size_t i = 1; i < rows.size(); ++i) {
                double eps = std::stod(rows[i][0]);
                double measured = std::stod(rows[i][1]);
                double err = std::stod(rows[i][3]);
                worst = std::max(worst, err);
                if (err > 1e-12) pass = false;
                if (std::abs(measured / eps - 1.0) > eps) pass = false;
            }
            v.status = pass ? VerdictStatus::pass : VerdictStatus::fail;
            v.detail = "max |mu - eps*b/(1+eps*b)| = " + format_double(worst) + " (tol 1e-12)";
        }
        out.push_back(v);
    }

    {
        Verdict v{2, "open/closed composition identity", VerdictStatus::skipped, ""};
        if (artifact_exists(root, "theorem1/composition.csv")) {
            auto rows = parse_csv(load_artifact(root, "theorem1/composition.csv"));
            bool pass = rows.size() > 1;
            double worst = 0.0;
            for (std::size_t i = 1; i < rows.size(); ++i)
                worst = std::max(worst, std::stod(rows[i][1]));
            if (worst > 1e-12) pass = false;
            v.status = pass ? VerdictStatus::pass : VerdictStatus::fail;
            v.detail = "max entrywise discrepancy = " + format_double(worst) + " (tol 1e-12)";
        }
        out.push_back(v);
    }

    {
        Verdict v{3, "multiplier expansion (1-lambda)/eps", VerdictStatus::skipped, ""};
        if (artifact_exists(root, "theorem1/lambda.csv")) {
            auto rows = parse_csv(load_artifact(root, "theorem1/lambda.csv"));
            bool pass = rows.size() > 1;
            std::string detail;
            double prev_err = -1.0;
            for (std::size_t i = 1; i < rows.size(); ++i) {
                double ratio = std::stod(rows[i][2]);
                double err = std::stod(rows[i][3]);
                if (ratio < 0.95 || ratio > 1.05) pass = false;
                if (prev_err >= 0.0 && err > prev_err) pass = false;
                prev_err = err;
                if (!detail.empty()) detail += ", ";
                detail += "ratio(" + rows[i][0] + ")=" + format_double(ratio);
            }
            v.status = pass ? VerdictStatus::pass : VerdictStatus::fail;
            v.detail = detail + " (band [0.95,1.05], errors non-increasing)";
        }
        out.push_back(v);
    }

    {
        Verdict v{4, "Birkhoff window product vs e^{-t}", VerdictStatus::skipped, ""};
        if (artifact_exists(root, "theorem1/birkhoff.csv")) {
            auto rows = parse_csv(load_artifact(root, "theorem1/birkhoff.csv"));
            bool pass = rows.size() == 2;
            double rel = pass ? std::stod(rows[1][4]) : 1.0;
            if (rel > 0.05) pass = false;
            v.status = pass ? VerdictStatus::pass : VerdictStatus::fail;
            v.detail = "relative error = " + format_double(rel) + " (tol 0.05)";
        }
        out.push_back(v);
    }
    return out;
}

// ------------------------------------------------------------------ jumps

void run_jumps(const ExperimentConfig& cfg, ArtifactWriter& writer) {
    const JumpsParams& prm = cfg.jumps;

    // criterion 5: holding-time law
    {
        Environment env = tent_b1_env();
        std::vector<double> t_grid;
        for (double t = prm.holding_t_step; t <= prm.holding_t_max + 1e-12;
             t += prm.holding_t_step)
            t_grid.push_back(t);
        JumpSamplingOptions opts;
        opts.jobs = cfg.jobs;
        auto report = compare_holding_law(env, prm.holding_eps, kStateLeft,
                                          prm.holding_samples, t_grid, cfg.seed, opts);
        std::string csv = csv_row({"t", "empirical_survival", "oracle_survival"});
        for (std::size_t i = 0; i < report.t_grid.size(); ++i)
            csv += csv_row({format_double(report.t_grid[i]),
                            format_double(report.empirical_survival[i]),
                            format_double(report.oracle_survival[i])});
        writer.write("jumps/holding_law.csv", csv);
        json summary = {{"eps", prm.holding_eps},
                        {"n_samples", prm.holding_samples},
                        {"censored", report.censored},
                        {"sup_distance", report.sup_distance}};
        writer.write("jumps/holding_summary.json", summary.dump(2) + "\n");
    }

    // criterion 6: joint two-jump law on the three-well testbed
    {
        Environment env = m3_env();
        JumpQuery query;
        query.deltas = {{0.0, 1.0}, {0.0, 0.5}};
        query.targets = {2, 1};  // wells 3 then 2, 0-based
        JumpSamplingOptions opts;
        opts.jobs = cfg.jobs;
        opts.keep_samples = true;
        auto dist = jump_distribution(env, prm.twojump_eps, 1, prm.twojump_samples, query,
                                      cfg.seed, opts);

        auto G = markov::generator(env.averaged_beta());
        auto oracle = markov::JumpOracle::from_generator(G);
        double closed_form = markov::jump_path_probability(oracle, 1, query.deltas,
                                                           query.targets);
        auto [chain_est, chain_se] = simulate_jump_chain(
            oracle, 1, query.deltas, query.targets, prm.chain_samples, cfg.seed, cfg.jobs);

        std::string csv = csv_row({"sample_id", "t_1", "t_2", "z_1", "z_2", "censored"});
        for (std::size_t i = 0; i < dist.records.size(); ++i) {
            const JumpSampleRecord& r = dist.records[i];
            auto field = [&](std::size_t k, bool state) -> std::string {
                if (k >= r.holdings.size()) return "";
                if (state) return std::to_string(r.states[k] + 1);
                std::uint64_t t = 0;
                for (std::size_t q = 0; q <= k; ++q) t += r.holdings[q];
                return std::to_string(t);
            };
            csv += csv_row({std::to_string(i), field(0, false), field(1, false),
                            field(0, true), field(1, true), r.censored ? "1" : "0"});
        }
        writer.write("jumps/two_jump_samples.csv", csv);

        json summary = {
            {"query",
             {{"j0", 2},
              {"deltas", {{0.0, 1.0}, {0.0, 0.5}}},
              {"targets", {3, 2}}}},  // 1-based in artifacts
            {"eps", prm.twojump_eps},
            {"n_samples", prm.twojump_samples},
            {"censored", dist.censored},
            {"estimate", dist.wilson.estimate},
            {"wilson_lo", dist.wilson.lo},
            {"wilson_hi", dist.wilson.hi},
            {"oracle_value", closed_form},
            {"chain_value", chain_est},
            {"chain_se", chain_se},
        };
        writer.write("jumps/two_jump_summary.json", summary.dump(2) + "\n");
    }
}

std::vector<Verdict> judge_jumps(const std::string& root) {
    std::vector<Verdict> out;

    {
        Verdict v{5, "holding-time law sup distance", VerdictStatus::skipped, ""};
        if (artifact_exists(root, "jumps/holding_summary.json")) {
            json j = json::parse(load_artifact(root, "jumps/holding_summary.json"));
            double sup = j.at("sup_distance").get<double>();
            v.status = sup <= 0.02 ? VerdictStatus::pass : VerdictStatus::fail;
            v.detail = "sup |P(eps*T > t) - e^{-t}| = " + format_double(sup) + " (tol 0.02)";
        }
        out.push_back(v);
    }

    {
        Verdict v{6, "joint two-jump law vs oracle product", VerdictStatus::skipped, ""};
        if (artifact_exists(root, "jumps/two_jump_summary.json")) {
            json j = json::parse(load_artifact(root, "jumps/two_jump_summary.json"));
            double oracle = j.at("oracle_value").get<double>();
            double lo = j.at("wilson_lo").get<double>();
            double hi = j.at("wilson_hi").get<double>();
            double chain = j.at("chain_value").get<double>();
            bool in_interval = oracle >= lo && oracle <= hi;
            bool chain_ok = std::abs(chain - oracle) <= 0.002;
            v.status = (in_interval && chain_ok) ? VerdictStatus::pass : VerdictStatus::fail;
            v.detail = "oracle " + format_double(oracle) + " in [" + format_double(lo) + ", " +
                       format_double(hi) + "]; chain " + format_double(chain) +
                       " (cross-check tol 0.002)";
        }
        out.push_back(v);
    }
    return out;
}

// ----------------------------------------------------------------- oracle

void run_oracle(const ExperimentConfig& cfg, ArtifactWriter& writer) {
    (void)cfg;
    std::string csv = csv_row({"check", "value", "threshold"});

    // semigroup defect and stationarity on both testbed generators
    double semigroup = 0.0;
    double stat_residual = 0.0;
    double flow_defect = 0.0;
    {
        std::vector<markov::Matrix> gens = {
            markov::generator({{0.0, 0.7}, {1.3, 0.0}}),
            markov::generator(m3_beta()),
        };
        const double times[4] = {0.5, 1.7, 3.3, 7.9};
        for (const auto& G : gens) {
            for (double s : times)
                for (double t : times) {
                    markov::Matrix lhs = markov::expm(G, s + t);
                    markov::Matrix rhs = markov::expm(G, s) * markov::expm(G, t);
                    semigroup = std::max(semigroup, (lhs - rhs).cwiseAbs().maxCoeff());
                }
            auto p = markov::stationary(G);
            stat_residual = std::max(stat_residual, markov::stationary_residual(G, p));
            for (double t : times) {
                markov::Matrix P = markov::expm(G, t);
                flow_defect = std::max(
                    flow_defect, ((p.transpose() * P).transpose() - p).cwiseAbs().maxCoeff());
            }
        }
    }
    csv += csv_row({"semigroup_defect", format_double(semigroup), format_double(1e-10)});
    csv += csv_row({"stationary_residual", format_double(stat_residual), format_double(1e-12)});
    csv += csv_row({"stationary_flow_defect", format_double(flow_defect), format_double(1e-10)});

    // fundamental_solve against the quadrature oracle
    double quad_err = 0.0;
    {
        struct Case {
            markov::Matrix G;
            markov::Vector v;
        };
        std::vector<Case> cases;
        {
            markov::Matrix G = markov::generator({{0.0, 0.7}, {1.3, 0.0}});
            auto p = markov::stationary(G);
            markov::Vector v(2);
            v << 1.0, -p(0) / p(1);  // centered by construction
            cases.push_back({G, v});
        }
        {
            markov::Matrix G = markov::generator(m3_beta());
            auto p = markov::stationary(G);
            markov::Vector v(3);
            v << 1.0, -2.0, (2.0 * p(1) - p(0)) / p(2);
            cases.push_back({G, v});
        }
        for (const auto& c : cases) {
            markov::Vector x = markov::fundamental_solve(c.G, c.v);
            markov::Vector q = quadrature_integral(c.G, c.v, 20.0, 16000);
            quad_err = std::max(quad_err, (x - q).cwiseAbs().maxCoeff());
        }
    }
    csv += csv_row({"fundamental_vs_quadrature", format_double(quad_err), format_double(1e-8)});

    // variance_limit against the tent closed form on a 5-point grid
    double limit_err = 0.0;
    {
        const double grid_pts[5][2] = {
            {1.0, 1.0}, {2.0, 1.0}, {1.0, 2.0}, {0.5, 1.5}, {1.3, 0.7}};
        for (const auto& ab : grid_pts) {
            double a_bar = ab[0], b_bar = ab[1];
            markov::Matrix G = markov::generator({{0.0, b_bar}, {a_bar, 0.0}});
            auto p = markov::stationary(G);
            double psi_r = 1.0;
            markov::Vector psi_bar(2);
            psi_bar << -(b_bar / a_bar) * psi_r, psi_r;  // tent centering
            double lhs = markov::variance_limit(p, psi_bar, G);
            double rhs = markov::tent_variance_limit(a_bar, b_bar, psi_r);
            limit_err = std::max(limit_err, std::abs(lhs - rhs));
        }
    }
    csv += csv_row({"variance_limit_vs_closed_form", format_double(limit_err),
                    format_double(1e-10)});
    writer.write("oracle/checks.csv", csv);

    // oracle bundle for the three-well testbed with resolved queries
    {
        Environment env = m3_env();
        auto G = markov::generator(env.averaged_beta());
        auto oracle = markov::JumpOracle::from_generator(G);
        std::vector<OracleQueryRecord> queries;
        OracleQueryRecord q1{1, {{0.0, markov::kInf}}, {2}, 0.0};
        q1.prob = markov::jump_path_probability(oracle, q1.j0, q1.deltas, q1.targets);
        OracleQueryRecord q2{1, {{0.0, 1.0}, {0.0, 0.5}}, {2, 1}, 0.0};
        q2.prob = markov::jump_path_probability(oracle, q2.j0, q2.deltas, q2.targets);
        queries.push_back(q1);
        queries.push_back(q2);
        writer.write("oracle/oracle.json", oracle_to_json(oracle, queries).dump(2) + "\n");
    }
}

std::vector<Verdict> judge_oracle(const std::string& root) {
    std::vector<Verdict> out;
    Verdict v{7, "Markov oracle exactness", VerdictStatus::skipped, ""};
    if (artifact_exists(root, "oracle/checks.csv")) {
        auto rows = parse_csv(load_artifact(root, "oracle/checks.csv"));
        bool pass = rows.size() > 1;
        std::string detail;
        for (std::size_t i = 1; i < rows.size(); ++i) {
            double value = std::stod(rows[i][1]);
            double threshold = std::stod(rows[i][2]);
            if (!(value <= threshold)) pass = false;
            if (!detail.empty()) detail += ", ";
            detail += rows[i][0] + "=" + format_double(value);
        }
        v.status = pass ? VerdictStatus::pass : VerdictStatus::fail;
        v.detail = detail;
    }
    out.push_back(v);
    return out;
}

// -------------------------------------------------------------- diffusion

void run_diffusion(const ExperimentConfig& cfg, ArtifactWriter& writer) {
    const DiffusionParams& prm = cfg.diffusion;
    Environment env = tent_b1_env();

    auto G = markov::generator(env.averaged_beta());
    auto p_stat = markov::stationary(G);
    std::vector<double> p_vec(p_stat.data(), p_stat.data() + p_stat.size());

    Observable psi = center_fibrewise(make_step_observable(env, {-1.0, 1.0}), p_vec, env);

    SweepOptions sweep_opts;
    sweep_opts.n = prm.n;
    sweep_opts.n_replicas = prm.replicas;
    sweep_opts.trajectory.inner_samples = prm.inner_samples;
    sweep_opts.trajectory.grid_cells = prm.means_cells;
    sweep_opts.trajectory.jobs = cfg.jobs;
    SweepResult sweep = diffusion_sweep(env, psi, prm.eps_sweep, cfg.seed, sweep_opts);

    std::string csv = csv_row({"eps", "sigma2", "eps_sigma2", "stderr", "route", "limit_value"});
    for (const SweepRow& row : sweep.rows)
        csv += csv_row({format_double(row.eps), format_double(row.sigma2),
                        format_double(row.eps_sigma2), format_double(row.stderr_), row.route,
                        format_double(row.limit_value)});
    writer.write("diffusion/sweep.csv", csv);

    SeriesVarianceOptions series_opts;
    series_opts.fiber_samples = prm.series_paths;
    series_opts.grid_cells = prm.series_cells;
    series_opts.jobs = cfg.jobs;
    VarianceEstimate series = variance_series(env, psi, prm.series_eps, cfg.seed, series_opts);
    json series_json = {{"eps", series.eps},
                        {"sigma2", series.sigma2},
                        {"stderr", series.stderr_},
                        {"tail_bound", series.tail_bound},
                        {"decay_rate", series.decay_rate},
                        {"truncation", series.truncation},
                        {"route", series.route}};
    writer.write("diffusion/series.json", series_json.dump(2) + "\n");

    double sigma2_at_clt_eps = 0.0;
    for (const SweepRow& row : sweep.rows)
        if (row.eps == prm.clt_eps) sigma2_at_clt_eps = row.sigma2;
    CltOptions clt_opts;
    clt_opts.grid_cells = prm.means_cells;
    clt_opts.jobs = cfg.jobs;
    NormalityReport clt =
        clt_check(env, psi, prm.clt_eps, prm.clt_n, prm.clt_samples, cfg.seed,
                  sigma2_at_clt_eps > 0.0 ? std::optional<double>(sigma2_at_clt_eps)
                                          : std::nullopt,
                  clt_opts);
    json clt_json = {{"eps", prm.clt_eps},
                     {"n", prm.clt_n},
                     {"samples", prm.clt_samples},
                     {"ks_distance", clt.ks_distance},
                     {"skewness", clt.skewness},
                     {"excess_kurtosis", clt.excess_kurtosis},
                     {"sigma2_used", clt.sigma2_used},
                     {"degenerate", clt.degenerate}};
    writer.write("diffusion/clt.json", clt_json.dump(2) + "\n");

    json meta = {{"seed", cfg.seed},
                 {"limit_value", sweep.limit_value},
                 {"richardson", sweep.richardson_extrapolation},
                 {"means_cells", prm.means_cells},
                 {"series_cells", prm.series_cells},
                 {"n", prm.n},
                 {"replicas", prm.replicas},
                 {"inner_samples", prm.inner_samples}};
    writer.write("diffusion/meta.json", meta.dump(2) + "\n");
}

std::vector<Verdict> judge_diffusion(const std::string& root) {
    std::vector<Verdict> out;

    {
        Verdict v{8, "diffusion limit eps*Sigma^2 -> closed form", VerdictStatus::skipped, ""};
        if (artifact_exists(root, "diffusion/sweep.csv") &&
            artifact_exists(root, "diffusion/series.json")) {
            auto rows = parse_csv(load_artifact(root, "diffusion/sweep.csv"));
            json series = json::parse(load_artifact(root, "diffusion/series.json"));
            bool pass = rows.size() > 1;
            std::string detail;

            struct Row {
                double eps, sigma2, eps_sigma2, se, limit;
            };
            std::vector<Row> data;
            for (std::size_t i = 1; i < rows.size(); ++i)
                data.push_back({std::stod(rows[i][0]), std::stod(rows[i][1]),
                                std::stod(rows[i][2]), std::stod(rows[i][3]),
                                std::stod(rows[i][5])});

            // anchor tolerance at eps = 0.02
            double anchor_err = -1.0;
            for (const Row& r : data)
                if (r.eps == 0.02) {
                    anchor_err = std::abs(r.eps_sigma2 - r.limit) / r.limit;
                    if (anchor_err > 0.15) pass = false;
                    double series_eps = series.at("eps").get<double>();
                    if (series_eps == r.eps) {
                        double s2 = series.at("sigma2").get<double>();
                        double se = series.at("stderr").get<double>();
                        double tail = series.at("tail_bound").get<double>();
                        double combined = 1.96 * (r.se + se) + tail;
                        if (std::abs(s2 - r.sigma2) > combined) pass = false;
                        detail += "route gap " + format_double(std::abs(s2 - r.sigma2)) +
                                  " (allowed " + format_double(combined) + "); ";
                    }
                }
            if (anchor_err < 0.0) pass = false;
            detail += "|eps*Sigma^2 - limit|/limit at 0.02 = " + format_double(anchor_err) +
                      " (tol 0.15)";

            // trend: |eps*Sigma^2 - limit| non-increasing within error bars
            for (std::size_t i = 0; i + 1 < data.size(); ++i) {
                double err_big = std::abs(data[i].eps_sigma2 - data[i].limit);
                double err_small = std::abs(data[i + 1].eps_sigma2 - data[i + 1].limit);
                double slack =
                    1.96 * (data[i].eps * data[i].se + data[i + 1].eps * data[i + 1].se);
                if (err_small > err_big + slack) pass = false;
            }
            v.status = pass ? VerdictStatus::pass : VerdictStatus::fail;
            v.detail = detail;
        }
        out.push_back(v);
    }

    {
        Verdict v{9, "quenched CLT shape (KS distance)", VerdictStatus::skipped, ""};
        if (artifact_exists(root, "diffusion/clt.json")) {
            json j = json::parse(load_artifact(root, "diffusion/clt.json"));
            double ks = j.at("ks_distance").get<double>();
            bool degenerate = j.at("degenerate").get<bool>();
            v.status = (!degenerate && ks <= 0.02) ? VerdictStatus::pass : VerdictStatus::fail;
            v.detail = "KS = " + format_double(ks) + " (tol 0.02), skewness " +
                       format_double(j.at("skewness").get<double>());
        }
        out.push_back(v);
    }
    return out;
}

// ------------------------------------------------------------- properties

struct SuiteResult {
    std::string name;
    std::size_t cases = 0;
    std::size_t failures = 0;
};

SuiteResult property_row_stochastic(std::size_t cases, std::uint64_t seed, int jobs) {
    auto run_one = [&](std::size_t i) -> std::uint8_t {
        rng::Sequence rs(seed, rng::kPropertyCases, 16 * i);
        double a = 0.05 + 0.95 * rs.uniform01();
        double b = 0.05 + 0.95 * rs.uniform01();
        double eps = 0.25 * rs.uniform01();
        PiecewiseAffineMap map = paired_tent_build({a, b}, eps);
        GridPtr grid = make_grid(map.state_space(), 128 + static_cast<std::size_t>(rs.uniform01() * 128),
                                 map.alignment_points());
        UlamOperator closed = build_closed(map, grid);
        for (std::size_t k = 0; k < closed.size(); ++k)
            if (std::abs(closed.row_sum(k) - 1.0) > 1e-12) return 1;
        return 0;
    };
    auto fails = map_indexed<std::uint8_t>(cases, jobs, run_one);
    SuiteResult r{"row_stochasticity", cases, 0};
    for (auto f : fails) r.failures += f;
    return r;
}

SuiteResult property_substochastic_order(std::size_t cases, std::uint64_t seed, int jobs) {
    auto run_one = [&](std::size_t i) -> std::uint8_t {
        rng::Sequence rs(seed, rng::kPropertyCases, 16 * i + 1);
        double a = 0.05 + 0.95 * rs.uniform01();
        double b = 0.05 + 0.95 * rs.uniform01();
        double eps = 0.001 + 0.249 * rs.uniform01();
        PiecewiseAffineMap map = paired_tent_build({a, b}, eps);
        GridPtr grid = make_grid(map.state_space(), 200, map.alignment_points());
        UlamOperator closed = build_closed(map, grid);
        std::size_t j = rs.uniform01() < 0.5 ? kStateLeft : kStateRight;
        UlamOperator open = build_open(map, j, grid);
        std::vector<double> dense(grid->cell_count(), 0.0);
        for (std::size_t k = 0; k < open.size(); ++k) {
            for (const auto& [l, v] : closed.row(k)) dense[l] = v;
            for (const auto& [l, v] : open.row(k))
                if (v > dense[l] + 1e-14) return 1;
            for (const auto& [l, v] : closed.row(k)) dense[l] = 0.0;
        }
        // deficiency equals the exact escaping Lebesgue mass
        double leb_holes = total_length(normalize(map.holes_from(j)));
        if (std::abs(open.deficiency_mass() - leb_holes) > 1e-12) return 1;
        // Lebesgue hole bounds: beta*/2 * eps <= Leb <= 2 max-beta * eps
        double beta_j = (j == kStateLeft) ? b : a;
        if (leb_holes < 0.5 * 0.05 * eps || leb_holes > 2.0 * std::max(a, b) * eps) return 1;
        (void)beta_j;
        return 0;
    };
    auto fails = map_indexed<std::uint8_t>(cases, jobs, run_one);
    SuiteResult r{"substochastic_ordering", cases, 0};
    for (auto f : fails) r.failures += f;
    return r;
}

SuiteResult property_neighbour_transitions(std::size_t cases, std::uint64_t seed, int jobs) {
    auto run_one = [&](std::size_t i) -> std::uint8_t {
        rng::Sequence rs(seed, rng::kPropertyCases, 16 * i + 2);
        std::size_t m = 3 + static_cast<std::size_t>(rs.uniform01() * 3.0);
        std::vector<std::vector<double>> beta(m, std::vector<double>(m, 0.0));
        for (std::size_t w = 0; w < m; ++w) {
            if (w > 0) beta[w][w - 1] = 0.2 + 1.8 * rs.uniform01();
            if (w + 1 < m) beta[w][w + 1] = 0.2 + 1.8 * rs.uniform01();
        }
        Environment env = make_mwell_environment(m, beta);
        double eps = 0.005 + 0.02 * rs.uniform01();
        FiberPath path = sample_path(env.alphabet(), rs.bits(), 0, 4000);
        double x0 = env.state_space().lo +
                    env.state_space().length() * (0.01 + 0.98 * rs.uniform01());
        Trajectory traj = simulate(env, path, eps, x0, 4000);
        JumpTrace trace = extract_jumps(traj);
        std::size_t prev = traj.labels[0];
        for (std::size_t k = 0; k < trace.states.size(); ++k) {
            std::size_t next = trace.states[k];
            if (next + 1 != prev && prev + 1 != next) return 1;
            if (trace.holdings[k] < 1) return 1;
            prev = next;
        }
        return 0;
    };
    auto fails = map_indexed<std::uint8_t>(cases, jobs, run_one);
    SuiteResult r{"neighbour_transitions", cases, 0};
    for (auto f : fails) r.failures += f;
    return r;
}

SuiteResult property_centering_idempotent(std::size_t cases, std::uint64_t seed, int jobs) {
    auto run_one = [&](std::size_t i) -> std::uint8_t {
        rng::Sequence rs(seed, rng::kPropertyCases, 16 * i + 3);
        double a = 0.05 + 0.95 * rs.uniform01();
        double b = 0.05 + 0.95 * rs.uniform01();
        Environment env = make_tent_environment({{a, b}}, {1.0});
        std::vector<PolyPiece> table;
        PolyPiece left{{-1.0, 0.0},
                       {rs.uniform(-2, 2), rs.uniform(-2, 2), rs.uniform(-1, 1),
                        rs.uniform(-1, 1)}};
        PolyPiece right{{0.0, 1.0},
                        {rs.uniform(-2, 2), rs.uniform(-2, 2), rs.uniform(-1, 1),
                         rs.uniform(-1, 1)}};
        table.push_back(left);
        table.push_back(right);
        Observable psi({table}, 8.0, 16.0);
        auto G = markov::generator(env.averaged_beta());
        auto p = markov::stationary(G);
        std::vector<double> p_vec(p.data(), p.data() + p.size());
        Observable once = center_fibrewise(psi, p_vec, env);
        Observable twice = center_fibrewise(once, p_vec, env);
        PsiVector v1 = PsiVector::compute(once, env);
        PsiVector v2 = PsiVector::compute(twice, env);
        double centered = 0.0;
        for (std::size_t j = 0; j < p_vec.size(); ++j)
            centered += p_vec[j] * v1.averaged[j];
        if (std::abs(centered) > 1e-12) return 1;
        for (std::size_t j = 0; j < p_vec.size(); ++j)
            if (std::abs(v1.averaged[j] - v2.averaged[j]) > 1e-13) return 1;
        return 0;
    };
    auto fails = map_indexed<std::uint8_t>(cases, jobs, run_one);
    SuiteResult r{"centering_idempotence", cases, 0};
    for (auto f : fails) r.failures += f;
    return r;
}

SuiteResult property_determinism(std::size_t cases, std::uint64_t seed, int jobs) {
    auto run_one = [&](std::size_t i) -> std::uint8_t {
        rng::Sequence rs(seed, rng::kPropertyCases, 16 * i + 4);
        std::uint64_t s = rs.bits();
        Environment env = make_tent_environment({{1.0, 0.5}, {1.0, 1.5}}, {0.5, 0.5});
        // path regeneration and window extension determinism
        FiberPath p1 = sample_path(env.alphabet(), s, -50, 50);
        FiberPath p2 = sample_path(env.alphabet(), s, -10, 10);
        p2.extend(env.alphabet(), -50, 50);
        for (long k = -50; k <= 50; ++k)
            if (p1.symbol_at(k) != p2.symbol_at(k)) return 1;
        // identical (seed, config) -> identical trajectories, bit for bit
        double eps = 0.01 + 0.1 * rs.uniform01();
        double x0 = rs.uniform(-1.0, 1.0);
        Trajectory t1 = simulate(env, p1, eps, x0, 500);
        Trajectory t2 = simulate(env, p1, eps, x0, 500);
        if (t1.labels != t2.labels) return 1;
        // jump-trace reconstruction round trip
        JumpTrace trace = extract_jumps(t1);
        std::vector<std::uint8_t> labels(t1.labels.size(), t1.labels[0]);
        for (std::size_t q = 0; q < trace.times.size(); ++q) {
            std::size_t from = trace.times[q];
            std::size_t to = q + 1 < trace.times.size()
                                 ? static_cast<std::size_t>(trace.times[q + 1])
                                 : labels.size();
            for (std::size_t pos = from; pos < to; ++pos)
                labels[pos] = static_cast<std::uint8_t>(trace.states[q]);
        }
        if (labels != t1.labels) return 1;
        JumpTrace again = extract_jumps(Trajectory{x0, eps, labels, 0});
        if (again.times != trace.times || again.states != trace.states ||
            again.holdings != trace.holdings)
            return 1;
        return 0;
    };
    auto fails = map_indexed<std::uint8_t>(cases, jobs, run_one);
    SuiteResult r{"determinism_roundtrips", cases, 0};
    for (auto f : fails) r.failures += f;
    return r;
}

void run_properties(const ExperimentConfig& cfg, ArtifactWriter& writer) {
    const std::size_t cases = cfg.properties.cases;
    std::vector<SuiteResult> suites = {
        property_row_stochastic(cases, cfg.seed, cfg.jobs),
        property_substochastic_order(cases, cfg.seed, cfg.jobs),
        property_neighbour_transitions(cases, cfg.seed, cfg.jobs),
        property_centering_idempotent(cases, cfg.seed, cfg.jobs),
        property_determinism(cases, cfg.seed, cfg.jobs),
    };
    std::string csv = csv_row({"suite", "cases", "failures"});
    for (const SuiteResult& s : suites)
        csv += csv_row({s.name, std::to_string(s.cases), std::to_string(s.failures)});
    writer.write("properties/properties.csv", csv);
}

std::vector<Verdict> judge_properties(const std::string& root) {
    std::vector<Verdict> out;
    Verdict v{10, "module invariant property suites", VerdictStatus::skipped, ""};
    if (artifact_exists(root, "properties/properties.csv")) {
        auto rows = parse_csv(load_artifact(root, "properties/properties.csv"));
        bool pass = rows.size() > 1;
        std::string detail;
        for (std::size_t i = 1; i < rows.size(); ++i) {
            if (std::stoul(rows[i][2]) != 0) pass = false;
            if (!detail.empty()) detail += ", ";
            detail += rows[i][0] + ":" + rows[i][2] + "/" + rows[i][1];
        }
        v.status = pass ? VerdictStatus::pass : VerdictStatus::fail;
        v.detail = detail + " (failures/cases)";
    }
    out.push_back(v);
    return out;
}

// ------------------------------------------------------------ dispatching

const std::vector<std::string> kScenarios = {"theorem1", "jumps", "oracle", "diffusion",
                                             "properties"};

std::vector<std::string> selected_scenarios(const std::string& name) {
    if (name == "all") return kScenarios;
    for (const std::string& s : kScenarios)
        if (s == name) return {s};
    throw std::invalid_argument("unknown scenario: " + name);
}

void run_scenario(const std::string& name, const ExperimentConfig& cfg,
                  ArtifactWriter& writer) {
    if (name == "theorem1")
        run_theorem1(cfg, writer);
    else if (name == "jumps")
        run_jumps(cfg, writer);
    else if (name == "oracle")
        run_oracle(cfg, writer);
    else if (name == "diffusion")
        run_diffusion(cfg, writer);
    else if (name == "properties")
        run_properties(cfg, writer);
}

std::vector<Verdict> judge_scenario(const std::string& name, const std::string& root) {
    if (name == "theorem1") return judge_theorem1(root);
    if (name == "jumps") return judge_jumps(root);
    if (name == "oracle") return judge_oracle(root);
    if (name == "diffusion") return judge_diffusion(root);
    if (name == "properties") return judge_properties(root);
    return {};
}

}  // namespace

// ------------------------------------------------------------------ config

json config_to_json(const ExperimentConfig& cfg) {
    json j;
    j["schema_version"] = cfg.schema_version;
    j["scenario"] = cfg.scenario;
    j["seed"] = cfg.seed;
    j["out_dir"] = cfg.out_dir;
    j["jobs"] = cfg.jobs;
    j["theorem1"] = {{"hole_eps", cfg.theorem1.hole_eps},
                     {"composition_eps", cfg.theorem1.composition_eps},
                     {"composition_n", cfg.theorem1.composition_n},
                     {"composition_cells", cfg.theorem1.composition_cells},
                     {"lambda_eps", cfg.theorem1.lambda_eps},
                     {"lambda_cells", cfg.theorem1.lambda_cells},
                     {"birkhoff_eps", cfg.theorem1.birkhoff_eps},
                     {"birkhoff_t", cfg.theorem1.birkhoff_t},
                     {"birkhoff_cells", cfg.theorem1.birkhoff_cells}};
    j["jumps"] = {{"holding_eps", cfg.jumps.holding_eps},
                  {"holding_samples", cfg.jumps.holding_samples},
                  {"holding_t_max", cfg.jumps.holding_t_max},
                  {"holding_t_step", cfg.jumps.holding_t_step},
                  {"twojump_eps", cfg.jumps.twojump_eps},
                  {"twojump_samples", cfg.jumps.twojump_samples},
                  {"chain_samples", cfg.jumps.chain_samples}};
    j["diffusion"] = {{"eps_sweep", cfg.diffusion.eps_sweep},
                      {"n", cfg.diffusion.n},
                      {"replicas", cfg.diffusion.replicas},
                      {"inner_samples", cfg.diffusion.inner_samples},
                      {"means_cells", cfg.diffusion.means_cells},
                      {"series_cells", cfg.diffusion.series_cells},
                      {"series_paths", cfg.diffusion.series_paths},
                      {"series_eps", cfg.diffusion.series_eps},
                      {"clt_n", cfg.diffusion.clt_n},
                      {"clt_samples", cfg.diffusion.clt_samples},
                      {"clt_eps", cfg.diffusion.clt_eps}};
    j["properties"] = {{"cases", cfg.properties.cases}};
    return j;
}

ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig cfg;
    cfg.schema_version = j.value("schema_version", 1);
    if (cfg.schema_version != 1)
        throw std::invalid_argument("unsupported config schema version");
    cfg.scenario = j.value("scenario", cfg.scenario);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.out_dir = j.value("out_dir", cfg.out_dir);
    cfg.jobs = j.value("jobs", cfg.jobs);
    if (j.contains("theorem1")) {
        const json& t = j["theorem1"];
        cfg.theorem1.hole_eps = t.value("hole_eps", cfg.theorem1.hole_eps);
        cfg.theorem1.composition_eps = t.value("composition_eps", cfg.theorem1.composition_eps);
        cfg.theorem1.composition_n = t.value("composition_n", cfg.theorem1.composition_n);
        cfg.theorem1.composition_cells =
            t.value("composition_cells", cfg.theorem1.composition_cells);
        cfg.theorem1.lambda_eps = t.value("lambda_eps", cfg.theorem1.lambda_eps);
        cfg.theorem1.lambda_cells = t.value("lambda_cells", cfg.theorem1.lambda_cells);
        cfg.theorem1.birkhoff_eps = t.value("birkhoff_eps", cfg.theorem1.birkhoff_eps);
        cfg.theorem1.birkhoff_t = t.value("birkhoff_t", cfg.theorem1.birkhoff_t);
        cfg.theorem1.birkhoff_cells = t.value("birkhoff_cells", cfg.theorem1.birkhoff_cells);
    }
    if (j.contains("jumps")) {
        const json& t = j["jumps"];
        cfg.jumps.holding_eps = t.value("holding_eps", cfg.jumps.holding_eps);
        cfg.jumps.holding_samples = t.value("holding_samples", cfg.jumps.holding_samples);
        cfg.jumps.holding_t_max = t.value("holding_t_max", cfg.jumps.holding_t_max);
        cfg.jumps.holding_t_step = t.value("holding_t_step", cfg.jumps.holding_t_step);
        cfg.jumps.twojump_eps = t.value("twojump_eps", cfg.jumps.twojump_eps);
        cfg.jumps.twojump_samples = t.value("twojump_samples", cfg.jumps.twojump_samples);
        cfg.jumps.chain_samples = t.value("chain_samples", cfg.jumps.chain_samples);
    }
    if (j.contains("diffusion")) {
        const json& t = j["diffusion"];
        cfg.diffusion.eps_sweep = t.value("eps_sweep", cfg.diffusion.eps_sweep);
        cfg.diffusion.n = t.value("n", cfg.diffusion.n);
        cfg.diffusion.replicas = t.value("replicas", cfg.diffusion.replicas);
        cfg.diffusion.inner_samples = t.value("inner_samples", cfg.diffusion.inner_samples);
        cfg.diffusion.means_cells = t.value("means_cells", cfg.diffusion.means_cells);
        cfg.diffusion.series_cells = t.value("series_cells", cfg.diffusion.series_cells);
        cfg.diffusion.series_paths = t.value("series_paths", cfg.diffusion.series_paths);
        cfg.diffusion.series_eps = t.value("series_eps", cfg.diffusion.series_eps);
        cfg.diffusion.clt_n = t.value("clt_n", cfg.diffusion.clt_n);
        cfg.diffusion.clt_samples = t.value("clt_samples", cfg.diffusion.clt_samples);
        cfg.diffusion.clt_eps = t.value("clt_eps", cfg.diffusion.clt_eps);
    }
    if (j.contains("properties"))
        cfg.properties.cases = j["properties"].value("cases", cfg.properties.cases);
    return cfg;
}

// --------------------------------------------------------------- run/verify

ResultBundle run(const ExperimentConfig& cfg) {
    ResultBundle bundle;
    bundle.out_dir = cfg.out_dir;
    json cfg_json = config_to_json(cfg);
    bundle.config_hash = fnv1a64(cfg_json.dump());

    ArtifactWriter writer(cfg.out_dir);
    auto scenarios = selected_scenarios(cfg.scenario);
    for (const std::string& name : scenarios) {
        auto t0 = std::chrono::steady_clock::now();
        run_scenario(name, cfg, writer);
        auto t1 = std::chrono::steady_clock::now();
        bundle.timings.emplace_back(name, std::chrono::duration<double>(t1 - t0).count());
    }

    json manifest;
    manifest["schema_version"] = 1;
    manifest["config"] = cfg_json;
    manifest["config_hash"] = hex64(bundle.config_hash);
    json artifacts = json::object();
    for (const auto& [path, hash] : writer.hashes()) artifacts[path] = hex64(hash);
    manifest["artifacts"] = artifacts;
    json timings = json::object();
    for (const auto& [name, secs] : bundle.timings) timings[name] = secs;
    manifest["timings"] = timings;
    write_file((fs::path(cfg.out_dir) / "manifest.json").string(), manifest.dump(2) + "\n");

    for (const std::string& name : scenarios) {
        auto verdicts = judge_scenario(name, cfg.out_dir);
        bundle.verdicts.insert(bundle.verdicts.end(), verdicts.begin(), verdicts.end());
    }
    std::sort(bundle.verdicts.begin(), bundle.verdicts.end(),
              [](const Verdict& a, const Verdict& b) { return a.criterion < b.criterion; });

    json verdicts_json = json::array();
    for (const Verdict& v : bundle.verdicts)
        verdicts_json.push_back({{"criterion", v.criterion},
                                 {"name", v.name},
                                 {"status", v.status == VerdictStatus::pass     ? "pass"
                                            : v.status == VerdictStatus::fail ? "fail"
                                                                              : "skipped"},
                                 {"detail", v.detail}});
    write_file((fs::path(cfg.out_dir) / "verdicts.json").string(),
               verdicts_json.dump(2) + "\n");
    return bundle;
}

ResultBundle verify(const std::string& out_dir) {
    ResultBundle bundle;
    bundle.out_dir = out_dir;
    json manifest = json::parse(read_file((fs::path(out_dir) / "manifest.json").string()));
    bundle.config_hash =
        std::stoull(manifest.at("config_hash").get<std::string>(), nullptr, 16);

    for (const auto& [path, hash] : manifest.at("artifacts").items()) {
        std::string content = load_artifact(out_dir, path);
        if (hex64(fnv1a64(content)) != hash.get<std::string>())
            throw std::runtime_error("artifact hash mismatch: " + path);
    }

    for (const std::string& name : kScenarios) {
        auto verdicts = judge_scenario(name, out_dir);
        bundle.verdicts.insert(bundle.verdicts.end(), verdicts.begin(), verdicts.end());
    }
    std::sort(bundle.verdicts.begin(), bundle.verdicts.end(),
              [](const Verdict& a, const Verdict& b) { return a.criterion < b.criterion; });
    return bundle;
}

int exit_code(const ResultBundle& bundle) {
    for (const Verdict& v : bundle.verdicts)
        if (v.status == VerdictStatus::fail) return 2;
    return 0;
}

std::string format_verdict_table(const std::vector<Verdict>& verdicts) {
    std::string out;
    for (const Verdict& v : verdicts) {
        std::string status = v.status == VerdictStatus::pass     ? "[PASS]"
                             : v.status == VerdictStatus::fail ? "[FAIL]"
                                                               : "[SKIP]";
        out += status + " criterion " + std::to_string(v.criterion) + ": " + v.name;
        if (!v.detail.empty()) out += " -- " + v.detail;
        out += "\n";
    }
    return out;
}

}  // namespace harness
}  // namespace metastable
