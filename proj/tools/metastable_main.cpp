#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "metastable/diffusion.hpp"
#include "metastable/harness.hpp"
#include "metastable/json_io.hpp"
#include "metastable/markov.hpp"
#include "metastable/observable.hpp"

using nlohmann::json;
using namespace metastable;

namespace {

int resolve_jobs(int flag_jobs) {
    if (const char* env = std::getenv("METASTABLE_JOBS")) {
        try {
            return std::stoi(env);
        } catch (...) {
        }
    }
    return flag_jobs;
}

void apply_jobs(int jobs) {
#ifdef _OPENMP
    if (jobs > 0) omp_set_num_threads(jobs);
#else
    (void)jobs;
#endif
}

harness::ExperimentConfig load_config(const std::string& config_path,
                                      const std::optional<std::uint64_t>& seed,
                                      const std::string& out_dir,
                                      const std::string& scenario, int jobs) {
    harness::ExperimentConfig cfg;
    if (!config_path.empty())
        cfg = harness::config_from_json(json::parse(read_file(config_path)));
    if (seed) cfg.seed = *seed;
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (!scenario.empty()) cfg.scenario = scenario;
    cfg.jobs = jobs;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"metastable: open transfer-operator cocycles, jump statistics and the "
                 "small-hole diffusion limit for random interval maps"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    std::string scenario;
    int jobs = 0;

    auto add_common = [&](CLI::App* cmd, bool with_scenario) {
        cmd->add_option("--config", config_path, "JSON config file");
        cmd->add_option("--seed", seed, "master seed (64-bit)");
        cmd->add_option("--out", out_dir, "output directory");
        cmd->add_option("--jobs", jobs, "worker threads (0 = all)");
        if (with_scenario)
            cmd->add_option("--scenario", scenario,
                            "theorem1 | jumps | oracle | diffusion | properties | all");
    };

    CLI::App* cmd_run = app.add_subcommand("run", "execute a scenario and judge its criteria");
    add_common(cmd_run, true);

    CLI::App* cmd_verify =
        app.add_subcommand("verify", "re-judge a result bundle from persisted artifacts");
    std::string verify_dir;
    cmd_verify->add_option("--out", verify_dir, "bundle directory")->required();

    CLI::App* cmd_oracle =
        app.add_subcommand("oracle", "emit the Markov jump-process oracle for an environment");
    std::string oracle_env_path;
    cmd_oracle->add_option("--config", oracle_env_path, "environment config JSON")->required();
    std::string oracle_out;
    cmd_oracle->add_option("--out", oracle_out, "output file (default stdout)");

    CLI::App* cmd_sweep =
        app.add_subcommand("sweep", "diffusion sweep for an environment and observable");
    std::string sweep_env_path;
    std::vector<double> sweep_eps;
    std::vector<double> sweep_psi;
    std::size_t sweep_n = 20000;
    std::size_t sweep_replicas = 500;
    std::string sweep_out;
    std::optional<std::uint64_t> sweep_seed;
    int sweep_jobs = 0;
    cmd_sweep->add_option("--config", sweep_env_path, "environment config JSON")->required();
    cmd_sweep->add_option("--eps", sweep_eps, "eps values")->required();
    cmd_sweep->add_option("--psi", sweep_psi,
                          "per-state step-observable values (centered automatically)");
    cmd_sweep->add_option("--steps", sweep_n, "trajectory length n");
    cmd_sweep->add_option("--replicas", sweep_replicas, "omega replicas");
    cmd_sweep->add_option("--out", sweep_out, "output CSV file (default stdout)");
    cmd_sweep->add_option("--seed", sweep_seed, "master seed");
    cmd_sweep->add_option("--jobs", sweep_jobs, "worker threads (0 = all)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_run->parsed()) {
            int j = resolve_jobs(jobs);
            apply_jobs(j);
            harness::ExperimentConfig cfg =
                load_config(config_path, seed, out_dir, scenario, j);
            harness::ResultBundle bundle = harness::run(cfg);
            std::cout << harness::format_verdict_table(bundle.verdicts);
            for (const auto& [name, secs] : bundle.timings)
                std::cout << "# " << name << ": " << secs << " s\n";
            return harness::exit_code(bundle);
        }
        if (cmd_verify->parsed()) {
            harness::ResultBundle bundle = harness::verify(verify_dir);
            std::cout << harness::format_verdict_table(bundle.verdicts);
            return harness::exit_code(bundle);
        }
        if (cmd_oracle->parsed()) {
            auto [env, env_seed] = environment_from_json(json::parse(read_file(oracle_env_path)));
            (void)env_seed;
            auto G = markov::generator(env.averaged_beta());
            auto oracle = markov::JumpOracle::from_generator(G);
            std::string text = oracle_to_json(oracle, {}).dump(2) + "\n";
            if (oracle_out.empty())
                std::cout << text;
            else
                write_file(oracle_out, text);
            return 0;
        }
        if (cmd_sweep->parsed()) {
            int j = resolve_jobs(sweep_jobs);
            apply_jobs(j);
            auto [env, env_seed] = environment_from_json(json::parse(read_file(sweep_env_path)));
            std::uint64_t s = sweep_seed.value_or(env_seed);
            std::vector<double> values = sweep_psi;
            if (values.empty()) {
                values.assign(env.state_count(), 0.0);
                values.back() = 1.0;
            }
            auto G = markov::generator(env.averaged_beta());
            auto p = markov::stationary(G);
            std::vector<double> p_vec(p.data(), p.data() + p.size());
            Observable psi =
                center_fibrewise(make_step_observable(env, values), p_vec, env);
            SweepOptions opts;
            opts.n = sweep_n;
            opts.n_replicas = sweep_replicas;
            opts.trajectory.jobs = j;
            SweepResult result = diffusion_sweep(env, psi, sweep_eps, s, opts);
            std::string csv =
                csv_row({"eps", "sigma2", "eps_sigma2", "stderr", "route", "limit_value"});
            for (const SweepRow& row : result.rows)
                csv += csv_row({format_double(row.eps), format_double(row.sigma2),
                                format_double(row.eps_sigma2), format_double(row.stderr_),
                                row.route, format_double(row.limit_value)});
            if (sweep_out.empty())
                std::cout << csv;
            else
                write_file(sweep_out, csv);
            std::cout << "# limit " << format_double(result.limit_value) << ", richardson "
                      << format_double(result.richardson_extrapolation) << "\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
