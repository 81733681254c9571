#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace metastable {
namespace harness {

/// Scenario parameters; every default is pinned to the shipped experiment
/// definitions, and a config file may override any of them.
struct Theorem1Params {
    std::vector<double> hole_eps = {0.1, 0.04, 0.01};
    double composition_eps = 0.1;
    std::vector<std::size_t> composition_n = {1, 2, 3};
    std::size_t composition_cells = 1u << 10;
    std::vector<double> lambda_eps = {0.04, 0.02, 0.01};
    std::size_t lambda_cells = 1u << 14;
    double birkhoff_eps = 0.005;
    double birkhoff_t = 1.0;
    std::size_t birkhoff_cells = 1u << 14;
};

struct JumpsParams {
    double holding_eps = 0.01;
    std::size_t holding_samples = 100000;
    double holding_t_max = 3.0;
    double holding_t_step = 0.1;
    double twojump_eps = 0.01;
    std::size_t twojump_samples = 100000;
    std::size_t chain_samples = 1000000;
};

struct DiffusionParams {
    std::vector<double> eps_sweep = {0.04, 0.02, 0.01};
    std::size_t n = 20000;
    std::size_t replicas = 2000;
    std::size_t inner_samples = 4;
    std::size_t means_cells = 1u << 10;
    std::size_t series_cells = 1u << 12;
    std::size_t series_paths = 32;
    double series_eps = 0.02;
    std::size_t clt_n = 10000;
    std::size_t clt_samples = 10000;
    double clt_eps = 0.02;
};

struct PropertiesParams {
    std::size_t cases = 200;
};

struct ExperimentConfig {
    int schema_version = 1;
    std::string scenario = "all";
    std::uint64_t seed = 20260810;
    std::string out_dir = "results";
    int jobs = 0;
    Theorem1Params theorem1;
    JumpsParams jumps;
    DiffusionParams diffusion;
    PropertiesParams properties;
};

nlohmann::json config_to_json(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(const nlohmann::json& j);

enum class VerdictStatus { pass, fail, skipped };

struct Verdict {
    int criterion = 0;
    std::string name;
    VerdictStatus status = VerdictStatus::skipped;
    std::string detail;
};

struct ResultBundle {
    std::string out_dir;
    std::uint64_t config_hash = 0;
    std::vector<Verdict> verdicts;
    std::vector<std::pair<std::string, double>> timings;  // scenario -> seconds
};

/// Execute the named scenario(s), persist artifacts and the manifest, and
/// judge every covered acceptance criterion from the persisted artifacts.
ResultBundle run(const ExperimentConfig& cfg);

/// Re-judge a bundle offline: check artifact hashes against the manifest
/// and recompute every verdict from the artifacts alone.
ResultBundle verify(const std::string& out_dir);

/// 0 if all verdicts pass, 2 if any fail (skips do not fail a bundle).
int exit_code(const ResultBundle& bundle);

std::string format_verdict_table(const std::vector<Verdict>& verdicts);

}  // namespace harness
}  // namespace metastable
