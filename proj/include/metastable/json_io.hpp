#pragma once

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "metastable/environment.hpp"
#include "metastable/map.hpp"
#include "metastable/markov.hpp"
#include "metastable/ulam.hpp"

namespace metastable {

/// Map family description: {family: "paired_tent"|"m_well"|"custom", params, eps}.
nlohmann::json map_to_json(const PiecewiseAffineMap& map, const std::string& family,
                           const nlohmann::json& params, double eps);
PiecewiseAffineMap map_from_json(const nlohmann::json& j);

/// Environment config: {symbols, probs, params, seed, ...}.
nlohmann::json environment_to_json(const Environment& env, std::uint64_t seed);
std::pair<Environment, std::uint64_t> environment_from_json(const nlohmann::json& j);

/// Coordinate-list sparse text (row col value per line) plus a JSON header
/// (grid endpoints, kind, fiber index).
std::string operator_to_coordinate_text(const UlamOperator& op);
nlohmann::json operator_header_to_json(const UlamOperator& op);

/// Markov oracle bundle with optional resolved queries.
struct OracleQueryRecord {
    std::size_t j0 = 0;
    std::vector<markov::TimeWindow> deltas;
    std::vector<std::size_t> targets;
    double prob = 0.0;
};
nlohmann::json oracle_to_json(const markov::JumpOracle& oracle,
                              const std::vector<OracleQueryRecord>& queries);

/// RFC-4180 CSV: fields quoted when needed, floats at 17 significant digits.
std::string csv_field(const std::string& s);
std::string csv_field(double v);
std::string csv_row(const std::vector<std::string>& fields);
std::string format_double(double v);

/// FNV-1a 64-bit content hash used by artifact manifests.
std::uint64_t fnv1a64(const std::string& bytes);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace metastable
