#include "metastable/json_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace metastable {

using nlohmann::json;

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

nlohmann::json map_to_json(const PiecewiseAffineMap& map, const std::string& family,
                           const nlohmann::json& params, double eps) {
    json j;
    j["family"] = family;
    j["params"] = params;
    j["eps"] = eps;
    if (family == "custom") {
        json branches = json::array();
        for (const AffineBranch& b : map.branches())
            branches.push_back({{"domain", {b.domain.lo, b.domain.hi}},
                                {"slope", b.slope},
                                {"intercept", b.intercept}});
        j["params"]["state_space"] = {map.state_space().lo, map.state_space().hi};
        j["params"]["branches"] = branches;
        j["params"]["boundary_points"] = map.boundary_points();
        j["params"]["fixed_points"] = map.fixed_points();
    }
    return j;
}

PiecewiseAffineMap map_from_json(const nlohmann::json& j) {
    const std::string family = j.at("family").get<std::string>();
    const double eps = j.value("eps", 0.0);
    const json& params = j.at("params");
    if (family == "paired_tent") {
        PairedTentParams p{params.at("a").get<double>(), params.at("b").get<double>()};
        return paired_tent_build(p, eps);
    }
    if (family == "m_well") {
        MWellSpec spec;
        spec.m = params.at("m").get<std::size_t>();
        spec.well_slope = params.value("well_slope", 4.0);
        spec.hole_lengths = params.at("hole_lengths").get<std::vector<std::vector<double>>>();
        return mwell_build(spec, eps, params.value("symbol_scale", 1.0));
    }
    if (family == "custom") {
        Interval ss{params.at("state_space")[0].get<double>(),
                    params.at("state_space")[1].get<double>()};
        std::vector<AffineBranch> branches;
        for (const json& b : params.at("branches"))
            branches.push_back({{b.at("domain")[0].get<double>(), b.at("domain")[1].get<double>()},
                                b.at("slope").get<double>(),
                                b.at("intercept").get<double>()});
        auto boundary = params.at("boundary_points").get<std::vector<double>>();
        auto fixed = params.value("fixed_points", std::vector<double>{});
        return PiecewiseAffineMap(ss, std::move(branches), std::move(boundary),
                                  std::move(fixed));
    }
    throw std::invalid_argument("unknown map family: " + family);
}

nlohmann::json environment_to_json(const Environment& env, std::uint64_t seed) {
    json j;
    j["symbols"] = env.alphabet().symbols;
    j["probs"] = env.alphabet().probs;
    j["family"] = env.family() == MapFamily::paired_tent ? "paired_tent" : "m_well";
    j["beta_star"] = env.beta_star();
    j["seed"] = seed;
    json params = json::object();
    for (std::size_t s = 0; s < env.alphabet().size(); ++s) {
        const SymbolParams& sp = env.params()[s];
        if (env.family() == MapFamily::paired_tent)
            params[env.alphabet().symbols[s]] = {{"a", sp.tent.a}, {"b", sp.tent.b}};
        else
            params[env.alphabet().symbols[s]] = {{"beta", sp.beta}, {"scale", sp.scale}};
    }
    j["params"] = params;
    if (env.family() == MapFamily::m_well) j["well_slope"] = env.well_slope();
    return j;
}

std::pair<Environment, std::uint64_t> environment_from_json(const nlohmann::json& j) {
    Alphabet alphabet;
    alphabet.symbols = j.at("symbols").get<std::vector<std::string>>();
    alphabet.probs = j.at("probs").get<std::vector<double>>();
    std::uint64_t seed = j.value("seed", 0ull);
    double beta_star = j.value("beta_star", 0.05);
    const json& params = j.at("params");

    bool is_tent;
    if (j.contains("family"))
        is_tent = j.at("family").get<std::string>() == "paired_tent";
    else
        is_tent = params.at(alphabet.symbols.at(0)).contains("a");

    std::vector<SymbolParams> sp;
    for (const std::string& sym : alphabet.symbols) {
        const json& p = params.at(sym);
        SymbolParams s;
        if (is_tent) {
            s.tent = {p.at("a").get<double>(), p.at("b").get<double>()};
        } else {
            s.beta = p.at("beta").get<std::vector<std::vector<double>>>();
            s.scale = p.value("scale", 1.0);
        }
        sp.push_back(std::move(s));
    }
    Environment env(std::move(alphabet),
                    is_tent ? MapFamily::paired_tent : MapFamily::m_well, std::move(sp),
                    beta_star, j.value("well_slope", 4.0));
    return {std::move(env), seed};
}

std::string operator_to_coordinate_text(const UlamOperator& op) {
    std::ostringstream out;
    for (std::size_t k = 0; k < op.size(); ++k)
        for (const auto& [l, v] : op.row(k))
            out << k << ' ' << l << ' ' << format_double(v) << '\n';
    return out.str();
}

nlohmann::json operator_header_to_json(const UlamOperator& op) {
    json j;
    j["kind"] = op.kind() == UlamOperator::Kind::closed ? "closed" : "open";
    j["fiber"] = op.fiber();
    j["state"] = op.state();
    j["grid_endpoints"] = op.grid()->edges();
    j["cells"] = op.grid()->cell_count();
    return j;
}

nlohmann::json oracle_to_json(const markov::JumpOracle& oracle,
                              const std::vector<OracleQueryRecord>& queries) {
    json j;
    const Eigen::Index m = oracle.G.rows();
    json G = json::array();
    for (Eigen::Index i = 0; i < m; ++i) {
        json row = json::array();
        for (Eigen::Index k = 0; k < m; ++k) row.push_back(oracle.G(i, k));
        G.push_back(row);
    }
    j["G"] = G;
    json p = json::array();
    for (Eigen::Index i = 0; i < m; ++i) p.push_back(oracle.p(i));
    j["p"] = p;
    j["rates"] = oracle.exit_rates;
    j["targets"] = oracle.target_probs;
    json qs = json::array();
    for (const OracleQueryRecord& q : queries) {
        json deltas = json::array();
        for (const auto& d : q.deltas)
            deltas.push_back({d.lo, std::isfinite(d.hi) ? json(d.hi) : json()});
        qs.push_back({{"j0", q.j0}, {"deltas", deltas}, {"targets", q.targets}, {"prob", q.prob}});
    }
    j["queries"] = qs;
    return j;
}

std::string csv_field(const std::string& s) {
    bool needs_quote = s.find_first_of(",\"\r\n") != std::string::npos;
    if (!needs_quote) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string csv_field(double v) { return format_double(v); }

std::string csv_row(const std::vector<std::string>& fields) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out += ',';
        out += csv_field(fields[i]);
    }
    out += "\r\n";
    return out;
}

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
}

}  // namespace metastable
