#include "metastable/environment.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace metastable {

namespace {

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

std::uint64_t zigzag(long k) {
    return k >= 0 ? 2ull * static_cast<std::uint64_t>(k)
                  : 2ull * static_cast<std::uint64_t>(-(k + 1)) + 1ull;
}

}  // namespace

void Alphabet::validate() const {
    require(!symbols.empty(), "alphabet needs at least one symbol");
    require(symbols.size() == probs.size(), "symbols and probs must align");
    double sum = 0.0;
    for (double p : probs) {
        require(p >= 0.0, "symbol probabilities must be nonnegative");
        sum += p;
    }
    require(std::abs(sum - 1.0) <= 1e-12, "symbol probabilities must sum to 1");
}

std::size_t FiberPath::draw_symbol(const Alphabet& alphabet, std::uint64_t seed, long k) {
    double u = rng::uniform01(seed, rng::kPathSymbols, zigzag(k));
    double acc = 0.0;
    for (std::size_t s = 0; s + 1 < alphabet.probs.size(); ++s) {
        acc += alphabet.probs[s];
        if (u < acc) return s;
    }
    return alphabet.probs.size() - 1;
}

FiberPath::FiberPath(const Alphabet& alphabet, std::uint64_t seed, long k_lo, long k_hi)
    : seed_(seed), k_lo_(k_lo), k_hi_(k_hi) {
    require(k_lo <= k_hi, "window requires k_lo <= k_hi");
    alphabet.validate();
    symbols_.reserve(static_cast<std::size_t>(k_hi - k_lo + 1));
    for (long k = k_lo; k <= k_hi; ++k)
        symbols_.push_back(static_cast<std::uint16_t>(draw_symbol(alphabet, seed, k)));
}

std::size_t FiberPath::symbol_at(long k) const {
    require(k >= k_lo_ && k <= k_hi_, "index out of window");
    return symbols_[static_cast<std::size_t>(k - k_lo_)];
}

void FiberPath::extend(const Alphabet& alphabet, long new_lo, long new_hi) {
    new_lo = std::min(new_lo, k_lo_);
    new_hi = std::max(new_hi, k_hi_);
    std::vector<std::uint16_t> grown;
    grown.reserve(static_cast<std::size_t>(new_hi - new_lo + 1));
    for (long k = new_lo; k < k_lo_; ++k)
        grown.push_back(static_cast<std::uint16_t>(draw_symbol(alphabet, seed_, k)));
    grown.insert(grown.end(), symbols_.begin(), symbols_.end());
    for (long k = k_hi_ + 1; k <= new_hi; ++k)
        grown.push_back(static_cast<std::uint16_t>(draw_symbol(alphabet, seed_, k)));
    symbols_ = std::move(grown);
    k_lo_ = new_lo;
    k_hi_ = new_hi;
}

FiberPath sample_path(const Alphabet& alphabet, std::uint64_t seed, long k_lo, long k_hi) {
    return FiberPath(alphabet, seed, k_lo, k_hi);
}

Environment::Environment(Alphabet alphabet, MapFamily family,
                         std::vector<SymbolParams> params, double beta_star,
                         double well_slope)
    : alphabet_(std::move(alphabet)),
      family_(family),
      params_(std::move(params)),
      beta_star_(beta_star),
      well_slope_(well_slope) {
    alphabet_.validate();
    require(params_.size() == alphabet_.size(), "one parameter set per symbol required");
    require(beta_star_ > 0.0, "beta* must be positive");

    if (family_ == MapFamily::paired_tent) {
        m_ = 2;
        for (const SymbolParams& p : params_) {
            require(p.tent.a >= beta_star_ && p.tent.b >= beta_star_,
                    "tent parameters must respect the beta* floor");
            require(p.tent.a <= 100.0 && p.tent.b <= 100.0,
                    "tent parameters must lie in [beta*, 100]");
        }
    } else {
        require(!params_.empty() && !params_[0].beta.empty(), "m-well needs beta matrices");
        m_ = params_[0].beta.size();
        for (const SymbolParams& p : params_) {
            require(p.beta.size() == m_, "beta matrices must share dimensions");
            for (std::size_t i = 0; i < m_; ++i) {
                require(p.beta[i].size() == m_, "beta matrices must be square");
                for (std::size_t j = 0; j < m_; ++j) {
                    bool neighbour = (i + 1 == j) || (j + 1 == i);
                    if (neighbour) {
                        double entry = p.beta[i][j] * p.scale;
                        require(entry >= beta_star_ && entry <= 100.0,
                                "neighbour beta entries must lie in [beta*, 100]");
                    } else if (i != j) {
                        require(p.beta[i][j] == 0.0, "non-neighbour beta entry must be zero");
                    }
                }
            }
        }
    }
}

std::vector<std::vector<double>> Environment::beta_for_symbol(std::size_t sym) const {
    require(sym < params_.size(), "invalid symbol index");
    if (family_ == MapFamily::paired_tent) {
        const PairedTentParams& t = params_[sym].tent;
        return {{0.0, t.b}, {t.a, 0.0}};
    }
    std::vector<std::vector<double>> out = params_[sym].beta;
    for (auto& row : out)
        for (double& v : row) v *= params_[sym].scale;
    for (std::size_t i = 0; i < m_; ++i) out[i][i] = 0.0;
    return out;
}

std::vector<std::vector<double>> Environment::averaged_beta() const {
    std::vector<std::vector<double>> avg(m_, std::vector<double>(m_, 0.0));
    for (std::size_t s = 0; s < alphabet_.size(); ++s) {
        auto beta = beta_for_symbol(s);
        for (std::size_t i = 0; i < m_; ++i)
            for (std::size_t j = 0; j < m_; ++j) avg[i][j] += alphabet_.probs[s] * beta[i][j];
    }
    return avg;
}

PiecewiseAffineMap Environment::fiber_map(const FiberPath& path, long k, double eps) const {
    std::size_t sym = path.symbol_at(k);
    if (family_ == MapFamily::paired_tent)
        return paired_tent_build(params_[sym].tent, eps);
    MWellSpec spec{m_, well_slope_, params_[sym].beta};
    return mwell_build(spec, eps, params_[sym].scale);
}

std::vector<PiecewiseAffineMap> Environment::maps_per_symbol(double eps) const {
    std::vector<PiecewiseAffineMap> maps;
    maps.reserve(alphabet_.size());
    for (std::size_t s = 0; s < alphabet_.size(); ++s) {
        if (family_ == MapFamily::paired_tent)
            maps.push_back(paired_tent_build(params_[s].tent, eps));
        else
            maps.push_back(mwell_build({m_, well_slope_, params_[s].beta}, eps, params_[s].scale));
    }
    return maps;
}

std::vector<double> Environment::alignment_points(double eps) const {
    std::set<double> pts;
    for (const PiecewiseAffineMap& map : maps_per_symbol(eps)) {
        auto ap = map.alignment_points();
        pts.insert(ap.begin(), ap.end());
    }
    return {pts.begin(), pts.end()};
}

Interval Environment::state_space() const {
    if (family_ == MapFamily::paired_tent) return {-1.0, 1.0};
    return {0.0, static_cast<double>(m_)};
}

Environment make_tent_environment(const std::vector<std::pair<double, double>>& ab_per_symbol,
                                  const std::vector<double>& probs, double beta_star) {
    Alphabet alphabet;
    std::vector<SymbolParams> params;
    for (std::size_t s = 0; s < ab_per_symbol.size(); ++s) {
        alphabet.symbols.push_back("s" + std::to_string(s));
        params.push_back({{ab_per_symbol[s].first, ab_per_symbol[s].second}, {}, 1.0});
    }
    alphabet.probs = probs;
    return Environment(std::move(alphabet), MapFamily::paired_tent, std::move(params),
                       beta_star);
}

Environment make_mwell_environment(std::size_t m,
                                   const std::vector<std::vector<double>>& beta,
                                   double beta_star, double well_slope) {
    Alphabet alphabet{{"s0"}, {1.0}};
    std::vector<SymbolParams> params{{PairedTentParams{}, beta, 1.0}};
    (void)m;
    return Environment(std::move(alphabet), MapFamily::m_well, std::move(params), beta_star,
                       well_slope);
}

}  // namespace metastable
