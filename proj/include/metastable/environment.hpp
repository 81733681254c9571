#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "metastable/map.hpp"
#include "metastable/rng.hpp"

namespace metastable {

/// Finite driving alphabet with symbol probabilities (Bernoulli measure).
struct Alphabet {
    std::vector<std::string> symbols;
    std::vector<double> probs;

    std::size_t size() const { return symbols.size(); }
    void validate() const;
};

/// A materialised window of the two-sided symbol sequence sigma^k(omega),
/// k in [k_lo, k_hi]. Symbols are a pure function of (seed, k), so any
/// window regenerates bit-exactly and extension preserves old entries.
class FiberPath {
public:
    FiberPath(const Alphabet& alphabet, std::uint64_t seed, long k_lo, long k_hi);

    std::uint64_t seed() const { return seed_; }
    long k_lo() const { return k_lo_; }
    long k_hi() const { return k_hi_; }

    std::size_t symbol_at(long k) const;

    /// Grow the window in place; existing symbols are untouched.
    void extend(const Alphabet& alphabet, long new_lo, long new_hi);

    static std::size_t draw_symbol(const Alphabet& alphabet, std::uint64_t seed, long k);

private:
    std::uint64_t seed_;
    long k_lo_;
    long k_hi_;
    std::vector<std::uint16_t> symbols_;
};

FiberPath sample_path(const Alphabet& alphabet, std::uint64_t seed, long k_lo, long k_hi);

enum class MapFamily { paired_tent, m_well };

/// Per-symbol map parameters: tent (a, b) pairs or m-well beta matrices.
struct SymbolParams {
    PairedTentParams tent;
    std::vector<std::vector<double>> beta;  // used by the m-well family
    double scale = 1.0;                     // m-well symbol_scale
};

/// Driving system bundle: alphabet, per-symbol parameters and the
/// uniform lower bound beta* enforced on every neighbour rate.
class Environment {
public:
    Environment(Alphabet alphabet, MapFamily family, std::vector<SymbolParams> params,
                double beta_star = 0.05, double well_slope = 4.0);

    const Alphabet& alphabet() const { return alphabet_; }
    MapFamily family() const { return family_; }
    double beta_star() const { return beta_star_; }
    double well_slope() const { return well_slope_; }
    const std::vector<SymbolParams>& params() const { return params_; }

    /// Number of metastable states m.
    std::size_t state_count() const { return m_; }

    /// Probability-weighted average of the per-symbol beta matrices.
    std::vector<std::vector<double>> averaged_beta() const;

    /// Neighbour-rate matrix of one symbol (tent: beta_LR = b, beta_RL = a).
    std::vector<std::vector<double>> beta_for_symbol(std::size_t sym) const;

    /// The map attached to the symbol at index k of the path.
    PiecewiseAffineMap fiber_map(const FiberPath& path, long k, double eps) const;

    /// One map per alphabet symbol at the given eps (hot loops index these
    /// by path symbol instead of rebuilding).
    std::vector<PiecewiseAffineMap> maps_per_symbol(double eps) const;

    /// Union of alignment points over all symbols at the given eps.
    std::vector<double> alignment_points(double eps) const;

    Interval state_space() const;

private:
    Alphabet alphabet_;
    MapFamily family_;
    std::vector<SymbolParams> params_;
    double beta_star_;
    double well_slope_;
    std::size_t m_;
};

/// Built-in environments used across tests and the CLI.
Environment make_tent_environment(const std::vector<std::pair<double, double>>& ab_per_symbol,
                                  const std::vector<double>& probs, double beta_star = 0.05);
Environment make_mwell_environment(std::size_t m,
                                   const std::vector<std::vector<double>>& beta,
                                   double beta_star = 0.05, double well_slope = 4.0);

}  // namespace metastable
