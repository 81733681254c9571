#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "metastable/environment.hpp"
#include "metastable/grid.hpp"
#include "metastable/map.hpp"

namespace metastable {

/// Per-cell nonnegative density values on a grid.
struct DensityVector {
    GridPtr grid;
    std::vector<double> values;

    double mass() const;
    void normalize_mass();
    /// Integral of |this - other| over the state space.
    double l1_distance(const DensityVector& other) const;
};

/// Sparse Ulam matrix P[k][l] = Leb(cell_k ∩ D ∩ T^{-1}(cell_l)) / Leb(cell_k)
/// with D the full state space (closed) or I_j minus its holes (open).
/// Entries are exact ratios of interval lengths for piecewise-affine maps on
/// aligned grids.
class UlamOperator {
public:
    enum class Kind { closed, open };

    using Row = std::vector<std::pair<std::uint32_t, double>>;

    Kind kind() const { return kind_; }
    long fiber() const { return fiber_; }
    void set_fiber(long k) { fiber_ = k; }
    int state() const { return state_; }
    const GridPtr& grid() const { return grid_; }
    std::size_t size() const { return rows_.size(); }
    const Row& row(std::size_t k) const { return rows_[k]; }

    /// Cell range [lo, hi) the operator's domain indicator lives on:
    /// the whole grid for closed operators, the I_j cells for open ones.
    std::pair<std::size_t, std::size_t> active_range() const { return {active_lo_, active_hi_}; }

    double row_sum(std::size_t k) const;

    /// Lebesgue mass lost per application: sum over cells of
    /// (1 - row_sum) * cell length, restricted to cells with support.
    double deficiency_mass() const;

    /// Push a per-cell mass vector forward: out[l] = sum_k m[k] P[k][l].
    std::vector<double> apply_mass(std::span<const double> mass) const;

    /// Pull a per-cell functional back: out[k] = sum_l P[k][l] v[l].
    std::vector<double> apply_functional(std::span<const double> v) const;

    static UlamOperator identity(GridPtr grid);

    friend UlamOperator build_closed(const PiecewiseAffineMap& map, GridPtr grid);
    friend UlamOperator build_open(const PiecewiseAffineMap& map, std::size_t j, GridPtr grid);
    friend UlamOperator compose(std::span<const UlamOperator> ops, GridPtr grid_if_empty);

private:
    Kind kind_ = Kind::closed;
    long fiber_ = 0;
    int state_ = -1;
    std::size_t active_lo_ = 0;
    std::size_t active_hi_ = 0;
    GridPtr grid_;
    std::vector<Row> rows_;
};

/// Exact Ulam discretisation of the closed transfer operator.
UlamOperator build_closed(const PiecewiseAffineMap& map, GridPtr grid);

/// Exact Ulam discretisation of the open operator for state j: the domain
/// indicator removes I_j's holes and everything outside I_j.
UlamOperator build_open(const PiecewiseAffineMap& map, std::size_t j, GridPtr grid);

/// Matrix product in fiber order (ops[0] applied first).
UlamOperator compose(std::span<const UlamOperator> ops, GridPtr grid_if_empty = nullptr);

struct OpenCompositionReport {
    double max_discrepancy = 0.0;
    bool survivor_empty = false;
    double survivor_length = 0.0;
    std::size_t refined_cells = 0;
};

/// Verifies that the n-fold open-operator product equals the closed-operator
/// product applied after masking by the exact survivor-set indicator, both
/// realised on a common grid aligned to every survivor endpoint.
OpenCompositionReport open_composition_check(const Environment& env, const FiberPath& path,
                                             std::size_t j, double eps, std::size_t n,
                                             std::size_t base_cells);

/// Leading equivariant data of the open cocycle at the anchor fiber 0.
struct SpectralTriple {
    std::vector<double> lambda_seq;  // per-fiber multipliers, fibers -K .. -1
    long first_fiber = 0;            // fiber index of lambda_seq.front()
    DensityVector phi;               // equivariant density at fiber 0, unit mass
    std::vector<double> nu;          // per-cell weights, nu(phi) = 1
    double residual_decay = 0.0;     // fitted geometric alignment rate
    double final_gap = 0.0;          // two-start alignment gap at fiber 0
};

struct EquivariantOptions {
    std::size_t pullback_depth = 0;  // 0: ceil(40/eps) capped at 1e5
    double align_tol = 1e-10;
};

std::size_t default_pullback_depth(double eps);

/// Forward-push from fiber -K to 0 (phi, lambda sequence), transpose-push
/// from fiber +K to 0 (nu). Throws on stall, reporting the last gap.
SpectralTriple equivariant_triple(const Environment& env, const FiberPath& path,
                                  std::size_t j, double eps, GridPtr grid,
                                  const EquivariantOptions& opts = {});

/// Product of per-fiber multipliers over fibers 0 .. floor(t/eps)-1 along
/// the equivariant pull-back.
double lambda_window_product(const Environment& env, const FiberPath& path, std::size_t j,
                             double eps, double t, GridPtr grid,
                             const EquivariantOptions& opts = {});

/// Grid aligned to every symbol's branch and hole endpoints at this eps.
GridPtr aligned_grid(const Environment& env, double eps, std::size_t n_cells);

inline constexpr std::size_t kDefaultGridCells = 1u << 14;

}  // namespace metastable
