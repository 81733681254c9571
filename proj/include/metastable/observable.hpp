#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "metastable/environment.hpp"
#include "metastable/grid.hpp"
#include "metastable/interval.hpp"

namespace metastable {

/// One polynomial piece c0 + c1 x + c2 x^2 + c3 x^3 on its domain.
struct PolyPiece {
    Interval dom;
    std::array<double, 4> coeff{};

    double eval(double x) const {
        return coeff[0] + x * (coeff[1] + x * (coeff[2] + x * coeff[3]));
    }
};

/// Per-symbol observable given as a piecewise-polynomial table (degree <= 3),
/// so integrals against the uniform densities phi_j are exact quadrature.
class Observable {
public:
    Observable(std::vector<std::vector<PolyPiece>> pieces_per_symbol, double sup_bound,
               double variation_bound);

    std::size_t symbol_count() const { return pieces_.size(); }
    double sup_bound() const { return sup_bound_; }
    double variation_bound() const { return variation_bound_; }

    double eval(std::size_t sym, double x) const;

    /// Exact integral of psi_sym over [iv.lo, iv.hi].
    double integral(std::size_t sym, const Interval& iv) const;

    /// Exact integral of psi_sym^2 over [iv.lo, iv.hi].
    double integral_squared(std::size_t sym, const Interval& iv) const;

    /// Shift psi_sym by a constant (in place, per symbol).
    void shift(std::size_t sym, double c);

    const std::vector<PolyPiece>& pieces(std::size_t sym) const { return pieces_[sym]; }

private:
    std::vector<std::vector<PolyPiece>> pieces_;
    double sup_bound_;
    double variation_bound_;
};

/// Per-state fiber averages Psi_sym(j) = integral over I_j of psi_sym phi_j,
/// with phi_j the uniform unperturbed densities.
struct PsiVector {
    std::vector<std::vector<double>> per_symbol;  // [symbol][state]
    std::vector<double> averaged;                 // sum_alpha q_alpha Psi_alpha

    static PsiVector compute(const Observable& psi, const Environment& env);
};

/// Subtract from each fiber the constant c_sym = sum_j p_j Psi_sym(j); the
/// result satisfies the fibrewise centering identity exactly at the
/// quadrature level.
Observable center_fibrewise(Observable psi, const std::vector<double>& p,
                            const Environment& env);

/// Per-cell exact averages of psi and psi^2 on a grid, per symbol; the
/// operator-route estimators consume these.
struct ObservableCellTables {
    std::vector<std::vector<double>> mean;     // [symbol][cell]
    std::vector<std::vector<double>> mean_sq;  // [symbol][cell]

    static ObservableCellTables compute(const Observable& psi, const Grid& grid);
};

/// A step observable taking value left_value on I_L and right_value on I_R
/// (or per-well values for the m-well family).
Observable make_step_observable(const Environment& env, const std::vector<double>& values);

}  // namespace metastable
