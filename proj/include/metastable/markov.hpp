#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include <Eigen/Dense>

namespace metastable {
namespace markov {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// One-step transition matrix: off-diagonal eps*beta_ij, diagonal fills the
/// row to 1. Throws if eps is large enough to make a diagonal negative.
Matrix build_M(const std::vector<std::vector<double>>& beta, double eps);

/// Generator with off-diagonal beta_bar_ij and zero row sums; equals
/// (M_eps - I)/eps exactly for every eps.
Matrix generator(const std::vector<std::vector<double>>& beta_bar);

/// Stationary distribution: the probability left null vector of G, equal to
/// the diag-normalised solution of the renormalised-generator equation.
Vector stationary(const Matrix& G);

/// Residual of the renormalised-generator equation p^T (G diag(G)^{-1}) = 0.
double stationary_residual(const Matrix& G, const Vector& p);

/// Matrix exponential e^{tG} via scaling-and-squaring with a 13/13 Pade
/// approximant.
Matrix expm(const Matrix& G, double t);

/// Closed-form jump laws of the averaged Markov jump process.
struct JumpOracle {
    Matrix G;
    Vector p;
    std::vector<double> exit_rates;                   // r_j = -G_jj
    std::vector<std::vector<double>> target_probs;    // G_jk / r_j

    static JumpOracle from_generator(const Matrix& G);
};

/// A holding-time window [lo, hi] (hi may be infinite).
struct TimeWindow {
    double lo = 0.0;
    double hi = kInf;
};

/// P^{j0}(T_k in Delta_k and z_k = r_k for k = 1..p): product of exponential
/// window masses and jump-target probabilities. Non-neighbour targets give
/// probability zero.
double jump_path_probability(const JumpOracle& oracle, std::size_t j0,
                             const std::vector<TimeWindow>& deltas,
                             const std::vector<std::size_t>& targets);

/// x = integral of e^{tG} v over t >= 0, interpreted on the centered
/// subspace: the unique solution of G x = -v with p^T x = 0. Throws if v is
/// not centered (p^T v != 0), reporting the measured defect.
Vector fundamental_solve(const Matrix& G, const Vector& v);

/// 2 < p .* psi_bar, integral e^{tG} psi_bar dt > — the small-eps limit of
/// the scaled diffusion coefficient. Requires sum_i p_i psi_bar_i = 0.
double variance_limit(const Vector& p, const Vector& psi_bar, const Matrix& G);

/// Closed form of the limit for the paired tent family:
/// 2 b_bar psi_R^2 / (a_bar (a_bar + b_bar)).
double tent_variance_limit(double a_bar, double b_bar, double psi_r);

}  // namespace markov
}  // namespace metastable
