#include "metastable/markov.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace metastable {
namespace markov {

namespace {

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

Matrix to_matrix(const std::vector<std::vector<double>>& rows) {
    require(!rows.empty(), "matrix must be nonempty");
    const std::size_t m = rows.size();
    Matrix out(m, m);
    for (std::size_t i = 0; i < m; ++i) {
        require(rows[i].size() == m, "matrix must be square");
        for (std::size_t j = 0; j < m; ++j) out(i, j) = rows[i][j];
    }
    return out;
}

void check_tridiagonal(const Matrix& A) {
    for (Eigen::Index i = 0; i < A.rows(); ++i)
        for (Eigen::Index j = 0; j < A.cols(); ++j) {
            if (i == j) continue;
            bool neighbour = (j == i + 1) || (i == j + 1);
            require(A(i, j) >= 0.0, "off-diagonal rates must be nonnegative");
            if (!neighbour) require(A(i, j) == 0.0, "rates must have tridiagonal support");
        }
}

}  // namespace

Matrix build_M(const std::vector<std::vector<double>>& beta, double eps) {
    Matrix B = to_matrix(beta);
    check_tridiagonal(B);
    require(eps >= 0.0, "eps must be nonnegative");
    const Eigen::Index m = B.rows();
    Matrix M = Matrix::Zero(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        double exit = 0.0;
        for (Eigen::Index j = 0; j < m; ++j) {
            if (i == j) continue;
            M(i, j) = eps * B(i, j);
            exit += eps * B(i, j);
        }
        if (exit > 1.0)
            throw std::invalid_argument("eps too large: diagonal of M would be negative");
        M(i, i) = 1.0 - exit;
    }
    return M;
}

Matrix generator(const std::vector<std::vector<double>>& beta_bar) {
    Matrix B = to_matrix(beta_bar);
    check_tridiagonal(B);
    const Eigen::Index m = B.rows();
    Matrix G = Matrix::Zero(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        double exit = 0.0;
        for (Eigen::Index j = 0; j < m; ++j) {
            if (i == j) continue;
            G(i, j) = B(i, j);
            exit += B(i, j);
        }
        G(i, i) = -exit;
    }
    return G;
}

Vector stationary(const Matrix& G) {
    const Eigen::Index m = G.rows();
    for (Eigen::Index i = 0; i < m; ++i)
        require(G(i, i) < 0.0, "generator diagonal must be negative (beta* floor)");
    // left null vector with the normalisation row appended
    Matrix A(m + 1, m);
    A.topRows(m) = G.transpose();
    A.bottomRows(1) = Eigen::RowVectorXd::Ones(m);
    Vector rhs = Vector::Zero(m + 1);
    rhs(m) = 1.0;
    Vector p = A.colPivHouseholderQr().solve(rhs);
    for (Eigen::Index i = 0; i < m; ++i) {
        if (p(i) < -1e-12) throw std::runtime_error("reducible generator: negative stationary mass");
        p(i) = std::max(p(i), 0.0);
    }
    p /= p.sum();
    if (stationary_residual(G, p) > 1e-12)
        throw std::runtime_error("reducible generator: stationary equation unsolved");
    return p;
}

double stationary_residual(const Matrix& G, const Vector& p) {
    Matrix D_inv = Matrix::Zero(G.rows(), G.cols());
    for (Eigen::Index i = 0; i < G.rows(); ++i) D_inv(i, i) = 1.0 / G(i, i);
    Eigen::RowVectorXd res = p.transpose() * (G * D_inv);
    return res.cwiseAbs().maxCoeff();
}

Matrix expm(const Matrix& G, double t) {
    require(t >= 0.0, "time must be nonnegative");
    const Eigen::Index m = G.rows();
    Matrix A = t * G;
    if (t == 0.0 || A.cwiseAbs().maxCoeff() == 0.0) return Matrix::Identity(m, m);

    // Pade 13/13 with scaling and squaring
    static const double theta13 = 5.371920351148152;
    static const double c[14] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                                 1187353796428800.0,  129060195264000.0,   10559470521600.0,
                                 670442572800.0,      33522128640.0,       1323241920.0,
                                 40840800.0,          960960.0,            16380.0,
                                 182.0,               1.0};
    double norm1 = A.cwiseAbs().colwise().sum().maxCoeff();
    int squarings = 0;
    if (norm1 > theta13) {
        squarings = static_cast<int>(std::ceil(std::log2(norm1 / theta13)));
        A /= std::pow(2.0, squarings);
    }
    Matrix A2 = A * A;
    Matrix A4 = A2 * A2;
    Matrix A6 = A4 * A2;
    Matrix U = A * (A6 * (c[13] * A6 + c[11] * A4 + c[9] * A2) + c[7] * A6 + c[5] * A4 +
                    c[3] * A2 + c[1] * Matrix::Identity(m, m));
    Matrix V = A6 * (c[12] * A6 + c[10] * A4 + c[8] * A2) + c[6] * A6 + c[4] * A4 +
               c[2] * A2 + c[0] * Matrix::Identity(m, m);
    Matrix P = (V - U).partialPivLu().solve(V + U);
    for (int s = 0; s < squarings; ++s) P = P * P;
    return P;
}

JumpOracle JumpOracle::from_generator(const Matrix& G) {
    JumpOracle oracle;
    oracle.G = G;
    oracle.p = stationary(G);
    const Eigen::Index m = G.rows();
    oracle.exit_rates.resize(m);
    oracle.target_probs.assign(m, std::vector<double>(m, 0.0));
    for (Eigen::Index j = 0; j < m; ++j) {
        oracle.exit_rates[j] = -G(j, j);
        for (Eigen::Index k = 0; k < m; ++k)
            if (k != j) oracle.target_probs[j][k] = G(j, k) / oracle.exit_rates[j];
    }
    return oracle;
}

double jump_path_probability(const JumpOracle& oracle, std::size_t j0,
                             const std::vector<TimeWindow>& deltas,
                             const std::vector<std::size_t>& targets) {
    require(deltas.size() == targets.size(), "one target per holding window required");
    const std::size_t m = static_cast<std::size_t>(oracle.G.rows());
    require(j0 < m, "invalid start state");
    double prob = 1.0;
    std::size_t state = j0;
    for (std::size_t k = 0; k < deltas.size(); ++k) {
        const TimeWindow& w = deltas[k];
        require(w.lo >= 0.0 && w.lo <= w.hi, "holding window must satisfy 0 <= lo <= hi");
        require(targets[k] < m, "invalid target state");
        double r = oracle.exit_rates[state];
        double window_mass = std::exp(-w.lo * r);
        if (std::isfinite(w.hi)) window_mass -= std::exp(-w.hi * r);
        prob *= window_mass * oracle.target_probs[state][targets[k]];
        if (prob == 0.0) return 0.0;
        state = targets[k];
    }
    return prob;
}

Vector fundamental_solve(const Matrix& G, const Vector& v) {
    const Eigen::Index m = G.rows();
    Vector p = stationary(G);
    double defect = std::abs(p.dot(v));
    double scale = std::max(1.0, v.cwiseAbs().maxCoeff());
    if (defect > 1e-10 * scale)
        throw std::invalid_argument(
            "integral diverges: v is not centered, p^T v = " + std::to_string(p.dot(v)));
    // unique solution of G x = -v on the centered subspace
    Matrix A(m + 1, m);
    A.topRows(m) = G;
    A.bottomRows(1) = p.transpose();
    Vector rhs = Vector::Zero(m + 1);
    rhs.head(m) = -v;
    Vector x = A.colPivHouseholderQr().solve(rhs);
    double residual = (G * x + v).cwiseAbs().maxCoeff() + std::abs(p.dot(x));
    if (residual > 1e-10 * scale)
        throw std::runtime_error("fundamental solve residual too large: " +
                                 std::to_string(residual));
    return x;
}

double variance_limit(const Vector& p, const Vector& psi_bar, const Matrix& G) {
    double centering = std::abs(p.dot(psi_bar));
    double scale = std::max(1.0, psi_bar.cwiseAbs().maxCoeff());
    if (centering > 1e-10 * scale)
        throw std::invalid_argument("psi_bar is not centered against p: sum = " +
                                    std::to_string(p.dot(psi_bar)));
    if (psi_bar.cwiseAbs().maxCoeff() == 0.0) return 0.0;
    Vector x = fundamental_solve(G, psi_bar);
    return 2.0 * (p.cwiseProduct(psi_bar)).dot(x);
}

double tent_variance_limit(double a_bar, double b_bar, double psi_r) {
    return 2.0 * b_bar * psi_r * psi_r / (a_bar * (a_bar + b_bar));
}

}  // namespace markov
}  // namespace metastable
