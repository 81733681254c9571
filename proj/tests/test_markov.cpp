#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "metastable/markov.hpp"

using namespace metastable;
using markov::Matrix;
using markov::Vector;

namespace {

/// Test-side quadrature oracle for the e^{tG} integral: composite Simpson
/// on a powered step matrix, independent of the linear-solve route.
Vector simpson_integral(const Matrix& G, const Vector& v, double T, std::size_t intervals) {
    const double h = T / static_cast<double>(intervals);
    Matrix step = markov::expm(G, h);
    Matrix power = Matrix::Identity(G.rows(), G.cols());
    Vector sum = Vector::Zero(G.rows());
    for (std::size_t i = 0; i <= intervals; ++i) {
        double w = (i == 0 || i == intervals) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        sum += w * (power * v);
        if (i < intervals) power = power * step;
    }
    return (h / 3.0) * sum;
}

/// Closed-form 2-state transition matrix with eigenvalues {0, -(a+b)}.
Matrix two_state_closed_form(double a, double b, double t) {
    double c = a + b;
    double e = std::exp(-c * t);
    Matrix P(2, 2);
    P << (a + b * e) / c, (b - b * e) / c, (a - a * e) / c, (b + a * e) / c;
    return P;
}

}  // namespace

TEST_CASE("build_M fills rows to one and rejects oversized eps") {
    auto M = markov::build_M({{0.0, 1.0}, {1.0, 0.0}}, 0.1);
    CHECK(M(0, 0) == doctest::Approx(0.9));
    CHECK(M(0, 1) == doctest::Approx(0.1));
    CHECK(M(1, 0) == doctest::Approx(0.1));
    CHECK(M(1, 1) == doctest::Approx(0.9));
    for (int i = 0; i < 2; ++i) CHECK(M.row(i).sum() == doctest::Approx(1.0));

    auto I = markov::build_M({{0.0, 1.0}, {1.0, 0.0}}, 0.0);
    CHECK(I.isApprox(Matrix::Identity(2, 2)));

    CHECK_THROWS_AS(markov::build_M({{0.0, 3.0}, {3.0, 0.0}}, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(markov::build_M({{0.0, 1.0}, {-1.0, 0.0}}, 0.1), std::invalid_argument);
}

TEST_CASE("generator dresses the averaged beta matrix") {
    auto G = markov::generator({{0.0, 0.7}, {1.3, 0.0}});
    CHECK(G(0, 0) == doctest::Approx(-0.7));
    CHECK(G(0, 1) == doctest::Approx(0.7));
    CHECK(G(1, 0) == doctest::Approx(1.3));
    CHECK(G(1, 1) == doctest::Approx(-1.3));
    for (int i = 0; i < 2; ++i) CHECK(G.row(i).sum() == doctest::Approx(0.0));

    // generator equals (M_eps - I)/eps exactly for our linear-in-eps M
    for (double eps : {0.05, 0.1, 0.2}) {
        auto M = markov::build_M({{0.0, 0.7}, {1.3, 0.0}}, eps);
        CHECK(((M - Matrix::Identity(2, 2)) / eps - G).cwiseAbs().maxCoeff() <= 1e-14);
    }

    auto G3 = markov::generator({{0.0, 1.0, 0.0}, {2.0, 0.0, 1.0}, {0.0, 1.0, 0.0}});
    CHECK(G3(0, 0) == doctest::Approx(-1.0));
    CHECK(G3(1, 1) == doctest::Approx(-3.0));
    CHECK(G3(2, 2) == doctest::Approx(-1.0));

    CHECK_THROWS_AS(markov::generator({{0.0, 0.0, 1.0}, {0.0, 0.0, 0.0}, {1.0, 0.0, 0.0}}),
                    std::invalid_argument);
}

TEST_CASE("stationary distribution") {
    SUBCASE("symmetric two-state gives (1/2, 1/2)") {
        auto G = markov::generator({{0.0, 1.0}, {1.0, 0.0}});
        auto p = markov::stationary(G);
        CHECK(p(0) == doctest::Approx(0.5).epsilon(1e-13));
        CHECK(p(1) == doctest::Approx(0.5).epsilon(1e-13));
    }
    SUBCASE("a=2, b=1 gives (2/3, 1/3)") {
        auto G = markov::generator({{0.0, 1.0}, {2.0, 0.0}});
        auto p = markov::stationary(G);
        CHECK(p(0) == doctest::Approx(2.0 / 3.0).epsilon(1e-13));
        CHECK(p(1) == doctest::Approx(1.0 / 3.0).epsilon(1e-13));
    }
    SUBCASE("diag-normalised residual within contract") {
        auto G = markov::generator({{0.0, 1.0, 0.0}, {2.0, 0.0, 1.0}, {0.0, 3.0, 0.0}});
        auto p = markov::stationary(G);
        CHECK(markov::stationary_residual(G, p) <= 1e-12);
        CHECK(p.sum() == doctest::Approx(1.0).epsilon(1e-14));
    }
}

TEST_CASE("matrix exponential against the two-state closed form") {
    auto G = markov::generator({{0.0, 1.0}, {1.0, 0.0}});

    CHECK(markov::expm(G, 0.0).isApprox(Matrix::Identity(2, 2)));

    auto P = markov::expm(G, 0.5);
    CHECK(P(0, 1) == doctest::Approx((1.0 - std::exp(-1.0)) / 2.0).epsilon(1e-12));

    for (double t : {0.1, 0.7, 2.5, 9.0}) {
        auto Pt = markov::expm(G, t);
        CHECK((Pt - two_state_closed_form(1.0, 1.0, t)).cwiseAbs().maxCoeff() <= 1e-12);
        for (int i = 0; i < 2; ++i) {
            CHECK(Pt.row(i).sum() == doctest::Approx(1.0).epsilon(1e-12));
            for (int j = 0; j < 2; ++j) CHECK(Pt(i, j) >= -1e-15);
        }
    }

    auto G2 = markov::generator({{0.0, 0.7}, {1.3, 0.0}});
    for (double t : {0.3, 1.1, 4.2}) {
        CHECK((markov::expm(G2, t) - two_state_closed_form(1.3, 0.7, t))
                  .cwiseAbs()
                  .maxCoeff() <= 1e-12);
    }
}

TEST_CASE("semigroup property and stationarity under the flow") {
    auto G = markov::generator({{0.0, 1.0, 0.0}, {1.0, 0.0, 2.0}, {0.0, 1.0, 0.0}});
    auto p = markov::stationary(G);
    for (double s : {0.4, 1.9, 5.5})
        for (double t : {0.8, 3.1}) {
            auto defect = (markov::expm(G, s + t) - markov::expm(G, s) * markov::expm(G, t))
                              .cwiseAbs()
                              .maxCoeff();
            CHECK(defect <= 1e-10);
            auto drift = ((p.transpose() * markov::expm(G, t)).transpose() - p)
                             .cwiseAbs()
                             .maxCoeff();
            CHECK(drift <= 1e-10);
        }
}

TEST_CASE("jump path probabilities") {
    auto G3 = markov::generator(
        std::vector<std::vector<double>>{{0.0, 1.0, 0.0}, {1.0, 0.0, 2.0}, {0.0, 1.0, 0.0}});
    auto oracle3 = markov::JumpOracle::from_generator(G3);

    SUBCASE("certain eventual jump") {
        auto G = markov::generator({{0.0, 1.0}, {1.0, 0.0}});
        auto oracle = markov::JumpOracle::from_generator(G);
        CHECK(markov::jump_path_probability(oracle, 0, {{0.0, markov::kInf}}, {1}) ==
              doctest::Approx(1.0).epsilon(1e-14));
    }
    SUBCASE("exponential window mass") {
        auto G = markov::generator({{0.0, 1.0}, {1.0, 0.0}});
        auto oracle = markov::JumpOracle::from_generator(G);
        CHECK(markov::jump_path_probability(oracle, 0, {{0.0, 1.0}}, {1}) ==
              doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-14));
    }
    SUBCASE("target probability of the middle well") {
        CHECK(markov::jump_path_probability(oracle3, 1, {{0.0, markov::kInf}}, {2}) ==
              doctest::Approx(2.0 / 3.0).epsilon(1e-14));
        CHECK(markov::jump_path_probability(oracle3, 1, {{0.0, markov::kInf}}, {0}) ==
              doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    }
    SUBCASE("non-neighbour target has probability zero") {
        CHECK(markov::jump_path_probability(oracle3, 0, {{0.0, markov::kInf}}, {2}) == 0.0);
    }
    SUBCASE("marginals over targets and full windows sum to one") {
        double total = 0.0;
        for (std::size_t r1 : {0u, 2u})
            for (std::size_t r2 = 0; r2 < 3; ++r2) {
                if (r2 == r1) continue;
                total += markov::jump_path_probability(
                    oracle3, 1, {{0.0, markov::kInf}, {0.0, markov::kInf}},
                    {r1, r2});
            }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("two-step products factorise") {
        double p1 = markov::jump_path_probability(oracle3, 1, {{0.0, 1.0}}, {2});
        double p2 = markov::jump_path_probability(oracle3, 2, {{0.0, 0.5}}, {1});
        double joint = markov::jump_path_probability(oracle3, 1, {{0.0, 1.0}, {0.0, 0.5}},
                                                     {2, 1});
        CHECK(joint == doctest::Approx(p1 * p2).epsilon(1e-14));
    }
}

TEST_CASE("fundamental solve") {
    SUBCASE("zero vector maps to zero") {
        auto G = markov::generator({{0.0, 1.0}, {1.0, 0.0}});
        Vector v = Vector::Zero(2);
        CHECK(markov::fundamental_solve(G, v).cwiseAbs().maxCoeff() <= 1e-14);
    }
    SUBCASE("symmetric case solves the saddle system") {
        auto G = markov::generator({{0.0, 1.0}, {1.0, 0.0}});
        Vector v(2);
        v << -1.0, 1.0;
        Vector x = markov::fundamental_solve(G, v);
        CHECK(x(0) == doctest::Approx(-0.5).epsilon(1e-13));
        CHECK(x(1) == doctest::Approx(0.5).epsilon(1e-13));
        CHECK((G * x + v).cwiseAbs().maxCoeff() <= 1e-12);
    }
    SUBCASE("uncentered input is rejected with the measured defect") {
        auto G = markov::generator({{0.0, 1.0}, {1.0, 0.0}});
        Vector v(2);
        v << 1.0, 1.0;
        CHECK_THROWS_AS(markov::fundamental_solve(G, v), std::invalid_argument);
    }
    SUBCASE("quadrature cross-check on a three-state generator") {
        auto G = markov::generator({{0.0, 1.0, 0.0}, {2.0, 0.0, 1.0}, {0.0, 1.5, 0.0}});
        auto p = markov::stationary(G);
        Vector v(3);
        v << 1.0, -0.4, 0.0;
        v(2) = -(p(0) * v(0) + p(1) * v(1)) / p(2);
        Vector x = markov::fundamental_solve(G, v);
        Vector q = simpson_integral(G, v, 20.0, 16000);
        CHECK((x - q).cwiseAbs().maxCoeff() <= 1e-8);
        CHECK(std::abs(p.dot(x)) <= 1e-12);
    }
}

TEST_CASE("variance limit against the tent closed form") {
    SUBCASE("zero observable gives zero") {
        auto G = markov::generator({{0.0, 1.0}, {1.0, 0.0}});
        auto p = markov::stationary(G);
        CHECK(markov::variance_limit(p, Vector::Zero(2), G) == 0.0);
    }
    SUBCASE("symmetric tent: limit 1") {
        auto G = markov::generator({{0.0, 1.0}, {1.0, 0.0}});
        auto p = markov::stationary(G);
        Vector psi(2);
        psi << -1.0, 1.0;
        CHECK(markov::variance_limit(p, psi, G) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(markov::tent_variance_limit(1.0, 1.0, 1.0) == doctest::Approx(1.0));
    }
    SUBCASE("a=2, b=1 with psi_R = 1: limit 1/3") {
        auto G = markov::generator({{0.0, 1.0}, {2.0, 0.0}});
        auto p = markov::stationary(G);
        Vector psi(2);
        psi << -0.5, 1.0;  // centering: a*psi_L + b*psi_R = 0
        CHECK(markov::variance_limit(p, psi, G) ==
              doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    }
    SUBCASE("both routes agree over a parameter grid, and scale as c^2") {
        const double pts[5][2] = {{1.0, 1.0}, {2.0, 1.0}, {1.0, 2.0}, {0.5, 1.5}, {1.3, 0.7}};
        for (const auto& ab : pts) {
            auto G = markov::generator({{0.0, ab[1]}, {ab[0], 0.0}});
            auto p = markov::stationary(G);
            for (double psi_r : {1.0, 2.0, -0.3}) {
                Vector psi(2);
                psi << -(ab[1] / ab[0]) * psi_r, psi_r;
                double lhs = markov::variance_limit(p, psi, G);
                double rhs = markov::tent_variance_limit(ab[0], ab[1], psi_r);
                CHECK(std::abs(lhs - rhs) <= 1e-10);
            }
            // scale equivariance: psi -> 2 psi multiplies the limit by 4
            Vector psi(2);
            psi << -(ab[1] / ab[0]), 1.0;
            double base = markov::variance_limit(p, psi, G);
            double scaled = markov::variance_limit(p, Vector(2.0 * psi), G);
            CHECK(scaled == doctest::Approx(4.0 * base).epsilon(1e-12));
        }
    }
    SUBCASE("uncentered psi is rejected") {
        auto G = markov::generator({{0.0, 1.0}, {1.0, 0.0}});
        auto p = markov::stationary(G);
        Vector psi(2);
        psi << 1.0, 1.0;
        CHECK_THROWS_AS(markov::variance_limit(p, psi, G), std::invalid_argument);
    }
}
