#include <doctest.h>

#include <cmath>

#include "metastable/diffusion.hpp"
#include "metastable/markov.hpp"
#include "metastable/observable.hpp"

using namespace metastable;

namespace {

Observable linear_psi() {
    // psi(x) = x on [-1, 1], one shared table
    std::vector<PolyPiece> table = {{{-1.0, 1.0}, {0.0, 1.0, 0.0, 0.0}}};
    return Observable({table}, 1.0, 2.0);
}

std::vector<double> stationary_vec(const Environment& env) {
    auto G = markov::generator(env.averaged_beta());
    auto p = markov::stationary(G);
    return {p.data(), p.data() + p.size()};
}

}  // namespace

TEST_CASE("piecewise polynomial evaluation and exact integrals") {
    std::vector<PolyPiece> table = {{{-1.0, 0.0}, {1.0, 2.0, 0.0, 0.0}},
                                    {{0.0, 1.0}, {0.0, 0.0, 3.0, 0.0}}};
    Observable psi({table}, 3.0, 8.0);
    CHECK(psi.eval(0, -0.5) == doctest::Approx(0.0));
    CHECK(psi.eval(0, 0.5) == doctest::Approx(0.75));
    // integral of 1 + 2x over [-1, 0] is 0; of 3x^2 over [0, 1] is 1
    CHECK(psi.integral(0, {-1.0, 0.0}) == doctest::Approx(0.0));
    CHECK(psi.integral(0, {0.0, 1.0}) == doctest::Approx(1.0));
    // squared integrals: (1+2x)^2 over [-1,0] = 1/3 + ... computed by hand:
    // int_{-1}^{0} (1 + 4x + 4x^2) = 1 - 2 + 4/3 = 1/3
    CHECK(psi.integral_squared(0, {-1.0, 0.0}) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    // int_0^1 9x^4 = 9/5
    CHECK(psi.integral_squared(0, {0.0, 1.0}) == doctest::Approx(9.0 / 5.0).epsilon(1e-14));
}

TEST_CASE("Psi vectors against hand integrals") {
    Environment env = make_tent_environment({{1.0, 1.0}}, {1.0});
    PsiVector vec = PsiVector::compute(linear_psi(), env);
    CHECK(vec.averaged[0] == doctest::Approx(-0.5).epsilon(1e-14));
    CHECK(vec.averaged[1] == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("fibrewise centering") {
    Environment env = make_tent_environment({{1.0, 1.0}}, {1.0});
    auto p = stationary_vec(env);

    SUBCASE("psi(x) = x with symmetric rates is already centered") {
        Observable psi = center_fibrewise(linear_psi(), p, env);
        PsiVector vec = PsiVector::compute(psi, env);
        CHECK(vec.averaged[0] == doctest::Approx(-0.5).epsilon(1e-13));
        CHECK(vec.averaged[1] == doctest::Approx(0.5).epsilon(1e-13));
    }

    SUBCASE("constant observables center to zero") {
        std::vector<PolyPiece> table = {{{-1.0, 1.0}, {1.0, 0.0, 0.0, 0.0}}};
        Observable one({table}, 1.0, 0.0);
        Observable centered = center_fibrewise(one, p, env);
        for (double x : {-0.9, -0.2, 0.4, 0.8}) CHECK(centered.eval(0, x) == 0.0);
    }

    SUBCASE("centering is idempotent") {
        std::vector<PolyPiece> table = {{{-1.0, 0.0}, {0.3, -1.0, 0.5, 0.0}},
                                        {{0.0, 1.0}, {2.0, 0.1, 0.0, -0.4}}};
        Observable psi({table}, 4.0, 10.0);
        Observable once = center_fibrewise(psi, p, env);
        Observable twice = center_fibrewise(once, p, env);
        PsiVector v1 = PsiVector::compute(once, env);
        PsiVector v2 = PsiVector::compute(twice, env);
        double c = 0.0;
        for (std::size_t j = 0; j < 2; ++j) c += p[j] * v1.averaged[j];
        CHECK(std::abs(c) <= 1e-14);
        for (std::size_t j = 0; j < 2; ++j)
            CHECK(v1.averaged[j] == doctest::Approx(v2.averaged[j]).epsilon(1e-15));
        for (double x : {-0.7, 0.1, 0.9})
            CHECK(once.eval(0, x) == doctest::Approx(twice.eval(0, x)).epsilon(1e-15));
    }

    SUBCASE("asymmetric rates shift by the p-weighted mean") {
        Environment skew = make_tent_environment({{2.0, 1.0}}, {1.0});
        auto p_skew = stationary_vec(skew);
        // step observable with values (0, 1): c = p_R = 1/3
        Observable step = make_step_observable(skew, {0.0, 1.0});
        Observable centered = center_fibrewise(step, p_skew, skew);
        CHECK(centered.eval(0, -0.5) == doctest::Approx(-1.0 / 3.0).epsilon(1e-13));
        CHECK(centered.eval(0, 0.5) == doctest::Approx(2.0 / 3.0).epsilon(1e-13));
    }
}

TEST_CASE("cell tables hold exact per-cell means") {
    Environment env = make_tent_environment({{1.0, 1.0}}, {1.0});
    GridPtr grid = aligned_grid(env, 0.0, 64);
    Observable psi = linear_psi();
    ObservableCellTables tables = ObservableCellTables::compute(psi, *grid);
    for (std::size_t k = 0; k < grid->cell_count(); ++k) {
        Interval cell = grid->cell(k);
        CHECK(tables.mean[0][k] == doctest::Approx(cell.midpoint()).epsilon(1e-13));
        double lo = cell.lo, hi = cell.hi;
        double exact_sq = (hi * hi * hi - lo * lo * lo) / 3.0 / cell.length();
        CHECK(tables.mean_sq[0][k] == doctest::Approx(exact_sq).epsilon(1e-13));
    }
}

TEST_CASE("eps-centering via the closed cocycle") {
    Environment env = make_tent_environment({{1.0, 1.0}}, {1.0});
    GridPtr grid = aligned_grid(env, 0.02, 512);
    FiberPath path = sample_path(env.alphabet(), 3, 0, 64);

    SUBCASE("constant observables have constant fiber means") {
        std::vector<PolyPiece> table = {{{-1.0, 1.0}, {2.5, 0.0, 0.0, 0.0}}};
        Observable constant({table}, 2.5, 0.0);
        FiberMeans fm = closed_fiber_means(env, path, constant, 0.02, grid, 16, 256);
        for (double mu : fm.means) CHECK(mu == doctest::Approx(2.5).epsilon(1e-12));
    }

    SUBCASE("fiber means converge to the fibrewise-centered constant as eps -> 0") {
        // for the closed cocycle phi^0 = p_L phi_L + p_R phi_R, the fiber
        // mean of a centered observable tends to zero with eps
        auto p = stationary_vec(env);
        Observable psi = center_fibrewise(make_step_observable(env, {-1.0, 1.0}), p, env);
        double prev = 1e9;
        for (double eps : {0.04, 0.02, 0.01}) {
            GridPtr g = aligned_grid(env, eps, 512);
            FiberMeans fm = closed_fiber_means(env, path, psi, eps, g, 8);
            double worst = 0.0;
            for (double mu : fm.means) worst = std::max(worst, std::abs(mu));
            CHECK(worst <= prev + 1e-12);
            prev = worst;
        }
        CHECK(prev <= 0.05);
    }
}
