#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "metastable/environment.hpp"

using namespace metastable;

TEST_CASE("alphabet validation") {
    Alphabet ok{{"a", "b"}, {0.5, 0.5}};
    CHECK_NOTHROW(ok.validate());
    Alphabet bad_sum{{"a", "b"}, {0.5, 0.4}};
    CHECK_THROWS_AS(bad_sum.validate(), std::invalid_argument);
    Alphabet negative{{"a"}, {-1.0}};
    CHECK_THROWS_AS(negative.validate(), std::invalid_argument);
    Alphabet empty{{}, {}};
    CHECK_THROWS_AS(empty.validate(), std::invalid_argument);
}

TEST_CASE("single-symbol alphabet gives a constant path") {
    Alphabet one{{"a"}, {1.0}};
    FiberPath path = sample_path(one, 42, -5, 5);
    for (long k = -5; k <= 5; ++k) CHECK(path.symbol_at(k) == 0);
}

TEST_CASE("same (seed, k) always draws the same symbol") {
    Alphabet two{{"a", "b"}, {0.5, 0.5}};
    FiberPath p1 = sample_path(two, 123, 0, 100);
    FiberPath p2 = sample_path(two, 123, 0, 100);
    for (long k = 0; k <= 100; ++k) CHECK(p1.symbol_at(k) == p2.symbol_at(k));
    CHECK_THROWS_AS(p1.symbol_at(101), std::invalid_argument);
}

TEST_CASE("window extension preserves previously generated symbols") {
    Alphabet two{{"a", "b"}, {0.3, 0.7}};
    FiberPath big = sample_path(two, 9, -200, 200);
    FiberPath small = sample_path(two, 9, -3, 3);
    small.extend(two, -200, 200);
    for (long k = -200; k <= 200; ++k) CHECK(big.symbol_at(k) == small.symbol_at(k));
}

TEST_CASE("empirical symbol frequency matches the binomial oracle") {
    // n = 10^6 fair draws: |freq - 0.5| within 3 * sqrt(0.25/n)
    Alphabet two{{"a", "b"}, {0.5, 0.5}};
    const long n = 1000000;
    FiberPath path = sample_path(two, 2024, 0, n - 1);
    long count0 = 0;
    for (long k = 0; k < n; ++k)
        if (path.symbol_at(k) == 0) ++count0;
    double freq = static_cast<double>(count0) / static_cast<double>(n);
    CHECK(std::abs(freq - 0.5) <= 3.0 * std::sqrt(0.25 / static_cast<double>(n)));
}

TEST_CASE("Birkhoff window average of a per-symbol function") {
    Alphabet two{{"a", "b"}, {0.3, 0.7}};
    const long n = 1000000;
    FiberPath path = sample_path(two, 77, 0, n - 1);
    const double g[2] = {-1.0, 2.0};
    double sum = 0.0;
    for (long k = 0; k < n; ++k) sum += g[path.symbol_at(k)];
    double avg = sum / static_cast<double>(n);
    double expected = 0.3 * g[0] + 0.7 * g[1];
    double variance = 0.3 * g[0] * g[0] + 0.7 * g[1] * g[1] - expected * expected;
    double se = std::sqrt(variance / static_cast<double>(n));
    CHECK(std::abs(avg - expected) <= 4.0 * se);
}

TEST_CASE("averaged beta is the probability-weighted mean") {
    SUBCASE("two symbols, b in {0.5, 1.5}") {
        Environment env = make_tent_environment({{1.0, 0.5}, {1.0, 1.5}}, {0.5, 0.5});
        auto avg = env.averaged_beta();
        CHECK(avg[0][1] == doctest::Approx(1.0));   // b averaged
        CHECK(avg[1][0] == doctest::Approx(1.0));   // a averaged
    }
    SUBCASE("weighted mean q = (0.3, 0.7), a in {0.1, 0.2}") {
        Environment env = make_tent_environment({{0.1, 1.0}, {0.2, 1.0}}, {0.3, 0.7});
        CHECK(env.averaged_beta()[1][0] == doctest::Approx(0.17));
    }
    SUBCASE("one symbol returns beta itself") {
        Environment env = make_tent_environment({{0.4, 0.9}}, {1.0});
        auto avg = env.averaged_beta();
        CHECK(avg[0][1] == doctest::Approx(0.9));
        CHECK(avg[1][0] == doctest::Approx(0.4));
    }
    SUBCASE("linearity and monotonicity in the assignment") {
        Environment lo = make_tent_environment({{0.2, 0.3}, {0.4, 0.5}}, {0.3, 0.7});
        Environment hi = make_tent_environment({{0.4, 0.6}, {0.8, 1.0}}, {0.3, 0.7});
        auto a = lo.averaged_beta();
        auto b = hi.averaged_beta();
        CHECK(b[0][1] == doctest::Approx(2.0 * a[0][1]));
        CHECK(b[1][0] == doctest::Approx(2.0 * a[1][0]));
        CHECK(b[0][1] >= a[0][1]);
    }
}

TEST_CASE("weighted mean with m-well scales") {
    // q = (0.3, 0.7), per-symbol scale in {1, 2}: averaged beta = 1.7 * base
    std::vector<std::vector<double>> base = {{0.0, 1.0}, {1.0, 0.0}};
    Alphabet two{{"a", "b"}, {0.3, 0.7}};
    std::vector<SymbolParams> params = {{PairedTentParams{}, base, 1.0},
                                        {PairedTentParams{}, base, 2.0}};
    Environment env(two, MapFamily::m_well, params);
    auto avg = env.averaged_beta();
    CHECK(avg[0][1] == doctest::Approx(1.7));
}

TEST_CASE("fiber_map attaches the per-symbol parameters") {
    Environment env = make_tent_environment({{1.0, 0.5}, {1.0, 1.5}}, {0.5, 0.5});
    FiberPath path = sample_path(env.alphabet(), 5, 0, 50);
    const double eps = 0.1;
    for (long k = 0; k < 10; ++k) {
        PiecewiseAffineMap map = env.fiber_map(path, k, eps);
        double b = path.symbol_at(k) == 0 ? 0.5 : 1.5;
        // hole length from the closed form eps*b/(1+eps*b)
        CHECK(total_length(normalize(map.holes(0, 1))) ==
              doctest::Approx(eps * b / (1.0 + eps * b)).epsilon(1e-12));
    }
    CHECK_THROWS_AS(env.fiber_map(path, 51, eps), std::invalid_argument);

    // eps = 0 gives the unperturbed map regardless of symbol
    PiecewiseAffineMap t0a = env.fiber_map(path, 0, 0.0);
    PiecewiseAffineMap t0b = env.fiber_map(path, 1, 0.0);
    for (double x : {-0.8, -0.3, 0.4, 0.9})
        CHECK(t0a.eval(x) == t0b.eval(x));
}

TEST_CASE("beta* floor is enforced at construction") {
    CHECK_THROWS_AS(make_tent_environment({{0.01, 0.5}}, {1.0}), std::invalid_argument);
    std::vector<std::vector<double>> tiny = {{0.0, 0.01}, {1.0, 0.0}};
    CHECK_THROWS_AS(make_mwell_environment(2, tiny), std::invalid_argument);
}
