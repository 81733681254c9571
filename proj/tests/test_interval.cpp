#include <doctest.h>

#include "metastable/interval.hpp"

using namespace metastable;

TEST_CASE("affine image and preimage invert each other") {
    Interval iv{-0.5, 0.25};
    Interval img = affine_image(iv, -2.2, -1.0);
    Interval back = affine_preimage(img, -2.2, -1.0);
    CHECK(back.lo == doctest::Approx(iv.lo).epsilon(1e-15));
    CHECK(back.hi == doctest::Approx(iv.hi).epsilon(1e-15));
    CHECK(img.length() == doctest::Approx(2.2 * iv.length()));
}

TEST_CASE("normalize merges touching pieces and drops degenerate ones") {
    IntervalList list = {{0.3, 0.5}, {0.0, 0.3}, {0.7, 0.7}, {0.6, 0.9}};
    IntervalList norm = normalize(list);
    REQUIRE(norm.size() == 2);
    CHECK(norm[0].lo == 0.0);
    CHECK(norm[0].hi == 0.5);
    CHECK(norm[1].lo == 0.6);
    CHECK(norm[1].hi == 0.9);
    CHECK(total_length(norm) == doctest::Approx(0.8));
}

TEST_CASE("complement within an interval") {
    Interval whole{0.0, 1.0};
    IntervalList parts = {{0.2, 0.3}, {0.5, 0.6}};
    IntervalList comp = complement_within(whole, parts);
    REQUIRE(comp.size() == 3);
    CHECK(total_length(comp) == doctest::Approx(0.8));
    CHECK(comp[0].lo == 0.0);
    CHECK(comp[2].hi == 1.0);

    CHECK(complement_within(whole, {}).size() == 1);
    CHECK(complement_within(whole, {{0.0, 1.0}}).empty());
}

TEST_CASE("interval list intersection") {
    IntervalList a = {{0.0, 0.5}, {0.6, 1.0}};
    IntervalList b = {{0.4, 0.7}};
    IntervalList c = intersect(a, b);
    REQUIRE(c.size() == 2);
    CHECK(total_length(c) == doctest::Approx(0.2));
}
