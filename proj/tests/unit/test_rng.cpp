#include "cplab/rng.hpp"

#include <doctest.h>

#include <cmath>

using cplab::Rng;
using cplab::derive_seed;

TEST_CASE("rng: same seed gives the same stream") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) {
        CHECK(a.next_u64() == b.next_u64());
    }
}

TEST_CASE("rng: derived seeds differ per stream and are reproducible") {
    CHECK(derive_seed(7, {1, 2}) == derive_seed(7, {1, 2}));
    CHECK(derive_seed(7, {1, 2}) != derive_seed(7, {2, 1}));
    CHECK(derive_seed(7, {1}) != derive_seed(8, {1}));
}

TEST_CASE("rng: uniform and normal moments") {
    Rng rng(3);
    const int n = 200000;
    double su = 0.0, sn = 0.0, sn2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        su += u;
        const double z = rng.normal();
        sn += z;
        sn2 += z * z;
    }
    CHECK(su / n == doctest::Approx(0.5).epsilon(0.01));
    CHECK(std::abs(sn / n) < 0.01);
    CHECK(sn2 / n == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("rng: below stays in range") {
    Rng rng(5);
    for (int i = 0; i < 1000; ++i) {
        CHECK(rng.below(7) < 7);
    }
}
