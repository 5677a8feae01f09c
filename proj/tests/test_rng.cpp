#include <doctest.h>

#include <cmath>

#include "core/rng.hpp"

using namespace scmc;

TEST_CASE("identical seeds give identical streams") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("different seeds give different streams") {
    Rng a(1), b(2);
    int same = 0;
    for (int i = 0; i < 64; ++i)
        if (a.next_u64() == b.next_u64()) ++same;
    CHECK(same == 0);
}

TEST_CASE("next_double stays in [0,1) and uniform respects bounds") {
    Rng rng(5);
    for (int i = 0; i < 1000; ++i) {
        const double d = rng.next_double();
        CHECK(d >= 0.0);
        CHECK(d < 1.0);
        const double u = rng.uniform(-3.0, 2.0);
        CHECK(u >= -3.0);
        CHECK(u < 2.0);
    }
}

TEST_CASE("next_below stays in range and hits every value") {
    Rng rng(9);
    bool seen[7] = {};
    for (int i = 0; i < 2000; ++i) {
        const auto v = rng.next_below(7);
        REQUIRE(v < 7);
        seen[v] = true;
    }
    for (bool s : seen) CHECK(s);
}

TEST_CASE("normal draws have roughly standard moments") {
    Rng rng(13);
    const int n = 20000;
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = rng.normal();
        sum += x;
        sumsq += x * x;
    }
    const double mean = sum / n;
    const double var = sumsq / n - mean * mean;
    CHECK(std::fabs(mean) < 0.05);
    CHECK(var == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("split produces independent but reproducible substreams") {
    Rng a(42), b(42);
    Rng sa = a.split(3), sb = b.split(3);
    for (int i = 0; i < 50; ++i) CHECK(sa.next_u64() == sb.next_u64());

    Rng c(42);
    Rng s1 = c.split(1);
    Rng d(42);
    Rng s2 = d.split(2);
    int same = 0;
    for (int i = 0; i < 64; ++i)
        if (s1.next_u64() == s2.next_u64()) ++same;
    CHECK(same == 0);
}
