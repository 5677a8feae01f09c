#include <doctest.h>

#include <cmath>
#include <cstring>
#include <stdexcept>

#include "diffcore/tape.hpp"
#include "helpers.hpp"

using namespace scmc;
using diff::Tape;
using testutil::random_matrix;
using testutil::random_matrix_away_from_zero;

TEST_CASE("forward evaluates simple graphs") {
    SUBCASE("frob_sq") {
        Tape t;
        auto x = t.constant(Matrix{{1, 2}, {3, 4}}, "x");
        t.set_root(t.frob_sq(x));
        CHECK(t.forward() == doctest::Approx(30.0));
    }
    SUBCASE("trace of identity product") {
        Tape t;
        auto a = t.constant(Matrix::identity(2), "a");
        auto b = t.constant(Matrix::identity(2), "b");
        t.set_root(t.trace(t.matmul(a, b)));
        CHECK(t.forward() == doctest::Approx(2.0));
    }
}

TEST_CASE("forward is bit-deterministic") {
    Rng rng(3);
    Tape t;
    auto a = t.input("a", 4, 4, true);
    auto b = t.input("b", 4, 4, true);
    t.set_root(t.sum(t.tanh(t.matmul(a, b))));
    const Matrix ma = random_matrix(rng, 4, 4), mb = random_matrix(rng, 4, 4);
    t.bind(a, ma);
    t.bind(b, mb);
    const double v1 = t.forward();
    t.bind(a, ma);
    t.bind(b, mb);
    const double v2 = t.forward();
    CHECK(std::memcmp(&v1, &v2, sizeof(double)) == 0);
}

TEST_CASE("basic analytic gradients") {
    SUBCASE("d/dX frob_sq(X) = 2X") {
        Tape t;
        auto x = t.input("x", 1, 2, true);
        t.set_root(t.frob_sq(x));
        t.bind(x, Matrix{{1, 2}});
        t.forward();
        t.backward();
        const Matrix& g = t.grad_of(x);
        CHECK(g(0, 0) == doctest::Approx(2.0));
        CHECK(g(0, 1) == doctest::Approx(4.0));
    }
    SUBCASE("d/dW trace(W X) = X^T") {
        Rng rng(1);
        Tape t;
        auto w = t.input("w", 3, 3, true);
        const Matrix xm = random_matrix(rng, 3, 3);
        auto x = t.constant(xm, "x");
        t.set_root(t.trace(t.matmul(w, x)));
        t.bind(w, random_matrix(rng, 3, 3));
        t.forward();
        t.backward();
        CHECK(testutil::max_abs_diff(t.grad_of(w), transpose(xm)) < 1e-12);
    }
}

TEST_CASE("backward before forward is a usage error") {
    Tape t;
    auto x = t.input("x", 1, 1, true);
    t.set_root(t.frob_sq(x));
    CHECK_THROWS_AS(t.backward(), std::logic_error);
}

TEST_CASE("shape mismatch is rejected at construction") {
    Tape t;
    auto a = t.input("a", 2, 3);
    auto b = t.input("b", 2, 3);
    CHECK_THROWS_AS(t.matmul(a, b), std::invalid_argument);
    CHECK_THROWS_AS(t.add(a, t.input("c", 3, 2)), std::invalid_argument);
}

TEST_CASE("non-finite intermediate names the node") {
    Tape t;
    auto x = t.input("x", 1, 1, true);
    t.set_root(t.sum(t.log(x)));
    t.bind(x, Matrix{{-1.0}});
    CHECK_THROWS_WITH_AS(t.forward(), doctest::Contains("log"), std::runtime_error);
}

TEST_CASE("grad_check validates the step size") {
    Tape t;
    auto x = t.input("x", 1, 1, true);
    t.set_root(t.frob_sq(x));
    t.bind(x, Matrix{{0.5}});
    CHECK_THROWS_AS(t.grad_check(0.0, 1e-4), std::invalid_argument);
    CHECK_THROWS_AS(t.grad_check(0.1, 1e-4), std::invalid_argument);
}

namespace {

void expect_grad_check_passes(Tape& t, double h = 1e-5, double tol = 1e-4) {
    for (const auto& e : t.grad_check(h, tol)) {
        INFO("input ", e.name, " max rel err ", e.max_rel_err);
        CHECK(e.pass);
    }
}

}  // namespace

TEST_CASE("finite differences validate every primitive over many seeds") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Rng rng(seed);
        const std::size_t n = 2 + rng.next_below(3);

        SUBCASE("") {}  // keep doctest quiet about loops
        {
            // matmul / add / sub / tanh / add_rowvec / scale chain
            Tape t;
            auto a = t.input("a", n, n, true);
            auto b = t.input("b", n, n, true);
            auto bias = t.input("bias", 1, n, true);
            auto h1 = t.tanh(t.add_rowvec(t.matmul(a, b), bias));
            t.set_root(t.frob_sq(t.sub(t.scale(h1, 1.7), a)));
            t.bind(a, random_matrix(rng, n, n));
            t.bind(b, random_matrix(rng, n, n));
            t.bind(bias, random_matrix(rng, 1, n));
            t.forward();
            expect_grad_check_passes(t);
        }
        {
            // hadamard / exp / log / rowsum / transpose
            Tape t;
            auto a = t.input("a", n, n, true);
            auto b = t.input("b", n, n, true);
            auto pos = t.exp(t.hadamard(a, t.transpose(b)));
            t.set_root(t.sum(t.log(t.rowsum(pos))));
            t.bind(a, random_matrix(rng, n, n));
            t.bind(b, random_matrix(rng, n, n));
            t.forward();
            expect_grad_check_passes(t);
        }
        {
            // relu with entries away from the kink
            Tape t;
            auto a = t.input("a", n, n, true);
            t.set_root(t.frob_sq(t.relu(a)));
            t.bind(a, random_matrix_away_from_zero(rng, n, n));
            t.forward();
            expect_grad_check_passes(t);
        }
        {
            // cosine_gram
            Tape t;
            auto u = t.input("u", n, n + 1, true);
            auto w = t.input("w", n, n + 1, true);
            t.set_root(t.frob_sq(t.cosine_gram(u, w)));
            t.bind(u, random_matrix(rng, n, n + 1));
            t.bind(w, random_matrix(rng, n, n + 1));
            t.forward();
            expect_grad_check_passes(t);
        }
        {
            // softmax_row / scalar_mul / elem
            Tape t;
            auto logits = t.input("logits", 1, 4, true);
            auto m = t.input("m", n, n, true);
            auto w0 = t.elem(t.softmax_row(logits), 0, 0);
            t.set_root(t.sum(t.scalar_mul(w0, m)));
            t.bind(logits, random_matrix(rng, 1, 4));
            t.bind(m, random_matrix(rng, n, n));
            t.forward();
            expect_grad_check_passes(t);
        }
        {
            // affinity projection, entries away from the relu kink
            Tape t;
            auto a = t.input("a", n + 1, n + 1, true);
            t.set_root(t.frob_sq(t.affinity_project(a)));
            t.bind(a, random_matrix_away_from_zero(rng, n + 1, n + 1));
            t.forward();
            expect_grad_check_passes(t);
        }
    }
}

TEST_CASE("cosine_gram handles zero rows as similarity 0 with zero gradient") {
    Tape t;
    auto u = t.input("u", 2, 2, true);
    t.set_root(t.frob_sq(t.cosine_gram(u, u)));
    Matrix m(2, 2);
    m(0, 0) = 1.0;  // second row all zero
    t.bind(u, m);
    t.forward();
    const Matrix& g = t.value_of(t.node_count() - 2);  // gram node
    CHECK(g(0, 0) == doctest::Approx(1.0));
    CHECK(g(0, 1) == 0.0);
    CHECK(g(1, 1) == 0.0);
    t.backward();
    CHECK(t.grad_of(u)(1, 0) == 0.0);
    CHECK(t.grad_of(u)(1, 1) == 0.0);
}

TEST_CASE("affinity_project fallback rows are constant with zero gradient") {
    Tape t;
    auto a = t.input("a", 3, 3, true);
    auto proj = t.affinity_project(a);
    t.set_root(t.frob_sq(proj));
    Matrix m{{-1, -2, -3}, {0.5, 1.0, 0.5}, {2, -1, 3}};
    t.bind(a, m);
    t.forward();
    const Matrix& p = t.value_of(proj);
    CHECK(p(0, 0) == 0.0);
    CHECK(p(0, 1) == doctest::Approx(0.5));
    CHECK(p(0, 2) == doctest::Approx(0.5));
    t.backward();
    for (std::size_t j = 0; j < 3; ++j) CHECK(t.grad_of(a)(0, j) == 0.0);
}

TEST_CASE("gradient linearity in the objective") {
    Rng rng(77);
    const Matrix ma = random_matrix(rng, 3, 3);
    const double ca = 1.3, cb = -0.7;

    auto build = [&](double wa, double wb) {
        Tape t;
        auto x = t.input("x", 3, 3, true);
        auto f = t.frob_sq(t.tanh(x));
        auto g = t.sum(t.hadamard(x, x));
        t.set_root(t.add(t.scale(f, wa), t.scale(g, wb)));
        t.bind(x, ma);
        t.forward();
        t.backward();
        return t.grad_of(x);
    };

    const Matrix gf = build(1.0, 0.0);
    const Matrix gg = build(0.0, 1.0);
    const Matrix gboth = build(ca, cb);
    Matrix expect = add(scale(gf, ca), scale(gg, cb));
    CHECK(testutil::max_abs_diff(gboth, expect) < 1e-12);
}

TEST_CASE("grad_check reports failures at impossible tolerance") {
    Rng rng(5);
    Tape t;
    auto x = t.input("x", 3, 3, true);
    t.set_root(t.frob_sq(t.tanh(x)));
    t.bind(x, random_matrix(rng, 3, 3));
    t.forward();
    const auto report = t.grad_check(1e-5, 0.0);
    bool any_fail = false;
    for (const auto& e : report) any_fail = any_fail || !e.pass;
    CHECK(any_fail);
}
