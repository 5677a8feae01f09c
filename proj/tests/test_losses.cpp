#include <doctest.h>

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "helpers.hpp"
#include "losses/losses.hpp"

using namespace scmc;
using testutil::random_matrix;
using testutil::random_matrix_away_from_zero;

namespace {

// Independent oracles, written as plain elementwise loops.

double oracle_recon(const std::vector<Matrix>& x, const std::vector<Matrix>& xhat) {
    double s = 0.0;
    for (std::size_t v = 0; v < x.size(); ++v)
        for (std::size_t i = 0; i < x[v].rows(); ++i)
            for (std::size_t j = 0; j < x[v].cols(); ++j) {
                const double d = x[v](i, j) - xhat[v](i, j);
                s += d * d;
            }
    return s;
}

double oracle_subspace(const std::vector<Matrix>& c, const std::vector<Matrix>& z) {
    double s = 0.0;
    for (std::size_t v = 0; v < c.size(); ++v) {
        const std::size_t n = c[v].rows(), k = c[v].cols();
        // residual of C^T - C^T Z, entry (a, i) with a over the embedding dim
        for (std::size_t a = 0; a < k; ++a)
            for (std::size_t i = 0; i < n; ++i) {
                double ct_z = 0.0;
                for (std::size_t j = 0; j < n; ++j) ct_z += c[v](j, a) * z[v](j, i);
                const double d = c[v](i, a) - ct_z;
                s += d * d;
            }
    }
    return s;
}

double oracle_cos(const Matrix& m, std::size_t i, const Matrix& w, std::size_t j) {
    double dot = 0.0, nu = 0.0, nv = 0.0;
    for (std::size_t t = 0; t < m.cols(); ++t) {
        dot += m(i, t) * w(j, t);
        nu += m(i, t) * m(i, t);
        nv += w(j, t) * w(j, t);
    }
    nu = std::sqrt(nu);
    nv = std::sqrt(nv);
    if (nu < 1e-12 || nv < 1e-12) return 0.0;
    return dot / (nu * nv);
}

double oracle_view_contrastive(std::size_t v, const std::vector<Matrix>& z, double tau) {
    const std::size_t V = z.size(), n = z[v].rows();
    double lv = 0.0;
    for (std::size_t k = 0; k < V; ++k) {
        if (k == v) continue;
        for (std::size_t i = 0; i < n; ++i) {
            double denom = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                if (j != i) denom += std::exp(oracle_cos(z[v], i, z[v], j) / tau);
                denom += std::exp(oracle_cos(z[v], i, z[k], j) / tau);
            }
            lv -= std::log(std::exp(oracle_cos(z[v], i, z[k], i) / tau) / denom);
        }
    }
    return lv;
}

double oracle_fusion(const std::vector<Matrix>& z, const Matrix& a) {
    const std::size_t n = a.rows();
    double s = 0.0;
    for (const auto& zv : z)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                double dist = 0.0;
                for (std::size_t t = 0; t < zv.cols(); ++t) {
                    const double d = zv(i, t) - zv(j, t);
                    dist += d * d;
                }
                s += dist * 0.5 * (a(i, j) + a(j, i));
            }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) s += a(i, j) * a(i, j);
    return s;
}

}  // namespace

TEST_CASE("hyperparameter validation") {
    Hyperparams hp;
    CHECK_NOTHROW(hp.validate());
    hp.tau = 0.0;
    CHECK_THROWS_AS(hp.validate(), std::invalid_argument);
    hp = Hyperparams{};
    hp.gamma1 = -1.0;
    CHECK_THROWS_AS(hp.validate(), std::invalid_argument);
    hp = Hyperparams{};
    hp.train_epochs = 0;
    CHECK_THROWS_AS(hp.validate(), std::invalid_argument);
}

TEST_CASE("reconstruction loss") {
    CHECK(reconstruction_loss({Matrix{{1, 0}}}, {Matrix{{0, 0}}}) == doctest::Approx(1.0));
    Rng rng(1);
    for (int t = 0; t < 100; ++t) {
        const std::size_t n = 1 + rng.next_below(10), d = 1 + rng.next_below(6);
        std::vector<Matrix> x{random_matrix(rng, n, d), random_matrix(rng, n, d)};
        std::vector<Matrix> xh{random_matrix(rng, n, d), random_matrix(rng, n, d)};
        CHECK(std::fabs(reconstruction_loss(x, xh) - oracle_recon(x, xh)) < 1e-9);
        CHECK(reconstruction_loss(x, x) == 0.0);
    }
    CHECK_THROWS_AS(reconstruction_loss({Matrix(2, 2)}, {Matrix(2, 3)}), std::invalid_argument);
}

TEST_CASE("subspace loss") {
    Rng rng(2);
    for (int t = 0; t < 100; ++t) {
        const std::size_t n = 2 + rng.next_below(8), c = 1 + rng.next_below(4);
        std::vector<Matrix> cs{random_matrix(rng, n, c), random_matrix(rng, n, c)};
        std::vector<Matrix> zs{random_matrix(rng, n, n), random_matrix(rng, n, n)};
        CHECK(std::fabs(subspace_loss(cs, zs) - oracle_subspace(cs, zs)) < 1e-9);

        std::vector<Matrix> ident{Matrix::identity(n), Matrix::identity(n)};
        CHECK(subspace_loss(cs, ident) == doctest::Approx(0.0).epsilon(1e-12));
        std::vector<Matrix> zero{Matrix(n, n), Matrix(n, n)};
        CHECK(subspace_loss(cs, zero) ==
              doctest::Approx(frob_sq(cs[0]) + frob_sq(cs[1])).epsilon(1e-12));
    }
}

TEST_CASE("cosine similarity") {
    CHECK(cosine_similarity({1, 0}, {1, 0}) == doctest::Approx(1.0));
    CHECK(cosine_similarity({1, 0}, {0, 1}) == doctest::Approx(0.0));
    CHECK(cosine_similarity({1, 1}, {1, 0}) == doctest::Approx(0.70710678).epsilon(1e-7));
    CHECK(cosine_similarity({0, 0}, {1, 0}) == 0.0);
    CHECK_THROWS_AS(cosine_similarity({1.0}, {1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("contrastive worked examples") {
    const double tau = 0.1;
    SUBCASE("orthonormal rows") {
        std::vector<Matrix> z{Matrix::identity(2), Matrix::identity(2)};
        const double per_anchor = -std::log(std::exp(10.0) / (std::exp(10.0) + 2.0));
        const double l1 = view_contrastive_loss(0, z, tau);
        CHECK(std::fabs(l1 - 2.0 * per_anchor) < 1e-8);
        CHECK(std::fabs(l1 - 1.816e-4) < 1e-6);
        CHECK(std::fabs(contrastive_loss(z, tau) - (2.0 * l1) / 4.0) < 1e-8);
        CHECK(std::fabs(contrastive_loss(z, tau) - 9.08e-5) < 1e-6);
    }
    SUBCASE("all rows identical") {
        Matrix m{{0.3, 0.4}, {0.3, 0.4}};
        std::vector<Matrix> z{m, m};
        const double l1 = view_contrastive_loss(0, z, tau);
        CHECK(std::fabs(l1 - 2.0 * std::log(3.0)) < 1e-8);
        CHECK(std::fabs(contrastive_loss(z, tau) - std::log(3.0)) < 1e-8);
    }
}

TEST_CASE("contrastive loss matches the brute-force oracle") {
    Rng rng(3);
    for (int t = 0; t < 100; ++t) {
        const std::size_t n = 2 + rng.next_below(8);
        const std::size_t V = 2 + rng.next_below(2);
        std::vector<Matrix> z;
        for (std::size_t v = 0; v < V; ++v) z.push_back(random_matrix(rng, n, n));
        for (std::size_t v = 0; v < V; ++v)
            CHECK(std::fabs(view_contrastive_loss(v, z, 0.1) - oracle_view_contrastive(v, z, 0.1)) <
                  1e-9);
        double total = 0.0;
        for (std::size_t v = 0; v < V; ++v) total += oracle_view_contrastive(v, z, 0.1);
        CHECK(std::fabs(contrastive_loss(z, 0.1) - total / double(n * V)) < 1e-9);
        CHECK(view_contrastive_loss(0, z, 0.1) > 0.0);
    }
    CHECK_THROWS_AS(view_contrastive_loss(0, std::vector<Matrix>{Matrix(3, 3)}, 0.1),
                    std::invalid_argument);
}

TEST_CASE("contrastive loss invariances") {
    Rng rng(4);
    const std::size_t n = 5;
    std::vector<Matrix> z{random_matrix(rng, n, n), random_matrix(rng, n, n)};
    const double base = contrastive_loss(z, 0.1);

    SUBCASE("common row permutation") {
        std::vector<std::size_t> perm{3, 0, 4, 1, 2};
        std::vector<Matrix> zp = z;
        for (auto& m : zp) {
            Matrix p(n, n);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) p(i, j) = m(perm[i], j);
            m = p;
        }
        CHECK(std::fabs(contrastive_loss(zp, 0.1) - base) < 1e-9);
    }
    SUBCASE("positive rescaling of one row") {
        std::vector<Matrix> zs = z;
        for (std::size_t j = 0; j < n; ++j) zs[1](2, j) *= 7.5;
        CHECK(std::fabs(contrastive_loss(zs, 0.1) - base) < 1e-9);
    }
}

TEST_CASE("negative and positive counts per anchor") {
    Rng rng(5);
    std::vector<Matrix> z;
    for (int v = 0; v < 3; ++v) z.push_back(random_matrix(rng, 5, 5));
    ContrastAudit audit;
    for (std::size_t v = 0; v < 3; ++v) {
        view_contrastive_loss(v, z, 0.1, &audit);
        CHECK(audit.positives_per_anchor == 2);   // V-1
        CHECK(audit.negatives_per_anchor == 12);  // V(N-1)
        CHECK(audit.uniform);
    }
}

TEST_CASE("fusion loss") {
    Rng rng(6);
    SUBCASE("zero affinity") {
        std::vector<Matrix> z{random_matrix(rng, 4, 4), random_matrix(rng, 4, 4)};
        CHECK(fusion_loss(z, Matrix(4, 4)) == doctest::Approx(0.0));
    }
    SUBCASE("identical rows leave only the norm term") {
        Matrix m(4, 4);
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = 0; j < 4; ++j) m(i, j) = 0.3 * double(j);
        std::vector<Matrix> z{m, m};
        const Matrix a = random_matrix(rng, 4, 4);
        CHECK(fusion_loss(z, a) == doctest::Approx(frob_sq(a)).epsilon(1e-12));
    }
    SUBCASE("brute-force oracle on random instances") {
        for (int t = 0; t < 100; ++t) {
            const std::size_t n = 2 + rng.next_below(9);
            std::vector<Matrix> z{random_matrix(rng, n, n), random_matrix(rng, n, n)};
            const Matrix a = random_matrix(rng, n, n, 0.0, 1.0);
            CHECK(std::fabs(fusion_loss(z, a) - oracle_fusion(z, a)) < 1e-9);
        }
    }
}

namespace {

ScmcModel small_model(std::uint64_t seed, std::size_t V, std::size_t n,
                      const std::vector<std::size_t>& dims, std::size_t c) {
    Rng rng(seed);
    ScmcModel m = ScmcModel::create(V, n, c, dims, ArchTag::Narrow, rng);
    // move Z well away from zero so relu kinks cannot sit under the
    // finite-difference probes
    Rng zr = rng.split(99);
    for (auto& v : m.views)
        v.z = testutil::random_matrix_away_from_zero(zr, n, n, 0.3, 1.0);
    m.omega_logits = testutil::random_matrix(zr, 1, V, -0.5, 0.5);
    return m;
}

}  // namespace

TEST_CASE("total loss breakdown") {
    ScmcModel m = small_model(7, 2, 4, {3, 5}, 2);
    Rng rng(8);
    std::vector<Matrix> x{random_matrix(rng, 4, 3, 0.0, 1.0), random_matrix(rng, 4, 5, 0.0, 1.0)};
    Hyperparams hp;

    const LossBreakdown b = total_loss(m, x, hp);
    CHECK(b.re >= 0.0);
    CHECK(b.sub >= 0.0);
    CHECK(b.con > 0.0);
    CHECK(b.fu >= 0.0);
    CHECK(std::fabs(b.total - (b.re + hp.gamma1 * b.sub + hp.gamma2 * b.con + hp.gamma3 * b.fu)) <
          1e-9);

    Hyperparams hp0 = hp;
    hp0.gamma1 = hp0.gamma2 = hp0.gamma3 = 0.0;
    const LossBreakdown b0 = total_loss(m, x, hp0);
    CHECK(b0.total == doctest::Approx(b0.re).epsilon(1e-12));
}

TEST_CASE("objective graph agrees with the plain evaluators") {
    ScmcModel m = small_model(9, 3, 5, {4, 3, 6}, 2);
    Rng rng(10);
    std::vector<Matrix> x{random_matrix(rng, 5, 4, 0.0, 1.0), random_matrix(rng, 5, 3, 0.0, 1.0),
                          random_matrix(rng, 5, 6, 0.0, 1.0)};
    Hyperparams hp;

    ObjectiveGraph g = build_objective(m, x, hp);
    g.bind(m);
    const double total = g.tape.forward();
    const LossBreakdown gb = g.breakdown(hp);
    const LossBreakdown pb = total_loss(m, x, hp);

    CHECK(std::fabs(gb.re - pb.re) < 1e-9);
    CHECK(std::fabs(gb.sub - pb.sub) < 1e-9);
    CHECK(std::fabs(gb.con - pb.con) < 1e-9);
    CHECK(std::fabs(gb.fu - pb.fu) < 1e-9);
    CHECK(std::fabs(total - pb.total) < 1e-9);
}

TEST_CASE("masked objective reports masked terms as zero") {
    ScmcModel m = small_model(11, 2, 4, {3, 3}, 2);
    Rng rng(12);
    std::vector<Matrix> x{random_matrix(rng, 4, 3, 0.0, 1.0), random_matrix(rng, 4, 3, 0.0, 1.0)};
    Hyperparams hp;

    ObjectiveGraph g = build_objective(m, x, hp, kLossRe | kLossSub);
    g.bind(m);
    g.tape.forward();
    const LossBreakdown b = g.breakdown(hp);
    CHECK(b.con == 0.0);
    CHECK(b.fu == 0.0);
    CHECK(b.re > 0.0);
    CHECK(std::fabs(b.total - (b.re + hp.gamma1 * b.sub)) < 1e-9);

    CHECK_THROWS_AS(build_objective(m, x, hp, kLossSub), std::invalid_argument);
}

TEST_CASE("full objective passes a small gradient check") {
    ScmcModel m = small_model(13, 2, 4, {3, 4}, 2);
    Rng rng(14);
    std::vector<Matrix> x{random_matrix(rng, 4, 3, 0.0, 1.0), random_matrix(rng, 4, 4, 0.0, 1.0)};
    Hyperparams hp;

    ObjectiveGraph g = build_objective(m, x, hp);
    g.bind(m);
    g.tape.forward();
    // cap probes on the big weight matrices; the acceptance suite runs the
    // exhaustive version
    for (const auto& e : g.tape.grad_check(1e-5, 1e-4, 60)) {
        INFO("parameter ", e.name, " max rel err ", e.max_rel_err);
        CHECK(e.pass);
    }
}
