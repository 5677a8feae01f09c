#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "helpers.hpp"
#include "metrics/metrics.hpp"
#include "spectral/spectral.hpp"

using namespace scmc;
using testutil::random_matrix;

TEST_CASE("symmetrize") {
    const Matrix s = symmetrize(Matrix{{0, 1}, {0, 0}});
    CHECK(s(0, 1) == doctest::Approx(0.5));
    CHECK(s(1, 0) == doctest::Approx(0.5));

    Rng rng(1);
    const Matrix r = symmetrize(random_matrix(rng, 5, 5));
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 5; ++j) CHECK(r(i, j) == r(j, i));
}

TEST_CASE("eig_sym on known matrices") {
    SUBCASE("diagonal") {
        Matrix d(3, 3);
        d(0, 0) = 3;
        d(1, 1) = 1;
        d(2, 2) = 2;
        const EigenPairs ep = eig_sym(d);
        CHECK(ep.eigenvalues[0] == doctest::Approx(1.0));
        CHECK(ep.eigenvalues[1] == doctest::Approx(2.0));
        CHECK(ep.eigenvalues[2] == doctest::Approx(3.0));
    }
    SUBCASE("analytic 2x2") {
        const EigenPairs ep = eig_sym(Matrix{{2, 1}, {1, 2}});
        CHECK(ep.eigenvalues[0] == doctest::Approx(1.0));
        CHECK(ep.eigenvalues[1] == doctest::Approx(3.0));
        const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
        // eigenvector signs are free; compare absolute values
        CHECK(std::fabs(ep.eigenvectors(0, 0)) == doctest::Approx(inv_sqrt2));
        CHECK(std::fabs(ep.eigenvectors(1, 0)) == doctest::Approx(inv_sqrt2));
        CHECK(ep.eigenvectors(0, 0) * ep.eigenvectors(1, 0) < 0.0);  // (1,-1) direction
        CHECK(ep.eigenvectors(0, 1) * ep.eigenvectors(1, 1) > 0.0);  // (1,1) direction
    }
    SUBCASE("non-symmetric input is rejected") {
        CHECK_THROWS_AS(eig_sym(Matrix{{1, 2}, {0, 1}}), std::invalid_argument);
    }
}

TEST_CASE("eig_sym reconstruction and orthonormality on random matrices") {
    Rng rng(2);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t n = 8;
        const Matrix s = symmetrize(random_matrix(rng, n, n));
        const EigenPairs ep = eig_sym(s);

        // V Lambda V^T
        Matrix vl = ep.eigenvectors;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) vl(i, j) *= ep.eigenvalues[j];
        const Matrix rec = matmul_nt(vl, ep.eigenvectors);
        CHECK(std::sqrt(frob_sq(sub(rec, s))) < 1e-8);

        const Matrix vtv = matmul_tn(ep.eigenvectors, ep.eigenvectors);
        CHECK(std::sqrt(frob_sq(sub(vtv, Matrix::identity(n)))) < 1e-8);

        for (std::size_t j = 0; j + 1 < n; ++j)
            CHECK(ep.eigenvalues[j] <= ep.eigenvalues[j + 1]);
    }
}

TEST_CASE("kmeans recovers separated groups and the exhaustive optimum") {
    SUBCASE("two far groups") {
        Matrix pts(6, 2);
        for (int i = 0; i < 3; ++i) {
            pts(i, 0) = 0.0 + 0.01 * i;
            pts(i, 1) = 0.0;
            pts(3 + i, 0) = 10.0 + 0.01 * i;
            pts(3 + i, 1) = 10.0;
        }
        const auto labels = kmeans(pts, 2, 0);
        CHECK(labels[0] == labels[1]);
        CHECK(labels[1] == labels[2]);
        CHECK(labels[3] == labels[4]);
        CHECK(labels[4] == labels[5]);
        CHECK(labels[0] != labels[3]);
    }
    SUBCASE("c=1 is the global mean") {
        Rng rng(3);
        const Matrix pts = random_matrix(rng, 5, 2);
        const auto labels = kmeans(pts, 1, 0);
        for (int l : labels) CHECK(l == 0);
    }
    SUBCASE("c > N is rejected") {
        CHECK_THROWS_AS(kmeans(Matrix(3, 2), 4, 0), std::invalid_argument);
    }
    SUBCASE("N=6 c=2 equals the exhaustive WCSS minimum") {
        Rng rng(4);
        for (int trial = 0; trial < 20; ++trial) {
            const Matrix pts = random_matrix(rng, 6, 2);
            const auto labels = kmeans(pts, 2, trial, 10);
            const double got = kmeans_wcss(pts, labels, 2);

            double best = std::numeric_limits<double>::max();
            for (unsigned msk = 1; msk < 32; ++msk) {  // bipartitions with point 0 in cluster 0
                std::vector<int> assign(6, 0);
                for (int i = 0; i < 5; ++i) assign[i + 1] = (msk >> i) & 1;
                best = std::min(best, kmeans_wcss(pts, assign, 2));
            }
            CHECK(got == doctest::Approx(best).epsilon(1e-9));
        }
    }
}

namespace {

Matrix block_affinity(const std::vector<int>& labels, double inside, double outside) {
    const std::size_t n = labels.size();
    Matrix a(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j) a(i, j) = labels[i] == labels[j] ? inside : outside;
    return a;
}

}  // namespace

TEST_CASE("spectral clustering separates planted blocks") {
    SUBCASE("two disconnected blocks") {
        const std::vector<int> truth{0, 0, 0, 1, 1, 1, 1};
        const auto labels = spectral_clustering(block_affinity(truth, 1.0, 0.0), 2, 0);
        CHECK(accuracy(labels, truth) == doctest::Approx(1.0));
    }
    SUBCASE("ring of cliques with weak bridges") {
        std::vector<int> truth;
        for (int b = 0; b < 3; ++b)
            for (int i = 0; i < 5; ++i) truth.push_back(b);
        Matrix a = block_affinity(truth, 1.0, 0.0);
        a(4, 5) = a(5, 4) = 0.01;
        a(9, 10) = a(10, 9) = 0.01;
        a(14, 0) = a(0, 14) = 0.01;
        const auto labels = spectral_clustering(a, 3, 0);
        CHECK(accuracy(labels, truth) == doctest::Approx(1.0));
    }
    SUBCASE("random block sizes recover the planted partition") {
        Rng rng(5);
        for (int trial = 0; trial < 15; ++trial) {
            const std::size_t c = 2 + rng.next_below(3);
            std::vector<int> truth;
            for (std::size_t b = 0; b < c; ++b) {
                const std::size_t sz = 2 + rng.next_below(5);
                for (std::size_t i = 0; i < sz; ++i) truth.push_back(static_cast<int>(b));
            }
            const auto labels = spectral_clustering(block_affinity(truth, 1.0, 0.0), c, trial);
            CHECK(accuracy(labels, truth) == doctest::Approx(1.0));
        }
    }
    SUBCASE("permutation consistency") {
        const std::vector<int> truth{0, 0, 1, 1, 2, 2};
        Matrix a = block_affinity(truth, 1.0, 0.05);
        const auto base = spectral_clustering(a, 3, 9);
        // reverse the sample order
        const std::size_t n = truth.size();
        Matrix p(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) p(i, j) = a(n - 1 - i, n - 1 - j);
        const auto rev = spectral_clustering(p, 3, 9);
        std::vector<int> rev_undone(rev.rbegin(), rev.rend());
        // same partition, labels possibly renamed
        CHECK(accuracy(rev_undone, base) == doctest::Approx(1.0));
    }
}

TEST_CASE("normalized laplacian eigenvalues stay in [0, 2]") {
    Rng rng(6);
    const std::size_t n = 12;
    Matrix a = random_matrix(rng, n, n, 0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) a(i, i) = 0.0;
    const Matrix s = symmetrize(a);
    std::vector<double> deg(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) deg[i] += s(i, j);
    Matrix lap(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            lap(i, j) = (i == j ? 1.0 : 0.0) - s(i, j) / std::sqrt(deg[i] * deg[j]);
    const EigenPairs ep = eig_sym(symmetrize(lap));
    CHECK(ep.eigenvalues.front() >= -1e-8);
    CHECK(ep.eigenvalues.back() <= 2.0 + 1e-8);
}

TEST_CASE("unnormalized laplacian switch works") {
    const std::vector<int> truth{0, 0, 0, 1, 1, 1};
    const auto labels =
        spectral_clustering(block_affinity(truth, 1.0, 0.0), 2, 0, LaplacianKind::Unnormalized);
    CHECK(accuracy(labels, truth) == doctest::Approx(1.0));
}
