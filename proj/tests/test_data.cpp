#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "data/dataset.hpp"
#include "helpers.hpp"
#include "metrics/metrics.hpp"
#include "spectral/spectral.hpp"

using namespace scmc;
using testutil::random_matrix;

namespace {

std::filesystem::path temp_dir(const std::string& tag) {
    auto p = std::filesystem::temp_directory_path() / ("scmc_data_test_" + tag);
    std::filesystem::remove_all(p);
    return p;
}

MultiViewDataset small_synth(std::uint64_t seed = 0) {
    SynthParams p;
    p.clusters = 3;
    p.per_cluster = 20;
    p.view_dims = {8, 10};
    p.sub_dim = 2;
    p.noise = 0.01;
    p.seed = seed;
    return synth_multiview(p);
}

}  // namespace

TEST_CASE("norm mode names round-trip") {
    CHECK(norm_mode_from_name("none") == NormMode::None);
    CHECK(norm_mode_from_name("minmax") == NormMode::MinMax);
    CHECK(norm_mode_from_name("minmax+unit-row") == NormMode::MinMaxUnitRow);
    CHECK(norm_mode_from_name(norm_mode_name(NormMode::MinMax)) == NormMode::MinMax);
    CHECK_THROWS_AS(norm_mode_from_name("zscore"), std::invalid_argument);
}

TEST_CASE("normalize worked examples") {
    MultiViewDataset d;
    d.name = "t";
    d.num_clusters = 2;
    Matrix v(3, 2);
    v(0, 0) = 2;  v(0, 1) = 5;
    v(1, 0) = 4;  v(1, 1) = 5;
    v(2, 0) = 6;  v(2, 1) = 5;
    d.views.push_back(v);
    d.labels = {0, 0, 1};
    d.normalization = {NormMode::None};

    const MultiViewDataset out = normalize(d, NormMode::MinMax);
    CHECK(out.views[0](0, 0) == doctest::Approx(0.0));
    CHECK(out.views[0](1, 0) == doctest::Approx(0.5));
    CHECK(out.views[0](2, 0) == doctest::Approx(1.0));
    // constant column maps to zero
    CHECK(out.views[0](0, 1) == 0.0);
    CHECK(out.views[0](2, 1) == 0.0);
    CHECK(out.labels == d.labels);
    CHECK(out.normalization[0] == NormMode::MinMax);

    // idempotent once in [0,1]
    const MultiViewDataset again = normalize(out, NormMode::MinMax);
    CHECK(again.views[0] == out.views[0]);

    const MultiViewDataset unit = normalize(d, NormMode::MinMaxUnitRow);
    for (std::size_t i = 0; i < 3; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < 2; ++j) s += unit.views[0](i, j) * unit.views[0](i, j);
        if (s > 0.0) CHECK(std::sqrt(s) == doctest::Approx(1.0));
    }

    CHECK(normalize(d, NormMode::None).views[0] == d.views[0]);
}

TEST_CASE("synthetic generator shape, balance, determinism") {
    const MultiViewDataset d = small_synth(5);
    d.validate();
    CHECK(d.num_views() == 2);
    CHECK(d.num_samples() == 60);
    CHECK(d.num_clusters == 3);
    CHECK(d.views[0].cols() == 8);
    CHECK(d.views[1].cols() == 10);

    std::vector<int> counts(3, 0);
    for (int l : d.labels) counts[l]++;
    CHECK(counts[0] == 20);
    CHECK(counts[1] == 20);
    CHECK(counts[2] == 20);

    const MultiViewDataset d2 = small_synth(5);
    CHECK(d.views[0] == d2.views[0]);
    CHECK(d.views[1] == d2.views[1]);

    const MultiViewDataset d3 = small_synth(6);
    CHECK(d.views[0] != d3.views[0]);
}

TEST_CASE("noise-free linear clusters live in rank <= sub_dim subspaces") {
    SynthParams p;
    p.clusters = 2;
    p.per_cluster = 12;
    p.view_dims = {9, 7};
    p.sub_dim = 3;
    p.noise = 0.0;
    p.tanh_distortion = false;
    p.seed = 2;
    const MultiViewDataset d = synth_multiview(p);

    for (std::size_t c = 0; c < 2; ++c) {
        Matrix block(12, 9);
        std::size_t r = 0;
        for (std::size_t i = 0; i < d.num_samples(); ++i)
            if (d.labels[i] == static_cast<int>(c)) {
                for (std::size_t j = 0; j < 9; ++j) block(r, j) = d.views[0](i, j);
                ++r;
            }
        REQUIRE(r == 12);
        // eigenvalues of X^T X beyond the top sub_dim must vanish
        const EigenPairs ep = eig_sym(matmul_tn(block, block));
        const double top = ep.eigenvalues.back();
        REQUIRE(top > 0.0);
        for (std::size_t j = 0; j + p.sub_dim < 9; ++j)
            CHECK(ep.eigenvalues[j] / top < 1e-10);
    }
}

TEST_CASE("binary view payload round-trip and corruption checks") {
    Rng rng(7);
    const Matrix m = random_matrix(rng, 5, 4);
    const auto dir = temp_dir("bin");
    std::filesystem::create_directories(dir);
    const std::string path = (dir / "v.bin").string();

    write_view_binary(m, path);
    CHECK(read_view_binary(path) == m);

    // appended garbage must be rejected
    {
        std::ofstream f(path, std::ios::binary | std::ios::app);
        f.put('x');
    }
    CHECK_THROWS_WITH_AS(read_view_binary(path), doctest::Contains("trailing"),
                         std::runtime_error);

    // bad magic
    {
        std::ofstream f(path, std::ios::binary);
        f << "NOTMAGIC";
    }
    CHECK_THROWS_AS(read_view_binary(path), std::runtime_error);

    std::filesystem::remove_all(dir);
}

TEST_CASE("csv view payload round-trip preserves every bit") {
    Rng rng(8);
    const Matrix m = random_matrix(rng, 6, 3, -100.0, 100.0);
    const auto dir = temp_dir("csv");
    std::filesystem::create_directories(dir);
    const std::string path = (dir / "v.csv").string();
    write_view_csv(m, path);
    CHECK(read_view_csv(path) == m);  // %.17g survives the round trip exactly
    std::filesystem::remove_all(dir);
}

TEST_CASE("dataset directory save/load round-trips") {
    const MultiViewDataset d = small_synth(9);
    for (bool binary : {true, false}) {
        const auto dir = temp_dir(binary ? "ds_bin" : "ds_csv");
        save_dataset(d, dir.string(), binary);
        const MultiViewDataset back = load_dataset(dir.string());
        CHECK(back.name == d.name);
        CHECK(back.num_clusters == d.num_clusters);
        CHECK(back.labels == d.labels);
        REQUIRE(back.num_views() == d.num_views());
        for (std::size_t v = 0; v < d.num_views(); ++v) CHECK(back.views[v] == d.views[v]);
        std::filesystem::remove_all(dir);
    }
}

TEST_CASE("labels file round-trip and range check") {
    const auto dir = temp_dir("labels");
    std::filesystem::create_directories(dir);
    const std::string path = (dir / "labels.txt").string();
    const std::vector<int> labels{0, 2, 1, 1, 0};
    write_labels(labels, path);
    CHECK(read_labels(path) == labels);
    std::filesystem::remove_all(dir);
}

TEST_CASE("load errors carry distinct diagnostics") {
    SUBCASE("missing directory") {
        CHECK_THROWS_AS(load_dataset("/nonexistent/scmc_nowhere"), std::runtime_error);
    }
    SUBCASE("row count disagrees with the manifest") {
        MultiViewDataset d = small_synth(10);
        const auto dir = temp_dir("rows");
        save_dataset(d, dir.string(), true);
        // rewrite view0 with one row chopped off
        Matrix shorter(d.views[0].rows() - 1, d.views[0].cols());
        for (std::size_t i = 0; i < shorter.rows(); ++i)
            for (std::size_t j = 0; j < shorter.cols(); ++j) shorter(i, j) = d.views[0](i, j);
        write_view_binary(shorter, (dir / "view0.bin").string());
        CHECK_THROWS_WITH_AS(load_dataset(dir.string()), doctest::Contains("rows"),
                             std::runtime_error);
        std::filesystem::remove_all(dir);
    }
    SUBCASE("missing view file") {
        MultiViewDataset d = small_synth(11);
        const auto dir = temp_dir("missing");
        save_dataset(d, dir.string(), true);
        std::filesystem::remove(dir / "view1.bin");
        CHECK_THROWS_WITH_AS(load_dataset(dir.string()), doctest::Contains("view1.bin"),
                             std::runtime_error);
        std::filesystem::remove_all(dir);
    }
    SUBCASE("label outside the cluster range") {
        MultiViewDataset d = small_synth(12);
        const auto dir = temp_dir("range");
        save_dataset(d, dir.string(), true);
        auto labels = d.labels;
        labels[0] = static_cast<int>(d.num_clusters);
        write_labels(labels, (dir / "labels.txt").string());
        CHECK_THROWS_WITH_AS(load_dataset(dir.string()), doctest::Contains("label"),
                             std::invalid_argument);
        std::filesystem::remove_all(dir);
    }
}

TEST_CASE("validate reports structural problems") {
    MultiViewDataset d = small_synth(13);
    SUBCASE("clean passes") { CHECK_NOTHROW(d.validate()); }
    SUBCASE("view row mismatch") {
        d.views[1] = Matrix(d.num_samples() - 1, d.views[1].cols());
        CHECK_THROWS_AS(d.validate(), std::invalid_argument);
    }
    SUBCASE("label length mismatch") {
        d.labels.pop_back();
        CHECK_THROWS_AS(d.validate(), std::invalid_argument);
    }
    SUBCASE("zero clusters") {
        d.num_clusters = 0;
        CHECK_THROWS_AS(d.validate(), std::invalid_argument);
    }
}

TEST_CASE("synth3x3 parameters match the benchmark fixture") {
    const SynthParams p = synth3x3_params(42);
    CHECK(p.clusters == 3);
    CHECK(p.per_cluster == 150);
    CHECK(p.view_dims == std::vector<std::size_t>{30, 40, 50});
    CHECK(p.sub_dim == 4);
    CHECK(p.noise == doctest::Approx(0.01));
    CHECK(p.seed == 42);
}

TEST_CASE("synthetic clusters are recoverable by a cosine-affinity baseline") {
    const MultiViewDataset d = small_synth(14);
    const std::size_t n = d.num_samples();
    // concatenate views
    std::size_t dim = 0;
    for (const auto& v : d.views) dim += v.cols();
    Matrix x(n, dim);
    std::size_t off = 0;
    for (const auto& v : d.views) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < v.cols(); ++j) x(i, off + j) = v(i, j);
        off += v.cols();
    }
    Matrix a(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        double ni = 0.0;
        for (std::size_t k = 0; k < dim; ++k) ni += x(i, k) * x(i, k);
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            double nj = 0.0, dot = 0.0;
            for (std::size_t k = 0; k < dim; ++k) {
                nj += x(j, k) * x(j, k);
                dot += x(i, k) * x(j, k);
            }
            const double c = dot / std::sqrt(ni * nj);
            a(i, j) = c > 0.0 ? c : 0.0;
        }
    }
    const auto pred = spectral_clustering(symmetrize(a), d.num_clusters, 0);
    CHECK(accuracy(pred, d.labels) >= 0.9);
}
