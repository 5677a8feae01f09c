#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/matrix.hpp"

namespace scmc {

enum class NormMode { None, MinMax, MinMaxUnitRow };

NormMode norm_mode_from_name(const std::string& name);
const char* norm_mode_name(NormMode m);

struct MultiViewDataset {
    std::string name;
    std::size_t num_clusters = 0;
    std::vector<Matrix> views;                 // each N x d(v)
    std::vector<int> labels;                   // empty when ground truth is absent
    std::vector<NormMode> normalization;       // per view, as stored on disk

    std::size_t num_views() const { return views.size(); }
    std::size_t num_samples() const { return views.empty() ? 0 : views[0].rows(); }
    bool has_labels() const { return !labels.empty(); }

    // Throws std::invalid_argument describing the first violated invariant.
    void validate() const;
};

// Directory layout: manifest.json, one payload file per view (view<k>.bin or
// view<k>.csv), optional labels.txt with one integer per line.
MultiViewDataset load_dataset(const std::string& dir);
void save_dataset(const MultiViewDataset& d, const std::string& dir, bool binary = true);

// Raw view payload: 8-byte magic "SCMCVW01", then rows and cols as 32-bit
// little-endian unsigned, then row-major 64-bit little-endian floats.
Matrix read_view_binary(const std::string& path);
void write_view_binary(const Matrix& m, const std::string& path);
Matrix read_view_csv(const std::string& path);
void write_view_csv(const Matrix& m, const std::string& path);

std::vector<int> read_labels(const std::string& path);
void write_labels(const std::vector<int>& labels, const std::string& path);

// Per-feature min-max to [0,1] (constant columns become 0), optionally
// followed by unit-norm rows (zero rows left alone). None is the identity.
MultiViewDataset normalize(const MultiViewDataset& d, NormMode mode);

struct SynthParams {
    std::size_t clusters = 3;
    std::size_t per_cluster = 150;
    std::vector<std::size_t> view_dims = {30, 40, 50};
    std::size_t sub_dim = 4;       // latent subspace rank per cluster
    double noise = 0.01;
    bool tanh_distortion = true;   // disable to keep per-cluster view blocks rank <= sub_dim
    std::uint64_t seed = 0;
};

// Union-of-subspaces generator: each cluster gets an orthonormal latent
// basis, samples draw coefficients on it, and each view applies its own
// random linear map (plus optional tanh distortion and Gaussian noise).
MultiViewDataset synth_multiview(const SynthParams& p);

// The benchmark fixture used throughout the tests: c=3, 150 per cluster
// (N=450), V=3, r=4, dims 30/40/50, sigma=0.01.
SynthParams synth3x3_params(std::uint64_t seed);

}  // namespace scmc
