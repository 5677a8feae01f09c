#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "core/matrix.hpp"
#include "core/rng.hpp"

namespace scmc {

// Two autoencoder geometries: wide [d, 500, 200, c] and narrow
// [d, 200, 100, c]. The embedding dimension always equals the cluster
// count c.
enum class ArchTag { Wide, Narrow };

std::array<std::size_t, 2> hidden_dims(ArchTag tag);
const char* arch_name(ArchTag tag);
ArchTag arch_from_name(const std::string& name);

// Per-view parameters: a three-layer tanh encoder, its mirrored decoder
// (tanh, tanh, linear read-out), and the NxN self-expression matrix.
struct ViewParams {
    std::array<Matrix, 3> enc_w, dec_w;
    std::array<Matrix, 3> enc_b, dec_b;  // 1 x out_dim rows
    Matrix z;                            // N x N
};

struct ScmcModel {
    ArchTag arch = ArchTag::Wide;
    std::size_t num_views = 0;
    std::size_t num_samples = 0;
    std::size_t num_clusters = 0;
    std::vector<std::size_t> view_dims;
    std::vector<ViewParams> views;
    Matrix omega_logits;  // 1 x V; fusion weights are softmax(omega_logits)
    bool pretrained = false;

    static ScmcModel create(std::size_t num_views, std::size_t num_samples,
                            std::size_t num_clusters, const std::vector<std::size_t>& view_dims,
                            ArchTag arch, Rng& rng);
};

// C = tanh(tanh(tanh(X W1 + b1) W2 + b2) W3 + b3), output N x c.
Matrix encode(const ScmcModel& m, std::size_t view, const Matrix& x);

// Row form of C^T Z: returns Z^T C (samples as rows).
Matrix self_express(const ScmcModel& m, std::size_t view, const Matrix& c);

// Two tanh layers then a linear read-out back to the view dimension.
Matrix decode(const ScmcModel& m, std::size_t view, const Matrix& cz);

// A_raw = sum_v softmax(omega)_v Z^(v).
Matrix fuse_affinity(const ScmcModel& m);

// Elementwise relu, zero diagonal, rows rescaled to sum 1; rows whose
// positive off-diagonal mass is below 1e-12 become uniform off-diagonal.
Matrix project_affinity(const Matrix& a_raw);

std::vector<double> fusion_weights(const ScmcModel& m);

// Versioned binary checkpoint; 64-bit payloads round-trip bit-exactly.
void save_model(const ScmcModel& m, const std::string& path);
ScmcModel load_model(const std::string& path);
void save_model(const ScmcModel& m, std::ostream& os);
ScmcModel load_model(std::istream& is);

// Raw little-endian matrix block (shape header + f64 payload), shared by
// checkpoints and standalone matrix exports.
void write_matrix_block(std::ostream& os, const Matrix& m);
Matrix read_matrix_block(std::istream& is);

}  // namespace scmc
