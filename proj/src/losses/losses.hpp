#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "core/matrix.hpp"
#include "diffcore/tape.hpp"
#include "model/model.hpp"

namespace scmc {

struct Hyperparams {
    double gamma1 = 500.0;  // subspace weight
    double gamma2 = 0.03;   // contrastive weight
    double gamma3 = 0.01;   // fusion weight
    double tau = 0.1;       // contrastive temperature
    double learning_rate = 1e-4;
    std::size_t pretrain_epochs = 200;
    std::size_t train_epochs = 500;
    std::uint64_t seed = 0;

    void validate() const;  // throws std::invalid_argument
};

struct LossBreakdown {
    double re = 0.0;
    double sub = 0.0;
    double con = 0.0;
    double fu = 0.0;
    double total = 0.0;
};

// Which terms participate in the objective. Reconstruction is always
// required.
enum LossMask : unsigned {
    kLossRe = 1u,
    kLossSub = 2u,
    kLossCon = 4u,
    kLossFu = 8u,
    kLossAll = 15u,
};

// ---- plain scalar evaluators ----

// sum_v |X - Xhat|_F^2
double reconstruction_loss(const std::vector<Matrix>& x, const std::vector<Matrix>& xhat);

// sum_v |C - Z^T C|_F^2 (row form of the transposed-sample convention)
double subspace_loss(const std::vector<Matrix>& c, const std::vector<Matrix>& z);

// (u.v)/(|u||v|); 0 when either norm is below 1e-12.
double cosine_similarity(const std::vector<double>& u, const std::vector<double>& v);

// Tallies the distinct positive/negative instances each anchor touches,
// for auditing against the expected V-1 / V(N-1) counts.
struct ContrastAudit {
    std::size_t positives_per_anchor = 0;
    std::size_t negatives_per_anchor = 0;
    bool uniform = true;  // every anchor saw the same counts
};

// The per-view contrastive term: anchors are rows of Z^(v); the intra-view
// denominator excludes j=i, the cross-view denominator includes j=i (the
// positive).
double view_contrastive_loss(std::size_t v, const std::vector<Matrix>& z, double tau,
                             ContrastAudit* audit = nullptr);

// (1/(N V)) sum_v l_v
double contrastive_loss(const std::vector<Matrix>& z, double tau);

// sum_v sum_ij |Z_i - Z_j|^2 Abar_ij + |A|_F^2 via the Laplacian identity
// with Abar = (A + A^T)/2.
double fusion_loss(const std::vector<Matrix>& z, const Matrix& a);

// Full forward pipeline on the model; combines the four terms.
LossBreakdown total_loss(const ScmcModel& model, const std::vector<Matrix>& x,
                         const Hyperparams& hp);

// ---- differentiable objective ----

// The whole objective assembled on one tape. Inputs for every trainable
// parameter plus constants for the data; term nodes kept so the trainer
// can read the breakdown after each forward pass.
struct ObjectiveGraph {
    diff::Tape tape;

    struct ViewParamIds {
        std::array<diff::NodeId, 3> enc_w{}, enc_b{}, dec_w{}, dec_b{};
        diff::NodeId z = -1;
    };
    std::vector<ViewParamIds> params;
    diff::NodeId omega = -1;

    diff::NodeId re_node = -1, sub_node = -1, con_node = -1, fu_node = -1;
    diff::NodeId total_node = -1;
    diff::NodeId affinity_node = -1;       // projected A (when the fusion term is on)
    diff::NodeId omega_weights_node = -1;  // softmax(omega)
    std::vector<diff::NodeId> embed_nodes;  // C^(v)

    unsigned mask = kLossAll;

    // Copy current model parameters into the tape inputs.
    void bind(const ScmcModel& model);
    // Read the term values after forward(); masked terms report 0.
    LossBreakdown breakdown(const Hyperparams& hp) const;
    // Visit (name, input node, parameter matrix) for every trainable input.
    template <typename F>
    void for_each_param(ScmcModel& model, F&& f) {
        for (std::size_t v = 0; v < params.size(); ++v) {
            auto& p = params[v];
            auto& mv = model.views[v];
            const std::string pre = "v" + std::to_string(v) + ".";
            for (int l = 0; l < 3; ++l) {
                const std::string ls = std::to_string(l);
                f(pre + "enc_w" + ls, p.enc_w[l], mv.enc_w[l]);
                f(pre + "enc_b" + ls, p.enc_b[l], mv.enc_b[l]);
                f(pre + "dec_w" + ls, p.dec_w[l], mv.dec_w[l]);
                f(pre + "dec_b" + ls, p.dec_b[l], mv.dec_b[l]);
            }
            f(pre + "z", p.z, mv.z);
        }
        f(std::string("omega"), omega, model.omega_logits);
    }
};

ObjectiveGraph build_objective(const ScmcModel& model, const std::vector<Matrix>& x,
                               const Hyperparams& hp, unsigned mask = kLossAll);

}  // namespace scmc
