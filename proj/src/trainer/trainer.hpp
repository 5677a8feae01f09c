#pragma once

#include <functional>
#include <string>
#include <vector>

#include "losses/losses.hpp"
#include "model/model.hpp"

namespace scmc {

struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    Matrix m, v;  // first/second moments, parameter-shaped
    std::size_t t = 0;
};

// Standard Adam update with bias correction. Throws on a non-finite
// gradient, naming the parameter.
void adam_step(Matrix& param, const Matrix& grad, AdamState& state, double lr,
               const AdamConfig& cfg = {}, const std::string& name = "param");

struct TrainReport {
    std::vector<LossBreakdown> history;
    std::vector<double> epoch_seconds;
    Matrix final_affinity;              // projected A; empty in embedding-only mode
    std::vector<double> final_weights;  // softmax(omega)
    std::uint64_t seed = 0;
    bool embedding_only = false;
    Matrix mean_embedding;  // average of the per-view embeddings (embedding-only mode)
};

// Reconstruction-only training of each view's autoencoder, bypassing the
// self-expression layer. Z and omega are untouched.
std::vector<double> pretrain(ScmcModel& model, const std::vector<Matrix>& x,
                             const Hyperparams& hp);

// Joint optimization over the masked objective. Owns the epoch loop so a
// run can be checkpointed and resumed to a bit-identical trajectory.
class Trainer {
public:
    Trainer(ScmcModel model, std::vector<Matrix> x, Hyperparams hp, unsigned mask = kLossAll);

    // One full-batch epoch: forward, backward, Adam update on every
    // parameter. Returns the losses at the evaluated point.
    LossBreakdown run_epoch();

    std::size_t epochs_run() const { return epoch_; }
    const ScmcModel& model() const { return model_; }
    const std::vector<LossBreakdown>& history() const { return history_; }

    // Model + Adam moments + epoch counter; resuming reproduces the exact
    // trajectory of an uninterrupted run.
    void save_checkpoint(const std::string& path) const;
    static Trainer load_checkpoint(const std::string& path, std::vector<Matrix> x,
                                   Hyperparams hp, unsigned mask = kLossAll);

    TrainReport report() const;

    // Where to dump the last-good model if the loss goes non-finite.
    std::string abort_checkpoint_path;

    std::function<void(std::size_t epoch, const ScmcModel&, const LossBreakdown&)> on_epoch;

private:
    ScmcModel model_;
    std::vector<Matrix> x_;
    Hyperparams hp_;
    unsigned mask_;
    ObjectiveGraph graph_;
    std::vector<AdamState> states_;
    std::size_t epoch_ = 0;
    std::vector<LossBreakdown> history_;
    std::vector<double> epoch_seconds_;
};

// Runs hp.train_epochs epochs on the full objective. Warns on stderr if
// the model was not pretrained.
TrainReport train(ScmcModel& model, const std::vector<Matrix>& x, const Hyperparams& hp,
                  unsigned mask = kLossAll, const std::string& abort_checkpoint = "");

// Trains with a masked loss. The mask must contain the reconstruction
// term; mask == kLossRe skips the affinity path entirely and flags the
// report embedding-only.
TrainReport ablate(ScmcModel& model, const std::vector<Matrix>& x, const Hyperparams& hp,
                   unsigned mask);

}  // namespace scmc
