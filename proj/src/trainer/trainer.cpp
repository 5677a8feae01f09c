#include "trainer/trainer.hpp"

#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iostream>
#include <stdexcept>

namespace scmc {

void adam_step(Matrix& param, const Matrix& grad, AdamState& state, double lr,
               const AdamConfig& cfg, const std::string& name) {
    if (!(lr > 0.0)) throw std::invalid_argument("adam_step: learning rate must be positive");
    if (!param.same_shape(grad))
        throw std::invalid_argument("adam_step: gradient shape mismatch for " + name);
    if (!grad.all_finite())
        throw std::runtime_error("adam_step: non-finite gradient for parameter '" + name + "'");
    if (state.m.size() == 0) {
        state.m = Matrix(param.rows(), param.cols());
        state.v = Matrix(param.rows(), param.cols());
    }
    state.t += 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
    for (std::size_t i = 0; i < param.size(); ++i) {
        const double g = grad.data()[i];
        double& m = state.m.data()[i];
        double& v = state.v.data()[i];
        m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
        v = cfg.beta2 * v + (1.0 - cfg.beta2) * g * g;
        const double mhat = m / bc1;
        const double vhat = v / bc2;
        param.data()[i] -= lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
}

std::vector<double> pretrain(ScmcModel& model, const std::vector<Matrix>& x,
                             const Hyperparams& hp) {
    hp.validate();
    if (x.size() != model.num_views) throw std::invalid_argument("pretrain: view count mismatch");
    std::vector<double> history(hp.pretrain_epochs, 0.0);
    for (std::size_t v = 0; v < model.num_views; ++v) {
        auto& mv = model.views[v];
        diff::Tape t;
        const diff::NodeId xn = t.constant(x[v], "x");
        std::array<diff::NodeId, 3> ew, eb, dw, db;
        for (int l = 0; l < 3; ++l) {
            ew[l] = t.input("enc_w" + std::to_string(l), mv.enc_w[l].rows(), mv.enc_w[l].cols(), true);
            eb[l] = t.input("enc_b" + std::to_string(l), 1, mv.enc_b[l].cols(), true);
            dw[l] = t.input("dec_w" + std::to_string(l), mv.dec_w[l].rows(), mv.dec_w[l].cols(), true);
            db[l] = t.input("dec_b" + std::to_string(l), 1, mv.dec_b[l].cols(), true);
        }
        diff::NodeId h = xn;
        for (int l = 0; l < 3; ++l) h = t.tanh(t.add_rowvec(t.matmul(h, ew[l]), eb[l]));
        h = t.tanh(t.add_rowvec(t.matmul(h, dw[0]), db[0]));
        h = t.tanh(t.add_rowvec(t.matmul(h, dw[1]), db[1]));
        h = t.add_rowvec(t.matmul(h, dw[2]), db[2]);
        const diff::NodeId loss = t.frob_sq(t.sub(xn, h));
        t.set_root(loss);

        std::array<AdamState, 12> st;
        for (std::size_t e = 0; e < hp.pretrain_epochs; ++e) {
            for (int l = 0; l < 3; ++l) {
                t.bind(ew[l], mv.enc_w[l]);
                t.bind(eb[l], mv.enc_b[l]);
                t.bind(dw[l], mv.dec_w[l]);
                t.bind(db[l], mv.dec_b[l]);
            }
            history[e] += t.forward();
            t.backward();
            const std::string pre = "v" + std::to_string(v) + ".";
            for (int l = 0; l < 3; ++l) {
                adam_step(mv.enc_w[l], t.grad_of(ew[l]), st[l * 4 + 0], hp.learning_rate, {},
                          pre + "enc_w" + std::to_string(l));
                adam_step(mv.enc_b[l], t.grad_of(eb[l]), st[l * 4 + 1], hp.learning_rate, {},
                          pre + "enc_b" + std::to_string(l));
                adam_step(mv.dec_w[l], t.grad_of(dw[l]), st[l * 4 + 2], hp.learning_rate, {},
                          pre + "dec_w" + std::to_string(l));
                adam_step(mv.dec_b[l], t.grad_of(db[l]), st[l * 4 + 3], hp.learning_rate, {},
                          pre + "dec_b" + std::to_string(l));
            }
        }
    }
    model.pretrained = true;
    return history;
}

Trainer::Trainer(ScmcModel model, std::vector<Matrix> x, Hyperparams hp, unsigned mask)
    : model_(std::move(model)),
      x_(std::move(x)),
      hp_(hp),
      mask_(mask),
      graph_(build_objective(model_, x_, hp_, mask)) {
    std::size_t count = 0;
    graph_.for_each_param(model_, [&](const std::string&, diff::NodeId, Matrix&) { ++count; });
    states_.resize(count);
}

LossBreakdown Trainer::run_epoch() {
    const auto t0 = std::chrono::steady_clock::now();
    graph_.bind(model_);
    try {
        graph_.tape.forward();
    } catch (const std::runtime_error& e) {
        if (!abort_checkpoint_path.empty()) save_checkpoint(abort_checkpoint_path);
        throw std::runtime_error(std::string("training aborted at epoch ") +
                                 std::to_string(epoch_ + 1) + ": " + e.what());
    }
    const LossBreakdown b = graph_.breakdown(hp_);
    graph_.tape.backward();
    std::size_t idx = 0;
    graph_.for_each_param(model_, [&](const std::string& name, diff::NodeId id, Matrix& param) {
        try {
            adam_step(param, graph_.tape.grad_of(id), states_[idx++], hp_.learning_rate, {}, name);
        } catch (const std::runtime_error&) {
            if (!abort_checkpoint_path.empty()) save_checkpoint(abort_checkpoint_path);
            throw;
        }
    });
    epoch_ += 1;
    history_.push_back(b);
    epoch_seconds_.push_back(
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    if (on_epoch) on_epoch(epoch_, model_, b);
    return b;
}

namespace {
constexpr char kTrainerMagic[8] = {'S', 'C', 'M', 'C', 'T', 'R', 'N', '1'};

void write_u64(std::ostream& os, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<char*>(b), 8);
}

std::uint64_t read_u64(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    if (!is) throw std::runtime_error("trainer checkpoint: truncated file");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}
}  // namespace

void Trainer::save_checkpoint(const std::string& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open trainer checkpoint for writing: " + path);
    os.write(kTrainerMagic, 8);
    write_u64(os, epoch_);
    write_u64(os, states_.size());
    save_model(model_, os);
    for (const auto& st : states_) {
        write_u64(os, st.t);
        write_matrix_block(os, st.m);
        write_matrix_block(os, st.v);
    }
    write_u64(os, history_.size());
    for (const auto& b : history_)
        for (double d : {b.re, b.sub, b.con, b.fu, b.total})
            os.write(reinterpret_cast<const char*>(&d), sizeof(double));
    if (!os) throw std::runtime_error("trainer checkpoint: write failed: " + path);
}

Trainer Trainer::load_checkpoint(const std::string& path, std::vector<Matrix> x, Hyperparams hp,
                                 unsigned mask) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open trainer checkpoint: " + path);
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, kTrainerMagic, 8) != 0)
        throw std::runtime_error("trainer checkpoint: bad magic in " + path);
    const std::uint64_t epoch = read_u64(is);
    const std::uint64_t nstates = read_u64(is);
    ScmcModel model = load_model(is);
    Trainer tr(std::move(model), std::move(x), hp, mask);
    if (nstates != tr.states_.size())
        throw std::runtime_error("trainer checkpoint: optimizer state count mismatch");
    for (auto& st : tr.states_) {
        st.t = read_u64(is);
        st.m = read_matrix_block(is);
        st.v = read_matrix_block(is);
    }
    tr.epoch_ = epoch;
    const std::uint64_t nhist = read_u64(is);
    tr.history_.resize(nhist);
    for (auto& b : tr.history_) {
        double d[5];
        is.read(reinterpret_cast<char*>(d), sizeof(d));
        if (!is) throw std::runtime_error("trainer checkpoint: truncated history");
        b = {d[0], d[1], d[2], d[3], d[4]};
    }
    return tr;
}

TrainReport Trainer::report() const {
    TrainReport r;
    r.history = history_;
    r.epoch_seconds = epoch_seconds_;
    r.seed = hp_.seed;
    r.final_weights = fusion_weights(model_);
    if (mask_ == kLossRe) {
        r.embedding_only = true;
        Matrix mean(model_.num_samples, model_.num_clusters);
        for (std::size_t v = 0; v < model_.num_views; ++v) {
            const Matrix c = encode(model_, v, x_[v]);
            for (std::size_t i = 0; i < mean.size(); ++i) mean.data()[i] += c.data()[i];
        }
        r.mean_embedding = scale(mean, 1.0 / static_cast<double>(model_.num_views));
    } else {
        r.final_affinity = project_affinity(fuse_affinity(model_));
    }
    return r;
}

TrainReport train(ScmcModel& model, const std::vector<Matrix>& x, const Hyperparams& hp,
                  unsigned mask, const std::string& abort_checkpoint) {
    if (!(mask & kLossRe))
        throw std::invalid_argument("train: the reconstruction term is mandatory");
    if (!model.pretrained)
        std::cerr << "warning: training a model that was not pretrained\n";
    Trainer tr(std::move(model), x, hp, mask);
    tr.abort_checkpoint_path = abort_checkpoint;
    for (std::size_t e = 0; e < hp.train_epochs; ++e) tr.run_epoch();
    TrainReport r = tr.report();
    model = tr.model();
    return r;
}

TrainReport ablate(ScmcModel& model, const std::vector<Matrix>& x, const Hyperparams& hp,
                   unsigned mask) {
    if (!(mask & kLossRe))
        throw std::invalid_argument("ablate: mask must include the reconstruction term");
    return train(model, x, hp, mask);
}

}  // namespace scmc
