#include "scmc/scmc.h"

#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "core/rng.hpp"
#include "data/dataset.hpp"
#include "metrics/metrics.hpp"
#include "model/model.hpp"
#include "spectral/spectral.hpp"
#include "trainer/trainer.hpp"

struct scmc_dataset {
    scmc::MultiViewDataset d;
};
struct scmc_model {
    scmc::ScmcModel m;
};
struct scmc_report {
    scmc::TrainReport r;
};

namespace {

thread_local std::string g_last_error = "no error";

int fail(int code, const std::string& msg) {
    g_last_error = msg;
    return code;
}

// Runs f, translating exceptions into status codes.
template <typename F>
int guarded(F&& f) {
    try {
        return f();
    } catch (const std::invalid_argument& e) {
        return fail(SCMC_ERR_INVALID_ARGUMENT, e.what());
    } catch (const std::runtime_error& e) {
        return fail(SCMC_ERR_RUNTIME, e.what());
    } catch (const std::exception& e) {
        return fail(SCMC_ERR_RUNTIME, e.what());
    }
}

int require(bool cond, const char* what) {
    if (cond) return SCMC_OK;
    return fail(SCMC_ERR_INVALID_ARGUMENT, what);
}

}  // namespace

extern "C" {

const char* scmc_last_error(void) { return g_last_error.c_str(); }

void scmc_hyperparams_defaults(scmc_hyperparams* hp) {
    if (!hp) return;
    const scmc::Hyperparams d;
    hp->gamma1 = d.gamma1;
    hp->gamma2 = d.gamma2;
    hp->gamma3 = d.gamma3;
    hp->tau = d.tau;
    hp->learning_rate = d.learning_rate;
    hp->pretrain_epochs = d.pretrain_epochs;
    hp->train_epochs = d.train_epochs;
    hp->seed = d.seed;
}

int scmc_dataset_load(const char* dir, scmc_dataset** out) {
    if (int rc = require(dir && out, "scmc_dataset_load: null argument")) return rc;
    return guarded([&] {
        try {
            auto* h = new scmc_dataset{scmc::load_dataset(dir)};
            *out = h;
        } catch (const std::runtime_error& e) {
            return fail(SCMC_ERR_IO, e.what());
        }
        return static_cast<int>(SCMC_OK);
    });
}

int scmc_dataset_save(const scmc_dataset* d, const char* dir, int binary_payload) {
    if (int rc = require(d && dir, "scmc_dataset_save: null argument")) return rc;
    return guarded([&] {
        try {
            scmc::save_dataset(d->d, dir, binary_payload != 0);
        } catch (const std::runtime_error& e) {
            return fail(SCMC_ERR_IO, e.what());
        }
        return static_cast<int>(SCMC_OK);
    });
}

int scmc_dataset_normalize(scmc_dataset* d, const char* mode) {
    if (int rc = require(d && mode, "scmc_dataset_normalize: null argument")) return rc;
    return guarded([&] {
        d->d = scmc::normalize(d->d, scmc::norm_mode_from_name(mode));
        return static_cast<int>(SCMC_OK);
    });
}

int scmc_dataset_synth(uint64_t clusters, uint64_t per_cluster, const uint64_t* view_dims,
                       uint64_t num_views, uint64_t sub_dim, double noise, int tanh_distortion,
                       uint64_t seed, scmc_dataset** out) {
    if (int rc = require(view_dims && out && num_views > 0, "scmc_dataset_synth: null argument"))
        return rc;
    return guarded([&] {
        scmc::SynthParams p;
        p.clusters = clusters;
        p.per_cluster = per_cluster;
        p.view_dims.assign(view_dims, view_dims + num_views);
        p.sub_dim = sub_dim;
        p.noise = noise;
        p.tanh_distortion = tanh_distortion != 0;
        p.seed = seed;
        *out = new scmc_dataset{scmc::synth_multiview(p)};
        return static_cast<int>(SCMC_OK);
    });
}

uint64_t scmc_dataset_num_views(const scmc_dataset* d) { return d ? d->d.num_views() : 0; }
uint64_t scmc_dataset_num_samples(const scmc_dataset* d) { return d ? d->d.num_samples() : 0; }
uint64_t scmc_dataset_num_clusters(const scmc_dataset* d) { return d ? d->d.num_clusters : 0; }

uint64_t scmc_dataset_view_dim(const scmc_dataset* d, uint64_t view) {
    if (!d || view >= d->d.num_views()) return 0;
    return d->d.views[view].cols();
}

int scmc_dataset_has_labels(const scmc_dataset* d) { return d && d->d.has_labels() ? 1 : 0; }

int scmc_dataset_labels(const scmc_dataset* d, int32_t* labels_out) {
    if (int rc = require(d && labels_out, "scmc_dataset_labels: null argument")) return rc;
    if (!d->d.has_labels())
        return fail(SCMC_ERR_INVALID_ARGUMENT, "scmc_dataset_labels: dataset has no labels");
    for (std::size_t i = 0; i < d->d.labels.size(); ++i)
        labels_out[i] = static_cast<int32_t>(d->d.labels[i]);
    return SCMC_OK;
}

int scmc_dataset_view(const scmc_dataset* d, uint64_t view, double* out) {
    if (int rc = require(d && out, "scmc_dataset_view: null argument")) return rc;
    if (view >= d->d.num_views())
        return fail(SCMC_ERR_INVALID_ARGUMENT, "scmc_dataset_view: view index out of range");
    const scmc::Matrix& m = d->d.views[view];
    std::memcpy(out, m.data(), m.size() * sizeof(double));
    return SCMC_OK;
}

void scmc_dataset_free(scmc_dataset* d) { delete d; }

int scmc_model_create(const scmc_dataset* d, const char* arch, uint64_t seed, scmc_model** out) {
    if (int rc = require(d && arch && out, "scmc_model_create: null argument")) return rc;
    return guarded([&] {
        std::vector<std::size_t> dims;
        for (const auto& v : d->d.views) dims.push_back(v.cols());
        scmc::Rng rng = scmc::Rng(seed).split(1);
        *out = new scmc_model{scmc::ScmcModel::create(d->d.num_views(), d->d.num_samples(),
                                                      d->d.num_clusters, dims,
                                                      scmc::arch_from_name(arch), rng)};
        return static_cast<int>(SCMC_OK);
    });
}

int scmc_model_load(const char* path, scmc_model** out) {
    if (int rc = require(path && out, "scmc_model_load: null argument")) return rc;
    return guarded([&] {
        try {
            *out = new scmc_model{scmc::load_model(path)};
        } catch (const std::runtime_error& e) {
            return fail(SCMC_ERR_IO, e.what());
        }
        return static_cast<int>(SCMC_OK);
    });
}

int scmc_model_save(const scmc_model* m, const char* path) {
    if (int rc = require(m && path, "scmc_model_save: null argument")) return rc;
    return guarded([&] {
        try {
            scmc::save_model(m->m, path);
        } catch (const std::runtime_error& e) {
            return fail(SCMC_ERR_IO, e.what());
        }
        return static_cast<int>(SCMC_OK);
    });
}

void scmc_model_free(scmc_model* m) { delete m; }

namespace {

scmc::Hyperparams to_hp(const scmc_hyperparams* hp) {
    scmc::Hyperparams h;
    h.gamma1 = hp->gamma1;
    h.gamma2 = hp->gamma2;
    h.gamma3 = hp->gamma3;
    h.tau = hp->tau;
    h.learning_rate = hp->learning_rate;
    h.pretrain_epochs = hp->pretrain_epochs;
    h.train_epochs = hp->train_epochs;
    h.seed = hp->seed;
    return h;
}

}  // namespace

int scmc_pretrain(scmc_model* m, const scmc_dataset* d, const scmc_hyperparams* hp) {
    if (int rc = require(m && d && hp, "scmc_pretrain: null argument")) return rc;
    return guarded([&] {
        scmc::pretrain(m->m, d->d.views, to_hp(hp));
        return static_cast<int>(SCMC_OK);
    });
}

int scmc_train(scmc_model* m, const scmc_dataset* d, const scmc_hyperparams* hp,
               unsigned loss_mask, scmc_report** out) {
    if (int rc = require(m && d && hp && out, "scmc_train: null argument")) return rc;
    return guarded([&] {
        scmc::TrainReport r = scmc::ablate(m->m, d->d.views, to_hp(hp), loss_mask);
        *out = new scmc_report{std::move(r)};
        return static_cast<int>(SCMC_OK);
    });
}

uint64_t scmc_report_num_epochs(const scmc_report* r) { return r ? r->r.history.size() : 0; }

int scmc_report_loss_row(const scmc_report* r, uint64_t epoch, double out[5]) {
    if (int rc = require(r && out, "scmc_report_loss_row: null argument")) return rc;
    if (epoch >= r->r.history.size())
        return fail(SCMC_ERR_INVALID_ARGUMENT, "scmc_report_loss_row: epoch out of range");
    const scmc::LossBreakdown& b = r->r.history[epoch];
    out[0] = b.re;
    out[1] = b.sub;
    out[2] = b.con;
    out[3] = b.fu;
    out[4] = b.total;
    return SCMC_OK;
}

int scmc_report_embedding_only(const scmc_report* r) {
    return r && r->r.embedding_only ? 1 : 0;
}

uint64_t scmc_report_affinity_dim(const scmc_report* r) {
    return r ? r->r.final_affinity.rows() : 0;
}

int scmc_report_affinity(const scmc_report* r, double* out) {
    if (int rc = require(r && out, "scmc_report_affinity: null argument")) return rc;
    if (r->r.final_affinity.size() == 0)
        return fail(SCMC_ERR_INVALID_ARGUMENT, "scmc_report_affinity: embedding-only report");
    std::memcpy(out, r->r.final_affinity.data(), r->r.final_affinity.size() * sizeof(double));
    return SCMC_OK;
}

int scmc_report_save_affinity(const scmc_report* r, const char* path) {
    if (int rc = require(r && path, "scmc_report_save_affinity: null argument")) return rc;
    if (r->r.final_affinity.size() == 0)
        return fail(SCMC_ERR_INVALID_ARGUMENT, "scmc_report_save_affinity: embedding-only report");
    return guarded([&] {
        std::ofstream os(path, std::ios::binary);
        if (!os) return fail(SCMC_ERR_IO, std::string("cannot open for writing: ") + path);
        scmc::write_matrix_block(os, r->r.final_affinity);
        if (!os) return fail(SCMC_ERR_IO, std::string("write failed: ") + path);
        return static_cast<int>(SCMC_OK);
    });
}

uint64_t scmc_report_embedding_cols(const scmc_report* r) {
    return r ? r->r.mean_embedding.cols() : 0;
}

int scmc_report_embedding(const scmc_report* r, double* out) {
    if (int rc = require(r && out, "scmc_report_embedding: null argument")) return rc;
    if (r->r.mean_embedding.size() == 0)
        return fail(SCMC_ERR_INVALID_ARGUMENT, "scmc_report_embedding: not an embedding-only report");
    std::memcpy(out, r->r.mean_embedding.data(), r->r.mean_embedding.size() * sizeof(double));
    return SCMC_OK;
}

int scmc_report_weights(const scmc_report* r, double* out) {
    if (int rc = require(r && out, "scmc_report_weights: null argument")) return rc;
    for (std::size_t i = 0; i < r->r.final_weights.size(); ++i) out[i] = r->r.final_weights[i];
    return SCMC_OK;
}

void scmc_report_free(scmc_report* r) { delete r; }

int scmc_spectral_cluster(const double* affinity, uint64_t n, uint64_t c, uint64_t seed,
                          int32_t* labels_out) {
    if (int rc = require(affinity && labels_out && n > 0, "scmc_spectral_cluster: null argument"))
        return rc;
    return guarded([&] {
        scmc::Matrix a(n, n);
        std::memcpy(a.data(), affinity, n * n * sizeof(double));
        const std::vector<int> labels = scmc::spectral_clustering(a, c, seed);
        for (std::size_t i = 0; i < labels.size(); ++i)
            labels_out[i] = static_cast<int32_t>(labels[i]);
        return static_cast<int>(SCMC_OK);
    });
}

int scmc_kmeans(const double* points, uint64_t n, uint64_t d, uint64_t c, uint64_t seed,
                uint64_t restarts, int32_t* labels_out) {
    if (int rc = require(points && labels_out && n > 0 && d > 0, "scmc_kmeans: null argument"))
        return rc;
    return guarded([&] {
        scmc::Matrix pts(n, d);
        std::memcpy(pts.data(), points, n * d * sizeof(double));
        const std::vector<int> labels = scmc::kmeans(pts, c, seed, restarts);
        for (std::size_t i = 0; i < labels.size(); ++i)
            labels_out[i] = static_cast<int32_t>(labels[i]);
        return static_cast<int>(SCMC_OK);
    });
}

int scmc_evaluate(const int32_t* pred, const int32_t* truth, uint64_t n, const char* nmi_variant,
                  double out_metrics[7]) {
    if (int rc = require(pred && truth && out_metrics && n > 0, "scmc_evaluate: null argument"))
        return rc;
    return guarded([&] {
        const scmc::NmiVariant variant =
            nmi_variant ? scmc::nmi_variant_from_name(nmi_variant) : scmc::NmiVariant::Geometric;
        std::vector<int> p(pred, pred + n), t(truth, truth + n);
        const scmc::ClusteringReport rep = scmc::evaluate_clustering(p, t, variant);
        out_metrics[0] = rep.acc;
        out_metrics[1] = rep.nmi;
        out_metrics[2] = rep.purity;
        out_metrics[3] = rep.ari;
        out_metrics[4] = rep.fscore;
        out_metrics[5] = rep.precision;
        out_metrics[6] = rep.recall;
        return static_cast<int>(SCMC_OK);
    });
}

}  // extern "C"
