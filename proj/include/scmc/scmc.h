/* C interface to the SCMC multi-view subspace clustering library.
 *
 * All functions returning int use the scmc_status codes; on any failure
 * scmc_last_error() describes the problem for the calling thread. Objects
 * are opaque handles owned by the caller and released with the matching
 * _free function.
 */
#ifndef SCMC_SCMC_H
#define SCMC_SCMC_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef struct scmc_dataset scmc_dataset;
typedef struct scmc_model scmc_model;
typedef struct scmc_report scmc_report;

enum scmc_status {
    SCMC_OK = 0,
    SCMC_ERR_INVALID_ARGUMENT = 1,
    SCMC_ERR_IO = 2,
    SCMC_ERR_RUNTIME = 3
};

/* Message for the most recent failure on this thread; never NULL. */
const char* scmc_last_error(void);

typedef struct scmc_hyperparams {
    double gamma1;        /* subspace weight */
    double gamma2;        /* contrastive weight */
    double gamma3;        /* fusion weight */
    double tau;           /* contrastive temperature */
    double learning_rate;
    uint64_t pretrain_epochs;
    uint64_t train_epochs;
    uint64_t seed;
} scmc_hyperparams;

void scmc_hyperparams_defaults(scmc_hyperparams* hp);

/* Loss-term mask bits for ablation; reconstruction is mandatory. */
#define SCMC_LOSS_RE 1u
#define SCMC_LOSS_SUB 2u
#define SCMC_LOSS_CON 4u
#define SCMC_LOSS_FU 8u
#define SCMC_LOSS_ALL 15u

/* ---- datasets ---- */

int scmc_dataset_load(const char* dir, scmc_dataset** out);
int scmc_dataset_save(const scmc_dataset* d, const char* dir, int binary_payload);
/* mode: "none" | "minmax" | "minmax+unit-row"; rewrites the views in place */
int scmc_dataset_normalize(scmc_dataset* d, const char* mode);
int scmc_dataset_synth(uint64_t clusters, uint64_t per_cluster, const uint64_t* view_dims,
                       uint64_t num_views, uint64_t sub_dim, double noise, int tanh_distortion,
                       uint64_t seed, scmc_dataset** out);

uint64_t scmc_dataset_num_views(const scmc_dataset* d);
uint64_t scmc_dataset_num_samples(const scmc_dataset* d);
uint64_t scmc_dataset_num_clusters(const scmc_dataset* d);
uint64_t scmc_dataset_view_dim(const scmc_dataset* d, uint64_t view);
int scmc_dataset_has_labels(const scmc_dataset* d);
/* labels_out must hold num_samples entries */
int scmc_dataset_labels(const scmc_dataset* d, int32_t* labels_out);
/* row-major num_samples x view_dim(view) copy into out */
int scmc_dataset_view(const scmc_dataset* d, uint64_t view, double* out);
void scmc_dataset_free(scmc_dataset* d);

/* ---- models ---- */

/* arch: "wide" ([d,500,200,c]) or "narrow" ([d,200,100,c]) */
int scmc_model_create(const scmc_dataset* d, const char* arch, uint64_t seed, scmc_model** out);
int scmc_model_load(const char* path, scmc_model** out);
int scmc_model_save(const scmc_model* m, const char* path);
void scmc_model_free(scmc_model* m);

/* ---- training ---- */

int scmc_pretrain(scmc_model* m, const scmc_dataset* d, const scmc_hyperparams* hp);
/* Runs hp->train_epochs full-batch epochs on the masked objective and
 * hands back the run report. The model is updated in place. */
int scmc_train(scmc_model* m, const scmc_dataset* d, const scmc_hyperparams* hp,
               unsigned loss_mask, scmc_report** out);

/* ---- reports ---- */

uint64_t scmc_report_num_epochs(const scmc_report* r);
/* out[5] = {reconstruction, subspace, contrastive, fusion, total} */
int scmc_report_loss_row(const scmc_report* r, uint64_t epoch, double out[5]);
/* 1 when the run had no affinity path (reconstruction-only mask) */
int scmc_report_embedding_only(const scmc_report* r);
uint64_t scmc_report_affinity_dim(const scmc_report* r);
/* row-major N x N copy of the projected affinity */
int scmc_report_affinity(const scmc_report* r, double* out);
/* Binary matrix file (shape header + little-endian doubles), byte-stable
 * across identical runs. */
int scmc_report_save_affinity(const scmc_report* r, const char* path);
uint64_t scmc_report_embedding_cols(const scmc_report* r);
/* row-major N x c mean per-view embedding (embedding-only runs) */
int scmc_report_embedding(const scmc_report* r, double* out);
/* out must hold num_views entries; the softmax fusion weights */
int scmc_report_weights(const scmc_report* r, double* out);
void scmc_report_free(scmc_report* r);

/* ---- clustering and metrics ---- */

/* Spectral clustering of a row-major n x n affinity (symmetrized
 * internally) into c groups; labels_out holds n entries. */
int scmc_spectral_cluster(const double* affinity, uint64_t n, uint64_t c, uint64_t seed,
                          int32_t* labels_out);
/* k-means on row-major n x d points, best of `restarts` seedings. */
int scmc_kmeans(const double* points, uint64_t n, uint64_t d, uint64_t c, uint64_t seed,
                uint64_t restarts, int32_t* labels_out);
/* out_metrics[7] = {ACC, NMI, Purity, ARI, F-score, Precision, Recall},
 * each in [0,1] (ARI may be negative). nmi_variant:
 * "geometric" | "arithmetic" | "min" | "max". */
int scmc_evaluate(const int32_t* pred, const int32_t* truth, uint64_t n,
                  const char* nmi_variant, double out_metrics[7]);

#ifdef __cplusplus
}
#endif

#endif /* SCMC_SCMC_H */
