// Command-line front end for the SCMC library. Talks to the core through
// the C API only; all file formats it writes are documented in the README.
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "scmc/scmc.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// exit code 2: bad usage or bad input; exit code 1: runtime failure
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void call(int rc) {
    if (rc == SCMC_OK) return;
    if (rc == SCMC_ERR_RUNTIME) throw std::runtime_error(scmc_last_error());
    throw InputError(scmc_last_error());
}

std::string output_root() {
    const char* env = std::getenv("SCMC_OUTPUT_ROOT");
    return env && *env ? env : "runs";
}

struct Config {
    std::string dataset;
    std::string arch = "wide";
    std::string output;
    std::string normalize = "minmax";
    std::string nmi_variant = "geometric";
    unsigned loss_mask = SCMC_LOSS_ALL;
    std::uint64_t repeat = 1;
    scmc_hyperparams hp{};
    std::vector<double> gamma1_grid, gamma2_grid, gamma3_grid;

    Config() { scmc_hyperparams_defaults(&hp); }
};

unsigned parse_loss_terms(const std::vector<std::string>& terms) {
    unsigned mask = 0;
    for (const auto& t : terms) {
        if (t == "re") mask |= SCMC_LOSS_RE;
        else if (t == "sub") mask |= SCMC_LOSS_SUB;
        else if (t == "con") mask |= SCMC_LOSS_CON;
        else if (t == "fu") mask |= SCMC_LOSS_FU;
        else throw InputError("unknown loss term '" + t + "' (re|sub|con|fu)");
    }
    if (!(mask & SCMC_LOSS_RE)) throw InputError("loss mask must include 're'");
    return mask;
}

std::vector<std::string> mask_terms(unsigned mask) {
    std::vector<std::string> t;
    if (mask & SCMC_LOSS_RE) t.push_back("re");
    if (mask & SCMC_LOSS_SUB) t.push_back("sub");
    if (mask & SCMC_LOSS_CON) t.push_back("con");
    if (mask & SCMC_LOSS_FU) t.push_back("fu");
    return t;
}

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw InputError("unknown config key '" + it.key() + "' in " + where);
}

void apply_config_file(Config& c, const std::string& path) {
    std::ifstream is(path);
    if (!is) throw InputError("cannot open config file: " + path);
    json j;
    try {
        is >> j;
    } catch (const json::exception& e) {
        throw InputError(path + ": " + e.what());
    }
    try {
        reject_unknown(j, {"dataset", "arch", "output", "normalize", "nmi_variant", "loss_mask",
                           "repeat", "hyperparams", "sweep"}, path);
        if (j.contains("dataset")) c.dataset = j["dataset"].get<std::string>();
        if (j.contains("arch")) c.arch = j["arch"].get<std::string>();
        if (j.contains("output")) c.output = j["output"].get<std::string>();
        if (j.contains("normalize")) c.normalize = j["normalize"].get<std::string>();
        if (j.contains("nmi_variant")) c.nmi_variant = j["nmi_variant"].get<std::string>();
        if (j.contains("repeat")) c.repeat = j["repeat"].get<std::uint64_t>();
        if (j.contains("loss_mask"))
            c.loss_mask = parse_loss_terms(j["loss_mask"].get<std::vector<std::string>>());
        if (j.contains("hyperparams")) {
            const json& h = j["hyperparams"];
            reject_unknown(h, {"gamma1", "gamma2", "gamma3", "tau", "learning_rate",
                               "pretrain_epochs", "train_epochs", "seed"}, path + ":hyperparams");
            if (h.contains("gamma1")) c.hp.gamma1 = h["gamma1"].get<double>();
            if (h.contains("gamma2")) c.hp.gamma2 = h["gamma2"].get<double>();
            if (h.contains("gamma3")) c.hp.gamma3 = h["gamma3"].get<double>();
            if (h.contains("tau")) c.hp.tau = h["tau"].get<double>();
            if (h.contains("learning_rate")) c.hp.learning_rate = h["learning_rate"].get<double>();
            if (h.contains("pretrain_epochs"))
                c.hp.pretrain_epochs = h["pretrain_epochs"].get<std::uint64_t>();
            if (h.contains("train_epochs"))
                c.hp.train_epochs = h["train_epochs"].get<std::uint64_t>();
            if (h.contains("seed")) c.hp.seed = h["seed"].get<std::uint64_t>();
        }
        if (j.contains("sweep")) {
            const json& s = j["sweep"];
            reject_unknown(s, {"gamma1", "gamma2", "gamma3"}, path + ":sweep");
            if (s.contains("gamma1")) c.gamma1_grid = s["gamma1"].get<std::vector<double>>();
            if (s.contains("gamma2")) c.gamma2_grid = s["gamma2"].get<std::vector<double>>();
            if (s.contains("gamma3")) c.gamma3_grid = s["gamma3"].get<std::vector<double>>();
        }
    } catch (const json::exception& e) {
        throw InputError(path + ": " + e.what());
    }
}

json config_manifest(const Config& c, std::uint64_t seed, std::uint64_t repeat) {
    json h = {{"gamma1", c.hp.gamma1},
              {"gamma2", c.hp.gamma2},
              {"gamma3", c.hp.gamma3},
              {"tau", c.hp.tau},
              {"learning_rate", c.hp.learning_rate},
              {"pretrain_epochs", c.hp.pretrain_epochs},
              {"train_epochs", c.hp.train_epochs},
              {"seed", seed}};
    return json{{"dataset", c.dataset},
                {"arch", c.arch},
                {"normalize", c.normalize},
                {"nmi_variant", c.nmi_variant},
                {"loss_mask", mask_terms(c.loss_mask)},
                {"repeat", repeat},
                {"hyperparams", h}};
}

struct DatasetHandle {
    scmc_dataset* d = nullptr;
    ~DatasetHandle() { scmc_dataset_free(d); }
};
struct ModelHandle {
    scmc_model* m = nullptr;
    ~ModelHandle() { scmc_model_free(m); }
};
struct ReportHandle {
    scmc_report* r = nullptr;
    ~ReportHandle() { scmc_report_free(r); }
};

DatasetHandle load_and_normalize(const Config& c) {
    if (c.dataset.empty()) throw InputError("no dataset path given (--dataset or config)");
    DatasetHandle d;
    if (scmc_dataset_load(c.dataset.c_str(), &d.d) != SCMC_OK)
        throw InputError(std::string("cannot load dataset '") + c.dataset + "': " +
                         scmc_last_error());
    call(scmc_dataset_normalize(d.d, c.normalize.c_str()));
    return d;
}

std::vector<int32_t> read_label_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw InputError("cannot open labels file: " + path);
    std::vector<int32_t> labels;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            std::size_t pos = 0;
            const long v = std::stol(line, &pos);
            if (pos != line.size()) throw std::invalid_argument("trailing");
            labels.push_back(static_cast<int32_t>(v));
        } catch (const std::exception&) {
            throw InputError(path + ":" + std::to_string(lineno) + ": cannot parse '" + line +
                             "' as an integer label");
        }
    }
    if (labels.empty()) throw InputError("labels file is empty: " + path);
    return labels;
}

void write_label_file(const std::vector<int32_t>& labels, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    for (int32_t l : labels) os << l << "\n";
}

const char* kMetricNames[7] = {"acc", "nmi", "purity", "ari", "fscore", "precision", "recall"};

std::string metrics_header() {
    return "      ACC      NMI   Purity      ARI  F-score     Prec   Recall";
}

std::string metrics_row(const double m[7], const std::string& label = "") {
    char buf[16];
    std::string row = label;
    for (int i = 0; i < 7; ++i) {
        std::snprintf(buf, sizeof(buf), " %8.2f", m[i] * 100.0);
        row += buf;
    }
    return row;
}

json metrics_json(const double m[7]) {
    json j;
    for (int i = 0; i < 7; ++i) j[kMetricNames[i]] = m[i];
    return j;
}

struct RunResult {
    std::vector<int32_t> pred;
    double metrics[7] = {0, 0, 0, 0, 0, 0, 0};
    bool have_metrics = false;
};

// One pretrain+train+cluster cycle; writes the run directory when given.
RunResult run_once(scmc_dataset* d, const Config& c, std::uint64_t seed, unsigned mask,
                   const std::string& rundir) {
    scmc_hyperparams hp = c.hp;
    hp.seed = seed;

    ModelHandle model;
    call(scmc_model_create(d, c.arch.c_str(), seed, &model.m));
    call(scmc_pretrain(model.m, d, &hp));
    ReportHandle rep;
    call(scmc_train(model.m, d, &hp, mask, &rep.r));

    const std::uint64_t n = scmc_dataset_num_samples(d);
    const std::uint64_t nc = scmc_dataset_num_clusters(d);
    RunResult out;
    out.pred.resize(n);
    if (scmc_report_embedding_only(rep.r)) {
        const std::uint64_t cols = scmc_report_embedding_cols(rep.r);
        std::vector<double> embed(n * cols);
        call(scmc_report_embedding(rep.r, embed.data()));
        call(scmc_kmeans(embed.data(), n, cols, nc, seed, 10, out.pred.data()));
    } else {
        std::vector<double> a(n * n);
        call(scmc_report_affinity(rep.r, a.data()));
        call(scmc_spectral_cluster(a.data(), n, nc, seed, out.pred.data()));
    }
    if (scmc_dataset_has_labels(d)) {
        std::vector<int32_t> truth(n);
        call(scmc_dataset_labels(d, truth.data()));
        call(scmc_evaluate(out.pred.data(), truth.data(), n, c.nmi_variant.c_str(), out.metrics));
        out.have_metrics = true;
    }

    if (!rundir.empty()) {
        fs::create_directories(rundir);
        {
            Config cr = c;
            cr.loss_mask = mask;
            std::ofstream os(rundir + "/manifest.json");
            os << config_manifest(cr, seed, 1).dump(2) << "\n";
        }
        {
            std::ofstream os(rundir + "/loss.csv");
            os << "epoch,reconstruction,subspace,contrastive,fusion,total\n";
            char buf[64];
            for (std::uint64_t e = 0; e < scmc_report_num_epochs(rep.r); ++e) {
                double row[5];
                call(scmc_report_loss_row(rep.r, e, row));
                os << (e + 1);
                for (double v : row) {
                    std::snprintf(buf, sizeof(buf), ",%.17g", v);
                    os << buf;
                }
                os << "\n";
            }
        }
        call(scmc_model_save(model.m, (rundir + "/model.bin").c_str()));
        if (!scmc_report_embedding_only(rep.r))
            call(scmc_report_save_affinity(rep.r, (rundir + "/affinity.bin").c_str()));
        write_label_file(out.pred, rundir + "/labels.txt");
        if (out.have_metrics) {
            std::ofstream os(rundir + "/metrics.json");
            os << metrics_json(out.metrics).dump(2) << "\n";
        }
        {
            const std::uint64_t nv = scmc_dataset_num_views(d);
            std::vector<double> w(nv);
            call(scmc_report_weights(rep.r, w.data()));
            json jw = json::array();
            for (double x : w) jw.push_back(x);
            std::ofstream os(rundir + "/fusion_weights.json");
            os << jw.dump() << "\n";
        }
    }
    return out;
}

struct Summary {
    double mean[7] = {0, 0, 0, 0, 0, 0, 0};
    double stddev[7] = {0, 0, 0, 0, 0, 0, 0};
    std::size_t runs = 0;
};

Summary summarize(const std::vector<RunResult>& results) {
    Summary s;
    for (const auto& r : results) {
        if (!r.have_metrics) continue;
        for (int i = 0; i < 7; ++i) s.mean[i] += r.metrics[i];
        ++s.runs;
    }
    if (s.runs == 0) return s;
    for (int i = 0; i < 7; ++i) s.mean[i] /= static_cast<double>(s.runs);
    for (const auto& r : results) {
        if (!r.have_metrics) continue;
        for (int i = 0; i < 7; ++i) {
            const double d = r.metrics[i] - s.mean[i];
            s.stddev[i] += d * d;
        }
    }
    for (int i = 0; i < 7; ++i) s.stddev[i] = std::sqrt(s.stddev[i] / static_cast<double>(s.runs));
    return s;
}

int cmd_train(const Config& c) {
    DatasetHandle d = load_and_normalize(c);
    const std::string out = c.output.empty()
                                ? output_root() + "/train-seed" + std::to_string(c.hp.seed)
                                : c.output;
    fs::create_directories(out);
    {
        std::ofstream os(out + "/manifest.json");
        os << config_manifest(c, c.hp.seed, c.repeat).dump(2) << "\n";
    }
    std::vector<RunResult> results;
    for (std::uint64_t r = 0; r < c.repeat; ++r) {
        const std::uint64_t seed = c.hp.seed + r;
        std::cout << "run " << (r + 1) << "/" << c.repeat << " (seed " << seed << ")\n";
        results.push_back(run_once(d.d, c, seed, c.loss_mask, out + "/run" + std::to_string(r)));
    }
    const Summary s = summarize(results);
    if (s.runs > 0) {
        std::cout << metrics_header() << "\n";
        std::cout << metrics_row(s.mean, "mean ") << "\n";
        std::cout << metrics_row(s.stddev, "std  ") << "\n";
        json js = {{"runs", s.runs}, {"mean", metrics_json(s.mean)},
                   {"std", metrics_json(s.stddev)}};
        std::ofstream os(out + "/summary.json");
        os << js.dump(2) << "\n";
        std::ofstream cs(out + "/summary.csv");
        cs << "stat";
        for (const char* nm : kMetricNames) cs << "," << nm;
        cs << "\n";
        char buf[64];
        cs << "mean";
        for (int i = 0; i < 7; ++i) {
            std::snprintf(buf, sizeof(buf), ",%.17g", s.mean[i]);
            cs << buf;
        }
        cs << "\nstd";
        for (int i = 0; i < 7; ++i) {
            std::snprintf(buf, sizeof(buf), ",%.17g", s.stddev[i]);
            cs << buf;
        }
        cs << "\n";
    } else {
        std::cout << "dataset has no ground truth; predicted labels written per run\n";
    }
    std::cout << "artifacts in " << out << "\n";
    return 0;
}

int cmd_eval(const std::string& pred_path, const std::string& truth_path,
             const std::string& variant, const std::string& out_path) {
    const std::vector<int32_t> pred = read_label_file(pred_path);
    const std::vector<int32_t> truth = read_label_file(truth_path);
    if (pred.size() != truth.size())
        throw InputError("label files differ in length: " + std::to_string(pred.size()) + " vs " +
                         std::to_string(truth.size()));
    double m[7];
    call(scmc_evaluate(pred.data(), truth.data(), pred.size(), variant.c_str(), m));
    std::cout << metrics_header() << "\n" << metrics_row(m, "     ") << "\n";
    if (!out_path.empty()) {
        std::ofstream os(out_path);
        if (!os) throw std::runtime_error("cannot write " + out_path);
        os << metrics_json(m).dump(2) << "\n";
    }
    return 0;
}

int cmd_ablate(const Config& c) {
    DatasetHandle d = load_and_normalize(c);
    const std::string out = c.output.empty()
                                ? output_root() + "/ablate-seed" + std::to_string(c.hp.seed)
                                : c.output;
    fs::create_directories(out);
    const std::vector<std::pair<std::string, unsigned>> rows = {
        {"Re", SCMC_LOSS_RE},
        {"Re+Sub", SCMC_LOSS_RE | SCMC_LOSS_SUB},
        {"Re+Sub+Con", SCMC_LOSS_RE | SCMC_LOSS_SUB | SCMC_LOSS_CON},
        {"Re+Sub+Fu", SCMC_LOSS_RE | SCMC_LOSS_SUB | SCMC_LOSS_FU},
        {"Full", SCMC_LOSS_ALL},
    };
    std::ofstream cs(out + "/ablate.csv");
    cs << "terms,acc,nmi,purity\n";
    std::printf("%-12s %8s %8s %8s\n", "terms", "ACC", "NMI", "Purity");
    double prev[3] = {0, 0, 0};
    bool first = true;
    for (const auto& [label, mask] : rows) {
        std::vector<RunResult> results;
        for (std::uint64_t r = 0; r < c.repeat; ++r)
            results.push_back(run_once(d.d, c, c.hp.seed + r, mask, ""));
        const Summary s = summarize(results);
        if (s.runs == 0) throw InputError("ablation needs a dataset with ground-truth labels");
        const double cur[3] = {s.mean[0], s.mean[1], s.mean[2]};
        std::printf("%-12s", label.c_str());
        for (int i = 0; i < 3; ++i) {
            // arrows mark movement against the previous row
            const char* dir = first ? " " : (cur[i] >= prev[i] ? "+" : "-");
            std::printf(" %7.2f%s", cur[i] * 100.0, dir);
            prev[i] = cur[i];
        }
        std::printf("\n");
        char buf[128];
        std::snprintf(buf, sizeof(buf), "%s,%.17g,%.17g,%.17g", label.c_str(), cur[0], cur[1],
                      cur[2]);
        cs << buf << "\n";
        first = false;
    }
    std::cout << "table in " << out << "/ablate.csv\n";
    return 0;
}

int cmd_sweep(const Config& c) {
    if (c.gamma1_grid.empty() || c.gamma2_grid.empty() || c.gamma3_grid.empty())
        throw InputError("sweep needs nonempty gamma1/gamma2/gamma3 grids (config key 'sweep')");
    DatasetHandle d = load_and_normalize(c);
    const std::string out = c.output.empty()
                                ? output_root() + "/sweep-seed" + std::to_string(c.hp.seed)
                                : c.output;
    fs::create_directories(out);
    std::ofstream cs(out + "/sweep.csv");
    cs << "gamma1,gamma2,gamma3";
    for (const char* nm : kMetricNames) cs << "," << nm;
    cs << "\n";
    char buf[128];
    for (double g1 : c.gamma1_grid)
        for (double g2 : c.gamma2_grid)
            for (double g3 : c.gamma3_grid) {
                Config cc = c;
                cc.hp.gamma1 = g1;
                cc.hp.gamma2 = g2;
                cc.hp.gamma3 = g3;
                std::vector<RunResult> results;
                for (std::uint64_t r = 0; r < c.repeat; ++r)
                    results.push_back(run_once(d.d, cc, c.hp.seed + r, c.loss_mask, ""));
                const Summary s = summarize(results);
                std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g", g1, g2, g3);
                cs << buf;
                for (int i = 0; i < 7; ++i) {
                    std::snprintf(buf, sizeof(buf), ",%.17g", s.mean[i]);
                    cs << buf;
                }
                cs << "\n";
                std::printf("gamma1=%g gamma2=%g gamma3=%g  ACC %.2f\n", g1, g2, g3,
                            s.mean[0] * 100.0);
            }
    std::cout << "grid in " << out << "/sweep.csv\n";
    return 0;
}

int cmd_synth(std::uint64_t clusters, std::uint64_t per_cluster,
              const std::vector<std::uint64_t>& dims, std::uint64_t sub_dim, double noise,
              bool no_distortion, std::uint64_t seed, const std::string& out, bool csv) {
    DatasetHandle d;
    call(scmc_dataset_synth(clusters, per_cluster, dims.data(), dims.size(), sub_dim, noise,
                            no_distortion ? 0 : 1, seed, &d.d));
    call(scmc_dataset_save(d.d, out.c_str(), csv ? 0 : 1));
    std::cout << "wrote " << scmc_dataset_num_samples(d.d) << " samples, "
              << scmc_dataset_num_views(d.d) << " views to " << out << "\n";
    return 0;
}

// affinity.bin layout: rows u64 LE, cols u64 LE, then row-major f64 LE
std::vector<double> read_matrix_file(const std::string& path, std::uint64_t& rows,
                                     std::uint64_t& cols) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw InputError("cannot open matrix file: " + path);
    unsigned char hdr[16];
    is.read(reinterpret_cast<char*>(hdr), 16);
    if (!is) throw InputError("truncated matrix file: " + path);
    rows = cols = 0;
    for (int i = 0; i < 8; ++i) {
        rows |= static_cast<std::uint64_t>(hdr[i]) << (8 * i);
        cols |= static_cast<std::uint64_t>(hdr[8 + i]) << (8 * i);
    }
    std::vector<double> data(rows * cols);
    is.read(reinterpret_cast<char*>(data.data()),
            static_cast<std::streamsize>(data.size() * sizeof(double)));
    if (!is) throw InputError("truncated matrix payload: " + path);
    return data;
}

int cmd_cluster(const std::string& affinity_path, std::uint64_t clusters, std::uint64_t seed,
                const std::string& out_path) {
    std::uint64_t rows = 0, cols = 0;
    const std::vector<double> a = read_matrix_file(affinity_path, rows, cols);
    if (rows != cols) throw InputError("affinity matrix must be square, got " +
                                       std::to_string(rows) + "x" + std::to_string(cols));
    std::vector<int32_t> labels(rows);
    call(scmc_spectral_cluster(a.data(), rows, clusters, seed, labels.data()));
    if (out_path.empty())
        for (int32_t l : labels) std::cout << l << "\n";
    else
        write_label_file(labels, out_path);
    return 0;
}

void add_common_options(CLI::App* cmd, Config& c, std::string& config_path,
                        std::vector<std::string>& loss_terms) {
    cmd->add_option("--config", config_path, "JSON config file");
    cmd->add_option("--dataset", c.dataset, "dataset directory");
    cmd->add_option("--arch", c.arch, "autoencoder geometry: wide|narrow");
    cmd->add_option("--output", c.output, "output directory");
    cmd->add_option("--normalize", c.normalize, "none|minmax|minmax+unit-row");
    cmd->add_option("--nmi-variant", c.nmi_variant, "geometric|arithmetic|min|max");
    cmd->add_option("--repeat", c.repeat, "number of seeded repetitions");
    cmd->add_option("--seed", c.hp.seed, "base seed");
    cmd->add_option("--gamma1", c.hp.gamma1, "subspace weight");
    cmd->add_option("--gamma2", c.hp.gamma2, "contrastive weight");
    cmd->add_option("--gamma3", c.hp.gamma3, "fusion weight");
    cmd->add_option("--tau", c.hp.tau, "contrastive temperature");
    cmd->add_option("--lr", c.hp.learning_rate, "learning rate");
    cmd->add_option("--epochs", c.hp.train_epochs, "training epochs");
    cmd->add_option("--pretrain-epochs", c.hp.pretrain_epochs, "pretraining epochs");
    cmd->add_option("--loss", loss_terms, "loss terms (subset of re,sub,con,fu)")
        ->delimiter(',');
}

// Config file first, then explicit flags on top of it.
void resolve_config(CLI::App* cmd, Config& c, const std::string& config_path,
                    const std::vector<std::string>& loss_terms) {
    if (!config_path.empty()) {
        Config from_file;
        apply_config_file(from_file, config_path);
        // overlay: file values become defaults, flags that were actually
        // given win
        Config merged = from_file;
        auto keep = [&](const std::string& flag) { return cmd->count(flag) > 0; };
        if (keep("--dataset")) merged.dataset = c.dataset;
        if (keep("--arch")) merged.arch = c.arch;
        if (keep("--output")) merged.output = c.output;
        if (keep("--normalize")) merged.normalize = c.normalize;
        if (keep("--nmi-variant")) merged.nmi_variant = c.nmi_variant;
        if (keep("--repeat")) merged.repeat = c.repeat;
        if (keep("--seed")) merged.hp.seed = c.hp.seed;
        if (keep("--gamma1")) merged.hp.gamma1 = c.hp.gamma1;
        if (keep("--gamma2")) merged.hp.gamma2 = c.hp.gamma2;
        if (keep("--gamma3")) merged.hp.gamma3 = c.hp.gamma3;
        if (keep("--tau")) merged.hp.tau = c.hp.tau;
        if (keep("--lr")) merged.hp.learning_rate = c.hp.learning_rate;
        if (keep("--epochs")) merged.hp.train_epochs = c.hp.train_epochs;
        if (keep("--pretrain-epochs")) merged.hp.pretrain_epochs = c.hp.pretrain_epochs;
        c = merged;
    }
    if (!loss_terms.empty()) c.loss_mask = parse_loss_terms(loss_terms);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"SCMC: subspace-contrastive multi-view clustering"};
    app.require_subcommand(1);

    Config cfg;
    std::string config_path;
    std::vector<std::string> loss_terms;

    auto* train = app.add_subcommand("train", "pretrain + train, repeat times, export artifacts");
    add_common_options(train, cfg, config_path, loss_terms);

    auto* ablate = app.add_subcommand("ablate", "loss-term ablation table");
    add_common_options(ablate, cfg, config_path, loss_terms);

    auto* sweep = app.add_subcommand("sweep", "gamma grid sweep");
    add_common_options(sweep, cfg, config_path, loss_terms);

    std::string pred_path, truth_path, eval_out;
    auto* eval = app.add_subcommand("eval", "score predicted labels against ground truth");
    eval->add_option("--pred", pred_path, "predicted labels file")->required();
    eval->add_option("--truth", truth_path, "ground-truth labels file")->required();
    eval->add_option("--nmi-variant", cfg.nmi_variant, "geometric|arithmetic|min|max");
    eval->add_option("--out", eval_out, "write metrics JSON here");

    std::uint64_t sy_clusters = 3, sy_per = 150, sy_sub = 4, sy_seed = 0;
    std::vector<std::uint64_t> sy_dims = {30, 40, 50};
    double sy_noise = 0.01;
    bool sy_no_distortion = false, sy_csv = false;
    std::string sy_out;
    auto* synth = app.add_subcommand("synth", "generate a union-of-subspaces dataset");
    synth->add_option("--clusters", sy_clusters, "cluster count");
    synth->add_option("--per-cluster", sy_per, "samples per cluster");
    synth->add_option("--dims", sy_dims, "per-view ambient dims")->delimiter(',');
    synth->add_option("--sub-dim", sy_sub, "latent subspace rank");
    synth->add_option("--noise", sy_noise, "additive noise sigma");
    synth->add_option("--seed", sy_seed, "generator seed");
    synth->add_flag("--linear", sy_no_distortion, "skip the tanh distortion");
    synth->add_flag("--csv", sy_csv, "CSV payloads instead of binary");
    synth->add_option("--out", sy_out, "dataset directory to write")->required();

    std::string cl_affinity, cl_out;
    std::uint64_t cl_clusters = 0, cl_seed = 0;
    auto* cluster = app.add_subcommand("cluster", "spectral clustering of a saved affinity");
    cluster->add_option("--affinity", cl_affinity, "affinity.bin from a run directory")->required();
    cluster->add_option("--clusters", cl_clusters, "cluster count")->required();
    cluster->add_option("--seed", cl_seed, "k-means seed");
    cluster->add_option("--out", cl_out, "labels file (stdout when absent)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (train->parsed() || ablate->parsed() || sweep->parsed()) {
            CLI::App* active = train->parsed() ? train : (ablate->parsed() ? ablate : sweep);
            resolve_config(active, cfg, config_path, loss_terms);
            if (train->parsed()) return cmd_train(cfg);
            if (ablate->parsed()) return cmd_ablate(cfg);
            return cmd_sweep(cfg);
        }
        if (eval->parsed()) return cmd_eval(pred_path, truth_path, cfg.nmi_variant, eval_out);
        if (synth->parsed())
            return cmd_synth(sy_clusters, sy_per, sy_dims, sy_sub, sy_noise, sy_no_distortion,
                             sy_seed, sy_out, sy_csv);
        if (cluster->parsed()) return cmd_cluster(cl_affinity, cl_clusters, cl_seed, cl_out);
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
