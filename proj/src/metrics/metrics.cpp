#include "metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace scmc {

NmiVariant nmi_variant_from_name(const std::string& name) {
    if (name == "geometric") return NmiVariant::Geometric;
    if (name == "arithmetic") return NmiVariant::Arithmetic;
    if (name == "min") return NmiVariant::Min;
    if (name == "max") return NmiVariant::Max;
    throw std::invalid_argument("unknown NMI variant '" + name +
                                "' (geometric|arithmetic|min|max)");
}

const char* nmi_variant_name(NmiVariant v) {
    switch (v) {
        case NmiVariant::Geometric: return "geometric";
        case NmiVariant::Arithmetic: return "arithmetic";
        case NmiVariant::Min: return "min";
        case NmiVariant::Max: return "max";
    }
    return "?";
}

namespace {

// Relabel to 0..k-1 in order of first appearance.
std::vector<int> compact(const std::vector<int>& labels, std::size_t& k_out) {
    std::map<int, int> remap;
    std::vector<int> out(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        auto [it, inserted] = remap.try_emplace(labels[i], static_cast<int>(remap.size()));
        out[i] = it->second;
    }
    k_out = remap.size();
    return out;
}

struct Contingency {
    std::vector<int> pred, truth;   // compacted
    std::size_t kp = 0, kt = 0, n = 0;
    std::vector<std::vector<std::size_t>> table;  // kp x kt
    std::vector<std::size_t> pred_sizes, truth_sizes;
};

Contingency contingency(const std::vector<int>& pred, const std::vector<int>& truth) {
    if (pred.size() != truth.size())
        throw std::invalid_argument("metrics: label vectors differ in length (" +
                                    std::to_string(pred.size()) + " vs " +
                                    std::to_string(truth.size()) + ")");
    if (pred.empty()) throw std::invalid_argument("metrics: empty label vectors");
    Contingency c;
    c.n = pred.size();
    c.pred = compact(pred, c.kp);
    c.truth = compact(truth, c.kt);
    c.table.assign(c.kp, std::vector<std::size_t>(c.kt, 0));
    c.pred_sizes.assign(c.kp, 0);
    c.truth_sizes.assign(c.kt, 0);
    for (std::size_t i = 0; i < c.n; ++i) {
        c.table[c.pred[i]][c.truth[i]] += 1;
        c.pred_sizes[c.pred[i]] += 1;
        c.truth_sizes[c.truth[i]] += 1;
    }
    return c;
}

double comb2(double x) { return x * (x - 1.0) / 2.0; }

}  // namespace

std::vector<std::size_t> hungarian(const Matrix& cost) {
    if (cost.rows() != cost.cols()) throw std::invalid_argument("hungarian: cost must be square");
    const int n = static_cast<int>(cost.rows());
    const double inf = std::numeric_limits<double>::infinity();
    // potentials-based Kuhn-Munkres, 1-indexed
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = p[j0];
            double delta = inf;
            int j1 = 0;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }
    std::vector<std::size_t> row_to_col(n);
    for (int j = 1; j <= n; ++j)
        if (p[j] != 0) row_to_col[p[j] - 1] = static_cast<std::size_t>(j - 1);
    return row_to_col;
}

double accuracy(const std::vector<int>& pred, const std::vector<int>& truth,
                std::vector<int>* mapping) {
    const Contingency c = contingency(pred, truth);
    const std::size_t dim = std::max(c.kp, c.kt);
    // negated counts, zero-padded square
    Matrix cost(dim, dim, 0.0);
    for (std::size_t i = 0; i < c.kp; ++i)
        for (std::size_t j = 0; j < c.kt; ++j)
            cost(i, j) = -static_cast<double>(c.table[i][j]);
    const auto assign = hungarian(cost);
    std::size_t matched = 0;
    for (std::size_t i = 0; i < c.kp; ++i)
        if (assign[i] < c.kt) matched += c.table[i][assign[i]];
    if (mapping) {
        mapping->assign(c.kp, -1);
        for (std::size_t i = 0; i < c.kp; ++i)
            (*mapping)[i] = assign[i] < c.kt ? static_cast<int>(assign[i]) : -1;
    }
    return static_cast<double>(matched) / static_cast<double>(c.n);
}

double nmi(const std::vector<int>& pred, const std::vector<int>& truth, NmiVariant variant) {
    const Contingency c = contingency(pred, truth);
    // identical partitions (up to relabeling) score 1, including the
    // single-cluster case
    bool identical = c.kp == c.kt;
    if (identical)
        for (std::size_t i = 0; i < c.n && identical; ++i)
            identical = c.pred[i] == c.truth[i];
    if (identical) return 1.0;

    const double n = static_cast<double>(c.n);
    double hp = 0.0, ht = 0.0, mi = 0.0;
    for (std::size_t i = 0; i < c.kp; ++i) {
        const double pi = c.pred_sizes[i] / n;
        if (pi > 0.0) hp -= pi * std::log(pi);
    }
    for (std::size_t j = 0; j < c.kt; ++j) {
        const double pj = c.truth_sizes[j] / n;
        if (pj > 0.0) ht -= pj * std::log(pj);
    }
    for (std::size_t i = 0; i < c.kp; ++i)
        for (std::size_t j = 0; j < c.kt; ++j) {
            if (c.table[i][j] == 0) continue;
            const double pij = c.table[i][j] / n;
            mi += pij * std::log(pij / ((c.pred_sizes[i] / n) * (c.truth_sizes[j] / n)));
        }
    double denom = 0.0;
    switch (variant) {
        case NmiVariant::Geometric: denom = std::sqrt(hp * ht); break;
        case NmiVariant::Arithmetic: denom = 0.5 * (hp + ht); break;
        case NmiVariant::Min: denom = std::min(hp, ht); break;
        case NmiVariant::Max: denom = std::max(hp, ht); break;
    }
    if (denom <= 0.0) return 0.0;
    return mi / denom;
}

double purity(const std::vector<int>& pred, const std::vector<int>& truth) {
    const Contingency c = contingency(pred, truth);
    std::size_t s = 0;
    for (std::size_t i = 0; i < c.kp; ++i)
        s += *std::max_element(c.table[i].begin(), c.table[i].end());
    return static_cast<double>(s) / static_cast<double>(c.n);
}

double ari(const std::vector<int>& pred, const std::vector<int>& truth) {
    const Contingency c = contingency(pred, truth);
    double index = 0.0, sum_a = 0.0, sum_b = 0.0;
    for (std::size_t i = 0; i < c.kp; ++i)
        for (std::size_t j = 0; j < c.kt; ++j) index += comb2(static_cast<double>(c.table[i][j]));
    for (auto a : c.pred_sizes) sum_a += comb2(static_cast<double>(a));
    for (auto b : c.truth_sizes) sum_b += comb2(static_cast<double>(b));
    const double total = comb2(static_cast<double>(c.n));
    const double expected = total > 0.0 ? sum_a * sum_b / total : 0.0;
    const double max_index = 0.5 * (sum_a + sum_b);
    if (max_index == expected) return 1.0;  // degenerate: identical trivial partitions
    return (index - expected) / (max_index - expected);
}

PairwisePRF pairwise_prf(const std::vector<int>& pred, const std::vector<int>& truth) {
    const Contingency c = contingency(pred, truth);
    // pair counts from the contingency table: O(kp*kt) instead of O(N^2)
    double tp_fp = 0.0, tp_fn = 0.0, tp = 0.0;
    for (auto a : c.pred_sizes) tp_fp += comb2(static_cast<double>(a));
    for (auto b : c.truth_sizes) tp_fn += comb2(static_cast<double>(b));
    for (std::size_t i = 0; i < c.kp; ++i)
        for (std::size_t j = 0; j < c.kt; ++j) tp += comb2(static_cast<double>(c.table[i][j]));
    PairwisePRF r;
    r.precision = tp_fp > 0.0 ? tp / tp_fp : 0.0;
    r.recall = tp_fn > 0.0 ? tp / tp_fn : 0.0;
    r.fscore = (r.precision + r.recall) > 0.0
                   ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
                   : 0.0;
    return r;
}

ClusteringReport evaluate_clustering(const std::vector<int>& pred, const std::vector<int>& truth,
                                     NmiVariant variant) {
    ClusteringReport r;
    r.acc = accuracy(pred, truth, &r.mapping);
    r.nmi = nmi(pred, truth, variant);
    r.purity = purity(pred, truth);
    r.ari = ari(pred, truth);
    const PairwisePRF p = pairwise_prf(pred, truth);
    r.fscore = p.fscore;
    r.precision = p.precision;
    r.recall = p.recall;
    return r;
}

namespace {
std::string pct(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%8.2f", v * 100.0);
    return buf;
}
}  // namespace

std::string report_table_header() {
    std::ostringstream os;
    os << "     ACC      NMI   Purity      ARI  F-score     Prec   Recall";
    return os.str();
}

std::string report_table_row(const ClusteringReport& r, const std::string& label) {
    std::ostringstream os;
    if (!label.empty()) os << label << "  ";
    os << pct(r.acc) << " " << pct(r.nmi) << " " << pct(r.purity) << " " << pct(r.ari) << " "
       << pct(r.fscore) << " " << pct(r.precision) << " " << pct(r.recall);
    return os.str();
}

std::string report_to_json(const ClusteringReport& r) {
    std::ostringstream os;
    os.precision(17);
    os << "{\"acc\":" << r.acc << ",\"nmi\":" << r.nmi << ",\"purity\":" << r.purity
       << ",\"ari\":" << r.ari << ",\"fscore\":" << r.fscore << ",\"precision\":" << r.precision
       << ",\"recall\":" << r.recall << "}";
    return os.str();
}

}  // namespace scmc
