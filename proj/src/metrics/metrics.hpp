#pragma once

#include <string>
#include <vector>

#include "core/matrix.hpp"

namespace scmc {

// Normalization used for NMI; the geometric form sqrt(H(p) H(t)) is the
// default. The others exist so published numbers can be compared under
// each convention.
enum class NmiVariant { Geometric, Arithmetic, Min, Max };

NmiVariant nmi_variant_from_name(const std::string& name);
const char* nmi_variant_name(NmiVariant v);

struct ClusteringReport {
    double acc = 0.0;
    double nmi = 0.0;
    double purity = 0.0;
    double ari = 0.0;
    double fscore = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    std::vector<int> mapping;  // cluster id -> class id used by ACC
};

// Minimal-cost assignment on a square cost matrix (Kuhn-Munkres);
// returns, for each row, the assigned column.
std::vector<std::size_t> hungarian(const Matrix& cost);

// Best cluster-to-class matched fraction, solved by optimal assignment on
// the negated contingency counts (padded square when rectangular).
double accuracy(const std::vector<int>& pred, const std::vector<int>& truth,
                std::vector<int>* mapping = nullptr);

double nmi(const std::vector<int>& pred, const std::vector<int>& truth,
           NmiVariant variant = NmiVariant::Geometric);

double purity(const std::vector<int>& pred, const std::vector<int>& truth);

double ari(const std::vector<int>& pred, const std::vector<int>& truth);

struct PairwisePRF {
    double fscore = 0.0;
    double precision = 0.0;
    double recall = 0.0;
};
// Pair-counting precision/recall/F over all unordered sample pairs.
PairwisePRF pairwise_prf(const std::vector<int>& pred, const std::vector<int>& truth);

ClusteringReport evaluate_clustering(const std::vector<int>& pred, const std::vector<int>& truth,
                                     NmiVariant variant = NmiVariant::Geometric);

// Percent, two decimals, aligned columns: one row in the style of the
// usual comparison tables.
std::string report_table_row(const ClusteringReport& r, const std::string& label = "");
std::string report_table_header();
std::string report_to_json(const ClusteringReport& r);

}  // namespace scmc
