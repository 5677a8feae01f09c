#include "data/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "core/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace scmc {

NormMode norm_mode_from_name(const std::string& name) {
    if (name == "none") return NormMode::None;
    if (name == "minmax") return NormMode::MinMax;
    if (name == "minmax+unit-row") return NormMode::MinMaxUnitRow;
    throw std::invalid_argument("unknown normalization mode '" + name +
                                "' (none|minmax|minmax+unit-row)");
}

const char* norm_mode_name(NormMode m) {
    switch (m) {
        case NormMode::None: return "none";
        case NormMode::MinMax: return "minmax";
        case NormMode::MinMaxUnitRow: return "minmax+unit-row";
    }
    return "?";
}

void MultiViewDataset::validate() const {
    if (views.size() < 2)
        throw std::invalid_argument("dataset '" + name + "': needs at least 2 views, has " +
                                    std::to_string(views.size()));
    if (num_clusters == 0)
        throw std::invalid_argument("dataset '" + name + "': cluster count must be positive");
    const std::size_t n = views[0].rows();
    for (std::size_t v = 0; v < views.size(); ++v) {
        if (views[v].rows() != n)
            throw std::invalid_argument("dataset '" + name + "': view " + std::to_string(v) +
                                        " has " + std::to_string(views[v].rows()) +
                                        " rows, expected " + std::to_string(n));
        if (views[v].cols() == 0)
            throw std::invalid_argument("dataset '" + name + "': view " + std::to_string(v) +
                                        " has zero features");
        if (!views[v].all_finite())
            throw std::invalid_argument("dataset '" + name + "': view " + std::to_string(v) +
                                        " contains non-finite entries");
    }
    if (!labels.empty()) {
        if (labels.size() != n)
            throw std::invalid_argument("dataset '" + name + "': " +
                                        std::to_string(labels.size()) + " labels for " +
                                        std::to_string(n) + " samples");
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= num_clusters)
                throw std::invalid_argument("dataset '" + name + "': label " +
                                            std::to_string(labels[i]) + " at row " +
                                            std::to_string(i) + " outside [0, " +
                                            std::to_string(num_clusters) + ")");
    }
    if (normalization.size() != views.size())
        throw std::invalid_argument("dataset '" + name + "': normalization tags do not match view count");
}

namespace {

constexpr char kViewMagic[8] = {'S', 'C', 'M', 'C', 'V', 'W', '0', '1'};

std::uint32_t read_u32le(std::istream& is, const std::string& path) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    if (!is) throw std::runtime_error("truncated view file: " + path);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void write_u32le(std::ostream& os, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    os.write(reinterpret_cast<char*>(b), 4);
}

}  // namespace

Matrix read_view_binary(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("missing view file: " + path);
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, kViewMagic, 8) != 0)
        throw std::runtime_error("bad magic in view file: " + path);
    const std::uint32_t rows = read_u32le(is, path);
    const std::uint32_t cols = read_u32le(is, path);
    Matrix m(rows, cols);
    is.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(m.size() * 8));
    if (!is) throw std::runtime_error("truncated view payload in " + path);
    char extra;
    if (is.read(&extra, 1))
        throw std::runtime_error("trailing bytes after view payload in " + path);
    return m;
}

void write_view_binary(const Matrix& m, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write view file: " + path);
    os.write(kViewMagic, 8);
    write_u32le(os, static_cast<std::uint32_t>(m.rows()));
    write_u32le(os, static_cast<std::uint32_t>(m.cols()));
    os.write(reinterpret_cast<const char*>(m.data()), static_cast<std::streamsize>(m.size() * 8));
    if (!os) throw std::runtime_error("write failed: " + path);
}

Matrix read_view_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("missing view file: " + path);
    std::vector<double> vals;
    std::size_t rows = 0, cols = 0;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::size_t row_cols = 0;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            std::size_t pos = 0;
            double v;
            try {
                v = std::stod(cell, &pos);
            } catch (const std::exception&) {
                throw std::runtime_error(path + ":" + std::to_string(rows + 1) +
                                         ": cannot parse '" + cell + "' as a number");
            }
            while (pos < cell.size() && std::isspace(static_cast<unsigned char>(cell[pos]))) ++pos;
            if (pos != cell.size())
                throw std::runtime_error(path + ":" + std::to_string(rows + 1) +
                                         ": cannot parse '" + cell + "' as a number");
            vals.push_back(v);
            ++row_cols;
        }
        if (rows == 0)
            cols = row_cols;
        else if (row_cols != cols)
            throw std::runtime_error(path + ":" + std::to_string(rows + 1) + ": has " +
                                     std::to_string(row_cols) + " columns, expected " +
                                     std::to_string(cols));
        ++rows;
    }
    if (rows == 0) throw std::runtime_error("empty view file: " + path);
    Matrix m(rows, cols);
    std::copy(vals.begin(), vals.end(), m.data());
    return m;
}

void write_view_csv(const Matrix& m, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write view file: " + path);
    char buf[40];
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", m(i, j));
            os << (j ? "," : "") << buf;
        }
        os << "\n";
    }
    if (!os) throw std::runtime_error("write failed: " + path);
}

std::vector<int> read_labels(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("missing labels file: " + path);
    std::vector<int> labels;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            std::size_t pos = 0;
            const int v = std::stoi(line, &pos);
            while (pos < line.size() && std::isspace(static_cast<unsigned char>(line[pos]))) ++pos;
            if (pos != line.size()) throw std::invalid_argument("trailing");
            labels.push_back(v);
        } catch (const std::exception&) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": cannot parse '" + line + "' as an integer label");
        }
    }
    return labels;
}

void write_labels(const std::vector<int>& labels, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write labels file: " + path);
    for (int l : labels) os << l << "\n";
    if (!os) throw std::runtime_error("write failed: " + path);
}

MultiViewDataset load_dataset(const std::string& dir) {
    const fs::path root(dir);
    const fs::path mpath = root / "manifest.json";
    std::ifstream mf(mpath);
    if (!mf) throw std::runtime_error("missing dataset manifest: " + mpath.string());
    json j;
    try {
        mf >> j;
    } catch (const json::exception& e) {
        throw std::runtime_error(mpath.string() + ": " + e.what());
    }

    MultiViewDataset d;
    try {
        d.name = j.at("name").get<std::string>();
        d.num_clusters = j.at("num_clusters").get<std::size_t>();
        const std::size_t n = j.at("num_samples").get<std::size_t>();
        for (const auto& jv : j.at("views")) {
            const std::string file = jv.at("file").get<std::string>();
            const std::size_t rows = jv.at("rows").get<std::size_t>();
            const std::size_t cols = jv.at("cols").get<std::size_t>();
            const fs::path vp = root / file;
            Matrix m = file.size() > 4 && file.substr(file.size() - 4) == ".csv"
                           ? read_view_csv(vp.string())
                           : read_view_binary(vp.string());
            if (m.rows() != rows || m.cols() != cols)
                throw std::runtime_error("shape mismatch: " + vp.string() + " is " +
                                         m.shape_str() + " but manifest declares " +
                                         std::to_string(rows) + "x" + std::to_string(cols));
            if (rows != n)
                throw std::runtime_error("shape mismatch: manifest num_samples=" +
                                         std::to_string(n) + " but view " + file + " declares " +
                                         std::to_string(rows) + " rows");
            d.views.push_back(std::move(m));
            d.normalization.push_back(norm_mode_from_name(
                jv.value("normalization", std::string("none"))));
        }
        if (j.contains("labels")) {
            d.labels = read_labels((root / j.at("labels").get<std::string>()).string());
        }
    } catch (const json::exception& e) {
        throw std::runtime_error(mpath.string() + ": " + e.what());
    }
    d.validate();
    return d;
}

void save_dataset(const MultiViewDataset& d, const std::string& dir, bool binary) {
    d.validate();
    const fs::path root(dir);
    fs::create_directories(root);
    json j;
    j["name"] = d.name;
    j["num_views"] = d.num_views();
    j["num_samples"] = d.num_samples();
    j["num_clusters"] = d.num_clusters;
    j["views"] = json::array();
    for (std::size_t v = 0; v < d.num_views(); ++v) {
        const std::string file = "view" + std::to_string(v) + (binary ? ".bin" : ".csv");
        if (binary)
            write_view_binary(d.views[v], (root / file).string());
        else
            write_view_csv(d.views[v], (root / file).string());
        j["views"].push_back({{"file", file},
                              {"rows", d.views[v].rows()},
                              {"cols", d.views[v].cols()},
                              {"normalization", norm_mode_name(d.normalization[v])}});
    }
    if (d.has_labels()) {
        write_labels(d.labels, (root / "labels.txt").string());
        j["labels"] = "labels.txt";
    }
    std::ofstream mf(root / "manifest.json");
    if (!mf) throw std::runtime_error("cannot write manifest in " + dir);
    mf << j.dump(2) << "\n";
    if (!mf) throw std::runtime_error("write failed: " + (root / "manifest.json").string());
}

MultiViewDataset normalize(const MultiViewDataset& d, NormMode mode) {
    MultiViewDataset out = d;
    if (mode == NormMode::None) return out;
    for (std::size_t v = 0; v < out.views.size(); ++v) {
        Matrix& m = out.views[v];
        for (std::size_t j = 0; j < m.cols(); ++j) {
            double lo = m(0, j), hi = m(0, j);
            for (std::size_t i = 1; i < m.rows(); ++i) {
                lo = std::min(lo, m(i, j));
                hi = std::max(hi, m(i, j));
            }
            const double span = hi - lo;
            for (std::size_t i = 0; i < m.rows(); ++i)
                m(i, j) = span > 0.0 ? (m(i, j) - lo) / span : 0.0;
        }
        if (mode == NormMode::MinMaxUnitRow) {
            for (std::size_t i = 0; i < m.rows(); ++i) {
                double nrm = 0.0;
                for (std::size_t j = 0; j < m.cols(); ++j) nrm += m(i, j) * m(i, j);
                nrm = std::sqrt(nrm);
                if (nrm > 0.0)
                    for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) /= nrm;
            }
        }
        out.normalization[v] = mode;
    }
    return out;
}

MultiViewDataset synth_multiview(const SynthParams& p) {
    if (p.clusters == 0 || p.per_cluster == 0)
        throw std::invalid_argument("synth_multiview: clusters and per_cluster must be positive");
    if (p.view_dims.size() < 2)
        throw std::invalid_argument("synth_multiview: needs at least 2 views");
    if (p.sub_dim == 0)
        throw std::invalid_argument("synth_multiview: sub_dim must be positive");
    for (std::size_t dv : p.view_dims)
        if (p.sub_dim >= dv)
            throw std::invalid_argument("synth_multiview: sub_dim must be below every view dim");
    if (p.noise < 0.0) throw std::invalid_argument("synth_multiview: noise must be >= 0");

    // mean offset of the coefficient along each cluster's pinned axis
    constexpr double kClusterShift = 4.0;

    const std::size_t V = p.view_dims.size();
    const std::size_t n = p.clusters * p.per_cluster;
    // latent ambient space shared by all clusters; each cluster occupies an
    // orthonormal sub_dim frame inside it
    const std::size_t latent = 2 * p.sub_dim + p.clusters;

    Rng root(p.seed);
    Rng basis_rng = root.split(1);
    Rng coeff_rng = root.split(2);
    Rng map_rng = root.split(3);
    Rng noise_rng = root.split(4);

    // Per-cluster orthonormal bases, latent x sub_dim. Column 0 is pinned
    // to the cluster's private axis e_{2*sub_dim + k}, so those directions
    // are exactly orthogonal across clusters; the remaining columns are
    // random within the shared leading 2*sub_dim coordinates, so cluster
    // subspaces overlap there but never along another cluster's axis.
    const std::size_t shared = 2 * p.sub_dim;
    std::vector<Matrix> bases;
    for (std::size_t k = 0; k < p.clusters; ++k) {
        Matrix b(latent, p.sub_dim);
        b(shared + k, 0) = 1.0;
        for (std::size_t col = 1; col < p.sub_dim; ++col) {
            std::vector<double> v(latent);
            for (std::size_t i = 0; i < shared; ++i) v[i] = basis_rng.normal();
            // Gram-Schmidt against the earlier columns
            for (std::size_t prev = 0; prev < col; ++prev) {
                double dot = 0.0;
                for (std::size_t i = 0; i < latent; ++i) dot += v[i] * b(i, prev);
                for (std::size_t i = 0; i < latent; ++i) v[i] -= dot * b(i, prev);
            }
            double nrm = 0.0;
            for (double x : v) nrm += x * x;
            nrm = std::sqrt(nrm);
            if (nrm < 1e-12) { --col; continue; }
            for (std::size_t i = 0; i < latent; ++i) b(i, col) = v[i] / nrm;
        }
        bases.push_back(std::move(b));
    }

    // latent points, n x latent
    Matrix z(n, latent);
    std::vector<int> labels(n);
    for (std::size_t k = 0; k < p.clusters; ++k) {
        for (std::size_t s = 0; s < p.per_cluster; ++s) {
            const std::size_t i = k * p.per_cluster + s;
            labels[i] = static_cast<int>(k);
            std::vector<double> alpha(p.sub_dim);
            for (auto& a : alpha) a = coeff_rng.normal();
            // shift along the pinned axis separates the cluster means
            // while keeping every point inside the cluster subspace
            alpha[0] += kClusterShift;
            for (std::size_t col = 0; col < latent; ++col) {
                double acc = 0.0;
                for (std::size_t r = 0; r < p.sub_dim; ++r) acc += bases[k](col, r) * alpha[r];
                z(i, col) = acc;
            }
        }
    }

    MultiViewDataset d;
    d.name = "synth";
    d.num_clusters = p.clusters;
    const double map_scale = 1.0 / std::sqrt(static_cast<double>(latent));
    for (std::size_t v = 0; v < V; ++v) {
        Matrix map(latent, p.view_dims[v]);
        for (std::size_t i = 0; i < map.size(); ++i) map.data()[i] = map_rng.normal() * map_scale;
        Matrix x = matmul(z, map);
        if (p.tanh_distortion)
            for (std::size_t i = 0; i < x.size(); ++i) x.data()[i] = std::tanh(x.data()[i]);
        if (p.noise > 0.0)
            for (std::size_t i = 0; i < x.size(); ++i) x.data()[i] += p.noise * noise_rng.normal();
        d.views.push_back(std::move(x));
        d.normalization.push_back(NormMode::None);
    }
    d.labels = std::move(labels);
    d.validate();
    return d;
}

SynthParams synth3x3_params(std::uint64_t seed) {
    SynthParams p;
    p.clusters = 3;
    p.per_cluster = 150;
    p.view_dims = {30, 40, 50};
    p.sub_dim = 4;
    p.noise = 0.01;
    p.tanh_distortion = true;
    p.seed = seed;
    return p;
}

}  // namespace scmc
