#include "model/model.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace scmc {

std::array<std::size_t, 2> hidden_dims(ArchTag tag) {
    return tag == ArchTag::Wide ? std::array<std::size_t, 2>{500, 200}
                                : std::array<std::size_t, 2>{200, 100};
}

const char* arch_name(ArchTag tag) { return tag == ArchTag::Wide ? "wide" : "narrow"; }

ArchTag arch_from_name(const std::string& name) {
    if (name == "wide") return ArchTag::Wide;
    if (name == "narrow") return ArchTag::Narrow;
    throw std::invalid_argument("unknown architecture tag '" + name + "' (wide|narrow)");
}

namespace {

Matrix uniform_init(std::size_t rows, std::size_t cols, double half_width, Rng& rng) {
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-half_width, half_width);
    return m;
}

// Symmetric uniform with scale 1/sqrt(fan_in); biases stay zero.
Matrix layer_init(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
    return uniform_init(fan_in, fan_out, 1.0 / std::sqrt(static_cast<double>(fan_in)), rng);
}

}  // namespace

ScmcModel ScmcModel::create(std::size_t num_views, std::size_t num_samples,
                            std::size_t num_clusters, const std::vector<std::size_t>& view_dims,
                            ArchTag arch, Rng& rng) {
    if (num_views < 2) throw std::invalid_argument("ScmcModel: at least 2 views required");
    if (view_dims.size() != num_views)
        throw std::invalid_argument("ScmcModel: view_dims size disagrees with view count");
    ScmcModel m;
    m.arch = arch;
    m.num_views = num_views;
    m.num_samples = num_samples;
    m.num_clusters = num_clusters;
    m.view_dims = view_dims;
    const auto [h1, h2] = hidden_dims(arch);
    for (std::size_t v = 0; v < num_views; ++v) {
        const std::size_t d = view_dims[v];
        ViewParams p;
        p.enc_w = {layer_init(d, h1, rng), layer_init(h1, h2, rng), layer_init(h2, num_clusters, rng)};
        p.enc_b = {Matrix(1, h1), Matrix(1, h2), Matrix(1, num_clusters)};
        p.dec_w = {layer_init(num_clusters, h2, rng), layer_init(h2, h1, rng), layer_init(h1, d, rng)};
        p.dec_b = {Matrix(1, h2), Matrix(1, h1), Matrix(1, d)};
        // Small noise, not zero: a zero Z kills every gradient on the
        // decoder path.
        p.z = uniform_init(num_samples, num_samples, 1e-4, rng);
        m.views.push_back(std::move(p));
    }
    m.omega_logits = Matrix(1, num_views);
    return m;
}

namespace {

Matrix dense_layer(const Matrix& x, const Matrix& w, const Matrix& b, bool with_tanh) {
    Matrix y = matmul(x, w);
    for (std::size_t i = 0; i < y.rows(); ++i)
        for (std::size_t j = 0; j < y.cols(); ++j) y(i, j) += b(0, j);
    return with_tanh ? elem_tanh(y) : y;
}

}  // namespace

Matrix encode(const ScmcModel& m, std::size_t view, const Matrix& x) {
    const ViewParams& p = m.views.at(view);
    if (x.cols() != m.view_dims[view])
        throw std::invalid_argument("encode: input has " + std::to_string(x.cols()) +
                                    " columns, view expects " + std::to_string(m.view_dims[view]));
    Matrix h = dense_layer(x, p.enc_w[0], p.enc_b[0], true);
    h = dense_layer(h, p.enc_w[1], p.enc_b[1], true);
    return dense_layer(h, p.enc_w[2], p.enc_b[2], true);
}

Matrix self_express(const ScmcModel& m, std::size_t view, const Matrix& c) {
    const ViewParams& p = m.views.at(view);
    if (c.rows() != p.z.rows())
        throw std::invalid_argument("self_express: sample count mismatch");
    return matmul_tn(p.z, c);
}

Matrix decode(const ScmcModel& m, std::size_t view, const Matrix& cz) {
    const ViewParams& p = m.views.at(view);
    if (cz.cols() != m.num_clusters)
        throw std::invalid_argument("decode: input has " + std::to_string(cz.cols()) +
                                    " columns, expected " + std::to_string(m.num_clusters));
    Matrix h = dense_layer(cz, p.dec_w[0], p.dec_b[0], true);
    h = dense_layer(h, p.dec_w[1], p.dec_b[1], true);
    return dense_layer(h, p.dec_w[2], p.dec_b[2], false);
}

std::vector<double> fusion_weights(const ScmcModel& m) {
    const Matrix& o = m.omega_logits;
    std::vector<double> w(m.num_views);
    double mx = o(0, 0);
    for (std::size_t v = 1; v < m.num_views; ++v) mx = std::max(mx, o(0, v));
    double s = 0.0;
    for (std::size_t v = 0; v < m.num_views; ++v) {
        w[v] = std::exp(o(0, v) - mx);
        s += w[v];
    }
    for (double& x : w) x /= s;
    return w;
}

Matrix fuse_affinity(const ScmcModel& m) {
    const auto w = fusion_weights(m);
    Matrix a(m.num_samples, m.num_samples);
    for (std::size_t v = 0; v < m.num_views; ++v) {
        const Matrix& z = m.views[v].z;
        if (z.rows() != m.num_samples) throw std::invalid_argument("fuse_affinity: Z size mismatch");
        for (std::size_t i = 0; i < a.size(); ++i) a.data()[i] += w[v] * z.data()[i];
    }
    return a;
}

Matrix project_affinity(const Matrix& a_raw) {
    if (a_raw.rows() != a_raw.cols()) throw std::invalid_argument("project_affinity: not square");
    const std::size_t n = a_raw.rows();
    if (n < 2) throw std::invalid_argument("project_affinity: needs N >= 2");
    Matrix out(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            if (j != i && a_raw(i, j) > 0.0) s += a_raw(i, j);
        if (s < 1e-12) {
            const double u = 1.0 / static_cast<double>(n - 1);
            for (std::size_t j = 0; j < n; ++j) out(i, j) = (j == i) ? 0.0 : u;
        } else {
            for (std::size_t j = 0; j < n; ++j)
                out(i, j) = (j != i && a_raw(i, j) > 0.0) ? a_raw(i, j) / s : 0.0;
        }
    }
    return out;
}

// ---- checkpoint I/O ----

namespace {

constexpr char kMagic[8] = {'S', 'C', 'M', 'C', 'M', 'D', 'L', '1'};

void write_u64(std::ostream& os, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<char*>(b), 8);
}

std::uint64_t read_u64(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    if (!is) throw std::runtime_error("checkpoint: truncated file");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

}  // namespace

void write_matrix_block(std::ostream& os, const Matrix& m) {
    write_u64(os, m.rows());
    write_u64(os, m.cols());
    // Little-endian doubles; assumes an LE host.
    os.write(reinterpret_cast<const char*>(m.data()),
             static_cast<std::streamsize>(m.size() * sizeof(double)));
}

Matrix read_matrix_block(std::istream& is) {
    const std::uint64_t rows = read_u64(is), cols = read_u64(is);
    Matrix m(rows, cols);
    is.read(reinterpret_cast<char*>(m.data()),
            static_cast<std::streamsize>(m.size() * sizeof(double)));
    if (!is) throw std::runtime_error("checkpoint: truncated matrix payload");
    return m;
}

namespace {
const auto& write_matrix = write_matrix_block;
const auto& read_matrix = read_matrix_block;
}  // namespace

void save_model(const ScmcModel& m, std::ostream& os) {
    os.write(kMagic, 8);
    write_u64(os, m.arch == ArchTag::Wide ? 0 : 1);
    write_u64(os, m.num_views);
    write_u64(os, m.num_samples);
    write_u64(os, m.num_clusters);
    write_u64(os, m.pretrained ? 1 : 0);
    for (auto d : m.view_dims) write_u64(os, d);
    for (const auto& p : m.views) {
        for (int l = 0; l < 3; ++l) {
            write_matrix(os, p.enc_w[l]);
            write_matrix(os, p.enc_b[l]);
        }
        for (int l = 0; l < 3; ++l) {
            write_matrix(os, p.dec_w[l]);
            write_matrix(os, p.dec_b[l]);
        }
        write_matrix(os, p.z);
    }
    write_matrix(os, m.omega_logits);
    if (!os) throw std::runtime_error("checkpoint: write failed");
}

void save_model(const ScmcModel& m, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open checkpoint for writing: " + path);
    save_model(m, os);
}

ScmcModel load_model(std::istream& is) {
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, kMagic, 8) != 0)
        throw std::runtime_error("checkpoint: bad magic");
    ScmcModel m;
    m.arch = read_u64(is) == 0 ? ArchTag::Wide : ArchTag::Narrow;
    m.num_views = read_u64(is);
    m.num_samples = read_u64(is);
    m.num_clusters = read_u64(is);
    m.pretrained = read_u64(is) != 0;
    m.view_dims.resize(m.num_views);
    for (auto& d : m.view_dims) d = read_u64(is);
    m.views.resize(m.num_views);
    for (auto& p : m.views) {
        for (int l = 0; l < 3; ++l) {
            p.enc_w[l] = read_matrix(is);
            p.enc_b[l] = read_matrix(is);
        }
        for (int l = 0; l < 3; ++l) {
            p.dec_w[l] = read_matrix(is);
            p.dec_b[l] = read_matrix(is);
        }
        p.z = read_matrix(is);
    }
    m.omega_logits = read_matrix(is);
    return m;
}

ScmcModel load_model(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open checkpoint: " + path);
    return load_model(is);
}

}  // namespace scmc
