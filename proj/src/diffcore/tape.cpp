#include "diffcore/tape.hpp"

#include <Eigen/Core>
#include <cmath>
#include <stdexcept>

namespace scmc::diff {

namespace {

constexpr double kNormEps = 1e-12;

using ArrayMap = Eigen::Map<const Eigen::ArrayXd>;
using ArrayMapMut = Eigen::Map<Eigen::ArrayXd>;

void accumulate(Matrix& g, const Matrix& d) {
    if (g.size() == 0) {
        g = d;
        return;
    }
    ArrayMapMut(g.data(), g.size()) += ArrayMap(d.data(), d.size());
}

const char* op_name(Op op) {
    switch (op) {
        case Op::Input: return "input";
        case Op::MatMul: return "matmul";
        case Op::Transpose: return "transpose";
        case Op::Add: return "add";
        case Op::Sub: return "sub";
        case Op::AddRowVec: return "add_rowvec";
        case Op::Scale: return "scale";
        case Op::Hadamard: return "hadamard";
        case Op::ScalarMul: return "scalar_mul";
        case Op::Tanh: return "tanh";
        case Op::Relu: return "relu";
        case Op::Exp: return "exp";
        case Op::Log: return "log";
        case Op::RowSum: return "rowsum";
        case Op::Sum: return "sum";
        case Op::FrobSq: return "frob_sq";
        case Op::Trace: return "trace";
        case Op::CosineGram: return "cosine_gram";
        case Op::SoftmaxRow: return "softmax_row";
        case Op::Elem: return "elem";
        case Op::AffinityProject: return "affinity_project";
    }
    return "?";
}

}  // namespace

void Tape::check_operand(NodeId id) const {
    if (id < 0 || id >= static_cast<NodeId>(nodes_.size()))
        throw std::invalid_argument("Tape: operand id out of range");
}

NodeId Tape::push(Node n) {
    forward_done_ = false;
    backward_done_ = false;
    nodes_.push_back(std::move(n));
    return static_cast<NodeId>(nodes_.size() - 1);
}

NodeId Tape::input(const std::string& name, std::size_t rows, std::size_t cols, bool trainable) {
    Node n;
    n.op = Op::Input;
    n.value = Matrix(rows, cols);
    n.trainable = trainable;
    n.name = name;
    return push(std::move(n));
}

NodeId Tape::constant(Matrix m, const std::string& name) {
    Node n;
    n.op = Op::Input;
    n.value = std::move(m);
    n.trainable = false;
    n.name = name;
    return push(std::move(n));
}

void Tape::bind(NodeId id, const Matrix& m) {
    check_operand(id);
    Node& n = nodes_[id];
    if (n.op != Op::Input) throw std::invalid_argument("Tape::bind: node is not an input");
    if (!n.value.same_shape(m))
        throw std::invalid_argument("Tape::bind: shape mismatch for input '" + n.name + "'");
    n.value = m;
    forward_done_ = false;
    backward_done_ = false;
}

#define SHAPED(rows_, cols_)            \
    Node n;                             \
    n.value = Matrix((rows_), (cols_)); \
    n.a = a;

NodeId Tape::matmul(NodeId a, NodeId b) {
    check_operand(a);
    check_operand(b);
    const Matrix &va = nodes_[a].value, &vb = nodes_[b].value;
    if (va.cols() != vb.rows())
        throw std::invalid_argument("Tape::matmul: inner dimensions disagree (" + va.shape_str() +
                                    " vs " + vb.shape_str() + ")");
    SHAPED(va.rows(), vb.cols());
    n.op = Op::MatMul;
    n.b = b;
    return push(std::move(n));
}

NodeId Tape::transpose(NodeId a) {
    check_operand(a);
    const Matrix& va = nodes_[a].value;
    SHAPED(va.cols(), va.rows());
    n.op = Op::Transpose;
    return push(std::move(n));
}

NodeId Tape::add(NodeId a, NodeId b) {
    check_operand(a);
    check_operand(b);
    const Matrix &va = nodes_[a].value, &vb = nodes_[b].value;
    if (!va.same_shape(vb)) throw std::invalid_argument("Tape::add: shape mismatch");
    SHAPED(va.rows(), va.cols());
    n.op = Op::Add;
    n.b = b;
    return push(std::move(n));
}

NodeId Tape::sub(NodeId a, NodeId b) {
    check_operand(a);
    check_operand(b);
    const Matrix &va = nodes_[a].value, &vb = nodes_[b].value;
    if (!va.same_shape(vb)) throw std::invalid_argument("Tape::sub: shape mismatch");
    SHAPED(va.rows(), va.cols());
    n.op = Op::Sub;
    n.b = b;
    return push(std::move(n));
}

NodeId Tape::add_rowvec(NodeId a, NodeId b) {
    check_operand(a);
    check_operand(b);
    const Matrix &va = nodes_[a].value, &vb = nodes_[b].value;
    if (vb.rows() != 1 || vb.cols() != va.cols())
        throw std::invalid_argument("Tape::add_rowvec: bias must be 1x" +
                                    std::to_string(va.cols()));
    SHAPED(va.rows(), va.cols());
    n.op = Op::AddRowVec;
    n.b = b;
    return push(std::move(n));
}

NodeId Tape::scale(NodeId a, double s) {
    check_operand(a);
    const Matrix& va = nodes_[a].value;
    SHAPED(va.rows(), va.cols());
    n.op = Op::Scale;
    n.alpha = s;
    return push(std::move(n));
}

NodeId Tape::hadamard(NodeId a, NodeId b) {
    check_operand(a);
    check_operand(b);
    const Matrix &va = nodes_[a].value, &vb = nodes_[b].value;
    if (!va.same_shape(vb)) throw std::invalid_argument("Tape::hadamard: shape mismatch");
    SHAPED(va.rows(), va.cols());
    n.op = Op::Hadamard;
    n.b = b;
    return push(std::move(n));
}

NodeId Tape::scalar_mul(NodeId s, NodeId m) {
    check_operand(s);
    check_operand(m);
    const Matrix &vs = nodes_[s].value, &vm = nodes_[m].value;
    if (vs.rows() != 1 || vs.cols() != 1)
        throw std::invalid_argument("Tape::scalar_mul: scalar operand must be 1x1");
    NodeId a = s;
    SHAPED(vm.rows(), vm.cols());
    n.op = Op::ScalarMul;
    n.b = m;
    return push(std::move(n));
}

NodeId Tape::tanh(NodeId a) {
    check_operand(a);
    const Matrix& va = nodes_[a].value;
    SHAPED(va.rows(), va.cols());
    n.op = Op::Tanh;
    return push(std::move(n));
}

NodeId Tape::relu(NodeId a) {
    check_operand(a);
    const Matrix& va = nodes_[a].value;
    SHAPED(va.rows(), va.cols());
    n.op = Op::Relu;
    return push(std::move(n));
}

NodeId Tape::exp(NodeId a) {
    check_operand(a);
    const Matrix& va = nodes_[a].value;
    SHAPED(va.rows(), va.cols());
    n.op = Op::Exp;
    return push(std::move(n));
}

NodeId Tape::log(NodeId a) {
    check_operand(a);
    const Matrix& va = nodes_[a].value;
    SHAPED(va.rows(), va.cols());
    n.op = Op::Log;
    return push(std::move(n));
}

NodeId Tape::rowsum(NodeId a) {
    check_operand(a);
    const Matrix& va = nodes_[a].value;
    SHAPED(va.rows(), 1);
    n.op = Op::RowSum;
    return push(std::move(n));
}

NodeId Tape::sum(NodeId a) {
    check_operand(a);
    SHAPED(1, 1);
    n.op = Op::Sum;
    return push(std::move(n));
}

NodeId Tape::frob_sq(NodeId a) {
    check_operand(a);
    SHAPED(1, 1);
    n.op = Op::FrobSq;
    return push(std::move(n));
}

NodeId Tape::trace(NodeId a) {
    check_operand(a);
    const Matrix& va = nodes_[a].value;
    if (va.rows() != va.cols()) throw std::invalid_argument("Tape::trace: matrix not square");
    SHAPED(1, 1);
    n.op = Op::Trace;
    return push(std::move(n));
}

NodeId Tape::cosine_gram(NodeId u, NodeId w) {
    check_operand(u);
    check_operand(w);
    const Matrix &vu = nodes_[u].value, &vw = nodes_[w].value;
    if (vu.cols() != vw.cols())
        throw std::invalid_argument("Tape::cosine_gram: row dimensions disagree");
    NodeId a = u;
    SHAPED(vu.rows(), vw.rows());
    n.op = Op::CosineGram;
    n.b = w;
    return push(std::move(n));
}

NodeId Tape::softmax_row(NodeId a) {
    check_operand(a);
    const Matrix& va = nodes_[a].value;
    if (va.rows() != 1) throw std::invalid_argument("Tape::softmax_row: expects a 1xV row");
    SHAPED(1, va.cols());
    n.op = Op::SoftmaxRow;
    return push(std::move(n));
}

NodeId Tape::elem(NodeId a, std::size_t i, std::size_t j) {
    check_operand(a);
    const Matrix& va = nodes_[a].value;
    if (i >= va.rows() || j >= va.cols())
        throw std::invalid_argument("Tape::elem: index out of range");
    SHAPED(1, 1);
    n.op = Op::Elem;
    n.ei = i;
    n.ej = j;
    return push(std::move(n));
}

NodeId Tape::affinity_project(NodeId a) {
    check_operand(a);
    const Matrix& va = nodes_[a].value;
    if (va.rows() != va.cols())
        throw std::invalid_argument("Tape::affinity_project: matrix not square");
    if (va.rows() < 2)
        throw std::invalid_argument("Tape::affinity_project: needs N >= 2");
    SHAPED(va.rows(), va.cols());
    n.op = Op::AffinityProject;
    return push(std::move(n));
}

#undef SHAPED

void Tape::set_root(NodeId id) {
    check_operand(id);
    const Matrix& v = nodes_[id].value;
    if (v.rows() != 1 || v.cols() != 1)
        throw std::invalid_argument("Tape::set_root: root must be a 1x1 scalar");
    root_ = id;
}

void Tape::eval(Node& n) {
    const Matrix* va = n.a >= 0 ? &nodes_[n.a].value : nullptr;
    const Matrix* vb = n.b >= 0 ? &nodes_[n.b].value : nullptr;
    switch (n.op) {
        case Op::Input:
            break;
        case Op::MatMul:
            n.value = scmc::matmul(*va, *vb);
            break;
        case Op::Transpose:
            n.value = scmc::transpose(*va);
            break;
        case Op::Add:
            n.value = scmc::add(*va, *vb);
            break;
        case Op::Sub:
            n.value = scmc::sub(*va, *vb);
            break;
        case Op::AddRowVec: {
            Matrix c = *va;
            for (std::size_t i = 0; i < c.rows(); ++i)
                for (std::size_t j = 0; j < c.cols(); ++j) c(i, j) += (*vb)(0, j);
            n.value = std::move(c);
            break;
        }
        case Op::Scale:
            n.value = scmc::scale(*va, n.alpha);
            break;
        case Op::Hadamard:
            n.value = scmc::hadamard(*va, *vb);
            break;
        case Op::ScalarMul:
            n.value = scmc::scale(*vb, (*va)(0, 0));
            break;
        case Op::Tanh:
            n.value = scmc::elem_tanh(*va);
            break;
        case Op::Relu: {
            Matrix c = *va;
            for (std::size_t i = 0; i < c.size(); ++i)
                if (c.data()[i] < 0.0) c.data()[i] = 0.0;
            n.value = std::move(c);
            break;
        }
        case Op::Exp:
            n.value = scmc::elem_exp(*va);
            break;
        case Op::Log:
            n.value = scmc::elem_log(*va);
            break;
        case Op::RowSum: {
            Matrix c(va->rows(), 1);
            using RowMajor =
                Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
            Eigen::Map<Eigen::VectorXd>(c.data(), static_cast<Eigen::Index>(va->rows())) =
                Eigen::Map<const RowMajor>(va->data(), va->rows(), va->cols()).rowwise().sum();
            n.value = std::move(c);
            break;
        }
        case Op::Sum:
            n.value = Matrix{{ArrayMap(va->data(), va->size()).sum()}};
            break;
        case Op::FrobSq:
            n.value = Matrix{{scmc::frob_sq(*va)}};
            break;
        case Op::Trace:
            n.value = Matrix{{scmc::trace(*va)}};
            break;
        case Op::CosineGram: {
            const Matrix &u = *va, &w = *vb;
            // Normalized copies are cached for the adjoint.
            auto normalize = [](const Matrix& m, std::vector<double>& norms) {
                Matrix out(m.rows(), m.cols());
                norms.resize(m.rows());
                using RowMajor =
                    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
                Eigen::Map<const RowMajor> src(m.data(), m.rows(), m.cols());
                Eigen::Map<RowMajor> dst(out.data(), m.rows(), m.cols());
                Eigen::Map<Eigen::VectorXd> nv(norms.data(), static_cast<Eigen::Index>(m.rows()));
                nv = src.rowwise().norm();
                dst = src.array().colwise() *
                      (nv.array() < kNormEps).select(0.0, nv.array().inverse());
                return out;
            };
            std::vector<double> nu, nw;
            n.cache_a = normalize(u, nu);
            n.cache_b = normalize(w, nw);
            n.aux.clear();
            n.aux.insert(n.aux.end(), nu.begin(), nu.end());
            n.aux.insert(n.aux.end(), nw.begin(), nw.end());
            n.value = scmc::matmul_nt(n.cache_a, n.cache_b);
            break;
        }
        case Op::SoftmaxRow: {
            const Matrix& x = *va;
            Matrix y(1, x.cols());
            double mx = x(0, 0);
            for (std::size_t j = 1; j < x.cols(); ++j) mx = std::max(mx, x(0, j));
            double s = 0.0;
            for (std::size_t j = 0; j < x.cols(); ++j) {
                y(0, j) = std::exp(x(0, j) - mx);
                s += y(0, j);
            }
            for (std::size_t j = 0; j < x.cols(); ++j) y(0, j) /= s;
            n.value = std::move(y);
            break;
        }
        case Op::Elem:
            n.value = Matrix{{(*va)(n.ei, n.ej)}};
            break;
        case Op::AffinityProject: {
            const Matrix& x = *va;
            const std::size_t N = x.rows();
            Matrix out(N, N);
            n.aux.assign(N, 0.0);
            n.flags.assign(N, 0);
            for (std::size_t i = 0; i < N; ++i) {
                double s = 0.0;
                for (std::size_t j = 0; j < N; ++j)
                    if (j != i && x(i, j) > 0.0) s += x(i, j);
                n.aux[i] = s;
                if (s < kNormEps) {
                    n.flags[i] = 1;  // fallback: uniform off-diagonal row
                    const double u = 1.0 / static_cast<double>(N - 1);
                    for (std::size_t j = 0; j < N; ++j) out(i, j) = (j == i) ? 0.0 : u;
                } else {
                    for (std::size_t j = 0; j < N; ++j)
                        out(i, j) = (j != i && x(i, j) > 0.0) ? x(i, j) / s : 0.0;
                }
            }
            n.value = std::move(out);
            break;
        }
    }
}

double Tape::forward() {
    if (root_ < 0) throw std::logic_error("Tape::forward: no root set");
    for (auto& n : nodes_) {
        if (n.op == Op::Input) {
            if (!n.value.all_finite())
                throw std::runtime_error("Tape::forward: input '" + n.name + "' is non-finite");
            continue;
        }
        eval(n);
        if (!n.value.all_finite())
            throw std::runtime_error(std::string("Tape::forward: non-finite value at node ") +
                                     op_name(n.op) +
                                     (n.name.empty() ? "" : " '" + n.name + "'"));
    }
    forward_done_ = true;
    backward_done_ = false;
    return nodes_[root_].value(0, 0);
}

void Tape::adjoint(Node& n) {
    const Matrix& g = n.grad;
    if (g.size() == 0) return;  // node does not influence the root
    Matrix* ga = n.a >= 0 ? &nodes_[n.a].grad : nullptr;
    Matrix* gb = n.b >= 0 ? &nodes_[n.b].grad : nullptr;
    const Matrix* va = n.a >= 0 ? &nodes_[n.a].value : nullptr;
    const Matrix* vb = n.b >= 0 ? &nodes_[n.b].value : nullptr;
    switch (n.op) {
        case Op::Input:
            break;
        case Op::MatMul:
            accumulate(*ga, scmc::matmul_nt(g, *vb));
            accumulate(*gb, scmc::matmul_tn(*va, g));
            break;
        case Op::Transpose:
            accumulate(*ga, scmc::transpose(g));
            break;
        case Op::Add:
            accumulate(*ga, g);
            accumulate(*gb, g);
            break;
        case Op::Sub:
            accumulate(*ga, g);
            accumulate(*gb, scmc::scale(g, -1.0));
            break;
        case Op::AddRowVec: {
            accumulate(*ga, g);
            Matrix db(1, g.cols());
            for (std::size_t i = 0; i < g.rows(); ++i)
                for (std::size_t j = 0; j < g.cols(); ++j) db(0, j) += g(i, j);
            accumulate(*gb, db);
            break;
        }
        case Op::Scale:
            accumulate(*ga, scmc::scale(g, n.alpha));
            break;
        case Op::Hadamard:
            accumulate(*ga, scmc::hadamard(g, *vb));
            accumulate(*gb, scmc::hadamard(g, *va));
            break;
        case Op::ScalarMul: {
            double s = (*va)(0, 0);
            accumulate(*gb, scmc::scale(g, s));
            double ds = 0.0;
            for (std::size_t i = 0; i < g.size(); ++i) ds += g.data()[i] * vb->data()[i];
            accumulate(*ga, Matrix{{ds}});
            break;
        }
        case Op::Tanh: {
            Matrix d(g.rows(), g.cols());
            const auto y = ArrayMap(n.value.data(), n.value.size());
            ArrayMapMut(d.data(), d.size()) =
                ArrayMap(g.data(), g.size()) * (1.0 - y.square());
            accumulate(*ga, d);
            break;
        }
        case Op::Relu: {
            Matrix d(g.rows(), g.cols());
            ArrayMapMut(d.data(), d.size()) =
                (ArrayMap(va->data(), va->size()) <= 0.0)
                    .select(0.0, ArrayMap(g.data(), g.size()));
            accumulate(*ga, d);
            break;
        }
        case Op::Exp: {
            Matrix d(g.rows(), g.cols());
            ArrayMapMut(d.data(), d.size()) =
                ArrayMap(g.data(), g.size()) * ArrayMap(n.value.data(), n.value.size());
            accumulate(*ga, d);
            break;
        }
        case Op::Log: {
            Matrix d(g.rows(), g.cols());
            ArrayMapMut(d.data(), d.size()) =
                ArrayMap(g.data(), g.size()) / ArrayMap(va->data(), va->size());
            accumulate(*ga, d);
            break;
        }
        case Op::RowSum: {
            Matrix d(va->rows(), va->cols());
            for (std::size_t i = 0; i < d.rows(); ++i)
                for (std::size_t j = 0; j < d.cols(); ++j) d(i, j) = g(i, 0);
            accumulate(*ga, d);
            break;
        }
        case Op::Sum: {
            Matrix d(va->rows(), va->cols(), g(0, 0));
            accumulate(*ga, d);
            break;
        }
        case Op::FrobSq:
            accumulate(*ga, scmc::scale(*va, 2.0 * g(0, 0)));
            break;
        case Op::Trace: {
            Matrix d(va->rows(), va->cols());
            for (std::size_t i = 0; i < d.rows(); ++i) d(i, i) = g(0, 0);
            accumulate(*ga, d);
            break;
        }
        case Op::CosineGram: {
            const std::size_t nu = va->rows(), nw = vb->rows();
            // dUhat = g * What, dWhat = g^T * Uhat; then pull each row back
            // through the normalization: du = (duh - (duh.uh) uh) / |u|.
            Matrix duh = scmc::matmul(g, n.cache_b);
            Matrix dwh = scmc::matmul_tn(g, n.cache_a);
            auto pullback = [&](const Matrix& dh, const Matrix& hat, const double* norms,
                               std::size_t rows) {
                Matrix d(rows, hat.cols());
                using RowMajor =
                    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
                Eigen::Map<const RowMajor> mdh(dh.data(), rows, hat.cols());
                Eigen::Map<const RowMajor> mhat(hat.data(), rows, hat.cols());
                Eigen::Map<RowMajor> md(d.data(), rows, hat.cols());
                Eigen::Map<const Eigen::ArrayXd> nrm(norms, static_cast<Eigen::Index>(rows));
                Eigen::ArrayXd dot = (mdh.array() * mhat.array()).rowwise().sum();
                // zero rows get zero gradient instead of a division blowup
                Eigen::ArrayXd inv = (nrm < kNormEps).select(0.0, nrm.inverse());
                md = (mdh.array() - mhat.array().colwise() * dot).colwise() * inv;
                return d;
            };
            accumulate(*ga, pullback(duh, n.cache_a, n.aux.data(), nu));
            accumulate(*gb, pullback(dwh, n.cache_b, n.aux.data() + nu, nw));
            break;
        }
        case Op::SoftmaxRow: {
            const Matrix& y = n.value;
            double dot = 0.0;
            for (std::size_t j = 0; j < y.cols(); ++j) dot += g(0, j) * y(0, j);
            Matrix d(1, y.cols());
            for (std::size_t j = 0; j < y.cols(); ++j) d(0, j) = y(0, j) * (g(0, j) - dot);
            accumulate(*ga, d);
            break;
        }
        case Op::Elem: {
            Matrix d(va->rows(), va->cols());
            d(n.ei, n.ej) = g(0, 0);
            accumulate(*ga, d);
            break;
        }
        case Op::AffinityProject: {
            const std::size_t N = va->rows();
            Matrix d(N, N);
            for (std::size_t i = 0; i < N; ++i) {
                if (n.flags[i]) continue;  // fallback row is constant
                const double s = n.aux[i];
                double dot = 0.0;
                for (std::size_t j = 0; j < N; ++j) dot += g(i, j) * n.value(i, j);
                for (std::size_t j = 0; j < N; ++j) {
                    if (j == i || (*va)(i, j) <= 0.0) continue;
                    d(i, j) = (g(i, j) - dot) / s;
                }
            }
            accumulate(*ga, d);
            break;
        }
    }
}

void Tape::backward() {
    if (!forward_done_)
        throw std::logic_error("Tape::backward: forward() must run first");
    for (auto& n : nodes_) n.grad = Matrix();
    nodes_[root_].grad = Matrix{{1.0}};
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) adjoint(*it);
    // Inputs that do not influence the root still get a well-defined zero
    // gradient of the right shape.
    for (auto& n : nodes_)
        if (n.op == Op::Input && n.grad.size() == 0)
            n.grad = Matrix(n.value.rows(), n.value.cols());
    backward_done_ = true;
}

const Matrix& Tape::grad_of(NodeId id) const {
    if (!backward_done_) throw std::logic_error("Tape::grad_of: backward() has not run");
    return nodes_.at(id).grad;
}

std::map<std::string, Matrix> Tape::gradients() const {
    if (!backward_done_) throw std::logic_error("Tape::gradients: backward() has not run");
    std::map<std::string, Matrix> out;
    for (const auto& n : nodes_)
        if (n.op == Op::Input && n.trainable) out[n.name] = n.grad;
    return out;
}

std::vector<Tape::GradCheckEntry> Tape::grad_check(double h, double tol,
                                                   std::size_t max_probes_per_input) {
    if (!(h > 0.0 && h <= 1e-2))
        throw std::invalid_argument("Tape::grad_check: h must be in (0, 1e-2]");
    forward();
    backward();
    std::vector<Matrix> analytic;
    std::vector<NodeId> ids;
    for (NodeId id = 0; id < static_cast<NodeId>(nodes_.size()); ++id)
        if (nodes_[id].op == Op::Input && nodes_[id].trainable) {
            ids.push_back(id);
            analytic.push_back(nodes_[id].grad);
        }
    std::vector<GradCheckEntry> report;
    for (std::size_t k = 0; k < ids.size(); ++k) {
        Node& in = nodes_[ids[k]];
        double max_rel = 0.0;
        // probe every element unless capped, in which case take a fixed
        // evenly spaced subset so the selection is deterministic
        std::size_t step = 1;
        if (max_probes_per_input > 0 && in.value.size() > max_probes_per_input)
            step = (in.value.size() + max_probes_per_input - 1) / max_probes_per_input;
        for (std::size_t e = 0; e < in.value.size(); e += step) {
            const double orig = in.value.data()[e];
            in.value.data()[e] = orig + h;
            const double fp = forward();
            in.value.data()[e] = orig - h;
            const double fm = forward();
            in.value.data()[e] = orig;
            const double fd = (fp - fm) / (2.0 * h);
            const double gr = analytic[k].data()[e];
            const double rel = std::fabs(gr - fd) / std::max({1.0, std::fabs(gr), std::fabs(fd)});
            max_rel = std::max(max_rel, rel);
        }
        report.push_back({in.name, max_rel, max_rel <= tol});
    }
    forward();  // restore cached values
    backward();
    return report;
}

}  // namespace scmc::diff
