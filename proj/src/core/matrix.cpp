#include "core/matrix.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace scmc {

using EigenMap = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using EigenMapMut = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows.begin() == rows.end() ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) throw std::invalid_argument("Matrix: ragged initializer");
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

bool Matrix::all_finite() const {
    if (data_.empty()) return true;
    return Eigen::Map<const Eigen::ArrayXd>(data_.data(), data_.size()).isFinite().all();
}

std::string Matrix::shape_str() const {
    std::ostringstream os;
    os << rows_ << "x" << cols_;
    return os.str();
}

static void check_mul(const Matrix& a, const Matrix& b, std::size_t ak, std::size_t bk) {
    if (ak != bk)
        throw std::invalid_argument("matmul: inner dimensions disagree (" + a.shape_str() +
                                    " vs " + b.shape_str() + ")");
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    check_mul(a, b, a.cols(), b.rows());
    Matrix c(a.rows(), b.cols());
    EigenMap ma(a.data(), a.rows(), a.cols()), mb(b.data(), b.rows(), b.cols());
    EigenMapMut mc(c.data(), c.rows(), c.cols());
    mc.noalias() = ma * mb;
    return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    check_mul(a, b, a.rows(), b.rows());
    Matrix c(a.cols(), b.cols());
    EigenMap ma(a.data(), a.rows(), a.cols()), mb(b.data(), b.rows(), b.cols());
    EigenMapMut mc(c.data(), c.rows(), c.cols());
    mc.noalias() = ma.transpose() * mb;
    return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    check_mul(a, b, a.cols(), b.cols());
    Matrix c(a.rows(), b.rows());
    EigenMap ma(a.data(), a.rows(), a.cols()), mb(b.data(), b.rows(), b.cols());
    EigenMapMut mc(c.data(), c.rows(), c.cols());
    mc.noalias() = ma * mb.transpose();
    return c;
}

Matrix transpose(const Matrix& a) {
    Matrix t(a.cols(), a.rows());
    EigenMapMut(t.data(), t.rows(), t.cols()) =
        EigenMap(a.data(), a.rows(), a.cols()).transpose();
    return t;
}

static void check_same(const Matrix& a, const Matrix& b, const char* op) {
    if (!a.same_shape(b))
        throw std::invalid_argument(std::string(op) + ": shape mismatch (" + a.shape_str() +
                                    " vs " + b.shape_str() + ")");
}

namespace {
using ArrayMap = Eigen::Map<const Eigen::ArrayXd>;
using ArrayMapMut = Eigen::Map<Eigen::ArrayXd>;
}  // namespace

Matrix add(const Matrix& a, const Matrix& b) {
    check_same(a, b, "add");
    Matrix c(a.rows(), a.cols());
    ArrayMapMut(c.data(), c.size()) =
        ArrayMap(a.data(), a.size()) + ArrayMap(b.data(), b.size());
    return c;
}

Matrix sub(const Matrix& a, const Matrix& b) {
    check_same(a, b, "sub");
    Matrix c(a.rows(), a.cols());
    ArrayMapMut(c.data(), c.size()) =
        ArrayMap(a.data(), a.size()) - ArrayMap(b.data(), b.size());
    return c;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
    check_same(a, b, "hadamard");
    Matrix c(a.rows(), a.cols());
    ArrayMapMut(c.data(), c.size()) =
        ArrayMap(a.data(), a.size()) * ArrayMap(b.data(), b.size());
    return c;
}

Matrix scale(const Matrix& a, double s) {
    Matrix c(a.rows(), a.cols());
    ArrayMapMut(c.data(), c.size()) = ArrayMap(a.data(), a.size()) * s;
    return c;
}

double frob_sq(const Matrix& a) {
    if (a.size() == 0) return 0.0;
    return ArrayMap(a.data(), a.size()).square().sum();
}

Matrix elem_tanh(const Matrix& a) {
    // Eigen vectorizes exp but not tanh for doubles, so go through
    // tanh(x) = sign(x) (1 - t) / (1 + t) with t = exp(-2|x|).
    Matrix c(a.rows(), a.cols());
    auto x = ArrayMap(a.data(), a.size());
    Eigen::ArrayXd t = (x.abs() * -2.0).exp();
    ArrayMapMut(c.data(), c.size()) = x.sign() * (1.0 - t) / (1.0 + t);
    return c;
}

Matrix elem_exp(const Matrix& a) {
    Matrix c(a.rows(), a.cols());
    ArrayMapMut(c.data(), c.size()) = ArrayMap(a.data(), a.size()).exp();
    return c;
}

Matrix elem_log(const Matrix& a) {
    Matrix c(a.rows(), a.cols());
    ArrayMapMut(c.data(), c.size()) = ArrayMap(a.data(), a.size()).log();
    return c;
}

double trace(const Matrix& a) {
    if (a.rows() != a.cols()) throw std::invalid_argument("trace: matrix not square");
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) s += a(i, i);
    return s;
}

void require_finite(const Matrix& m, const std::string& what) {
    if (!m.all_finite())
        throw std::invalid_argument(what + ": non-finite entry");
}

}  // namespace scmc
