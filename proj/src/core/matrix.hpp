#pragma once

#include <cstddef>
#include <initializer_list>
#include <new>
#include <string>
#include <vector>

namespace scmc {

namespace detail {

// Storage is pinned to cache-line alignment so SIMD reduction kernels
// always see the same alignment. Reductions round differently depending
// on where the vector prefix falls, and bit-reproducibility of results
// is part of the contract here.
template <class T, std::size_t Align>
struct AlignedAlloc {
    using value_type = T;
    AlignedAlloc() = default;
    template <class U>
    AlignedAlloc(const AlignedAlloc<U, Align>&) {}
    T* allocate(std::size_t n) {
        return static_cast<T*>(::operator new(n * sizeof(T), std::align_val_t(Align)));
    }
    void deallocate(T* p, std::size_t n) {
        ::operator delete(p, n * sizeof(T), std::align_val_t(Align));
    }
    template <class U>
    struct rebind {
        using other = AlignedAlloc<U, Align>;
    };
    friend bool operator==(const AlignedAlloc&, const AlignedAlloc&) { return true; }
};

}  // namespace detail

// Dense row-major matrix of 64-bit floats. The one value type everything
// in the pipeline moves around: data matrices, network parameters,
// self-expression coefficients and affinities.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    Matrix(std::initializer_list<std::initializer_list<double>> rows);

    static Matrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }
    bool all_finite() const;

    void fill(double v) { std::fill(data_.begin(), data_.end(), v); }
    std::string shape_str() const;

    bool operator==(const Matrix& o) const {
        return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double, detail::AlignedAlloc<double, 64>> data_;
};

// C = A * B
Matrix matmul(const Matrix& a, const Matrix& b);
// C = A^T * B
Matrix matmul_tn(const Matrix& a, const Matrix& b);
// C = A * B^T
Matrix matmul_nt(const Matrix& a, const Matrix& b);

Matrix transpose(const Matrix& a);
Matrix add(const Matrix& a, const Matrix& b);
Matrix sub(const Matrix& a, const Matrix& b);
Matrix hadamard(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& a, double s);
double frob_sq(const Matrix& a);
double trace(const Matrix& a);

// Vectorized elementwise transcendentals; the training loop spends most
// of its time here so these go through SIMD kernels, not libm scalars.
Matrix elem_tanh(const Matrix& a);
Matrix elem_exp(const Matrix& a);
Matrix elem_log(const Matrix& a);

// Throws std::invalid_argument if any entry is NaN or Inf. Used at the
// boundary where external data enters the system.
void require_finite(const Matrix& m, const std::string& what);

}  // namespace scmc
