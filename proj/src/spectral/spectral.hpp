#pragma once

#include <cstdint>
#include <vector>

#include "core/matrix.hpp"

namespace scmc {

struct EigenPairs {
    std::vector<double> eigenvalues;  // ascending
    Matrix eigenvectors;              // columns, orthonormal, matching order
};

// S = (A + A^T)/2.
Matrix symmetrize(const Matrix& a);

// Full spectrum of a symmetric matrix by cyclic Jacobi rotations.
// Symmetry is verified to 1e-10; fails after 100 sweeps without
// convergence.
EigenPairs eig_sym(const Matrix& s);

// Lloyd iterations from k-means++ seeding; best of `restarts` inits by
// within-cluster sum of squares.
std::vector<int> kmeans(const Matrix& points, std::size_t c, std::uint64_t seed,
                        std::size_t restarts = 10);
double kmeans_wcss(const Matrix& points, const std::vector<int>& labels, std::size_t c);

enum class LaplacianKind { NormalizedSymmetric, Unnormalized };

// Symmetrize, build the Laplacian, embed on the c bottom eigenvectors
// (row-normalized for the normalized Laplacian), k-means with 10 restarts.
std::vector<int> spectral_clustering(const Matrix& a, std::size_t c, std::uint64_t seed,
                                     LaplacianKind kind = LaplacianKind::NormalizedSymmetric);

}  // namespace scmc
