#include "spectral/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "core/rng.hpp"

namespace scmc {

Matrix symmetrize(const Matrix& a) {
    if (a.rows() != a.cols()) throw std::invalid_argument("symmetrize: matrix not square");
    Matrix s(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) s(i, j) = 0.5 * (a(i, j) + a(j, i));
    return s;
}

EigenPairs eig_sym(const Matrix& s) {
    const std::size_t n = s.rows();
    if (s.rows() != s.cols()) throw std::invalid_argument("eig_sym: matrix not square");
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (std::fabs(s(i, j) - s(j, i)) > 1e-10)
                throw std::invalid_argument("eig_sym: matrix not symmetric at (" +
                                            std::to_string(i) + "," + std::to_string(j) + ")");

    Matrix a = s;
    Matrix v = Matrix::identity(n);
    // convergence threshold scales with the matrix so tiny and huge
    // spectra behave alike
    const double tol = 1e-20 * std::max(frob_sq(s), 1e-30);
    const int max_sweeps = 100;
    bool converged = false;
    for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
        if (off < tol) {
            converged = true;
            break;
        }
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::fabs(apq) < 1e-300) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double sn = t * c;
                // rotate rows/columns p and q
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - sn * akq;
                    a(k, q) = sn * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - sn * aqk;
                    a(q, k) = sn * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - sn * vkq;
                    v(k, q) = sn * vkp + c * vkq;
                }
            }
        }
    }
    if (!converged) {
        // final off-diagonal check after the last sweep
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
        if (off >= tol)
            throw std::runtime_error("eig_sym: Jacobi failed to converge in 100 sweeps");
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });
    EigenPairs out;
    out.eigenvalues.resize(n);
    out.eigenvectors = Matrix(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        out.eigenvalues[j] = a(order[j], order[j]);
        for (std::size_t i = 0; i < n; ++i) out.eigenvectors(i, j) = v(i, order[j]);
    }
    return out;
}

namespace {

double sq_dist(const Matrix& pts, std::size_t i, const std::vector<double>& center) {
    double s = 0.0;
    for (std::size_t j = 0; j < pts.cols(); ++j) {
        const double d = pts(i, j) - center[j];
        s += d * d;
    }
    return s;
}

struct LloydResult {
    std::vector<int> labels;
    double wcss;
};

LloydResult lloyd_once(const Matrix& pts, std::size_t c, Rng& rng) {
    const std::size_t n = pts.rows(), d = pts.cols();
    std::vector<std::vector<double>> centers;
    centers.reserve(c);

    // k-means++ seeding
    std::vector<double> dist2(n, std::numeric_limits<double>::max());
    {
        const std::size_t first = rng.next_below(n);
        centers.emplace_back(pts.data() + first * d, pts.data() + (first + 1) * d);
    }
    while (centers.size() < c) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            dist2[i] = std::min(dist2[i], sq_dist(pts, i, centers.back()));
            total += dist2[i];
        }
        std::size_t pick;
        if (total <= 0.0) {
            pick = rng.next_below(n);
        } else {
            double r = rng.next_double() * total, acc = 0.0;
            pick = n - 1;
            for (std::size_t i = 0; i < n; ++i) {
                acc += dist2[i];
                if (acc >= r) {
                    pick = i;
                    break;
                }
            }
        }
        centers.emplace_back(pts.data() + pick * d, pts.data() + (pick + 1) * d);
    }

    std::vector<int> labels(n, 0);
    for (int iter = 0; iter < 300; ++iter) {
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            int best = 0;
            double best_d = sq_dist(pts, i, centers[0]);
            for (std::size_t k = 1; k < c; ++k) {
                const double dk = sq_dist(pts, i, centers[k]);
                if (dk < best_d) {
                    best_d = dk;
                    best = static_cast<int>(k);
                }
            }
            if (labels[i] != best) {
                labels[i] = best;
                changed = true;
            }
        }
        if (!changed && iter > 0) break;
        std::vector<std::vector<double>> sums(c, std::vector<double>(d, 0.0));
        std::vector<std::size_t> counts(c, 0);
        for (std::size_t i = 0; i < n; ++i) {
            counts[labels[i]] += 1;
            for (std::size_t j = 0; j < d; ++j) sums[labels[i]][j] += pts(i, j);
        }
        for (std::size_t k = 0; k < c; ++k) {
            if (counts[k] == 0) {
                // re-seed an empty cluster on the farthest point
                std::size_t far = 0;
                double far_d = -1.0;
                for (std::size_t i = 0; i < n; ++i) {
                    const double di = sq_dist(pts, i, centers[labels[i]]);
                    if (di > far_d) {
                        far_d = di;
                        far = i;
                    }
                }
                for (std::size_t j = 0; j < d; ++j) centers[k][j] = pts(far, j);
            } else {
                for (std::size_t j = 0; j < d; ++j)
                    centers[k][j] = sums[k][j] / static_cast<double>(counts[k]);
            }
        }
    }

    double wcss = 0.0;
    for (std::size_t i = 0; i < n; ++i) wcss += sq_dist(pts, i, centers[labels[i]]);
    return {std::move(labels), wcss};
}

}  // namespace

double kmeans_wcss(const Matrix& points, const std::vector<int>& labels, std::size_t c) {
    const std::size_t n = points.rows(), d = points.cols();
    std::vector<std::vector<double>> sums(c, std::vector<double>(d, 0.0));
    std::vector<std::size_t> counts(c, 0);
    for (std::size_t i = 0; i < n; ++i) {
        counts[labels[i]] += 1;
        for (std::size_t j = 0; j < d; ++j) sums[labels[i]][j] += points(i, j);
    }
    double w = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            const double ctr = sums[labels[i]][j] / static_cast<double>(counts[labels[i]]);
            const double diff = points(i, j) - ctr;
            w += diff * diff;
        }
    }
    return w;
}

std::vector<int> kmeans(const Matrix& points, std::size_t c, std::uint64_t seed,
                        std::size_t restarts) {
    if (c == 0 || c > points.rows())
        throw std::invalid_argument("kmeans: cluster count must be in [1, N]");
    if (restarts == 0) restarts = 1;
    Rng base(seed);
    LloydResult best{{}, std::numeric_limits<double>::max()};
    for (std::size_t r = 0; r < restarts; ++r) {
        Rng rng = base.split(r + 1);
        LloydResult res = lloyd_once(points, c, rng);
        if (res.wcss < best.wcss) best = std::move(res);
    }
    return best.labels;
}

std::vector<int> spectral_clustering(const Matrix& a, std::size_t c, std::uint64_t seed,
                                     LaplacianKind kind) {
    const std::size_t n = a.rows();
    if (c == 0 || c > n) throw std::invalid_argument("spectral_clustering: bad cluster count");
    Matrix s = symmetrize(a);
    std::vector<double> deg(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) deg[i] += s(i, j);
    Matrix lap(n, n);
    if (kind == LaplacianKind::NormalizedSymmetric) {
        std::vector<double> dinv(n);
        for (std::size_t i = 0; i < n; ++i) {
            if (deg[i] <= 1e-12) {
                std::cerr << "warning: spectral_clustering: zero-degree vertex " << i
                          << ", degree floored\n";
                deg[i] = 1e-12;
            }
            dinv[i] = 1.0 / std::sqrt(deg[i]);
        }
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                lap(i, j) = (i == j ? 1.0 : 0.0) - dinv[i] * s(i, j) * dinv[j];
    } else {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) lap(i, j) = (i == j ? deg[i] : 0.0) - s(i, j);
    }
    const EigenPairs ep = eig_sym(lap);
    Matrix embed(n, c);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < c; ++k) embed(i, k) = ep.eigenvectors(i, k);
    if (kind == LaplacianKind::NormalizedSymmetric) {
        for (std::size_t i = 0; i < n; ++i) {
            double nrm = 0.0;
            for (std::size_t k = 0; k < c; ++k) nrm += embed(i, k) * embed(i, k);
            nrm = std::sqrt(nrm);
            if (nrm > 1e-12)
                for (std::size_t k = 0; k < c; ++k) embed(i, k) /= nrm;
        }
    }
    return kmeans(embed, c, seed, 10);
}

}  // namespace scmc
