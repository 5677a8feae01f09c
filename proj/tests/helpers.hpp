#pragma once

#include <cstdint>
#include <vector>

#include "core/matrix.hpp"
#include "core/rng.hpp"

namespace scmc::testutil {

inline Matrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols, double lo = -1.0,
                            double hi = 1.0) {
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(lo, hi);
    return m;
}

// Entries with magnitude in [floor, hi]; keeps finite-difference probes
// away from relu kinks at zero.
inline Matrix random_matrix_away_from_zero(Rng& rng, std::size_t rows, std::size_t cols,
                                           double floor = 0.2, double hi = 1.0) {
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < m.size(); ++i) {
        const double mag = rng.uniform(floor, hi);
        m.data()[i] = rng.next_double() < 0.5 ? -mag : mag;
    }
    return m;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a.data()[i] - b.data()[i];
        worst = d > worst ? d : (-d > worst ? -d : worst);
    }
    return worst;
}

}  // namespace scmc::testutil
