#pragma once

#include <cmath>
#include <functional>

#include "sslgraph/matrix.hpp"
#include "sslgraph/rng.hpp"

namespace testutil {

inline sslgraph::DenseMatrix random_matrix(std::size_t rows, std::size_t cols, sslgraph::Rng& rng,
                                           double scale = 1.0) {
    sslgraph::DenseMatrix m(rows, cols);
    for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = scale * rng.normal();
    return m;
}

// Central finite differences of a scalar function of one matrix against the
// provided analytic gradient; returns max relative error over entries.
inline double fd_max_rel_error(sslgraph::DenseMatrix& x,
                               const std::function<double()>& eval,
                               const sslgraph::DenseMatrix& analytic, double h = 1e-5) {
    double worst = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double orig = x.data()[i];
        x.data()[i] = orig + h;
        const double fp = eval();
        x.data()[i] = orig - h;
        const double fm = eval();
        x.data()[i] = orig;
        const double numeric = (fp - fm) / (2.0 * h);
        const double a = analytic.data()[i];
        const double denom = std::max({1.0, std::abs(a), std::abs(numeric)});
        worst = std::max(worst, std::abs(a - numeric) / denom);
    }
    return worst;
}

}  // namespace testutil
