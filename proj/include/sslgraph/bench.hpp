#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sslgraph/matrix.hpp"
#include "sslgraph/rng.hpp"

namespace sslgraph {

// Covariance-loss kernel with explicit allocation accounting: the only
// quadratic buffer is the d x d covariance itself (the centered copy is
// never materialized). Used by the scaling benchmark in both precisions.
struct CovKernelResult {
    double loss = 0.0;
    std::size_t cov_buffer_entries = 0;  // exactly d*d
};

CovKernelResult covariance_loss_kernel_f64(const DenseMatrix& z);
CovKernelResult covariance_loss_kernel_f32(const std::vector<float>& z, std::size_t n,
                                           std::size_t d);

struct ScalingCell {
    std::size_t n = 0;
    std::size_t d = 0;
    double median_ms = 0.0;
    std::size_t reps = 0;
    std::size_t cov_buffer_entries = 0;
};

struct ScalingTable {
    std::vector<ScalingCell> cells;
    const ScalingCell* find(std::size_t n, std::size_t d) const;
};

// Median wall time of the covariance loss over reps (after 3 warm-ups) for
// every (n, d) pair; reps auto-doubles while the median is below 1ms.
// Single-threaded on purpose so the asymptotic ratios are not confounded.
ScalingTable bench_loss_scaling(const std::vector<std::size_t>& n_list,
                                const std::vector<std::size_t>& d_list, std::size_t reps,
                                bool use_f32 = false, std::uint64_t seed = 0);

void write_scaling_csv(const ScalingTable& table, const std::string& path);

}  // namespace sslgraph
