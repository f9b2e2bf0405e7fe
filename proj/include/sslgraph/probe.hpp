#pragma once

#include <cstdint>
#include <vector>

#include "sslgraph/gcn.hpp"
#include "sslgraph/graph.hpp"
#include "sslgraph/matrix.hpp"

namespace sslgraph {

struct SplitSpec {
    std::vector<std::uint32_t> train, val, test;

    // Disjoint random split with the given fractions; test takes the rest.
    static SplitSpec random(std::size_t n, double train_frac, double val_frac, std::uint64_t seed);

    void validate(std::size_t n) const;
};

struct ProbeResult {
    double accuracy_mean = 0.0;
    double accuracy_std = 0.0;
    std::vector<double> per_trial;
    double l2 = 0.0;
};

struct ProbeConfig {
    double l2 = 1e-4;
    std::size_t max_iters = 2000;
    double grad_tol = 1e-6;
    double lr = 1.0;
    // When set, l2 is chosen from this grid on the validation split.
    std::vector<double> l2_grid;
};

// Multinomial logistic regression by full-batch gradient descent on the
// train split of frozen representations H; returns test accuracy as a
// single-trial ProbeResult.
ProbeResult train_probe(const DenseMatrix& h, const std::vector<int>& labels,
                        const SplitSpec& split, const ProbeConfig& cfg);

// Linear evaluation: encode once with frozen parameters, run `trials`
// probes over re-seeded splits, aggregate mean and std.
ProbeResult evaluate(const GcnEncoderParams& encoder, const Graph& g, double train_frac,
                     double val_frac, std::size_t trials, std::uint64_t seed,
                     const ProbeConfig& cfg = {});

ProbeResult evaluate_representations(const DenseMatrix& h, const std::vector<int>& labels,
                                     double train_frac, double val_frac, std::size_t trials,
                                     std::uint64_t seed, const ProbeConfig& cfg = {});

}  // namespace sslgraph
