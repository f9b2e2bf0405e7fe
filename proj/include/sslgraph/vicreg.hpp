#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sslgraph/matrix.hpp"
#include "sslgraph/samplers.hpp"

namespace sslgraph {

using IndexSet = std::vector<std::uint32_t>;

struct LossWeights {
    double lambda_inv = 25.0;
    double mu_var = 25.0;
    double nu_cov = 1.0;
    double epsilon = 1e-4;

    void validate() const;
};

enum class LossMode { kFull, kNodeSampled, kDimSampledCovOnly, kDimSampledAll, kJoint };

LossMode loss_mode_from_string(const std::string& s);
std::string to_string(LossMode mode);

struct LossBreakdown {
    double invariance = 0.0;
    double variance_view1 = 0.0;
    double variance_view2 = 0.0;
    double covariance_view1 = 0.0;
    double covariance_view2 = 0.0;
    double total = 0.0;
    std::size_t nodes_used = 0;
    std::size_t dims_used = 0;
};

// Mean over selected rows of squared euclidean distance between paired rows.
double invariance_loss(const DenseMatrix& z1, const DenseMatrix& z2,
                       const IndexSet* nodes = nullptr, const IndexSet* dims = nullptr);
void invariance_backward(const DenseMatrix& z1, const DenseMatrix& z2, const IndexSet* nodes,
                         const IndexSet* dims, double upstream, DenseMatrix& g1, DenseMatrix& g2);

// (1/d') sum_j max(0, 1 - sqrt(var_j + eps)) with var over selected rows,
// n-1 denominator. Requires >= 2 selected rows.
double variance_loss(const DenseMatrix& z, double eps, const IndexSet* nodes = nullptr,
                     const IndexSet* dims = nullptr);
void variance_backward(const DenseMatrix& z, double eps, const IndexSet* nodes,
                       const IndexSet* dims, double upstream, DenseMatrix& g);

// Mean-centered covariance over selected rows/cols, n-1 denominator.
DenseMatrix covariance_matrix(const DenseMatrix& z, const IndexSet* nodes = nullptr,
                              const IndexSet* dims = nullptr);

// (1/d') sum_{i != j} Cov(Z)_{ij}^2 over the selected d' x d' covariance.
double covariance_loss(const DenseMatrix& z, const IndexSet* nodes = nullptr,
                       const IndexSet* dims = nullptr);
void covariance_backward(const DenseMatrix& z, const IndexSet* nodes, const IndexSet* dims,
                         double upstream, DenseMatrix& g);

// Combined objective. Which terms see the plan's node/dim subsets depends on
// mode; in kDimSampledCovOnly only the covariance term is restricted to the
// sampled dimensions.
LossBreakdown vicreg_loss(const DenseMatrix& z1, const DenseMatrix& z2, const LossWeights& weights,
                          const SamplingPlan& plan, LossMode mode);

// Same, also accumulating d total / d z into g1, g2 (must be zero-initialized
// to the shapes of z1, z2 or empty).
LossBreakdown vicreg_loss_backward(const DenseMatrix& z1, const DenseMatrix& z2,
                                   const LossWeights& weights, const SamplingPlan& plan,
                                   LossMode mode, DenseMatrix& g1, DenseMatrix& g2);

}  // namespace sslgraph
