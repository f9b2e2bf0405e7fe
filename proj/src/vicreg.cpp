#include "sslgraph/vicreg.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace sslgraph {

void LossWeights::validate() const {
    if (!(lambda_inv >= 0.0) || !(mu_var >= 0.0) || !(nu_cov >= 0.0))
        throw ConfigError("loss coefficients must be nonnegative and finite");
    if (!(epsilon > 0.0)) throw ConfigError("variance epsilon must be positive");
}

LossMode loss_mode_from_string(const std::string& s) {
    if (s == "full") return LossMode::kFull;
    if (s == "node_sampled") return LossMode::kNodeSampled;
    if (s == "dim_sampled_cov_only") return LossMode::kDimSampledCovOnly;
    if (s == "dim_sampled_all") return LossMode::kDimSampledAll;
    if (s == "joint") return LossMode::kJoint;
    throw ConfigError("unknown loss mode: " + s);
}

std::string to_string(LossMode mode) {
    switch (mode) {
        case LossMode::kFull: return "full";
        case LossMode::kNodeSampled: return "node_sampled";
        case LossMode::kDimSampledCovOnly: return "dim_sampled_cov_only";
        case LossMode::kDimSampledAll: return "dim_sampled_all";
        case LossMode::kJoint: return "joint";
    }
    return "?";
}

namespace {

struct Selection {
    std::vector<std::uint32_t> idx;
    bool all = false;
};

Selection resolve(const IndexSet* set, std::size_t n, const char* what) {
    Selection s;
    if (set == nullptr) {
        s.all = true;
        s.idx.resize(n);
        std::iota(s.idx.begin(), s.idx.end(), 0u);
        return s;
    }
    if (set->empty()) throw ConfigError(std::string(what) + ": empty index set");
    for (std::size_t i = 0; i < set->size(); ++i) {
        if ((*set)[i] >= n) throw std::out_of_range(std::string(what) + ": index out of range");
        if (i > 0 && (*set)[i] <= (*set)[i - 1])
            throw ConfigError(std::string(what) + ": indices must be sorted and unique");
    }
    s.idx = *set;
    return s;
}

void require_two_nodes(std::size_t n, const char* term) {
    if (n < 2)
        throw ConfigError(std::string(term) +
                          ": needs at least 2 selected nodes; raise the node sampling ratio p");
}

void ensure_grad_shape(DenseMatrix& g, const DenseMatrix& z) {
    if (g.size() == 0) g = DenseMatrix(z.rows(), z.cols());
    else if (!g.same_shape(z)) throw ShapeError("gradient buffer shape mismatch");
}

}  // namespace

double invariance_loss(const DenseMatrix& z1, const DenseMatrix& z2, const IndexSet* nodes,
                       const IndexSet* dims) {
    if (!z1.same_shape(z2)) throw ShapeError("invariance_loss: view shapes differ");
    const Selection rows = resolve(nodes, z1.rows(), "invariance nodes");
    const Selection cols = resolve(dims, z1.cols(), "invariance dims");
    double acc = 0.0;
    for (std::uint32_t i : rows.idx)
        for (std::uint32_t j : cols.idx) {
            const double d = z1(i, j) - z2(i, j);
            acc += d * d;
        }
    return acc / static_cast<double>(rows.idx.size());
}

void invariance_backward(const DenseMatrix& z1, const DenseMatrix& z2, const IndexSet* nodes,
                         const IndexSet* dims, double upstream, DenseMatrix& g1, DenseMatrix& g2) {
    if (!z1.same_shape(z2)) throw ShapeError("invariance_backward: view shapes differ");
    ensure_grad_shape(g1, z1);
    ensure_grad_shape(g2, z2);
    const Selection rows = resolve(nodes, z1.rows(), "invariance nodes");
    const Selection cols = resolve(dims, z1.cols(), "invariance dims");
    const double scale = 2.0 * upstream / static_cast<double>(rows.idx.size());
    for (std::uint32_t i : rows.idx)
        for (std::uint32_t j : cols.idx) {
            const double d = scale * (z1(i, j) - z2(i, j));
            g1(i, j) += d;
            g2(i, j) -= d;
        }
}

double variance_loss(const DenseMatrix& z, double eps, const IndexSet* nodes,
                     const IndexSet* dims) {
    const Selection rows = resolve(nodes, z.rows(), "variance nodes");
    const Selection cols = resolve(dims, z.cols(), "variance dims");
    require_two_nodes(rows.idx.size(), "variance_loss");
    const double n = static_cast<double>(rows.idx.size());
    double acc = 0.0;
    for (std::uint32_t j : cols.idx) {
        double mean = 0.0;
        for (std::uint32_t i : rows.idx) mean += z(i, j);
        mean /= n;
        double var = 0.0;
        for (std::uint32_t i : rows.idx) {
            const double d = z(i, j) - mean;
            var += d * d;
        }
        var /= n - 1.0;
        const double s = std::sqrt(var + eps);
        if (s < 1.0) acc += 1.0 - s;
    }
    return acc / static_cast<double>(cols.idx.size());
}

void variance_backward(const DenseMatrix& z, double eps, const IndexSet* nodes,
                       const IndexSet* dims, double upstream, DenseMatrix& g) {
    ensure_grad_shape(g, z);
    const Selection rows = resolve(nodes, z.rows(), "variance nodes");
    const Selection cols = resolve(dims, z.cols(), "variance dims");
    require_two_nodes(rows.idx.size(), "variance_backward");
    const double n = static_cast<double>(rows.idx.size());
    const double dprime = static_cast<double>(cols.idx.size());
    for (std::uint32_t j : cols.idx) {
        double mean = 0.0;
        for (std::uint32_t i : rows.idx) mean += z(i, j);
        mean /= n;
        double var = 0.0;
        for (std::uint32_t i : rows.idx) {
            const double d = z(i, j) - mean;
            var += d * d;
        }
        var /= n - 1.0;
        const double s = std::sqrt(var + eps);
        if (s >= 1.0) continue;  // hinge inactive
        const double coeff = -upstream / (dprime * s * (n - 1.0));
        for (std::uint32_t i : rows.idx) g(i, j) += coeff * (z(i, j) - mean);
    }
}

DenseMatrix covariance_matrix(const DenseMatrix& z, const IndexSet* nodes, const IndexSet* dims) {
    const Selection rows = resolve(nodes, z.rows(), "covariance nodes");
    const Selection cols = resolve(dims, z.cols(), "covariance dims");
    require_two_nodes(rows.idx.size(), "covariance_matrix");
    const std::size_t n = rows.idx.size(), d = cols.idx.size();
    DenseMatrix centered(n, d);
    for (std::size_t jj = 0; jj < d; ++jj) {
        const std::uint32_t j = cols.idx[jj];
        double mean = 0.0;
        for (std::uint32_t i : rows.idx) mean += z(i, j);
        mean /= static_cast<double>(n);
        for (std::size_t ii = 0; ii < n; ++ii) centered(ii, jj) = z(rows.idx[ii], j) - mean;
    }
    DenseMatrix cov = matmul_tn(centered, centered);
    cov *= 1.0 / (static_cast<double>(n) - 1.0);
    return cov;
}

double covariance_loss(const DenseMatrix& z, const IndexSet* nodes, const IndexSet* dims) {
    const DenseMatrix cov = covariance_matrix(z, nodes, dims);
    const std::size_t d = cov.rows();
    double acc = 0.0;
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j)
            if (i != j) acc += cov(i, j) * cov(i, j);
    return acc / static_cast<double>(d);
}

void covariance_backward(const DenseMatrix& z, const IndexSet* nodes, const IndexSet* dims,
                         double upstream, DenseMatrix& g) {
    ensure_grad_shape(g, z);
    const Selection rows = resolve(nodes, z.rows(), "covariance nodes");
    const Selection cols = resolve(dims, z.cols(), "covariance dims");
    require_two_nodes(rows.idx.size(), "covariance_backward");
    const std::size_t n = rows.idx.size(), d = cols.idx.size();
    DenseMatrix centered(n, d);
    for (std::size_t jj = 0; jj < d; ++jj) {
        const std::uint32_t j = cols.idx[jj];
        double mean = 0.0;
        for (std::uint32_t i : rows.idx) mean += z(i, j);
        mean /= static_cast<double>(n);
        for (std::size_t ii = 0; ii < n; ++ii) centered(ii, jj) = z(rows.idx[ii], j) - mean;
    }
    DenseMatrix cov = matmul_tn(centered, centered);
    cov *= 1.0 / (static_cast<double>(n) - 1.0);
    for (std::size_t i = 0; i < d; ++i) cov(i, i) = 0.0;  // off-diagonal part only

    // L = (1/d) sum_{i!=j} C_ij^2, C = Zc^T Zc / (n-1)
    // dL/dZc = (4 / (d (n-1))) Zc C_off; centering projects out column means.
    DenseMatrix gc = matmul(centered, cov);
    const double scale = 4.0 * upstream / (static_cast<double>(d) * (static_cast<double>(n) - 1.0));
    for (std::size_t jj = 0; jj < d; ++jj) {
        double colmean = 0.0;
        for (std::size_t ii = 0; ii < n; ++ii) colmean += gc(ii, jj);
        colmean /= static_cast<double>(n);
        for (std::size_t ii = 0; ii < n; ++ii)
            g(rows.idx[ii], cols.idx[jj]) += scale * (gc(ii, jj) - colmean);
    }
}

namespace {

struct ModePlan {
    const IndexSet* nodes_all_terms = nullptr;  // invariance + variance + covariance
    const IndexSet* dims_inv_var = nullptr;
    const IndexSet* dims_cov = nullptr;
};

ModePlan resolve_mode(const SamplingPlan& plan, LossMode mode) {
    const IndexSet* nodes = plan.node_indices ? &*plan.node_indices : nullptr;
    const IndexSet* dims = plan.dim_indices ? &*plan.dim_indices : nullptr;
    switch (mode) {
        case LossMode::kFull: return {nullptr, nullptr, nullptr};
        case LossMode::kNodeSampled: return {nodes, nullptr, nullptr};
        case LossMode::kDimSampledCovOnly: return {nullptr, nullptr, dims};
        case LossMode::kDimSampledAll: return {nullptr, dims, dims};
        case LossMode::kJoint: return {nodes, dims, dims};
    }
    return {};
}

}  // namespace

LossBreakdown vicreg_loss(const DenseMatrix& z1, const DenseMatrix& z2, const LossWeights& weights,
                          const SamplingPlan& plan, LossMode mode) {
    weights.validate();
    if (!z1.same_shape(z2)) throw ShapeError("vicreg_loss: view shapes differ");
    const ModePlan mp = resolve_mode(plan, mode);

    LossBreakdown out;
    out.invariance = invariance_loss(z1, z2, mp.nodes_all_terms, mp.dims_inv_var);
    out.variance_view1 = variance_loss(z1, weights.epsilon, mp.nodes_all_terms, mp.dims_inv_var);
    out.variance_view2 = variance_loss(z2, weights.epsilon, mp.nodes_all_terms, mp.dims_inv_var);
    out.covariance_view1 = covariance_loss(z1, mp.nodes_all_terms, mp.dims_cov);
    out.covariance_view2 = covariance_loss(z2, mp.nodes_all_terms, mp.dims_cov);
    out.total = weights.lambda_inv * out.invariance +
                weights.mu_var * (out.variance_view1 + out.variance_view2) +
                weights.nu_cov * (out.covariance_view1 + out.covariance_view2);
    out.nodes_used = mp.nodes_all_terms ? mp.nodes_all_terms->size() : z1.rows();
    out.dims_used = mp.dims_cov ? mp.dims_cov->size() : z1.cols();
    return out;
}

LossBreakdown vicreg_loss_backward(const DenseMatrix& z1, const DenseMatrix& z2,
                                   const LossWeights& weights, const SamplingPlan& plan,
                                   LossMode mode, DenseMatrix& g1, DenseMatrix& g2) {
    LossBreakdown out = vicreg_loss(z1, z2, weights, plan, mode);
    ensure_grad_shape(g1, z1);
    ensure_grad_shape(g2, z2);
    const ModePlan mp = resolve_mode(plan, mode);
    if (weights.lambda_inv != 0.0)
        invariance_backward(z1, z2, mp.nodes_all_terms, mp.dims_inv_var, weights.lambda_inv, g1, g2);
    if (weights.mu_var != 0.0) {
        variance_backward(z1, weights.epsilon, mp.nodes_all_terms, mp.dims_inv_var, weights.mu_var, g1);
        variance_backward(z2, weights.epsilon, mp.nodes_all_terms, mp.dims_inv_var, weights.mu_var, g2);
    }
    if (weights.nu_cov != 0.0) {
        covariance_backward(z1, mp.nodes_all_terms, mp.dims_cov, weights.nu_cov, g1);
        covariance_backward(z2, mp.nodes_all_terms, mp.dims_cov, weights.nu_cov, g2);
    }
    return out;
}

}  // namespace sslgraph
