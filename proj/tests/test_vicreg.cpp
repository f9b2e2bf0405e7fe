#include <doctest.h>

#include "sslgraph/vicreg.hpp"
#include "test_util.hpp"

using namespace sslgraph;

namespace {

// N x D matrix whose centered columns are orthogonal with variance exactly 1
// (Gram-Schmidt on centered columns, rescaled by sqrt(n-1)).
DenseMatrix whitened_matrix(std::size_t n, std::size_t d, Rng& rng) {
    DenseMatrix z = testutil::random_matrix(n, d, rng);
    for (std::size_t j = 0; j < d; ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += z(i, j);
        mean /= static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) z(i, j) -= mean;
        for (std::size_t k = 0; k < j; ++k) {
            double dot = 0.0;
            for (std::size_t i = 0; i < n; ++i) dot += z(i, j) * z(i, k);
            for (std::size_t i = 0; i < n; ++i) z(i, j) -= dot * z(i, k);
        }
        double norm = 0.0;
        for (std::size_t i = 0; i < n; ++i) norm += z(i, j) * z(i, j);
        norm = std::sqrt(norm);
        for (std::size_t i = 0; i < n; ++i) z(i, j) /= norm;
    }
    z *= std::sqrt(static_cast<double>(n - 1));
    return z;
}

}  // namespace

TEST_CASE("invariance_loss: all-zeros vs all-ones equals the embedding width") {
    const std::size_t n = 5, d = 7;
    DenseMatrix z1(n, d), z2(n, d, 1.0);
    CHECK(invariance_loss(z1, z2) == doctest::Approx(static_cast<double>(d)));
    CHECK(invariance_loss(z1, z1) == 0.0);

    // restricting dims scales the squared distance accordingly
    IndexSet dims{0, 1, 2};
    CHECK(invariance_loss(z1, z2, nullptr, &dims) == doctest::Approx(3.0));
}

TEST_CASE("invariance_loss: hand-computed two-row case and node restriction") {
    DenseMatrix z1(2, 2), z2(2, 2);
    z1(0, 0) = 1.0; z1(0, 1) = 2.0; z1(1, 0) = 0.0; z1(1, 1) = 0.0;
    z2(0, 0) = 2.0; z2(0, 1) = 4.0; z2(1, 0) = 1.0; z2(1, 1) = 1.0;
    // row 0 dist^2 = 1 + 4 = 5, row 1 dist^2 = 2; mean = 3.5
    CHECK(invariance_loss(z1, z2) == doctest::Approx(3.5));
    IndexSet rows{0};
    CHECK(invariance_loss(z1, z2, &rows, nullptr) == doctest::Approx(5.0));
}

TEST_CASE("variance_loss: constant embedding hinges at 1 - sqrt(eps)") {
    DenseMatrix z(6, 4, 3.0);
    CHECK(variance_loss(z, 1e-4) == doctest::Approx(1.0 - std::sqrt(1e-4)).epsilon(1e-12));
    CHECK(variance_loss(z, 1e-4) == doctest::Approx(0.99).epsilon(1e-12));
}

TEST_CASE("variance_loss: saturated hinge on high-variance columns") {
    // column values {-3, 3}: var = 18 with the n-1 denominator, sqrt > 1
    DenseMatrix z(2, 3);
    for (std::size_t j = 0; j < 3; ++j) {
        z(0, j) = -3.0;
        z(1, j) = 3.0;
    }
    CHECK(variance_loss(z, 1e-4) == 0.0);
}

TEST_CASE("variance_loss: mixed columns average per-dimension hinges") {
    // col 0 constant (hinge 0.99 at eps=1e-4), col 1 values {0,2}: var 2, hinge 0
    DenseMatrix z(2, 2);
    z(0, 1) = 0.0;
    z(1, 1) = 2.0;
    CHECK(variance_loss(z, 1e-4) == doctest::Approx(0.5 * 0.99).epsilon(1e-12));
    CHECK_THROWS_AS(variance_loss(DenseMatrix(1, 2), 1e-4), ConfigError);
}

TEST_CASE("covariance_matrix: hand-computed 2x2 and PSD property") {
    // Z = [[1,1],[-1,-1]]: each column var 2, covariance matrix [[2,2],[2,2]]
    DenseMatrix z(2, 2);
    z(0, 0) = 1.0; z(0, 1) = 1.0; z(1, 0) = -1.0; z(1, 1) = -1.0;
    DenseMatrix cov = covariance_matrix(z);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) CHECK(cov(i, j) == doctest::Approx(2.0));
    CHECK(covariance_loss(z) == doctest::Approx(4.0));  // (1/2)(2^2 + 2^2)

    Rng rng(11);
    DenseMatrix big = testutil::random_matrix(20, 6, rng);
    SymmetricEig eig = symmetric_eig(covariance_matrix(big));
    CHECK(eig.eigenvalues.front() >= -1e-10);
}

TEST_CASE("covariance_loss: zero on decorrelated embeddings, diagonal excluded") {
    Rng rng(23);
    DenseMatrix z = whitened_matrix(12, 5, rng);
    // perfectly whitened: off-diagonal covariance vanishes regardless of the
    // unit diagonal, so the i != j sum is numerically zero
    CHECK(covariance_loss(z) < 1e-10);
    CHECK(variance_loss(z, 0.0) < 1e-10);

    // scaling the diagonal alone must not change the loss
    DenseMatrix scaled = z;
    scaled *= 3.0;
    CHECK(covariance_loss(scaled) < 1e-8);
}

TEST_CASE("vicreg_loss: breakdown totals and ratio-1 plans match the full mode") {
    Rng rng(4);
    DenseMatrix z1 = testutil::random_matrix(9, 6, rng);
    DenseMatrix z2 = testutil::random_matrix(9, 6, rng);
    LossWeights w;

    SamplingPlan full_plan;
    LossBreakdown full = vicreg_loss(z1, z2, w, full_plan, LossMode::kFull);
    CHECK(full.total ==
          doctest::Approx(w.lambda_inv * full.invariance +
                          w.mu_var * (full.variance_view1 + full.variance_view2) +
                          w.nu_cov * (full.covariance_view1 + full.covariance_view2))
              .epsilon(1e-14));
    CHECK(full.nodes_used == 9);
    CHECK(full.dims_used == 6);

    // explicit all-index plan must be bit-identical across every mode
    SamplingPlan all;
    all.node_indices = IndexSet{0, 1, 2, 3, 4, 5, 6, 7, 8};
    all.dim_indices = IndexSet{0, 1, 2, 3, 4, 5};
    for (LossMode mode : {LossMode::kNodeSampled, LossMode::kDimSampledCovOnly,
                          LossMode::kDimSampledAll, LossMode::kJoint}) {
        CAPTURE(to_string(mode));
        LossBreakdown b = vicreg_loss(z1, z2, w, all, mode);
        CHECK(b.total == full.total);
        CHECK(b.invariance == full.invariance);
        CHECK(b.covariance_view1 == full.covariance_view1);
    }
}

TEST_CASE("vicreg_loss: mode semantics select the right restrictions") {
    Rng rng(6);
    DenseMatrix z1 = testutil::random_matrix(10, 6, rng);
    DenseMatrix z2 = testutil::random_matrix(10, 6, rng);
    LossWeights w;
    SamplingPlan plan;
    plan.node_indices = IndexSet{1, 3, 4, 7, 9};
    plan.dim_indices = IndexSet{0, 2, 5};

    LossBreakdown node = vicreg_loss(z1, z2, w, plan, LossMode::kNodeSampled);
    CHECK(node.invariance ==
          doctest::Approx(invariance_loss(z1, z2, &*plan.node_indices, nullptr)).epsilon(1e-14));
    CHECK(node.dims_used == 6);

    // cov-only dim sampling leaves invariance and variance on all dimensions
    LossBreakdown cov_only = vicreg_loss(z1, z2, w, plan, LossMode::kDimSampledCovOnly);
    CHECK(cov_only.invariance == doctest::Approx(invariance_loss(z1, z2)).epsilon(1e-14));
    CHECK(cov_only.variance_view1 == doctest::Approx(variance_loss(z1, w.epsilon)).epsilon(1e-14));
    CHECK(cov_only.covariance_view1 ==
          doctest::Approx(covariance_loss(z1, nullptr, &*plan.dim_indices)).epsilon(1e-14));
    CHECK(cov_only.nodes_used == 10);
    CHECK(cov_only.dims_used == 3);

    LossBreakdown dim_all = vicreg_loss(z1, z2, w, plan, LossMode::kDimSampledAll);
    CHECK(dim_all.invariance ==
          doctest::Approx(invariance_loss(z1, z2, nullptr, &*plan.dim_indices)).epsilon(1e-14));
    CHECK(dim_all.variance_view2 ==
          doctest::Approx(variance_loss(z2, w.epsilon, nullptr, &*plan.dim_indices))
              .epsilon(1e-14));

    LossBreakdown joint = vicreg_loss(z1, z2, w, plan, LossMode::kJoint);
    CHECK(joint.invariance ==
          doctest::Approx(invariance_loss(z1, z2, &*plan.node_indices, &*plan.dim_indices))
              .epsilon(1e-14));
    CHECK(joint.nodes_used == 5);
    CHECK(joint.dims_used == 3);
}

TEST_CASE("vicreg_loss: node-sampled invariance is unbiased") {
    Rng rng(8);
    DenseMatrix z1 = testutil::random_matrix(40, 4, rng);
    DenseMatrix z2 = testutil::random_matrix(40, 4, rng);
    const double full = invariance_loss(z1, z2);

    Rng sample_rng(99);
    double acc = 0.0;
    const int draws = 4000;
    for (int i = 0; i < draws; ++i) {
        IndexSet nodes = uniform_node_sample(40, 0.25, sample_rng);
        acc += invariance_loss(z1, z2, &nodes, nullptr);
    }
    // the sampled estimator is a mean over a uniform row subset, hence
    // unbiased; 4000 draws bring the monte-carlo error well under 5%
    CHECK(acc / draws == doctest::Approx(full).epsilon(0.05));
}

TEST_CASE("vicreg_loss: selection validation") {
    Rng rng(14);
    DenseMatrix z1 = testutil::random_matrix(6, 4, rng);
    DenseMatrix z2 = testutil::random_matrix(6, 4, rng);
    LossWeights w;

    SamplingPlan one_node;
    one_node.node_indices = IndexSet{2};
    CHECK_THROWS_WITH_AS(vicreg_loss(z1, z2, w, one_node, LossMode::kNodeSampled),
                         doctest::Contains("node sampling ratio"), ConfigError);

    SamplingPlan out_of_range;
    out_of_range.node_indices = IndexSet{0, 6};
    CHECK_THROWS_AS(vicreg_loss(z1, z2, w, out_of_range, LossMode::kNodeSampled),
                    std::out_of_range);

    SamplingPlan unsorted;
    unsorted.dim_indices = IndexSet{2, 1};
    CHECK_THROWS_AS(vicreg_loss(z1, z2, w, unsorted, LossMode::kDimSampledAll), ConfigError);

    SamplingPlan duplicate;
    duplicate.dim_indices = IndexSet{1, 1};
    CHECK_THROWS_AS(vicreg_loss(z1, z2, w, duplicate, LossMode::kDimSampledAll), ConfigError);
}

TEST_CASE("vicreg_loss_backward: gradients match finite differences per mode") {
    Rng rng(19);
    DenseMatrix z1 = testutil::random_matrix(7, 5, rng);
    DenseMatrix z2 = testutil::random_matrix(7, 5, rng);
    LossWeights w;
    SamplingPlan plan;
    plan.node_indices = IndexSet{0, 2, 3, 6};
    plan.dim_indices = IndexSet{1, 3, 4};

    for (LossMode mode : {LossMode::kFull, LossMode::kNodeSampled, LossMode::kDimSampledCovOnly,
                          LossMode::kDimSampledAll, LossMode::kJoint}) {
        CAPTURE(to_string(mode));
        DenseMatrix g1, g2;
        LossBreakdown fwd = vicreg_loss_backward(z1, z2, w, plan, mode, g1, g2);
        CHECK(fwd.total == doctest::Approx(vicreg_loss(z1, z2, w, plan, mode).total));
        auto eval1 = [&]() { return vicreg_loss(z1, z2, w, plan, mode).total; };
        CHECK(testutil::fd_max_rel_error(z1, eval1, g1) < 1e-5);
        CHECK(testutil::fd_max_rel_error(z2, eval1, g2) < 1e-5);
    }
}

TEST_CASE("loss mode string round trip") {
    for (LossMode mode : {LossMode::kFull, LossMode::kNodeSampled, LossMode::kDimSampledCovOnly,
                          LossMode::kDimSampledAll, LossMode::kJoint})
        CHECK(loss_mode_from_string(to_string(mode)) == mode);
    CHECK_THROWS_AS(loss_mode_from_string("bogus"), ConfigError);
}
