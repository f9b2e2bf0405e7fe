#include <doctest.h>

#include "sslgraph/autodiff.hpp"
#include "test_util.hpp"

using namespace sslgraph;

TEST_CASE("backward: loss = sum(W) gives all-ones gradient") {
    Rng rng(1);
    Tape tape;
    Tape::Id w = tape.leaf(testutil::random_matrix(3, 4, rng));
    Tape::Id loss = tape.sum(w);
    tape.backward(loss);
    for (std::size_t i = 0; i < tape.grad(w).size(); ++i) CHECK(tape.grad(w).data()[i] == 1.0);
}

TEST_CASE("backward: ||X*W||^2 matches closed form 2*X^T(XW)") {
    Rng rng(2);
    DenseMatrix x = testutil::random_matrix(4, 3, rng);
    DenseMatrix w = testutil::random_matrix(3, 2, rng);
    Tape tape;
    Tape::Id xid = tape.leaf(x);
    Tape::Id wid = tape.leaf(w);
    Tape::Id loss = tape.sum_squares(tape.matmul(xid, wid));
    tape.backward(loss);
    DenseMatrix expected = matmul_tn(x, matmul(x, w));
    expected *= 2.0;
    CHECK(max_abs_diff(tape.grad(wid), expected) < 1e-12);
}

TEST_CASE("grad before backward is an error; backward needs a scalar") {
    Tape tape;
    Tape::Id w = tape.leaf(DenseMatrix(2, 2));
    CHECK_THROWS_AS(tape.grad(w), std::logic_error);
    CHECK_THROWS_AS(tape.backward(w), std::invalid_argument);
}

TEST_CASE("relu and bias ops: finite-difference check through a small MLP") {
    Rng rng(3);
    DenseMatrix x = testutil::random_matrix(4, 3, rng);
    DenseMatrix w = testutil::random_matrix(3, 2, rng);
    DenseMatrix b = testutil::random_matrix(1, 2, rng);

    auto eval = [&]() {
        Tape tape;
        Tape::Id out =
            tape.sum_squares(tape.relu(tape.add_row_bias(tape.matmul(tape.leaf(x), tape.leaf(w)),
                                                         tape.leaf(b))));
        return tape.value(out)(0, 0);
    };

    Tape tape;
    Tape::Id wid = tape.leaf(w);
    Tape::Id bid = tape.leaf(b);
    Tape::Id loss =
        tape.sum_squares(tape.relu(tape.add_row_bias(tape.matmul(tape.leaf(x), wid), bid)));
    tape.backward(loss);
    DenseMatrix gw = tape.grad(wid);
    DenseMatrix gb = tape.grad(bid);
    CHECK(testutil::fd_max_rel_error(w, eval, gw) < 1e-6);
    CHECK(testutil::fd_max_rel_error(b, eval, gb) < 1e-6);
}

TEST_CASE("full model gradients pass finite differences for every loss mode") {
    // N <= 8, D <= 6 instances per the gradient-check contract
    SbmConfig cfg;
    cfg.nodes_per_block = 4;
    cfg.num_blocks = 2;
    cfg.p_intra = 0.7;
    cfg.p_inter = 0.3;
    cfg.feature_dim = 3;
    cfg.seed = 21;
    Graph g = generate_sbm(cfg);
    NormalizedAdjacency ahat(g);

    Rng rng(5);
    ModelParams params;
    params.encoder = GcnEncoderParams::init(3, 4, 4, rng);
    params.expander = ExpanderParams::init(4, 5, 6, rng);

    LossWeights weights;  // defaults 25/25/1
    SamplingPlan plan;
    plan.node_indices = IndexSet{0, 2, 3, 5, 6};
    plan.dim_indices = IndexSet{0, 2, 4};

    for (LossMode mode : {LossMode::kFull, LossMode::kNodeSampled, LossMode::kDimSampledCovOnly,
                          LossMode::kDimSampledAll, LossMode::kJoint}) {
        CAPTURE(to_string(mode));
        auto eval = [&]() {
            Tape tape;
            ModelTapeIds ids1 = forward_model(tape, ahat, g.features(), params);
            ModelTapeIds ids2 = forward_model_shared(tape, ahat, g.features(), ids1);
            return tape.value(tape.vicreg(ids1.z, ids2.z, weights, plan, mode))(0, 0);
        };
        Tape tape;
        ModelTapeIds ids1 = forward_model(tape, ahat, g.features(), params);
        ModelTapeIds ids2 = forward_model_shared(tape, ahat, g.features(), ids1);
        tape.backward(tape.vicreg(ids1.z, ids2.z, weights, plan, mode));
        auto grads = model_grads(tape, ids1);
        auto tensors = params.tensors();
        for (std::size_t t = 0; t < tensors.size(); ++t) {
            CAPTURE(t);
            CHECK(testutil::fd_max_rel_error(*tensors[t], eval, *grads[t]) < 1e-4);
        }
    }
}

TEST_CASE("sgd_step: lr=1 subtracts the gradient; zero grad is a no-op") {
    DenseMatrix p(2, 2, 1.0), g(2, 2, 0.25);
    sgd_step({&p}, {&g}, 1.0);
    for (std::size_t i = 0; i < p.size(); ++i) CHECK(p.data()[i] == 0.75);
    DenseMatrix zero(2, 2);
    DenseMatrix before = p;
    sgd_step({&p}, {&zero}, 0.5);
    CHECK(p == before);
}

TEST_CASE("adam_step: zero grad with zero state leaves params unchanged") {
    DenseMatrix p(2, 2, 3.0), zero(2, 2);
    AdamState state;
    AdamConfig cfg;
    adam_step({&p}, {&zero}, cfg, state);
    for (std::size_t i = 0; i < p.size(); ++i) CHECK(p.data()[i] == 3.0);
}

TEST_CASE("adam_step: single step matches hand-computed update") {
    DenseMatrix p(1, 1, 2.0), g(1, 1, 0.5);
    AdamState state;
    AdamConfig cfg;  // lr 1e-3, betas .9/.999, eps 1e-8
    adam_step({&p}, {&g}, cfg, state);
    // m = 0.05, v = 0.00025; mhat = 0.5, vhat = 0.25
    const double expected = 2.0 - 1e-3 * 0.5 / (std::sqrt(0.25) + 1e-8);
    CHECK(p(0, 0) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("optimizers abort on non-finite gradients") {
    DenseMatrix p(1, 1, 0.0), g(1, 1, std::numeric_limits<double>::quiet_NaN());
    CHECK_THROWS_AS(sgd_step({&p}, {&g}, 0.1), std::runtime_error);
    AdamState state;
    AdamConfig cfg;
    CHECK_THROWS_AS(adam_step({&p}, {&g}, cfg, state), std::runtime_error);
}
