#pragma once

#include <functional>
#include <vector>

#include "sslgraph/gcn.hpp"
#include "sslgraph/matrix.hpp"
#include "sslgraph/vicreg.hpp"

namespace sslgraph {

// Reverse-mode tape over dense matrices. Ops record a backward closure;
// backward() replays them once in reverse order. One tape per forward pass.
class Tape {
public:
    using Id = std::size_t;

    Id leaf(const DenseMatrix& value);
    Id matmul(Id a, Id b);
    // y = Ahat * x; Ahat is symmetric so the backward multiply reuses it.
    // The adjacency must outlive the tape.
    Id spmm(const NormalizedAdjacency& ahat, Id x);
    Id relu(Id x);
    Id add_row_bias(Id x, Id bias);  // bias is 1 x cols
    Id sum(Id x);                    // scalar
    Id sum_squares(Id x);            // scalar

    // Composite node computing the full objective; breakdown retrievable
    // afterwards via breakdown().
    Id vicreg(Id z1, Id z2, const LossWeights& weights, const SamplingPlan& plan, LossMode mode);

    void backward(Id loss);

    const DenseMatrix& value(Id id) const { return nodes_.at(id).value; }
    const DenseMatrix& grad(Id id) const;
    const LossBreakdown& breakdown(Id vicreg_id) const;
    std::size_t num_nodes() const { return nodes_.size(); }

    // Backward-pass plumbing used by the recorded closures.
    const DenseMatrix& value_grad(Id id) const { return nodes_.at(id).grad; }
    void accumulate(Id id, DenseMatrix g);

private:
    struct Node {
        DenseMatrix value;
        DenseMatrix grad;
        std::function<void(Tape&)> back;  // null for leaves
    };

    Id push(DenseMatrix value, std::function<void(Tape&)> back);
    DenseMatrix& grad_mut(Id id) { return nodes_[id].grad; }

    std::vector<Node> nodes_;
    std::vector<std::pair<Id, LossBreakdown>> breakdowns_;
    bool backward_done_ = false;
};

// Shared-weight (Siamese) forward of encoder + expander over one view.
struct ModelTapeIds {
    Tape::Id enc_w1, enc_w2, exp_w1, exp_b1, exp_w2, exp_b2;
    Tape::Id h;  // N x S representations
    Tape::Id z;  // N x D embeddings
};

// Registers the parameter leaves on the tape and runs the forward pass for
// one view. For the Siamese setup call once per view reusing `param_ids` of
// the first call so gradients accumulate into one parameter set.
ModelTapeIds forward_model(Tape& tape, const NormalizedAdjacency& ahat, const DenseMatrix& x,
                           const ModelParams& params);
ModelTapeIds forward_model_shared(Tape& tape, const NormalizedAdjacency& ahat,
                                  const DenseMatrix& x, const ModelTapeIds& param_ids);

// Gradients for the six parameter tensors, in ModelParams::tensors() order.
std::vector<const DenseMatrix*> model_grads(const Tape& tape, const ModelTapeIds& ids);

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    std::vector<DenseMatrix> m, v;
    long step = 0;
};

void sgd_step(const std::vector<DenseMatrix*>& params,
              const std::vector<const DenseMatrix*>& grads, double lr);
void adam_step(const std::vector<DenseMatrix*>& params,
               const std::vector<const DenseMatrix*>& grads, const AdamConfig& cfg,
               AdamState& state);

}  // namespace sslgraph
