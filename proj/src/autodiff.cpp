#include "sslgraph/autodiff.hpp"

#include <cmath>
#include <stdexcept>

namespace sslgraph {

Tape::Id Tape::push(DenseMatrix value, std::function<void(Tape&)> back) {
    nodes_.push_back(Node{std::move(value), DenseMatrix(), std::move(back)});
    return nodes_.size() - 1;
}

Tape::Id Tape::leaf(const DenseMatrix& value) { return push(value, nullptr); }

void Tape::accumulate(Id id, DenseMatrix g) {
    DenseMatrix& dst = nodes_.at(id).grad;
    if (dst.size() == 0) dst = std::move(g);
    else dst += g;
}

Tape::Id Tape::matmul(Id a, Id b) {
    DenseMatrix v = sslgraph::matmul(value(a), value(b));
    Id out = push(std::move(v), nullptr);
    nodes_[out].back = [a, b, out](Tape& t) {
        const DenseMatrix& g = t.value_grad(out);
        t.accumulate(a, matmul_nt(g, t.value(b)));
        t.accumulate(b, matmul_tn(t.value(a), g));
    };
    return out;
}

Tape::Id Tape::spmm(const NormalizedAdjacency& ahat, Id x) {
    DenseMatrix v = ahat.multiply(value(x));
    Id out = push(std::move(v), nullptr);
    const NormalizedAdjacency* a = &ahat;
    nodes_[out].back = [a, x, out](Tape& t) {
        t.accumulate(x, a->multiply(t.value_grad(out)));
    };
    return out;
}

Tape::Id Tape::relu(Id x) {
    DenseMatrix v = value(x);
    for (std::size_t i = 0; i < v.size(); ++i)
        if (v.data()[i] < 0.0) v.data()[i] = 0.0;
    Id out = push(std::move(v), nullptr);
    nodes_[out].back = [x, out](Tape& t) {
        DenseMatrix g = t.value_grad(out);
        const DenseMatrix& in = t.value(x);
        for (std::size_t i = 0; i < g.size(); ++i)
            if (in.data()[i] <= 0.0) g.data()[i] = 0.0;
        t.accumulate(x, std::move(g));
    };
    return out;
}

Tape::Id Tape::add_row_bias(Id x, Id bias) {
    const DenseMatrix& b = value(bias);
    if (b.rows() != 1 || b.cols() != value(x).cols())
        throw ShapeError("add_row_bias: bias must be 1 x cols");
    DenseMatrix v = value(x);
    for (std::size_t i = 0; i < v.rows(); ++i)
        for (std::size_t j = 0; j < v.cols(); ++j) v(i, j) += b(0, j);
    Id out = push(std::move(v), nullptr);
    nodes_[out].back = [x, bias, out](Tape& t) {
        const DenseMatrix& g = t.value_grad(out);
        DenseMatrix gb(1, g.cols());
        for (std::size_t i = 0; i < g.rows(); ++i)
            for (std::size_t j = 0; j < g.cols(); ++j) gb(0, j) += g(i, j);
        t.accumulate(bias, std::move(gb));
        t.accumulate(x, g);
    };
    return out;
}

Tape::Id Tape::sum(Id x) {
    double s = 0.0;
    const DenseMatrix& v = value(x);
    for (std::size_t i = 0; i < v.size(); ++i) s += v.data()[i];
    DenseMatrix out_v(1, 1);
    out_v(0, 0) = s;
    Id out = push(std::move(out_v), nullptr);
    nodes_[out].back = [x, out](Tape& t) {
        const double g = t.value_grad(out)(0, 0);
        DenseMatrix gx(t.value(x).rows(), t.value(x).cols(), g);
        t.accumulate(x, std::move(gx));
    };
    return out;
}

Tape::Id Tape::sum_squares(Id x) {
    double s = 0.0;
    const DenseMatrix& v = value(x);
    for (std::size_t i = 0; i < v.size(); ++i) s += v.data()[i] * v.data()[i];
    DenseMatrix out_v(1, 1);
    out_v(0, 0) = s;
    Id out = push(std::move(out_v), nullptr);
    nodes_[out].back = [x, out](Tape& t) {
        const double g = t.value_grad(out)(0, 0);
        DenseMatrix gx = t.value(x);
        gx *= 2.0 * g;
        t.accumulate(x, std::move(gx));
    };
    return out;
}

Tape::Id Tape::vicreg(Id z1, Id z2, const LossWeights& weights, const SamplingPlan& plan,
                      LossMode mode) {
    LossBreakdown bd = vicreg_loss(value(z1), value(z2), weights, plan, mode);
    DenseMatrix out_v(1, 1);
    out_v(0, 0) = bd.total;
    Id out = push(std::move(out_v), nullptr);
    breakdowns_.emplace_back(out, bd);
    LossWeights w = weights;
    SamplingPlan p = plan;
    nodes_[out].back = [z1, z2, w, p, mode, out](Tape& t) {
        const double g = t.value_grad(out)(0, 0);
        DenseMatrix g1, g2;
        LossWeights scaled = w;
        scaled.lambda_inv *= g;
        scaled.mu_var *= g;
        scaled.nu_cov *= g;
        vicreg_loss_backward(t.value(z1), t.value(z2), scaled, p, mode, g1, g2);
        t.accumulate(z1, std::move(g1));
        t.accumulate(z2, std::move(g2));
    };
    return out;
}

const LossBreakdown& Tape::breakdown(Id vicreg_id) const {
    for (const auto& [id, bd] : breakdowns_)
        if (id == vicreg_id) return bd;
    throw std::invalid_argument("breakdown: id is not a vicreg node");
}

const DenseMatrix& Tape::grad(Id id) const {
    if (!backward_done_) throw std::logic_error("grad requested before backward()");
    return nodes_.at(id).grad;
}

void Tape::backward(Id loss) {
    if (loss >= nodes_.size()) throw std::invalid_argument("backward: unknown node id");
    const DenseMatrix& v = nodes_[loss].value;
    if (v.rows() != 1 || v.cols() != 1)
        throw std::invalid_argument("backward: loss node must be scalar");
    for (auto& n : nodes_) n.grad = DenseMatrix(n.value.rows(), n.value.cols());
    nodes_[loss].grad(0, 0) = 1.0;
    for (std::size_t i = nodes_.size(); i-- > 0;)
        if (nodes_[i].back) nodes_[i].back(*this);
    backward_done_ = true;
}

ModelTapeIds forward_model(Tape& tape, const NormalizedAdjacency& ahat, const DenseMatrix& x,
                           const ModelParams& params) {
    ModelTapeIds ids{};
    ids.enc_w1 = tape.leaf(params.encoder.w1);
    ids.enc_w2 = tape.leaf(params.encoder.w2);
    ids.exp_w1 = tape.leaf(params.expander.w1);
    ids.exp_b1 = tape.leaf(params.expander.b1);
    ids.exp_w2 = tape.leaf(params.expander.w2);
    ids.exp_b2 = tape.leaf(params.expander.b2);
    return forward_model_shared(tape, ahat, x, ids);
}

ModelTapeIds forward_model_shared(Tape& tape, const NormalizedAdjacency& ahat,
                                  const DenseMatrix& x, const ModelTapeIds& param_ids) {
    ModelTapeIds ids = param_ids;
    Tape::Id xin = tape.leaf(x);
    Tape::Id h1 = tape.relu(tape.matmul(tape.spmm(ahat, xin), ids.enc_w1));
    ids.h = tape.matmul(tape.spmm(ahat, h1), ids.enc_w2);
    Tape::Id a = tape.relu(tape.add_row_bias(tape.matmul(ids.h, ids.exp_w1), ids.exp_b1));
    ids.z = tape.add_row_bias(tape.matmul(a, ids.exp_w2), ids.exp_b2);
    return ids;
}

std::vector<const DenseMatrix*> model_grads(const Tape& tape, const ModelTapeIds& ids) {
    return {&tape.grad(ids.enc_w1), &tape.grad(ids.enc_w2), &tape.grad(ids.exp_w1),
            &tape.grad(ids.exp_b1), &tape.grad(ids.exp_w2), &tape.grad(ids.exp_b2)};
}

namespace {
void check_finite(const DenseMatrix& g, std::size_t idx) {
    if (!g.all_finite())
        throw std::runtime_error("non-finite gradient in parameter tensor #" + std::to_string(idx));
}
}  // namespace

void sgd_step(const std::vector<DenseMatrix*>& params,
              const std::vector<const DenseMatrix*>& grads, double lr) {
    for (std::size_t t = 0; t < params.size(); ++t) {
        check_finite(*grads[t], t);
        for (std::size_t i = 0; i < params[t]->size(); ++i)
            params[t]->data()[i] -= lr * grads[t]->data()[i];
    }
}

void adam_step(const std::vector<DenseMatrix*>& params,
               const std::vector<const DenseMatrix*>& grads, const AdamConfig& cfg,
               AdamState& state) {
    if (state.m.empty()) {
        for (const DenseMatrix* p : params) {
            state.m.emplace_back(p->rows(), p->cols());
            state.v.emplace_back(p->rows(), p->cols());
        }
    }
    ++state.step;
    const double bc1 = 1.0 - std::pow(cfg.beta1, state.step);
    const double bc2 = 1.0 - std::pow(cfg.beta2, state.step);
    for (std::size_t t = 0; t < params.size(); ++t) {
        check_finite(*grads[t], t);
        DenseMatrix& m = state.m[t];
        DenseMatrix& v = state.v[t];
        for (std::size_t i = 0; i < params[t]->size(); ++i) {
            const double g = grads[t]->data()[i];
            m.data()[i] = cfg.beta1 * m.data()[i] + (1.0 - cfg.beta1) * g;
            v.data()[i] = cfg.beta2 * v.data()[i] + (1.0 - cfg.beta2) * g * g;
            const double mhat = m.data()[i] / bc1;
            const double vhat = v.data()[i] / bc2;
            params[t]->data()[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
        }
    }
}

}  // namespace sslgraph
