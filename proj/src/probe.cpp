#include "sslgraph/probe.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "sslgraph/rng.hpp"

namespace sslgraph {

SplitSpec SplitSpec::random(std::size_t n, double train_frac, double val_frac, std::uint64_t seed) {
    if (train_frac <= 0.0 || val_frac < 0.0 || train_frac + val_frac >= 1.0)
        throw ConfigError("SplitSpec: fractions must satisfy 0 < train, 0 <= val, train+val < 1");
    Rng rng(seed);
    std::vector<std::uint32_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0u);
    for (std::size_t i = 0; i + 1 < n; ++i)
        std::swap(perm[i], perm[i + rng.below(n - i)]);
    const std::size_t n_train = std::max<std::size_t>(1, static_cast<std::size_t>(train_frac * n));
    const std::size_t n_val = static_cast<std::size_t>(val_frac * n);
    SplitSpec s;
    s.train.assign(perm.begin(), perm.begin() + n_train);
    s.val.assign(perm.begin() + n_train, perm.begin() + n_train + n_val);
    s.test.assign(perm.begin() + n_train + n_val, perm.end());
    std::sort(s.train.begin(), s.train.end());
    std::sort(s.val.begin(), s.val.end());
    std::sort(s.test.begin(), s.test.end());
    return s;
}

void SplitSpec::validate(std::size_t n) const {
    if (train.empty() || test.empty()) throw ConfigError("SplitSpec: train and test must be nonempty");
    std::set<std::uint32_t> seen;
    for (const auto* part : {&train, &val, &test})
        for (std::uint32_t i : *part) {
            if (i >= n) throw std::out_of_range("SplitSpec: index out of range");
            if (!seen.insert(i).second) throw ConfigError("SplitSpec: splits overlap");
        }
}

namespace {

struct Standardizer {
    std::vector<double> mean, inv_std;

    static Standardizer fit(const DenseMatrix& h, const std::vector<std::uint32_t>& rows) {
        Standardizer s;
        const std::size_t f = h.cols();
        s.mean.assign(f, 0.0);
        s.inv_std.assign(f, 1.0);
        for (std::uint32_t i : rows)
            for (std::size_t j = 0; j < f; ++j) s.mean[j] += h(i, j);
        for (double& m : s.mean) m /= static_cast<double>(rows.size());
        std::vector<double> var(f, 0.0);
        for (std::uint32_t i : rows)
            for (std::size_t j = 0; j < f; ++j) {
                const double d = h(i, j) - s.mean[j];
                var[j] += d * d;
            }
        for (std::size_t j = 0; j < f; ++j) {
            const double sd = std::sqrt(var[j] / static_cast<double>(rows.size()));
            s.inv_std[j] = sd > 1e-12 ? 1.0 / sd : 1.0;
        }
        return s;
    }

    DenseMatrix apply(const DenseMatrix& h, const std::vector<std::uint32_t>& rows) const {
        DenseMatrix x(rows.size(), h.cols());
        for (std::size_t r = 0; r < rows.size(); ++r)
            for (std::size_t j = 0; j < h.cols(); ++j)
                x(r, j) = (h(rows[r], j) - mean[j]) * inv_std[j];
        return x;
    }
};

// Returns trained (W, b); full-batch GD with halving step control.
std::pair<DenseMatrix, DenseMatrix> fit_logreg(const DenseMatrix& x, const std::vector<int>& y,
                                               int num_classes, const ProbeConfig& cfg, double l2) {
    const std::size_t n = x.rows(), f = x.cols();
    DenseMatrix w(f, num_classes), b(1, num_classes);

    auto loss_and_grad = [&](const DenseMatrix& wm, const DenseMatrix& bm, DenseMatrix* gw,
                             DenseMatrix* gb) {
        DenseMatrix logits = matmul(x, wm);
        for (std::size_t i = 0; i < n; ++i)
            for (int c = 0; c < num_classes; ++c) logits(i, c) += bm(0, c);
        double loss = 0.0;
        if (gw) { *gw = DenseMatrix(f, num_classes); *gb = DenseMatrix(1, num_classes); }
        for (std::size_t i = 0; i < n; ++i) {
            double mx = logits(i, 0);
            for (int c = 1; c < num_classes; ++c) mx = std::max(mx, logits(i, c));
            double sum = 0.0;
            for (int c = 0; c < num_classes; ++c) sum += std::exp(logits(i, c) - mx);
            loss += -(logits(i, y[i]) - mx - std::log(sum));
            if (gw) {
                for (int c = 0; c < num_classes; ++c) {
                    const double p = std::exp(logits(i, c) - mx) / sum;
                    const double delta = (p - (y[i] == c ? 1.0 : 0.0)) / static_cast<double>(n);
                    (*gb)(0, c) += delta;
                    for (std::size_t j = 0; j < f; ++j) (*gw)(j, c) += delta * x(i, j);
                }
            }
        }
        loss /= static_cast<double>(n);
        for (std::size_t k = 0; k < w.size(); ++k) loss += 0.5 * l2 * wm.data()[k] * wm.data()[k];
        if (gw)
            for (std::size_t k = 0; k < w.size(); ++k) gw->data()[k] += l2 * wm.data()[k];
        return loss;
    };

    double step = cfg.lr;
    DenseMatrix gw, gb;
    double loss = loss_and_grad(w, b, &gw, &gb);
    for (std::size_t it = 0; it < cfg.max_iters; ++it) {
        double gnorm2 = 0.0;
        for (std::size_t k = 0; k < gw.size(); ++k) gnorm2 += gw.data()[k] * gw.data()[k];
        for (std::size_t k = 0; k < gb.size(); ++k) gnorm2 += gb.data()[k] * gb.data()[k];
        if (std::sqrt(gnorm2) < cfg.grad_tol) break;

        bool accepted = false;
        for (int halvings = 0; halvings < 40; ++halvings) {
            DenseMatrix w_try = w, b_try = b;
            for (std::size_t k = 0; k < w.size(); ++k) w_try.data()[k] -= step * gw.data()[k];
            for (std::size_t k = 0; k < b.size(); ++k) b_try.data()[k] -= step * gb.data()[k];
            const double new_loss = loss_and_grad(w_try, b_try, nullptr, nullptr);
            if (new_loss <= loss) {
                w = std::move(w_try);
                b = std::move(b_try);
                loss = new_loss;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;
        step *= 1.1;
        loss = loss_and_grad(w, b, &gw, &gb);
    }
    return {std::move(w), std::move(b)};
}

double accuracy_on(const DenseMatrix& x, const std::vector<int>& y, const DenseMatrix& w,
                   const DenseMatrix& b) {
    std::size_t correct = 0;
    const int num_classes = static_cast<int>(w.cols());
    for (std::size_t i = 0; i < x.rows(); ++i) {
        int best = 0;
        double best_v = -1e300;
        for (int c = 0; c < num_classes; ++c) {
            double v = b(0, c);
            for (std::size_t j = 0; j < x.cols(); ++j) v += x(i, j) * w(j, c);
            if (v > best_v) { best_v = v; best = c; }
        }
        if (best == y[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(x.rows());
}

std::vector<int> gather_labels(const std::vector<int>& labels,
                               const std::vector<std::uint32_t>& rows) {
    std::vector<int> out;
    out.reserve(rows.size());
    for (std::uint32_t i : rows) out.push_back(labels[i]);
    return out;
}

}  // namespace

ProbeResult train_probe(const DenseMatrix& h, const std::vector<int>& labels,
                        const SplitSpec& split, const ProbeConfig& cfg) {
    if (h.rows() != labels.size()) throw ShapeError("train_probe: H rows != label count");
    split.validate(h.rows());

    const std::vector<int> y_train = gather_labels(labels, split.train);
    const int num_classes = 1 + *std::max_element(labels.begin(), labels.end());
    if (std::set<int>(y_train.begin(), y_train.end()).size() < 2)
        throw ConfigError("train_probe: train split contains a single class");

    const Standardizer stz = Standardizer::fit(h, split.train);
    const DenseMatrix x_train = stz.apply(h, split.train);
    const DenseMatrix x_test = stz.apply(h, split.test);
    const std::vector<int> y_test = gather_labels(labels, split.test);

    double chosen_l2 = cfg.l2;
    if (!cfg.l2_grid.empty() && !split.val.empty()) {
        const DenseMatrix x_val = stz.apply(h, split.val);
        const std::vector<int> y_val = gather_labels(labels, split.val);
        double best_acc = -1.0;
        for (double cand : cfg.l2_grid) {
            auto [w, b] = fit_logreg(x_train, y_train, num_classes, cfg, cand);
            const double acc = accuracy_on(x_val, y_val, w, b);
            if (acc > best_acc) { best_acc = acc; chosen_l2 = cand; }
        }
    }

    auto [w, b] = fit_logreg(x_train, y_train, num_classes, cfg, chosen_l2);
    ProbeResult result;
    result.l2 = chosen_l2;
    result.per_trial = {accuracy_on(x_test, y_test, w, b)};
    result.accuracy_mean = result.per_trial[0];
    result.accuracy_std = 0.0;
    return result;
}

ProbeResult evaluate_representations(const DenseMatrix& h, const std::vector<int>& labels,
                                     double train_frac, double val_frac, std::size_t trials,
                                     std::uint64_t seed, const ProbeConfig& cfg) {
    if (trials == 0) throw ConfigError("evaluate: trials must be >= 1");
    ProbeResult agg;
    for (std::size_t t = 0; t < trials; ++t) {
        const std::uint64_t split_seed = Rng::derive(seed, t).next_u64();
        const SplitSpec split = SplitSpec::random(h.rows(), train_frac, val_frac, split_seed);
        const ProbeResult one = train_probe(h, labels, split, cfg);
        agg.per_trial.push_back(one.per_trial[0]);
        agg.l2 = one.l2;
    }
    double mean = 0.0;
    for (double a : agg.per_trial) mean += a;
    mean /= static_cast<double>(trials);
    double var = 0.0;
    for (double a : agg.per_trial) var += (a - mean) * (a - mean);
    agg.accuracy_mean = mean;
    agg.accuracy_std = trials > 1 ? std::sqrt(var / static_cast<double>(trials - 1)) : 0.0;
    return agg;
}

ProbeResult evaluate(const GcnEncoderParams& encoder, const Graph& g, double train_frac,
                     double val_frac, std::size_t trials, std::uint64_t seed,
                     const ProbeConfig& cfg) {
    if (!g.labels()) throw ConfigError("evaluate: graph has no labels");
    const DenseMatrix h = encode(g, encoder);
    return evaluate_representations(h, *g.labels(), train_frac, val_frac, trials, seed, cfg);
}

}  // namespace sslgraph
