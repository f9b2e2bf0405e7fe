#include "sslgraph/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>

namespace sslgraph {

std::size_t sample_count(std::size_t n, double ratio) {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n))));
}

namespace {

void check_ratio(double p) {
    if (!(p > 0.0) || p > 1.0) throw ConfigError("sampling ratio must be in (0,1]");
}

// Partial Fisher-Yates over [0, n), first k entries are the sample.
std::vector<std::uint32_t> draw_k_of_n(std::size_t n, std::size_t k, Rng& rng) {
    std::vector<std::uint32_t> pool(n);
    std::iota(pool.begin(), pool.end(), 0u);
    for (std::size_t i = 0; i < k; ++i)
        std::swap(pool[i], pool[i + rng.below(n - i)]);
    pool.resize(k);
    std::sort(pool.begin(), pool.end());
    return pool;
}

}  // namespace

std::vector<std::uint32_t> uniform_node_sample(std::size_t n, double p, Rng& rng) {
    check_ratio(p);
    return draw_k_of_n(n, sample_count(n, p), rng);
}

std::vector<std::uint32_t> uniform_dim_sample(std::size_t d, double q, Rng& rng) {
    check_ratio(q);
    return draw_k_of_n(d, sample_count(d, q), rng);
}

RicciScores forman_ricci(const Graph& g) {
    RicciScores out;
    out.edges = g.edge_list();
    out.edge_curvature.reserve(out.edges.size());
    out.node_flow.assign(g.num_nodes(), 0.0);
    for (auto [u, v] : out.edges) {
        auto nu = g.neighbors(u);
        auto nv = g.neighbors(v);
        // triangle count = |N(u) ∩ N(v)| via sorted merge
        std::size_t triangles = 0;
        std::size_t i = 0, j = 0;
        while (i < nu.size() && j < nv.size()) {
            if (nu[i] < nv[j]) ++i;
            else if (nu[i] > nv[j]) ++j;
            else { ++triangles; ++i; ++j; }
        }
        const double f = 4.0 - static_cast<double>(g.degree(u)) - static_cast<double>(g.degree(v)) +
                         3.0 * static_cast<double>(triangles);
        out.edge_curvature.push_back(f);
        out.node_flow[u] += f;
        out.node_flow[v] += f;
    }
    return out;
}

std::vector<double> ricci_node_probs(const std::vector<double>& node_flow) {
    if (node_flow.empty()) throw ConfigError("ricci_node_probs: empty flow vector");
    const double min_flow = *std::min_element(node_flow.begin(), node_flow.end());
    double total = 0.0;
    for (double f : node_flow) total += f - min_flow;
    std::vector<double> probs(node_flow.size());
    if (total <= 0.0) {
        std::fill(probs.begin(), probs.end(), 1.0 / static_cast<double>(node_flow.size()));
    } else {
        for (std::size_t i = 0; i < node_flow.size(); ++i)
            probs[i] = (node_flow[i] - min_flow) / total;
    }
    return probs;
}

RicciScores ricci_scores(const Graph& g) {
    RicciScores scores = forman_ricci(g);
    scores.probs = ricci_node_probs(scores.node_flow);
    return scores;
}

std::vector<std::uint32_t> ricci_node_sample(const std::vector<double>& probs, double p, Rng& rng) {
    check_ratio(p);
    const std::size_t n = probs.size();
    const std::size_t k = sample_count(n, p);
    std::vector<double> w = probs;
    double remaining = std::accumulate(w.begin(), w.end(), 0.0);
    std::vector<std::uint32_t> picked;
    picked.reserve(k);
    std::vector<bool> taken(n, false);
    while (picked.size() < k && remaining > 1e-15) {
        double r = rng.uniform() * remaining;
        std::size_t choice = n;
        for (std::size_t i = 0; i < n; ++i) {
            if (taken[i]) continue;
            r -= w[i];
            if (r <= 0.0) { choice = i; break; }
        }
        if (choice == n) {  // numerical tail: take the last untaken positive-weight node
            for (std::size_t i = n; i-- > 0;)
                if (!taken[i] && w[i] > 0.0) { choice = i; break; }
            if (choice == n) break;
        }
        taken[choice] = true;
        remaining -= w[choice];
        w[choice] = 0.0;
        picked.push_back(static_cast<std::uint32_t>(choice));
    }
    if (picked.size() < k) {
        std::cerr << "[samplers] ricci support exhausted (" << picked.size() << "/" << k
                  << "), padding with uniform draws\n";
        std::vector<std::uint32_t> rest;
        for (std::uint32_t i = 0; i < n; ++i)
            if (!taken[i]) rest.push_back(i);
        for (std::size_t i = 0; picked.size() < k && i < rest.size(); ++i) {
            std::swap(rest[i], rest[i + rng.below(rest.size() - i)]);
            picked.push_back(rest[i]);
        }
    }
    std::sort(picked.begin(), picked.end());
    return picked;
}

std::vector<std::uint32_t> rotating_partition(std::size_t d, std::size_t m, std::uint64_t epoch) {
    if (m == 0 || d % m != 0) throw ConfigError("rotating_partition: M must divide D");
    const std::size_t splits = d / m;
    const std::size_t k = epoch % splits;
    std::vector<std::uint32_t> idx(m);
    std::iota(idx.begin(), idx.end(), static_cast<std::uint32_t>(k * m));
    return idx;
}

void write_ricci_csv(const RicciScores& scores, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "# edge section: u,v,curvature\n";
    for (std::size_t e = 0; e < scores.edges.size(); ++e)
        out << scores.edges[e].first << ',' << scores.edges[e].second << ','
            << scores.edge_curvature[e] << '\n';
    out << "# node section: node,flow,prob\n";
    for (std::size_t i = 0; i < scores.node_flow.size(); ++i)
        out << i << ',' << scores.node_flow[i] << ','
            << (i < scores.probs.size() ? scores.probs[i] : 0.0) << '\n';
}

}  // namespace sslgraph
