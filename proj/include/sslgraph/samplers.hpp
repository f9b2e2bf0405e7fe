#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sslgraph/graph.hpp"
#include "sslgraph/rng.hpp"

namespace sslgraph {

enum class NodeSamplingMethod { kUniform, kRicci };

// Per-epoch selection of loss rows/columns. An absent index set means
// "use everything".
struct SamplingPlan {
    std::optional<std::vector<std::uint32_t>> node_indices;  // sorted, unique
    std::optional<std::vector<std::uint32_t>> dim_indices;   // sorted, unique
    double node_ratio = 1.0;
    double dim_ratio = 1.0;
    NodeSamplingMethod method = NodeSamplingMethod::kUniform;
    std::uint64_t epoch = 0;
};

struct RicciScores {
    // Edge order matches Graph::edge_list().
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
    std::vector<double> edge_curvature;
    std::vector<double> node_flow;  // sum of incident edge curvatures
    std::vector<double> probs;      // shift-normalized node flows
};

// Sample size contract shared by all ratio samplers: max(1, round(ratio * n)).
std::size_t sample_count(std::size_t n, double ratio);

// round(p*N) distinct indices, each node equally likely, sorted.
std::vector<std::uint32_t> uniform_node_sample(std::size_t n, double p, Rng& rng);

// Augmented combinatorial Forman curvature per undirected edge:
// F(u,v) = 4 - deg(u) - deg(v) + 3 * #triangles(u,v). Fills edge part and
// node flows; probs left for ricci_node_probs.
RicciScores forman_ricci(const Graph& g);

// Shift-normalize node flows into a distribution; uniform fallback when all
// flows are equal.
std::vector<double> ricci_node_probs(const std::vector<double>& node_flow);

// Fills scores.probs in place and returns scores.
RicciScores ricci_scores(const Graph& g);

// round(p*N) distinct indices drawn without replacement proportional to
// probs (sequential renormalized draws). If the nonzero-probability support
// is exhausted, pads uniformly from the remaining nodes.
std::vector<std::uint32_t> ricci_node_sample(const std::vector<double>& probs, double p, Rng& rng);

std::vector<std::uint32_t> uniform_dim_sample(std::size_t d, double q, Rng& rng);

// Deterministic split #(epoch mod D/M): indices [kM, (k+1)M). M must divide D.
std::vector<std::uint32_t> rotating_partition(std::size_t d, std::size_t m, std::uint64_t epoch);

void write_ricci_csv(const RicciScores& scores, const std::string& path);

}  // namespace sslgraph
