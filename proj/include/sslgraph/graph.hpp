#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sslgraph/matrix.hpp"
#include "sslgraph/rng.hpp"

namespace sslgraph {

// Undirected simple graph: CSR-style sorted neighbor lists, dense node
// features, optional per-node class labels. Immutable after construction
// and safe to share across threads.
class Graph {
public:
    Graph(std::size_t num_nodes, const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges,
          DenseMatrix features, std::optional<std::vector<int>> labels = std::nullopt);

    std::size_t num_nodes() const { return num_nodes_; }
    std::size_t num_edges() const { return indices_.size() / 2; }  // undirected
    std::size_t feature_dim() const { return features_.cols(); }

    std::span<const std::uint32_t> neighbors(std::size_t u) const {
        return {indices_.data() + offsets_[u], indices_.data() + offsets_[u + 1]};
    }
    std::size_t degree(std::size_t u) const { return offsets_[u + 1] - offsets_[u]; }
    bool has_edge(std::uint32_t u, std::uint32_t v) const;

    const DenseMatrix& features() const { return features_; }
    const std::optional<std::vector<int>>& labels() const { return labels_; }
    int num_classes() const;

    // Unique undirected edges as (u, v) with u < v, lexicographically sorted.
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edge_list() const;

private:
    std::size_t num_nodes_;
    std::vector<std::size_t> offsets_;       // size num_nodes + 1
    std::vector<std::uint32_t> indices_;     // sorted per node, both directions
    DenseMatrix features_;
    std::optional<std::vector<int>> labels_;
};

struct AugmentationConfig {
    double feature_mask_prob = 0.2;
    double edge_drop_prob = 0.2;
    // Column-wise masking zeroes a feature dimension across the whole view;
    // row-wise masking zeroes a node's feature vector instead.
    bool row_wise_mask = false;
    std::uint64_t seed = 0;

    void validate() const;
};

struct ViewPair {
    Graph view1;
    Graph view2;
};

struct SbmConfig {
    std::size_t nodes_per_block = 100;
    std::size_t num_blocks = 2;
    double p_intra = 0.2;
    double p_inter = 0.02;
    std::size_t feature_dim = 8;
    double feature_noise = 1.0;
    std::uint64_t seed = 0;

    void validate() const;
};

// Planted-partition generator. Features are the one-hot block centroid
// (cycled over feature_dim) plus Gaussian noise; labels are block ids.
Graph generate_sbm(const SbmConfig& cfg);

// Edge list: one "u v" pair per line, '#' comments allowed. Features: CSV,
// one row per node. Labels (optional): one integer per line.
Graph load_graph(const std::string& edge_list_path, const std::string& features_path,
                 const std::optional<std::string>& labels_path = std::nullopt);

// Two stochastic views: independent column (or row) feature masking and
// undirected edge dropping per view. Stream is keyed by (seed, epoch, view)
// so the same call yields the same pair.
ViewPair augment(const Graph& g, const AugmentationConfig& cfg, std::uint64_t epoch);

class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace sslgraph
