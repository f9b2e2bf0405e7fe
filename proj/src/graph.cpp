#include "sslgraph/graph.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace sslgraph {

Graph::Graph(std::size_t num_nodes, const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges,
             DenseMatrix features, std::optional<std::vector<int>> labels)
    : num_nodes_(num_nodes), features_(std::move(features)), labels_(std::move(labels)) {
    if (features_.rows() != num_nodes_)
        throw ShapeError("Graph: feature row count " + std::to_string(features_.rows()) +
                         " != num_nodes " + std::to_string(num_nodes_));
    if (labels_ && labels_->size() != num_nodes_)
        throw ShapeError("Graph: label count != num_nodes");

    // Symmetrize, drop self-loops, dedup.
    std::vector<std::vector<std::uint32_t>> adj(num_nodes_);
    for (auto [u, v] : edges) {
        if (u >= num_nodes_ || v >= num_nodes_)
            throw std::out_of_range("Graph: edge endpoint " + std::to_string(std::max(u, v)) +
                                    " out of range for N=" + std::to_string(num_nodes_));
        if (u == v) continue;
        adj[u].push_back(v);
        adj[v].push_back(u);
    }
    offsets_.resize(num_nodes_ + 1, 0);
    for (std::size_t u = 0; u < num_nodes_; ++u) {
        auto& nb = adj[u];
        std::sort(nb.begin(), nb.end());
        nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
        offsets_[u + 1] = offsets_[u] + nb.size();
    }
    indices_.reserve(offsets_[num_nodes_]);
    for (auto& nb : adj) indices_.insert(indices_.end(), nb.begin(), nb.end());
}

bool Graph::has_edge(std::uint32_t u, std::uint32_t v) const {
    auto nb = neighbors(u);
    return std::binary_search(nb.begin(), nb.end(), v);
}

int Graph::num_classes() const {
    if (!labels_) return 0;
    int c = 0;
    for (int l : *labels_) c = std::max(c, l + 1);
    return c;
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> Graph::edge_list() const {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
    out.reserve(num_edges());
    for (std::uint32_t u = 0; u < num_nodes_; ++u)
        for (std::uint32_t v : neighbors(u))
            if (u < v) out.emplace_back(u, v);
    return out;
}

void AugmentationConfig::validate() const {
    if (feature_mask_prob < 0.0 || feature_mask_prob > 1.0)
        throw ConfigError("feature_mask_prob must be in [0,1]");
    if (edge_drop_prob < 0.0 || edge_drop_prob > 1.0)
        throw ConfigError("edge_drop_prob must be in [0,1]");
}

void SbmConfig::validate() const {
    if (p_intra < 0.0 || p_intra > 1.0) throw ConfigError("p_intra must be in [0,1]");
    if (p_inter < 0.0 || p_inter > 1.0) throw ConfigError("p_inter must be in [0,1]");
    if (nodes_per_block == 0 || num_blocks == 0) throw ConfigError("block counts must be positive");
    if (feature_dim == 0) throw ConfigError("feature_dim must be positive");
    if (feature_noise < 0.0) throw ConfigError("feature_noise must be nonnegative");
}

Graph generate_sbm(const SbmConfig& cfg) {
    cfg.validate();
    const std::size_t n = cfg.nodes_per_block * cfg.num_blocks;
    Rng edge_rng = Rng::derive(cfg.seed, 1);
    Rng feat_rng = Rng::derive(cfg.seed, 2);

    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i / cfg.nodes_per_block);

    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
    for (std::uint32_t u = 0; u < n; ++u)
        for (std::uint32_t v = u + 1; v < n; ++v) {
            const double p = labels[u] == labels[v] ? cfg.p_intra : cfg.p_inter;
            if (edge_rng.uniform() < p) edges.emplace_back(u, v);
        }

    DenseMatrix x(n, cfg.feature_dim);
    for (std::size_t i = 0; i < n; ++i) {
        x(i, labels[i] % cfg.feature_dim) = 1.0;
        for (std::size_t j = 0; j < cfg.feature_dim; ++j)
            x(i, j) += cfg.feature_noise * feat_rng.normal();
    }
    return Graph(n, edges, std::move(x), std::move(labels));
}

namespace {

std::vector<std::pair<std::uint32_t, std::uint32_t>> parse_edge_list(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open edge list: " + path);
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        std::istringstream ss(line);
        long long u, v;
        if (!(ss >> u >> v) || u < 0 || v < 0) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": malformed edge line '" +
                             line + "'");
        }
        std::string trailing;
        if (ss >> trailing)
            throw ParseError(path + ":" + std::to_string(lineno) + ": trailing tokens");
        edges.emplace_back(static_cast<std::uint32_t>(u), static_cast<std::uint32_t>(v));
    }
    return edges;
}

DenseMatrix parse_feature_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open feature file: " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t pos = 0;
                row.push_back(std::stod(cell, &pos));
                while (pos < cell.size() && std::isspace(static_cast<unsigned char>(cell[pos]))) ++pos;
                if (pos != cell.size()) throw std::invalid_argument(cell);
            } catch (const std::exception&) {
                throw ParseError(path + ":" + std::to_string(lineno) + ": bad numeric cell '" +
                                 cell + "'");
            }
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw ParseError(path + ":" + std::to_string(lineno) + ": inconsistent column count");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ParseError(path + ": empty feature file");
    DenseMatrix x(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j) x(i, j) = rows[i][j];
    return x;
}

std::vector<int> parse_labels(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open label file: " + path);
    std::vector<int> labels;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            labels.push_back(std::stoi(line));
        } catch (const std::exception&) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": bad label '" + line + "'");
        }
    }
    return labels;
}

}  // namespace

Graph load_graph(const std::string& edge_list_path, const std::string& features_path,
                 const std::optional<std::string>& labels_path) {
    DenseMatrix x = parse_feature_csv(features_path);
    auto edges = parse_edge_list(edge_list_path);
    std::optional<std::vector<int>> labels;
    if (labels_path) {
        labels = parse_labels(*labels_path);
        if (labels->size() != x.rows())
            throw ShapeError("label count " + std::to_string(labels->size()) +
                             " != feature row count " + std::to_string(x.rows()));
    }
    return Graph(x.rows(), edges, std::move(x), std::move(labels));
}

namespace {

Graph make_view(const Graph& g, const AugmentationConfig& cfg, Rng rng) {
    const std::size_t n = g.num_nodes();
    const std::size_t f = g.feature_dim();

    DenseMatrix x = g.features();
    if (cfg.row_wise_mask) {
        for (std::size_t i = 0; i < n; ++i)
            if (rng.uniform() < cfg.feature_mask_prob)
                for (std::size_t j = 0; j < f; ++j) x(i, j) = 0.0;
    } else {
        for (std::size_t j = 0; j < f; ++j)
            if (rng.uniform() < cfg.feature_mask_prob)
                for (std::size_t i = 0; i < n; ++i) x(i, j) = 0.0;
    }

    std::vector<std::pair<std::uint32_t, std::uint32_t>> kept;
    for (auto e : g.edge_list())
        if (rng.uniform() >= cfg.edge_drop_prob) kept.push_back(e);

    std::optional<std::vector<int>> labels = g.labels();
    return Graph(n, kept, std::move(x), std::move(labels));
}

}  // namespace

ViewPair augment(const Graph& g, const AugmentationConfig& cfg, std::uint64_t epoch) {
    cfg.validate();
    return ViewPair{make_view(g, cfg, Rng::derive(cfg.seed, epoch, 1)),
                    make_view(g, cfg, Rng::derive(cfg.seed, epoch, 2))};
}

}  // namespace sslgraph
