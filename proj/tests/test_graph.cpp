#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "sslgraph/graph.hpp"

using namespace sslgraph;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name, const std::string& content)
        : path("/tmp/sslgraph_test_" + name) {
        std::ofstream out(path);
        out << content;
    }
    ~TempFile() { std::remove(path.c_str()); }
};

bool adjacency_symmetric(const Graph& g) {
    for (std::uint32_t u = 0; u < g.num_nodes(); ++u)
        for (std::uint32_t v : g.neighbors(u))
            if (!g.has_edge(v, u)) return false;
    return true;
}

}  // namespace

TEST_CASE("generate_sbm: intra density exceeds inter density") {
    SbmConfig cfg;
    cfg.nodes_per_block = 50;
    cfg.num_blocks = 2;
    cfg.p_intra = 0.2;
    cfg.p_inter = 0.01;
    cfg.seed = 7;
    Graph g = generate_sbm(cfg);
    REQUIRE(g.num_nodes() == 100);
    std::size_t intra = 0, inter = 0;
    for (auto [u, v] : g.edge_list())
        ((*g.labels())[u] == (*g.labels())[v] ? intra : inter)++;
    const double intra_density = static_cast<double>(intra) / (2.0 * 50 * 49 / 2);
    const double inter_density = static_cast<double>(inter) / (50.0 * 50.0);
    CHECK(intra_density > inter_density);
    CHECK(adjacency_symmetric(g));
}

TEST_CASE("generate_sbm: p=1 single block gives complete graph") {
    SbmConfig cfg;
    cfg.nodes_per_block = 4;
    cfg.num_blocks = 1;
    cfg.p_intra = 1.0;
    cfg.feature_noise = 0.0;
    cfg.feature_dim = 3;
    Graph g = generate_sbm(cfg);
    CHECK(g.num_edges() == 6);  // K4
    for (std::size_t u = 0; u < 4; ++u) CHECK(g.degree(u) == 3);
    // identical noiseless features within the block
    for (std::size_t u = 1; u < 4; ++u)
        for (std::size_t j = 0; j < 3; ++j)
            CHECK(g.features()(u, j) == g.features()(0, j));
}

TEST_CASE("generate_sbm: edge count near binomial expectation") {
    SbmConfig cfg;
    cfg.nodes_per_block = 100;
    cfg.num_blocks = 2;
    cfg.p_intra = 0.3;
    cfg.p_inter = 0.02;
    cfg.seed = 13;
    Graph g = generate_sbm(cfg);
    const double expected = 2.0 * (100.0 * 99.0 / 2.0) * 0.3 + 100.0 * 100.0 * 0.02;
    CHECK(static_cast<double>(g.num_edges()) > 0.8 * expected);
    CHECK(static_cast<double>(g.num_edges()) < 1.2 * expected);
}

TEST_CASE("generate_sbm: deterministic given seed, rejects bad probabilities") {
    SbmConfig cfg;
    cfg.nodes_per_block = 20;
    cfg.seed = 5;
    Graph a = generate_sbm(cfg);
    Graph b = generate_sbm(cfg);
    CHECK(a.edge_list() == b.edge_list());
    CHECK(a.features() == b.features());
    cfg.p_intra = 1.5;
    CHECK_THROWS_AS(generate_sbm(cfg), ConfigError);
}

TEST_CASE("load_graph: basic parse and symmetrization") {
    TempFile edges("edges.txt", "# comment\n0 1\n1 2\n");
    TempFile feats("feats.csv", "1.0,2.0\n3.0,4.0\n5.0,6.0\n");
    Graph g = load_graph(edges.path, feats.path);
    REQUIRE(g.num_nodes() == 3);
    CHECK(g.neighbors(1).size() == 2);
    CHECK(g.neighbors(1)[0] == 0);
    CHECK(g.neighbors(1)[1] == 2);
    CHECK(g.features()(2, 1) == 6.0);
}

TEST_CASE("load_graph: duplicate directed pair collapses to one edge") {
    TempFile edges("edges2.txt", "0 1\n1 0\n");
    TempFile feats("feats2.csv", "0\n0\n");
    Graph g = load_graph(edges.path, feats.path);
    CHECK(g.num_edges() == 1);
    CHECK(g.degree(0) == 1);
}

TEST_CASE("load_graph: out-of-range node index") {
    TempFile edges("edges3.txt", "0 5\n");
    TempFile feats("feats3.csv", "0\n0\n0\n");
    CHECK_THROWS_AS(load_graph(edges.path, feats.path), std::out_of_range);
}

TEST_CASE("load_graph: malformed line reports line number") {
    TempFile edges("edges4.txt", "0 1\nnot an edge\n");
    TempFile feats("feats4.csv", "0\n0\n");
    try {
        load_graph(edges.path, feats.path);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find(":2") != std::string::npos);
    }
}

TEST_CASE("load_graph: label count mismatch") {
    TempFile edges("edges5.txt", "0 1\n");
    TempFile feats("feats5.csv", "0\n0\n");
    TempFile labels("labels5.txt", "0\n1\n0\n");
    CHECK_THROWS_AS(load_graph(edges.path, feats.path, labels.path), ShapeError);
}

TEST_CASE("augment: zero probabilities give identical views") {
    SbmConfig cfg;
    cfg.nodes_per_block = 30;
    Graph g = generate_sbm(cfg);
    AugmentationConfig aug;
    aug.feature_mask_prob = 0.0;
    aug.edge_drop_prob = 0.0;
    ViewPair views = augment(g, aug, 0);
    CHECK(views.view1.features() == g.features());
    CHECK(views.view1.edge_list() == g.edge_list());
    CHECK(views.view2.edge_list() == g.edge_list());
}

TEST_CASE("augment: full mask zeroes all features") {
    SbmConfig cfg;
    cfg.nodes_per_block = 10;
    Graph g = generate_sbm(cfg);
    AugmentationConfig aug;
    aug.feature_mask_prob = 1.0;
    ViewPair views = augment(g, aug, 3);
    for (std::size_t i = 0; i < views.view1.features().size(); ++i) {
        CHECK(views.view1.features().data()[i] == 0.0);
        CHECK(views.view2.features().data()[i] == 0.0);
    }
}

TEST_CASE("augment: deterministic per (graph, config, epoch), varies across epochs") {
    SbmConfig cfg;
    cfg.nodes_per_block = 40;
    cfg.seed = 11;
    Graph g = generate_sbm(cfg);
    AugmentationConfig aug;
    aug.seed = 9;
    ViewPair a = augment(g, aug, 5);
    ViewPair b = augment(g, aug, 5);
    CHECK(a.view1.features() == b.view1.features());
    CHECK(a.view1.edge_list() == b.view1.edge_list());
    CHECK(a.view2.edge_list() == b.view2.edge_list());
    ViewPair c = augment(g, aug, 6);
    CHECK(a.view1.edge_list() != c.view1.edge_list());
    // node count preserved
    CHECK(a.view1.num_nodes() == g.num_nodes());
    CHECK(adjacency_symmetric(a.view1));
}
