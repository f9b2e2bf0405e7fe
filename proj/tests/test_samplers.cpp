#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <set>

#include "sslgraph/samplers.hpp"

using namespace sslgraph;

namespace {

Graph star(std::size_t leaves) {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
    for (std::uint32_t i = 1; i <= leaves; ++i) edges.emplace_back(0, i);
    return Graph(leaves + 1, edges, DenseMatrix(leaves + 1, 1));
}

bool valid_sample(const std::vector<std::uint32_t>& idx, std::size_t n, std::size_t expected) {
    if (idx.size() != expected) return false;
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (idx[i] >= n) return false;
        if (i > 0 && idx[i] <= idx[i - 1]) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("uniform_node_sample: cardinality contract") {
    Rng rng(1);
    CHECK(uniform_node_sample(10, 1.0, rng).size() == 10);
    CHECK(uniform_node_sample(100, 0.01, rng).size() == 1);
    CHECK(uniform_node_sample(100, 0.25, rng).size() == 25);
    CHECK(valid_sample(uniform_node_sample(50, 0.3, rng), 50, 15));
    CHECK_THROWS_AS(uniform_node_sample(10, 0.0, rng), ConfigError);
    CHECK_THROWS_AS(uniform_node_sample(10, 1.5, rng), ConfigError);
}

TEST_CASE("uniform_node_sample: chi-square uniformity over 1e5 draws") {
    const std::size_t n = 10;
    const double p = 0.3;
    const std::size_t draws = 100000;
    Rng rng(12345);
    std::vector<std::size_t> counts(n, 0);
    for (std::size_t d = 0; d < draws; ++d)
        for (std::uint32_t i : uniform_node_sample(n, p, rng)) ++counts[i];
    const double expected = p * static_cast<double>(draws);
    double chi2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double diff = static_cast<double>(counts[i]) - expected;
        chi2 += diff * diff / expected;
        // each inclusion frequency within 4 sigma of p (binomial sigma)
        const double sigma = std::sqrt(p * (1 - p) * static_cast<double>(draws));
        CHECK(std::abs(diff) < 4.0 * sigma);
    }
    // df = 9, 99.9th percentile ~ 27.9
    CHECK(chi2 < 27.9);
}

TEST_CASE("forman_ricci: P2, K3, S4 reference values") {
    // single edge: 4 - 1 - 1 + 0 = 2
    Graph p2(2, {{0, 1}}, DenseMatrix(2, 1));
    CHECK(forman_ricci(p2).edge_curvature[0] == 2.0);

    // triangle: 4 - 2 - 2 + 3 = 3 on every edge
    Graph k3(3, {{0, 1}, {1, 2}, {0, 2}}, DenseMatrix(3, 1));
    for (double f : forman_ricci(k3).edge_curvature) CHECK(f == 3.0);

    // star with 4 leaves, center-leaf edge: 4 - 4 - 1 + 0 = -1
    RicciScores s4 = forman_ricci(star(4));
    for (double f : s4.edge_curvature) CHECK(f == -1.0);
    CHECK(s4.node_flow[0] == -4.0);  // center: sum of 4 incident edges
    CHECK(s4.node_flow[1] == -1.0);
}

TEST_CASE("forman_ricci: curvature multiset invariant under relabeling") {
    SbmConfig cfg;
    cfg.nodes_per_block = 15;
    cfg.num_blocks = 2;
    cfg.p_intra = 0.4;
    cfg.p_inter = 0.1;
    cfg.seed = 3;
    Graph g = generate_sbm(cfg);
    const std::size_t n = g.num_nodes();

    Rng rng(9);
    std::vector<std::uint32_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0u);
    for (std::size_t i = 0; i + 1 < n; ++i)
        std::swap(perm[i], perm[i + rng.below(n - i)]);
    std::vector<std::pair<std::uint32_t, std::uint32_t>> relabeled;
    for (auto [u, v] : g.edge_list()) relabeled.emplace_back(perm[u], perm[v]);
    Graph h(n, relabeled, DenseMatrix(n, 1));

    std::vector<double> a = forman_ricci(g).edge_curvature;
    std::vector<double> b = forman_ricci(h).edge_curvature;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    CHECK(a == b);
}

TEST_CASE("ricci_node_probs: shift-normalization and degenerate fallback") {
    const std::vector<double> probs = ricci_node_probs({-1.0, 0.0, 3.0});
    CHECK(probs[0] == doctest::Approx(0.0));
    CHECK(probs[1] == doctest::Approx(0.2));
    CHECK(probs[2] == doctest::Approx(0.8));

    const std::vector<double> two = ricci_node_probs({0.0, 2.0});
    CHECK(two[0] == doctest::Approx(0.0));
    CHECK(two[1] == doctest::Approx(1.0));

    for (double p : ricci_node_probs({5.0, 5.0, 5.0, 5.0})) CHECK(p == doctest::Approx(0.25));
    CHECK_THROWS_AS(ricci_node_probs({}), ConfigError);

    // valid distribution for arbitrary flows
    Rng rng(17);
    std::vector<double> flows(23);
    for (double& f : flows) f = 10.0 * rng.normal();
    double sum = 0.0;
    for (double p : ricci_node_probs(flows)) {
        CHECK(p >= 0.0);
        sum += p;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("ricci_node_sample: support and exhaustion behavior") {
    Rng rng(2);
    for (int i = 0; i < 50; ++i) {
        auto idx = ricci_node_sample({0.0, 0.0, 1.0}, 1.0 / 3.0, rng);
        REQUIRE(idx.size() == 1);
        CHECK(idx[0] == 2);
    }
    for (int i = 0; i < 50; ++i) {
        auto idx = ricci_node_sample({0.0, 0.2, 0.8}, 2.0 / 3.0, rng);
        CHECK(idx == std::vector<std::uint32_t>{1, 2});
    }
    // p = 1 forces padding beyond the nonzero support
    auto all = ricci_node_sample({0.0, 0.0, 1.0}, 1.0, rng);
    CHECK(all == std::vector<std::uint32_t>{0, 1, 2});
}

TEST_CASE("ricci_node_sample: uniform probs match uniform sampler statistically") {
    const std::size_t n = 8;
    const std::vector<double> uniform_probs(n, 1.0 / n);
    Rng rng(4);
    std::vector<std::size_t> counts(n, 0);
    const std::size_t draws = 20000;
    for (std::size_t d = 0; d < draws; ++d)
        for (std::uint32_t i : ricci_node_sample(uniform_probs, 0.5, rng)) ++counts[i];
    const double expected = 0.5 * static_cast<double>(draws);
    for (std::size_t i = 0; i < n; ++i) {
        const double sigma = std::sqrt(0.25 * static_cast<double>(draws));
        CHECK(std::abs(static_cast<double>(counts[i]) - expected) < 4.0 * sigma);
    }
}

TEST_CASE("uniform_dim_sample: grid value and per-epoch variation") {
    Rng rng(6);
    CHECK(uniform_dim_sample(512, 1.0, rng).size() == 512);
    CHECK(uniform_dim_sample(512, 0.5, rng).size() == 256);

    std::set<std::vector<std::uint32_t>> seen;
    for (int epoch = 0; epoch < 100; ++epoch) seen.insert(uniform_dim_sample(16, 0.5, rng));
    CHECK(seen.size() >= 2);
}

TEST_CASE("rotating_partition: deterministic wrap-around and full coverage") {
    CHECK(rotating_partition(8, 4, 0) == std::vector<std::uint32_t>{0, 1, 2, 3});
    CHECK(rotating_partition(8, 4, 1) == std::vector<std::uint32_t>{4, 5, 6, 7});
    CHECK(rotating_partition(8, 4, 2) == std::vector<std::uint32_t>{0, 1, 2, 3});
    CHECK_THROWS_AS(rotating_partition(8, 3, 0), ConfigError);

    // every dimension exactly once per D/M consecutive epochs
    std::vector<int> hits(12, 0);
    for (std::uint64_t e = 5; e < 5 + 4; ++e)
        for (std::uint32_t i : rotating_partition(12, 3, e)) ++hits[i];
    for (int h : hits) CHECK(h == 1);
}
