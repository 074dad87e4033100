#include <catch_amalgamated.hpp>

#include <random>

#include "gist/clustering.hpp"
#include "gist/rng.hpp"
#include "oracles.hpp"

using namespace gist;
using Catch::Approx;

namespace {

using DenseEdges = std::vector<std::tuple<std::size_t, std::size_t, double>>;

WeightedGraph weighted(std::size_t n, const DenseEdges& edges) {
  WeightedGraph wg;
  for (std::uint32_t i = 0; i < n; ++i) wg.vertices.push_back(NodeId{i + 1});
  for (const auto& [u, v, w] : edges) {
    wg.edges.push_back({NodeId{static_cast<std::uint32_t>(std::min(u, v) + 1)},
                        NodeId{static_cast<std::uint32_t>(std::max(u, v) + 1)}, w});
  }
  return wg;
}

std::vector<std::size_t> labels(const ClusterSet& cs, std::size_t n) {
  std::vector<std::size_t> out(n);
  for (std::size_t c = 0; c < cs.clusters.size(); ++c) {
    for (const NodeId v : cs.clusters[c]) out[v.value - 1] = c;
  }
  return out;
}

const DenseEdges kTwoCliques = {{0, 1, 1}, {0, 2, 1}, {1, 2, 1}, {3, 4, 1}, {3, 5, 1}, {4, 5, 1}, {2, 3, 1}};

std::vector<NodeId> ids(std::initializer_list<std::uint32_t> v) {
  std::vector<NodeId> out;
  for (const auto i : v) out.push_back(NodeId{i});
  return out;
}

}  // namespace

TEST_CASE("two joined triangles split into the two triangles") {
  const WeightedGraph wg = weighted(6, kTwoCliques);
  const ClusterSet cs = louvain(wg, 0);
  REQUIRE(cs.clusters.size() == 2);
  CHECK(cs.clusters[0] == ids({1, 2, 3}));
  CHECK(cs.clusters[1] == ids({4, 5, 6}));
  const auto [best, arg] = oracle::max_modularity(6, kTwoCliques);
  CHECK(cs.modularity == Approx(best).margin(1e-9));
}

TEST_CASE("a triangle stays together") {
  const DenseEdges tri = {{0, 1, 1}, {1, 2, 1}, {0, 2, 1}};
  const ClusterSet cs = louvain(weighted(3, tri), 0);
  CHECK(cs.clusters.size() == 1);
  CHECK(cs.modularity == Approx(oracle::max_modularity(3, tri).first).margin(1e-9));
}

TEST_CASE("shipped small fixtures reach the brute-force optimum") {
  const std::vector<std::pair<std::size_t, DenseEdges>> fixtures = {
      {6, kTwoCliques},
      {3, {{0, 1, 1}, {1, 2, 1}, {0, 2, 1}}},
      {5, {{0, 1, 1}, {1, 2, 1}, {2, 3, 1}, {3, 4, 1}}},           // path
      {5, {{0, 1, 1}, {0, 2, 1}, {0, 3, 1}, {0, 4, 1}}},           // star
  };
  for (const auto& [n, edges] : fixtures) {
    const ClusterSet cs = louvain(weighted(n, edges), 0);
    CHECK(cs.modularity >= oracle::max_modularity(n, edges).first - 1e-9);
  }
}

TEST_CASE("edgeless graphs give singletons with zero modularity") {
  const ClusterSet cs = louvain(weighted(4, {}), 0);
  CHECK(cs.clusters.size() == 4);
  CHECK(cs.modularity == 0.0);
  CHECK_THROWS_AS(louvain(WeightedGraph{}, 0), Error);
}

TEST_CASE("hand-computed modularity values") {
  const WeightedGraph two_edges = weighted(4, {{0, 1, 1}, {2, 3, 1}});
  CHECK(modularity(two_edges, {ids({1, 2}), ids({3, 4})}) == Approx(0.5).margin(1e-15));
  CHECK(modularity(two_edges, {ids({1, 2, 3, 4})}) == Approx(0.0).margin(1e-15));
  const WeightedGraph one_edge = weighted(2, {{0, 1, 1}});
  CHECK(modularity(one_edge, {ids({1}), ids({2})}) == Approx(-0.5).margin(1e-15));
  CHECK_THROWS_AS(modularity(one_edge, {ids({1})}), Error);
  CHECK_THROWS_AS(modularity(one_edge, {ids({1, 2}), ids({2})}), Error);
  CHECK_THROWS_AS(modularity(one_edge, {ids({1, 2, 7})}), Error);
}

TEST_CASE("modularity matches the dense formula and louvain Q never drops") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 80; ++trial) {
    const std::size_t n = 2 + rng() % 7;
    DenseEdges edges;
    for (std::size_t u = 0; u < n; ++u) {
      for (std::size_t v = u + 1; v < n; ++v) {
        if (rng() % 3 == 0) edges.emplace_back(u, v, 0.1 + gist::unit_real(rng));
      }
    }
    const WeightedGraph wg = weighted(n, edges);
    for (const bool shuffle : {false, true}) {
      const ClusterSet cs = louvain(wg, LouvainOptions{shuffle, rng()});
      CHECK(cs.modularity == Approx(oracle::modularity(n, edges, labels(cs, n))).margin(1e-12));
      for (std::size_t i = 1; i < cs.q_trace.size(); ++i) CHECK(cs.q_trace[i] >= cs.q_trace[i - 1] - 1e-12);
      if (!cs.q_trace.empty()) CHECK(cs.q_trace.back() == Approx(cs.modularity).margin(1e-12));
      CHECK(cs.modularity >= -0.5 - 1e-12);
      CHECK(cs.modularity <= 1.0);
    }
  }
}

TEST_CASE("louvain is deterministic for a fixed seed") {
  const WeightedGraph wg = weighted(6, kTwoCliques);
  const ClusterSet a = louvain(wg, LouvainOptions{true, 99});
  const ClusterSet b = louvain(wg, LouvainOptions{true, 99});
  CHECK(a.clusters == b.clusters);
  CHECK(a.modularity == b.modularity);
}

TEST_CASE("similarity graph over the three-node fixture") {
  GraphBuilder b;
  b.add_article(1, "A").add_article(2, "B").add_article(3, "C");
  b.add_edge(1, "r", 2).add_edge(1, "r", 3).add_edge(3, "r", 2);
  const KnowledgeGraph g = std::move(b).build();
  LayeredNodeSets layers;
  layers.intermediate_graph.nodes = {NodeId{1}, NodeId{2}, NodeId{3}};
  const GraphView view(g);
  PairwiseRelatedness rel(view, {});
  const WeightedGraph wg = build_similarity_graph(layers, rel);
  REQUIRE(wg.edges.size() == 3);
  CHECK(wg.edges[0].w == Approx(0.25 / 3 + 0.0625 / 4).margin(1e-15));
  CHECK(wg.edges[1].w == Approx(0.1375).margin(1e-15));
}
