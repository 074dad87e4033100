#include <catch_amalgamated.hpp>

#include <random>

#include "gist/expander.hpp"
#include "oracles.hpp"

using namespace gist;

namespace {

std::set<NodeId> ids(std::initializer_list<std::uint32_t> v) {
  std::set<NodeId> out;
  for (const auto i : v) out.insert(NodeId{i});
  return out;
}

KnowledgeGraph chain(std::uint32_t n) {
  GraphBuilder b;
  for (std::uint32_t i = 1; i <= n; ++i) b.add_article(i, "c" + std::to_string(i));
  for (std::uint32_t i = 1; i < n; ++i) b.add_edge(i, "r", i + 1);
  return std::move(b).build();
}

}  // namespace

TEST_CASE("chain A-x-B puts x in the intermediate layer") {
  const KnowledgeGraph g = chain(3);
  const Subgraph inter = build_intermediate(g, ids({1, 3}), {});
  CHECK(inter.nodes == ids({1, 2, 3}));
  CHECK(inter.edges.size() == 2);
}

TEST_CASE("paths longer than L are not kept") {
  const KnowledgeGraph g = chain(6);  // 5 edges between the ends
  const LayeredNodeSets l = expand(g, ids({1, 6}), ExpansionConfig{});
  CHECK(l.intermediates.empty());
  CHECK(l.intermediate_graph.edges.empty());
  ExpansionConfig five;
  five.max_path_len = 5;
  CHECK(expand(g, ids({1, 6}), five).intermediates == ids({2, 3, 4, 5}));
}

TEST_CASE("triangle of seeds keeps all three edges and no intermediates") {
  GraphBuilder b;
  b.add_article(1, "A").add_article(2, "B").add_article(3, "C");
  b.add_edge(1, "r", 2).add_edge(2, "r", 3).add_edge(3, "r", 1);
  const KnowledgeGraph g = std::move(b).build();
  const LayeredNodeSets l = expand(g, ids({1, 2, 3}), ExpansionConfig{});
  CHECK(l.intermediates.empty());
  CHECK(l.intermediate_graph.edges.size() == 3);
}

TEST_CASE("border layer is the two-hop ball around the intermediate graph") {
  const KnowledgeGraph g = chain(4);  // A-p-q-r
  Subgraph core;
  core.nodes = ids({1});
  const Subgraph border = build_border(g, core, ExpansionConfig{});
  CHECK(border.nodes == ids({1, 2, 3}));
  CHECK(border.edges == std::set<EdgeIndex>{0, 1});
}

TEST_CASE("a star centre reaches its leaves") {
  GraphBuilder b;
  for (std::uint32_t i = 1; i <= 4; ++i) b.add_article(i, "s" + std::to_string(i));
  b.add_edge(1, "r", 2).add_edge(1, "r", 3).add_edge(4, "r", 1);
  const KnowledgeGraph g = std::move(b).build();
  const LayeredNodeSets l = expand(g, ids({1}), ExpansionConfig{});
  CHECK(l.intermediates.empty());
  CHECK(l.borders == ids({2, 3, 4}));
}

TEST_CASE("hand-traced layers of a chain with a leaf") {
  // A(1) - x(2) - B(3), leaf y(4) on x.
  GraphBuilder b;
  b.add_article(1, "A").add_article(2, "x").add_article(3, "B").add_article(4, "y");
  b.add_edge(1, "r", 2).add_edge(2, "r", 3).add_edge(2, "r", 4);
  const KnowledgeGraph g = std::move(b).build();
  const LayeredNodeSets l = expand(g, ids({1, 3}), ExpansionConfig{});
  CHECK(l.seeds == ids({1, 3}));
  CHECK(l.intermediates == ids({2}));
  CHECK(l.borders == ids({4}));
}

TEST_CASE("far-apart seeds get the union of their balls") {
  const KnowledgeGraph g = chain(9);
  const LayeredNodeSets l = expand(g, ids({1, 9}), ExpansionConfig{});
  CHECK(l.intermediates.empty());
  CHECK(l.borders == ids({2, 3, 7, 8}));
}

TEST_CASE("bad input is rejected") {
  const KnowledgeGraph g = chain(3);
  CHECK_THROWS_AS(build_intermediate(g, {}, {}), Error);
  CHECK_THROWS_AS(build_intermediate(g, ids({1, 42}), {}), Error);
  ExpansionConfig zero;
  zero.max_path_len = 0;
  CHECK_THROWS_AS(expand(g, ids({1}), zero), Error);
}

TEST_CASE("expansion equals brute-force enumeration on random graphs") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 60; ++trial) {
    const KnowledgeGraph g = oracle::random_graph(rng, 10, 16, 2, true);
    std::set<NodeId> seeds;
    const std::size_t k = 1 + rng() % 3;
    while (seeds.size() < k) seeds.insert(NodeId{1 + static_cast<std::uint32_t>(rng() % 10)});
    for (std::size_t L = 1; L <= 4; ++L) {
      ExpansionConfig cfg;
      cfg.max_path_len = L;
      const LayeredNodeSets got = expand(g, seeds, cfg);
      const oracle::Expansion want = oracle::expand(g, seeds, L, cfg.border_hops);
      CHECK(got.intermediate_graph.nodes == want.inter_nodes);
      CHECK(got.intermediate_graph.edges == want.inter_edges);
      CHECK(got.border_graph.nodes == want.border_nodes);
      CHECK(got.border_graph.edges == want.border_edges);
    }
  }
}

TEST_CASE("layers are nested and grow with L") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 40; ++trial) {
    const KnowledgeGraph g = oracle::random_graph(rng, 12, 24);
    const std::set<NodeId> seeds = ids({1, 5, 9});
    std::set<NodeId> prev;
    for (std::size_t L = 1; L <= 5; ++L) {
      ExpansionConfig cfg;
      cfg.max_path_len = L;
      const LayeredNodeSets l = expand(g, seeds, cfg);
      CHECK(std::includes(l.intermediate_graph.nodes.begin(), l.intermediate_graph.nodes.end(), prev.begin(),
                          prev.end()));
      CHECK(std::includes(l.border_graph.nodes.begin(), l.border_graph.nodes.end(),
                          l.intermediate_graph.nodes.begin(), l.intermediate_graph.nodes.end()));
      CHECK(std::includes(l.intermediate_graph.nodes.begin(), l.intermediate_graph.nodes.end(), seeds.begin(),
                          seeds.end()));
      prev = l.intermediate_graph.nodes;
    }
  }
}

TEST_CASE("degree cap skips hubs as interiors") {
  // 1 - hub(2) - 3 and 1 - 4 - 5 - 3; hub has extra leaves.
  GraphBuilder b;
  for (std::uint32_t i = 1; i <= 8; ++i) b.add_article(i, "d" + std::to_string(i));
  b.add_edge(1, "r", 2).add_edge(2, "r", 3).add_edge(1, "r", 4).add_edge(4, "r", 5).add_edge(5, "r", 3);
  b.add_edge(2, "r", 6).add_edge(2, "r", 7).add_edge(2, "r", 8);
  const KnowledgeGraph g = std::move(b).build();
  ExpansionConfig cfg;
  CHECK(expand(g, ids({1, 3}), cfg).intermediates == ids({2, 4, 5}));
  cfg.degree_cap = 3;
  CHECK(expand(g, ids({1, 3}), cfg).intermediates == ids({4, 5}));
}
