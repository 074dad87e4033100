#pragma once

#include <algorithm>
#include <cstddef>
#include <deque>
#include <optional>
#include <set>
#include <span>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "gist/error.hpp"
#include "gist/kg.hpp"
#include "gist/subgraph.hpp"

namespace gist {

struct ExpansionConfig {
  std::size_t max_path_len = 4;  // L, in edges, inclusive
  std::size_t border_hops = 2;
  std::optional<std::size_t> degree_cap;  // skip hubs above this KG degree as path interiors
  bool directed = false;                  // follow stored edge direction only

  void validate() const {
    if (max_path_len < 1) throw Error("max_path_len must be >= 1");
    if (border_hops < 1) throw Error("border_hops must be >= 1");
  }
};

/// Seeds S, intermediates I and borders B, plus the two subgraphs they span.
struct LayeredNodeSets {
  std::set<NodeId> seeds;
  std::set<NodeId> intermediates;
  std::set<NodeId> borders;
  Subgraph intermediate_graph;  // over S ∪ I
  Subgraph border_graph;        // over S ∪ I ∪ B
};

namespace detail {

struct Step {
  NodeId to;
  EdgeIndex edge;
};

/// Incident edges usable from `u` in traversal order (ascending edge index).
inline std::vector<Step> steps_from(const KnowledgeGraph& g, NodeId u, bool directed) {
  std::vector<Step> steps;
  for (const EdgeIndex e : g.out_edges(u)) {
    const NodeId v = g.edge(e).dst;
    if (v != u) steps.push_back({v, e});
  }
  if (!directed) {
    for (const EdgeIndex e : g.in_edges(u)) {
      const NodeId v = g.edge(e).src;
      if (v != u) steps.push_back({v, e});
    }
  }
  std::sort(steps.begin(), steps.end(), [](const Step& a, const Step& b) { return a.edge < b.edge; });
  return steps;
}

/// Hop distance from every node within `limit` to the nearest node in
/// `sources`, walking edges backwards when `directed` (i.e. distance *to*
/// the sources along stored direction).
inline std::unordered_map<NodeId, std::size_t> distances_to(const KnowledgeGraph& g, const std::vector<NodeId>& sources,
                                                            std::size_t limit, bool directed) {
  std::unordered_map<NodeId, std::size_t> dist;
  std::deque<NodeId> frontier;
  for (const NodeId s : sources) {
    if (dist.emplace(s, 0).second) frontier.push_back(s);
  }
  while (!frontier.empty()) {
    const NodeId u = frontier.front();
    frontier.pop_front();
    const std::size_t du = dist.at(u);
    if (du == limit) continue;
    const auto relax = [&](NodeId w) {
      if (w != u && dist.emplace(w, du + 1).second) frontier.push_back(w);
    };
    for (const EdgeIndex e : g.in_edges(u)) relax(g.edge(e).src);
    if (!directed) {
      for (const EdgeIndex e : g.out_edges(u)) relax(g.edge(e).dst);
    }
  }
  return dist;
}

class SeedPathSearch {
 public:
  SeedPathSearch(const KnowledgeGraph& g, const std::set<NodeId>& seeds, const ExpansionConfig& cfg, Subgraph& out)
      : g_(g), seeds_(seeds), cfg_(cfg), out_(out) {}

  /// Marks every node and edge on a simple path of at most L edges from
  /// `start` to a seed that differs from it. Undirected paths are found
  /// from their smaller endpoint only; the enumeration is symmetric.
  void run_from(NodeId start) {
    targets_.clear();
    for (const NodeId s : seeds_) {
      if (s != start && (cfg_.directed || start < s)) targets_.push_back(s);
    }
    if (targets_.empty()) return;
    dist_ = distances_to(g_, targets_, cfg_.max_path_len, cfg_.directed);
    start_ = start;
    on_path_.clear();
    on_path_.insert(start);
    path_.clear();
    dfs(start, 0);
  }

 private:
  bool is_target(NodeId v) const { return std::binary_search(targets_.begin(), targets_.end(), v); }

  void dfs(NodeId u, std::size_t depth) {
    if (depth == cfg_.max_path_len) return;
    const std::size_t remaining = cfg_.max_path_len - depth;
    for (const Step& st : steps_from(g_, u, cfg_.directed)) {
      if (on_path_.contains(st.to)) continue;
      const auto d = dist_.find(st.to);
      if (d == dist_.end() || d->second + 1 > remaining) continue;
      path_.push_back(st.edge);
      if (is_target(st.to)) record(st.to);
      const bool hub = cfg_.degree_cap && !seeds_.contains(st.to) && degree(g_, st.to) > *cfg_.degree_cap;
      if (!hub) {
        on_path_.insert(st.to);
        dfs(st.to, depth + 1);
        on_path_.erase(st.to);
      }
      path_.pop_back();
    }
  }

  void record(NodeId end) {
    out_.nodes.insert(start_);
    out_.nodes.insert(end);
    for (const EdgeIndex e : path_) {
      out_.edges.insert(e);
      out_.nodes.insert(g_.edge(e).src);
      out_.nodes.insert(g_.edge(e).dst);
    }
  }

  const KnowledgeGraph& g_;
  const std::set<NodeId>& seeds_;
  const ExpansionConfig& cfg_;
  Subgraph& out_;
  std::vector<NodeId> targets_;
  std::unordered_map<NodeId, std::size_t> dist_;
  std::unordered_set<NodeId> on_path_;
  std::vector<EdgeIndex> path_;
  NodeId start_;
};

}  // namespace detail

/// Seeds plus every node and edge on any simple path of at most
/// `max_path_len` edges between two distinct seeds.
inline Subgraph build_intermediate(const KnowledgeGraph& g, const std::set<NodeId>& seeds, const ExpansionConfig& cfg) {
  cfg.validate();
  if (seeds.empty()) throw Error("seed set is empty");
  for (const NodeId s : seeds) {
    if (!g.contains(s)) throw LookupError("seed " + to_string(s) + " is not in the graph");
  }
  Subgraph sub;
  sub.nodes = seeds;
  detail::SeedPathSearch search(g, seeds, cfg, sub);
  for (const NodeId s : seeds) search.run_from(s);
  return sub;
}

/// Intermediate graph plus every node within `border_hops` undirected steps
/// of it, with the edges of those short paths. An edge lies on such a path
/// exactly when its nearer endpoint is at most `border_hops - 1` away.
inline Subgraph build_border(const KnowledgeGraph& g, const Subgraph& inter, const ExpansionConfig& cfg) {
  cfg.validate();
  const std::vector<NodeId> core(inter.nodes.begin(), inter.nodes.end());
  std::unordered_map<NodeId, std::size_t> dist;
  std::deque<NodeId> frontier;
  for (const NodeId v : core) {
    dist.emplace(v, 0);
    frontier.push_back(v);
  }
  while (!frontier.empty()) {
    const NodeId u = frontier.front();
    frontier.pop_front();
    const std::size_t du = dist.at(u);
    if (du == cfg.border_hops) continue;
    for (const NodeId w : g.neighbors(u)) {
      if (dist.emplace(w, du + 1).second) frontier.push_back(w);
    }
  }
  Subgraph border = inter;
  for (const auto& [v, d] : dist) border.nodes.insert(v);
  for (const auto& [u, du] : dist) {
    if (du + 1 > cfg.border_hops) continue;
    const auto take = [&](EdgeIndex e) {
      const Edge& edge = g.edge(e);
      if (edge.src != edge.dst) border.edges.insert(e);
    };
    for (const EdgeIndex e : g.out_edges(u)) take(e);
    for (const EdgeIndex e : g.in_edges(u)) take(e);
  }
  return border;
}

/// Steps 2 and 3 with layer bookkeeping: I = V_I \ S, B = V_B \ V_I.
inline LayeredNodeSets expand(const KnowledgeGraph& g, const std::set<NodeId>& seeds, const ExpansionConfig& cfg) {
  LayeredNodeSets layers;
  layers.seeds = seeds;
  layers.intermediate_graph = build_intermediate(g, seeds, cfg);
  layers.border_graph = build_border(g, layers.intermediate_graph, cfg);
  for (const NodeId v : layers.intermediate_graph.nodes) {
    if (!seeds.contains(v)) layers.intermediates.insert(v);
  }
  for (const NodeId v : layers.border_graph.nodes) {
    if (!layers.intermediate_graph.nodes.contains(v)) layers.borders.insert(v);
  }
  return layers;
}

inline LayeredNodeSets expand(const KnowledgeGraph& g, std::span<const NodeId> seeds, const ExpansionConfig& cfg) {
  return expand(g, std::set<NodeId>(seeds.begin(), seeds.end()), cfg);
}

}  // namespace gist
