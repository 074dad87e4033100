#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "gist/error.hpp"
#include "gist/kg.hpp"
#include "gist/subgraph.hpp"

namespace gist {

/// Exclusivity cost of a stored edge s -r-> t: the number of r-typed edges
/// leaving s plus the number entering t, counting the edge itself once.
/// Counts are taken over the whole knowledge graph.
inline double edge_cost(const KnowledgeGraph& g, const Edge& e) {
  return static_cast<double>(g.typed_out_count(e.src, e.etype) + g.typed_in_count(e.dst, e.etype) - 1);
}

inline double edge_cost(const KnowledgeGraph& g, EdgeIndex e) {
  if (e >= g.edge_count()) throw LookupError("edge index " + std::to_string(e) + " is not in the graph");
  return edge_cost(g, g.edge(e));
}

/// Undirected simple-graph view of a whole graph or of a subgraph, with
/// dense local indices assigned in ascending NodeId order. Parallel edges
/// between a pair collapse into one hop carrying the cheapest edge cost.
class GraphView {
 public:
  struct Hop {
    std::uint32_t to;
    double cost;
  };

  explicit GraphView(const KnowledgeGraph& g) : g_(&g) {
    ids_.reserve(g.size());
    for (const NodeRecord& r : g.nodes()) ids_.push_back(r.id);
    std::vector<EdgeIndex> all(g.edge_count());
    for (EdgeIndex e = 0; e < all.size(); ++e) all[e] = e;
    init(all);
  }

  GraphView(const KnowledgeGraph& g, const Subgraph& sub) : g_(&g) {
    ids_.assign(sub.nodes.begin(), sub.nodes.end());
    init(std::vector<EdgeIndex>(sub.edges.begin(), sub.edges.end()));
  }

  const KnowledgeGraph& graph() const noexcept { return *g_; }
  std::size_t size() const noexcept { return ids_.size(); }
  NodeId id(std::uint32_t local) const { return ids_.at(local); }
  std::span<const NodeId> ids() const noexcept { return ids_; }

  std::optional<std::uint32_t> index(NodeId id) const {
    const auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
    if (it == ids_.end() || *it != id) return std::nullopt;
    return static_cast<std::uint32_t>(it - ids_.begin());
  }

  bool contains(NodeId id) const { return index(id).has_value(); }

  /// Neighbours of `local`, ascending by local index.
  std::span<const Hop> hops(std::uint32_t local) const { return adj_.at(local); }

 private:
  void init(const std::vector<EdgeIndex>& edges) {
    std::sort(ids_.begin(), ids_.end());
    adj_.assign(ids_.size(), {});
    for (const EdgeIndex e : edges) {
      const Edge& edge = g_->edge(e);
      if (edge.src == edge.dst) continue;
      const auto a = index(edge.src);
      const auto b = index(edge.dst);
      if (!a || !b) throw Error("subgraph edge " + std::to_string(e) + " has an endpoint outside the node set");
      const double c = edge_cost(*g_, edge);
      adj_[*a].push_back({*b, c});
      adj_[*b].push_back({*a, c});
    }
    for (auto& list : adj_) {
      std::sort(list.begin(), list.end(), [](const Hop& x, const Hop& y) {
        return x.to != y.to ? x.to < y.to : x.cost < y.cost;
      });
      list.erase(std::unique(list.begin(), list.end(), [](const Hop& x, const Hop& y) { return x.to == y.to; }),
                 list.end());
    }
  }

  const KnowledgeGraph* g_;
  std::vector<NodeId> ids_;
  std::vector<std::vector<Hop>> adj_;
};

}  // namespace gist
