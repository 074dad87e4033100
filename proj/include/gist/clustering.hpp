#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <unordered_map>
#include <vector>

#include "gist/error.hpp"
#include "gist/expander.hpp"
#include "gist/kg.hpp"
#include "gist/relatedness.hpp"

namespace gist {

struct WeightedEdge {
  NodeId u;  // u < v
  NodeId v;
  double w;
};

/// Undirected affinity graph; no self-edges, weights finite and positive.
struct WeightedGraph {
  std::vector<NodeId> vertices;  // ascending
  std::vector<WeightedEdge> edges;
};

using Partition = std::vector<std::vector<NodeId>>;

struct ClusterSet {
  Partition clusters;  // each sorted; ordered by smallest member
  double modularity = 0.0;
  std::vector<double> q_trace;  // modularity after every local-moving sweep
};

/// Complete graph over S ∪ I weighted by relatedness computed on the view
/// held by `rel` (the border graph in the pipeline). Zero pairs are dropped.
inline WeightedGraph build_similarity_graph(const LayeredNodeSets& layers, PairwiseRelatedness& rel) {
  WeightedGraph wg;
  wg.vertices.assign(layers.intermediate_graph.nodes.begin(), layers.intermediate_graph.nodes.end());
  for (std::size_t i = 0; i < wg.vertices.size(); ++i) {
    for (std::size_t j = i + 1; j < wg.vertices.size(); ++j) {
      const double w = rel.sigma(wg.vertices[i], wg.vertices[j]);
      if (w > 0.0) wg.edges.push_back({wg.vertices[i], wg.vertices[j], w});
    }
  }
  return wg;
}

/// Q = 1/(2m) Σ_ij [A_ij − k_i k_j / 2m] δ(c_i, c_j); 0 for an edgeless graph.
inline double modularity(const WeightedGraph& wg, const Partition& partition) {
  std::unordered_map<NodeId, std::size_t> community;
  for (std::size_t c = 0; c < partition.size(); ++c) {
    for (const NodeId v : partition[c]) {
      if (!std::binary_search(wg.vertices.begin(), wg.vertices.end(), v))
        throw Error("partition member " + to_string(v) + " is not a vertex");
      if (!community.emplace(v, c).second) throw Error("partition is overlapping at " + to_string(v));
    }
  }
  if (community.size() != wg.vertices.size()) throw Error("partition does not cover every vertex");
  double m = 0.0;
  for (const auto& e : wg.edges) m += e.w;
  if (m <= 0.0) return 0.0;
  std::vector<double> internal(partition.size(), 0.0);
  std::vector<double> degree_sum(partition.size(), 0.0);
  for (const auto& e : wg.edges) {
    const std::size_t cu = community.at(e.u);
    const std::size_t cv = community.at(e.v);
    degree_sum[cu] += e.w;
    degree_sum[cv] += e.w;
    if (cu == cv) internal[cu] += e.w;
  }
  double q = 0.0;
  for (std::size_t c = 0; c < partition.size(); ++c) {
    const double frac = degree_sum[c] / (2.0 * m);
    q += internal[c] / m - frac * frac;
  }
  return q;
}

struct LouvainOptions {
  bool shuffle = false;  // visit nodes in a seeded random order instead of ascending
  std::uint64_t rng_seed = 0;
};

namespace detail {

/// One aggregation level: node i has neighbours adj[i] and a self-loop
/// weight loop[i] that stands for edges already inside it.
struct LouvainLevel {
  std::vector<std::vector<std::pair<std::uint32_t, double>>> adj;
  std::vector<double> loop;

  std::size_t size() const { return adj.size(); }

  double strength(std::uint32_t i) const {
    double k = 2.0 * loop[i];
    for (const auto& [_, w] : adj[i]) k += w;
    return k;
  }
};

inline double level_modularity(const LouvainLevel& lvl, const std::vector<std::uint32_t>& comm, double m) {
  if (m <= 0.0) return 0.0;
  std::unordered_map<std::uint32_t, double> in;
  std::unordered_map<std::uint32_t, double> tot;
  for (std::uint32_t i = 0; i < lvl.size(); ++i) {
    tot[comm[i]] += lvl.strength(i);
    in[comm[i]] += 2.0 * lvl.loop[i];
    for (const auto& [j, w] : lvl.adj[i]) {
      if (comm[j] == comm[i]) in[comm[i]] += w;
    }
  }
  // Sum in ascending community order for a reproducible result.
  std::vector<std::uint32_t> keys;
  for (const auto& [c, _] : tot) keys.push_back(c);
  std::sort(keys.begin(), keys.end());
  double q = 0.0;
  for (const std::uint32_t c : keys) {
    const double frac = tot[c] / (2.0 * m);
    q += in[c] / (2.0 * m) - frac * frac;
  }
  return q;
}

/// Local moving until no node changes community. Returns whether any move
/// happened. Each sweep's modularity is appended to `trace` and checked to
/// never drop.
inline bool local_moving(const LouvainLevel& lvl, std::vector<std::uint32_t>& comm, double m,
                         const LouvainOptions& opts, std::mt19937_64& rng, std::vector<double>& trace) {
  const std::size_t n = lvl.size();
  std::vector<double> k(n);
  std::vector<double> tot(n, 0.0);
  for (std::uint32_t i = 0; i < n; ++i) {
    k[i] = lvl.strength(i);
    tot[comm[i]] += k[i];
  }
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0U);
  if (opts.shuffle) {
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
  }
  double q_prev = level_modularity(lvl, comm, m);
  bool moved_any = false;
  std::vector<double> link(n, 0.0);
  std::vector<std::uint32_t> touched;
  while (true) {
    bool moved = false;
    for (const std::uint32_t i : order) {
      const std::uint32_t own = comm[i];
      touched.clear();
      for (const auto& [j, w] : lvl.adj[i]) {
        if (link[comm[j]] == 0.0) touched.push_back(comm[j]);
        link[comm[j]] += w;
      }
      tot[own] -= k[i];
      // Gain of inserting i into c, up to a common positive factor.
      const auto gain = [&](std::uint32_t c) { return link[c] - tot[c] * k[i] / (2.0 * m); };
      std::uint32_t best = own;
      double best_gain = gain(own);
      std::sort(touched.begin(), touched.end());
      for (const std::uint32_t c : touched) {
        const double gc = gain(c);
        if (gc > best_gain + 1e-15) {
          best = c;
          best_gain = gc;
        }
      }
      tot[best] += k[i];
      comm[i] = best;
      if (best != own) moved = true;
      for (const std::uint32_t c : touched) link[c] = 0.0;
    }
    if (!moved) break;
    moved_any = true;
    const double q = level_modularity(lvl, comm, m);
    if (q < q_prev - 1e-12) throw std::logic_error("louvain local moving decreased modularity");
    trace.push_back(q);
    q_prev = q;
  }
  return moved_any;
}

/// Renumbers communities densely in order of first appearance.
inline std::size_t renumber(std::vector<std::uint32_t>& comm) {
  std::unordered_map<std::uint32_t, std::uint32_t> remap;
  for (auto& c : comm) {
    const auto [it, _] = remap.emplace(c, static_cast<std::uint32_t>(remap.size()));
    c = it->second;
  }
  return remap.size();
}

inline LouvainLevel aggregate(const LouvainLevel& lvl, const std::vector<std::uint32_t>& comm, std::size_t count) {
  LouvainLevel next;
  next.adj.assign(count, {});
  next.loop.assign(count, 0.0);
  std::vector<std::map<std::uint32_t, double>> acc(count);
  for (std::uint32_t i = 0; i < lvl.size(); ++i) {
    next.loop[comm[i]] += lvl.loop[i];
    for (const auto& [j, w] : lvl.adj[i]) {
      if (comm[i] == comm[j]) {
        if (i < j) next.loop[comm[i]] += w;
      } else {
        acc[comm[i]][comm[j]] += w;
      }
    }
  }
  for (std::uint32_t c = 0; c < count; ++c) {
    for (const auto& [d, w] : acc[c]) next.adj[c].emplace_back(d, w);
  }
  return next;
}

}  // namespace detail

/// Two-phase Louvain modularity optimization (local moving, then
/// aggregation) at resolution 1, repeated until a level makes no move.
inline ClusterSet louvain(const WeightedGraph& wg, const LouvainOptions& opts = {}) {
  const std::size_t n = wg.vertices.size();
  if (n == 0) throw Error("louvain on an empty graph");
  std::unordered_map<NodeId, std::uint32_t> local;
  for (std::uint32_t i = 0; i < n; ++i) local.emplace(wg.vertices[i], i);

  detail::LouvainLevel lvl;
  lvl.adj.assign(n, {});
  lvl.loop.assign(n, 0.0);
  double m = 0.0;
  for (const auto& e : wg.edges) {
    if (!(e.w >= 0.0) || !std::isfinite(e.w)) throw Error("edge weights must be finite and non-negative");
    if (e.u == e.v) throw Error("self-edges are not allowed");
    if (e.w == 0.0) continue;
    const std::uint32_t a = local.at(e.u);
    const std::uint32_t b = local.at(e.v);
    lvl.adj[a].emplace_back(b, e.w);
    lvl.adj[b].emplace_back(a, e.w);
    m += e.w;
  }
  for (auto& list : lvl.adj) std::sort(list.begin(), list.end());

  // membership[v] = community of original vertex v at the current level
  std::vector<std::uint32_t> membership(n);
  std::iota(membership.begin(), membership.end(), 0U);
  ClusterSet result;
  std::mt19937_64 rng(opts.rng_seed);
  if (m > 0.0) {
    while (true) {
      std::vector<std::uint32_t> comm(lvl.size());
      std::iota(comm.begin(), comm.end(), 0U);
      if (!detail::local_moving(lvl, comm, m, opts, rng, result.q_trace)) break;
      const std::size_t count = detail::renumber(comm);
      for (auto& c : membership) c = comm[c];
      if (count == lvl.size()) break;
      lvl = detail::aggregate(lvl, comm, count);
    }
  }

  std::map<std::uint32_t, std::vector<NodeId>> groups;
  for (std::uint32_t v = 0; v < n; ++v) groups[membership[v]].push_back(wg.vertices[v]);
  for (auto& [_, members] : groups) result.clusters.push_back(std::move(members));
  std::sort(result.clusters.begin(), result.clusters.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  result.modularity = modularity(wg, result.clusters);
  return result;
}

inline ClusterSet louvain(const WeightedGraph& wg, std::uint64_t rng_seed) {
  return louvain(wg, LouvainOptions{false, rng_seed});
}

}  // namespace gist
