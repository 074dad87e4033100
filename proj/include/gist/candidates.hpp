#pragma once

#include <algorithm>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "gist/clustering.hpp"
#include "gist/error.hpp"
#include "gist/expander.hpp"
#include "gist/relatedness.hpp"

namespace gist {

struct CandidateParams {
  std::size_t top_k = 20;                  // borders kept per cluster
  std::optional<std::size_t> global_cap;   // cap on border candidates overall
  static constexpr std::size_t unlimited = std::numeric_limits<std::size_t>::max();
};

struct ScoredBorder {
  NodeId node;
  double proximity;
};

struct CandidateSet {
  std::vector<std::vector<ScoredBorder>> per_cluster;  // top borders of each cluster, best first
  std::vector<NodeId> candidates;                      // ascending
  /// σ̄ of every candidate against every cluster, indexed like the clusters.
  std::map<NodeId, std::vector<double>> proximity;

  const std::vector<double>& proximity_of(NodeId v) const {
    const auto it = proximity.find(v);
    if (it == proximity.end()) throw LookupError("no proximity scores for node " + to_string(v));
    return it->second;
  }
};

/// Scores each border against each cluster by mean relatedness, keeps the
/// top_k borders per cluster with positive proximity, and forms the
/// candidate set as their union with S ∪ I. Cluster members are scored
/// against clusters with themselves left out.
inline CandidateSet select_candidates(const LayeredNodeSets& layers, const ClusterSet& clusters,
                                      PairwiseRelatedness& rel, const CandidateParams& params) {
  if (params.top_k < 1) throw Error("top_k must be >= 1");
  CandidateSet out;
  const std::size_t nc = clusters.clusters.size();
  out.per_cluster.assign(nc, {});

  std::map<NodeId, std::vector<double>> border_scores;
  for (const NodeId b : layers.borders) {
    auto& row = border_scores[b];
    row.reserve(nc);
    for (const auto& cluster : clusters.clusters) row.push_back(rel.sigma_bar(b, cluster));
  }

  const auto better = [](const ScoredBorder& a, const ScoredBorder& b) {
    return a.proximity != b.proximity ? a.proximity > b.proximity : a.node < b.node;
  };
  std::set<NodeId> chosen;
  for (std::size_t c = 0; c < nc; ++c) {
    std::vector<ScoredBorder> ranked;
    for (const auto& [b, row] : border_scores) {
      if (row[c] > 0.0) ranked.push_back({b, row[c]});
    }
    std::sort(ranked.begin(), ranked.end(), better);
    if (ranked.size() > params.top_k) ranked.resize(params.top_k);
    for (const auto& sb : ranked) chosen.insert(sb.node);
    out.per_cluster[c] = std::move(ranked);
  }

  if (params.global_cap && chosen.size() > *params.global_cap) {
    std::vector<ScoredBorder> pooled;
    for (const NodeId b : chosen) {
      const auto& row = border_scores.at(b);
      pooled.push_back({b, *std::max_element(row.begin(), row.end())});
    }
    std::sort(pooled.begin(), pooled.end(), better);
    pooled.resize(*params.global_cap);
    chosen.clear();
    for (const auto& sb : pooled) chosen.insert(sb.node);
    for (auto& list : out.per_cluster) {
      std::erase_if(list, [&](const ScoredBorder& sb) { return !chosen.contains(sb.node); });
    }
  }

  std::set<NodeId> all(chosen.begin(), chosen.end());
  all.insert(layers.intermediate_graph.nodes.begin(), layers.intermediate_graph.nodes.end());
  out.candidates.assign(all.begin(), all.end());

  for (const NodeId v : out.candidates) {
    if (const auto it = border_scores.find(v); it != border_scores.end()) {
      out.proximity.emplace(v, it->second);
      continue;
    }
    std::vector<double> row;
    row.reserve(nc);
    for (const auto& cluster : clusters.clusters) row.push_back(rel.sigma_bar(v, cluster));
    out.proximity.emplace(v, std::move(row));
  }
  return out;
}

}  // namespace gist
