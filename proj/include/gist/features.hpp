#pragma once

#include <algorithm>
#include <array>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "gist/candidates.hpp"
#include "gist/centrality.hpp"
#include "gist/clustering.hpp"
#include "gist/expander.hpp"
#include "gist/graph_view.hpp"
#include "gist/kg.hpp"
#include "gist/retrieval.hpp"

namespace gist {

inline constexpr std::size_t kFeatureCount = 15;

using FeatureVector = std::array<double, kFeatureCount>;

/// Positions in FeatureVector.
enum Feature : std::size_t {
  kIsSeed = 0,
  kIsIntermediate,
  kPageRankIntermediate,
  kBetweennessIntermediate,
  kIsBorder,
  kMaxClusterProximity,
  kAvgClusterProximity,
  kSumClusterProximity,
  kInClusterMostSeeds,
  kInClusterMostSeedsIntermediates,
  kSeedFractionOfCluster,
  kSeedIntermediateFractionOfCluster,
  kQlReciprocalRank,
  kInDegreeGlobal,
  kClusteringCoefficientGlobal,
};

inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "is_seed",
    "is_intermediate",
    "pagerank_intermediate",
    "betweenness_intermediate",
    "is_border",
    "max_cluster_proximity",
    "avg_cluster_proximity",
    "sum_cluster_proximity",
    "in_cluster_most_seeds",
    "in_cluster_most_seeds_intermediates",
    "seed_fraction_of_cluster",
    "seed_intermediate_fraction_of_cluster",
    "ql_reciprocal_rank",
    "in_degree_global",
    "clustering_coefficient_global",
};

inline std::optional<std::size_t> feature_index(std::string_view name) {
  const auto it = std::find(kFeatureNames.begin(), kFeatureNames.end(), name);
  if (it == kFeatureNames.end()) return std::nullopt;
  return static_cast<std::size_t>(it - kFeatureNames.begin());
}

struct FeatureRow {
  NodeId node;
  FeatureVector x{};
  // Raw member counts of the node's cluster; not part of the model input.
  double seeds_in_cluster = 0.0;
  double members_in_cluster = 0.0;
};

/// Builds the feature vector of every candidate from the artifacts of one
/// query. PageRank and betweenness come from the undirected intermediate
/// graph; in-degree and clustering coefficient from the whole graph.
inline std::vector<FeatureRow> extract_features(const KnowledgeGraph& g, const LayeredNodeSets& layers,
                                                const ClusterSet& clusters, const CandidateSet& cand,
                                                std::span<const QlRanked> ql) {
  const GraphView inter(g, layers.intermediate_graph);
  const PageRankResult pr = pagerank(inter);
  const std::map<NodeId, double> bc = betweenness(inter);

  const std::size_t nc = clusters.clusters.size();
  std::map<NodeId, std::size_t> member_of;
  std::vector<double> seed_count(nc, 0.0);
  std::vector<double> size(nc, 0.0);
  for (std::size_t c = 0; c < nc; ++c) {
    for (const NodeId v : clusters.clusters[c]) {
      member_of.emplace(v, c);
      if (layers.seeds.contains(v)) seed_count[c] += 1.0;
      size[c] += 1.0;
    }
  }
  const double max_seeds = nc ? *std::max_element(seed_count.begin(), seed_count.end()) : 0.0;
  const double max_size = nc ? *std::max_element(size.begin(), size.end()) : 0.0;
  const double total_seeds = static_cast<double>(layers.seeds.size());
  const double total_core = static_cast<double>(layers.intermediate_graph.nodes.size());

  std::map<NodeId, double> rr;
  for (const QlRanked& r : ql) rr.emplace(r.node, r.reciprocal_rank);

  std::vector<FeatureRow> rows;
  rows.reserve(cand.candidates.size());
  for (const NodeId v : cand.candidates) {
    FeatureRow row;
    row.node = v;
    FeatureVector& x = row.x;
    const bool seed = layers.seeds.contains(v);
    const bool inter_node = layers.intermediates.contains(v);
    x[kIsSeed] = seed ? 1.0 : 0.0;
    x[kIsIntermediate] = inter_node ? 1.0 : 0.0;
    x[kIsBorder] = (!seed && !inter_node) ? 1.0 : 0.0;
    if (const auto it = pr.score.find(v); it != pr.score.end()) x[kPageRankIntermediate] = it->second;
    if (const auto it = bc.find(v); it != bc.end()) x[kBetweennessIntermediate] = it->second;

    const std::vector<double>& prox = cand.proximity_of(v);
    std::optional<std::size_t> cluster;
    if (!prox.empty()) {
      double sum = 0.0;
      for (const double p : prox) sum += p;
      const auto best = std::max_element(prox.begin(), prox.end());
      x[kMaxClusterProximity] = *best;
      x[kAvgClusterProximity] = sum / static_cast<double>(prox.size());
      x[kSumClusterProximity] = sum;
      if (const auto it = member_of.find(v); it != member_of.end()) {
        cluster = it->second;
      } else if (*best > 0.0) {
        cluster = static_cast<std::size_t>(best - prox.begin());
      }
    }
    if (cluster) {
      const std::size_t c = *cluster;
      x[kInClusterMostSeeds] = seed_count[c] == max_seeds ? 1.0 : 0.0;
      x[kInClusterMostSeedsIntermediates] = size[c] == max_size ? 1.0 : 0.0;
      x[kSeedFractionOfCluster] = total_seeds > 0 ? seed_count[c] / total_seeds : 0.0;
      x[kSeedIntermediateFractionOfCluster] = total_core > 0 ? size[c] / total_core : 0.0;
      row.seeds_in_cluster = seed_count[c];
      row.members_in_cluster = size[c];
    }
    if (const auto it = rr.find(v); it != rr.end()) x[kQlReciprocalRank] = it->second;
    x[kInDegreeGlobal] = static_cast<double>(in_degree(g, v));
    x[kClusteringCoefficientGlobal] = clustering_coefficient(g, v);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace gist
