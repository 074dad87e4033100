#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gist/error.hpp"
#include "gist/metrics.hpp"
#include "gist/ranker.hpp"
#include "gist/rng.hpp"

namespace gist {

inline constexpr std::string_view kFoldSalt = "gist-folds-v1";

/// Fold of each query id. Queries are ordered by a salted hash of their id
/// and dealt round-robin, so fold sizes differ by at most one and the
/// assignment depends only on the set of ids.
inline std::vector<std::size_t> assign_folds(std::span<const std::string> ids, std::size_t folds) {
  if (folds < 2) throw Error("need at least two folds");
  if (ids.size() < folds) throw Error("fewer queries (" + std::to_string(ids.size()) + ") than folds (" +
                                      std::to_string(folds) + ")");
  std::vector<std::size_t> order(ids.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<std::uint64_t> key(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) key[i] = fnv1a64(std::string(kFoldSalt) + "\x1f" + ids[i]);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return key[a] != key[b] ? key[a] < key[b] : ids[a] < ids[b];
  });
  std::vector<std::size_t> fold(ids.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos) fold[order[pos]] = pos % folds;
  return fold;
}

struct CrossValidationResult {
  std::string label;  // feature set name
  std::vector<MetricSummary> per_fold;
  MetricSummary pooled;                                     // over all test queries
  std::map<std::string, std::vector<RankedNode>> rankings;  // out-of-fold ranking per query
  std::vector<LinearModel> models;                          // one per fold
  std::vector<std::string> uncovered;                       // no relevant candidate
};

/// k-fold cross-validation: train on k-1 folds, rank the held-out fold.
/// Queries without a relevant candidate are ranked but left out of the
/// metrics and listed in `uncovered`.
inline CrossValidationResult cross_validate(std::span<const TrainingQuery> queries, std::size_t folds, const CAConfig& cfg,
                                            const FeatureMask& mask, std::size_t k = 10) {
  std::vector<std::string> ids;
  for (const auto& q : queries) ids.push_back(q.id);
  const std::vector<std::size_t> fold_of = assign_folds(ids, folds);

  CrossValidationResult out;
  out.label = "custom";
  out.per_fold.resize(folds);
  for (std::size_t f = 0; f < folds; ++f) {
    std::vector<TrainingQuery> train;
    for (std::size_t i = 0; i < queries.size(); ++i) {
      if (fold_of[i] != f) train.push_back(queries[i]);
    }
    CAConfig fold_cfg = cfg;
    fold_cfg.rng_seed = derive_seed(cfg.rng_seed, "fold-" + std::to_string(f));
    const TrainResult trained = train_coordinate_ascent(train, fold_cfg, mask);
    out.models.push_back(trained.model);
    for (std::size_t i = 0; i < queries.size(); ++i) {
      if (fold_of[i] != f) continue;
      const TrainingQuery& q = queries[i];
      std::vector<RankedNode> ranked = rank(trained.model, q.rows);
      if (q.has_relevant_candidate()) {
        const std::vector<NodeId> order = node_order(ranked);
        evaluate_query(out.per_fold[f], q.id, order, q.relevant, k);
        evaluate_query(out.pooled, q.id, order, q.relevant, k);
      } else {
        out.uncovered.push_back(q.id);
      }
      out.rankings.emplace(q.id, std::move(ranked));
    }
    out.per_fold[f].pool();
  }
  std::sort(out.pooled.per_query.begin(), out.pooled.per_query.end(),
            [](const QueryMetrics& a, const QueryMetrics& b) { return a.query < b.query; });
  std::sort(out.uncovered.begin(), out.uncovered.end());
  out.pooled.pool();
  return out;
}

inline CrossValidationResult cross_validate(std::span<const TrainingQuery> queries, std::size_t folds, const CAConfig& cfg,
                                            FeatureSet set = FeatureSet::All, std::size_t k = 10) {
  CrossValidationResult out = cross_validate(queries, folds, cfg, feature_mask(set), k);
  out.label = std::string(to_string(set));
  return out;
}

/// The four feature-set configurations of the ablation table.
inline std::vector<CrossValidationResult> ablation(std::span<const TrainingQuery> queries, std::size_t folds,
                                                   const CAConfig& cfg, std::size_t k = 10) {
  std::vector<CrossValidationResult> runs;
  for (const FeatureSet set : {FeatureSet::All, FeatureSet::NoBorder, FeatureSet::NoIntermediate, FeatureSet::OnlyBorder}) {
    runs.push_back(cross_validate(queries, folds, cfg, set, k));
  }
  return runs;
}

}  // namespace gist
