#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gist/error.hpp"
#include "gist/features.hpp"
#include "gist/metrics.hpp"
#include "gist/rng.hpp"
#include "gist/text.hpp"

namespace gist {

/// Feature groups used by the ablation runs.
enum class FeatureSet { All, NoBorder, NoIntermediate, OnlyBorder };

using FeatureMask = std::array<bool, kFeatureCount>;

inline FeatureMask feature_mask(FeatureSet set) {
  FeatureMask m;
  m.fill(true);
  const auto border = [](std::size_t f) { return f >= kIsBorder && f <= kSeedIntermediateFractionOfCluster; };
  const auto intermediate = [](std::size_t f) { return f >= kIsIntermediate && f <= kBetweennessIntermediate; };
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    switch (set) {
      case FeatureSet::All: break;
      case FeatureSet::NoBorder: m[f] = !border(f); break;
      case FeatureSet::NoIntermediate: m[f] = !intermediate(f); break;
      case FeatureSet::OnlyBorder: m[f] = border(f); break;
    }
  }
  return m;
}

inline std::string_view to_string(FeatureSet set) {
  switch (set) {
    case FeatureSet::All: return "all";
    case FeatureSet::NoBorder: return "no-border";
    case FeatureSet::NoIntermediate: return "no-intermediate";
    case FeatureSet::OnlyBorder: return "only-border";
  }
  return "all";
}

inline FeatureSet parse_feature_set(std::string_view s) {
  for (const FeatureSet f : {FeatureSet::All, FeatureSet::NoBorder, FeatureSet::NoIntermediate, FeatureSet::OnlyBorder}) {
    if (to_string(f) == s) return f;
  }
  throw Error("unknown feature set '" + std::string(s) + "'");
}

/// Linear scoring function with optional per-feature min-max scaling fixed
/// on the training data. Test values outside the training range are not
/// clipped.
struct LinearModel {
  FeatureVector weights{};
  FeatureVector min{};
  FeatureVector max{};
  bool normalized = false;

  FeatureVector normalize(const FeatureVector& x) const {
    if (!normalized) return x;
    FeatureVector out{};
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
      const double range = max[f] - min[f];
      out[f] = range > 0.0 ? (x[f] - min[f]) / range : 0.0;
    }
    return out;
  }

  double score(const FeatureVector& x) const {
    const FeatureVector z = normalize(x);
    double s = 0.0;
    for (std::size_t f = 0; f < kFeatureCount; ++f) s += weights[f] * z[f];
    return s;
  }
};

struct RankedNode {
  NodeId node;
  double score;
};

/// Descending score, ascending NodeId on ties.
inline void sort_ranking(std::vector<RankedNode>& ranked) {
  std::sort(ranked.begin(), ranked.end(), [](const RankedNode& a, const RankedNode& b) {
    return a.score != b.score ? a.score > b.score : a.node < b.node;
  });
}

inline std::vector<RankedNode> rank(const LinearModel& model, std::span<const FeatureRow> rows) {
  std::vector<RankedNode> ranked;
  ranked.reserve(rows.size());
  for (const FeatureRow& r : rows) ranked.push_back({r.node, model.score(r.x)});
  sort_ranking(ranked);
  return ranked;
}

inline std::vector<NodeId> node_order(std::span<const RankedNode> ranked) {
  std::vector<NodeId> ids;
  ids.reserve(ranked.size());
  for (const auto& r : ranked) ids.push_back(r.node);
  return ids;
}

/// Candidates of one query with the judged relevant nodes.
struct TrainingQuery {
  std::string id;
  std::vector<FeatureRow> rows;
  std::set<NodeId> relevant;

  bool has_relevant_candidate() const {
    return std::any_of(rows.begin(), rows.end(), [&](const FeatureRow& r) { return relevant.contains(r.node); });
  }
};

struct CAConfig {
  std::size_t restarts = 5;
  std::size_t max_sweeps = 25;
  double step_base = 0.05;
  double step_scale = 2.0;
  std::size_t steps_per_direction = 10;
  double tolerance = 1e-4;
  std::uint64_t rng_seed = 0;
  bool normalize = true;

  void validate() const {
    if (restarts < 1 || max_sweeps < 1 || steps_per_direction < 1) throw Error("coordinate ascent counts must be positive");
    if (!(step_base > 0.0) || !(step_scale > 0.0) || !(tolerance > 0.0)) throw Error("coordinate ascent steps must be positive");
  }
};

struct TrainResult {
  LinearModel model;
  double train_map = 0.0;
  std::vector<double> map_trace;  // training MAP after each sweep of the winning restart
};

namespace detail {

/// Training data with features already normalized, plus per-query scores
/// under the current weights.
class CoordinateAscentState {
 public:
  CoordinateAscentState(std::vector<const TrainingQuery*> queries, const LinearModel& norm) : queries_(std::move(queries)) {
    for (const TrainingQuery* q : queries_) {
      Block b;
      for (const FeatureRow& r : q->rows) {
        b.x.push_back(norm.normalize(r.x));
        b.nodes.push_back(r.node);
        b.relevant.push_back(q->relevant.contains(r.node));
      }
      b.total_relevant = q->relevant.size();
      b.scores.assign(b.x.size(), 0.0);
      blocks_.push_back(std::move(b));
    }
  }

  void set_weights(const FeatureVector& w) {
    weights_ = w;
    for (Block& b : blocks_) {
      for (std::size_t i = 0; i < b.x.size(); ++i) {
        double s = 0.0;
        for (std::size_t f = 0; f < kFeatureCount; ++f) s += w[f] * b.x[i][f];
        b.scores[i] = s;
      }
    }
  }

  const FeatureVector& weights() const { return weights_; }

  /// Sets weight `f` to `value`. Scores are recomputed from scratch so
  /// that they are a pure function of the weight vector.
  void move_weight(std::size_t f, double value) {
    if (weights_[f] == value) return;
    FeatureVector w = weights_;
    w[f] = value;
    set_weights(w);
  }

  double mean_average_precision() {
    double total = 0.0;
    for (Block& b : blocks_) total += average_precision(b);
    return total / static_cast<double>(blocks_.size());
  }

 private:
  struct Block {
    std::vector<FeatureVector> x;
    std::vector<NodeId> nodes;
    std::vector<bool> relevant;
    std::vector<double> scores;
    std::vector<std::uint32_t> order;
    std::size_t total_relevant = 0;
  };

  static double average_precision(Block& b) {
    b.order.resize(b.x.size());
    for (std::uint32_t i = 0; i < b.order.size(); ++i) b.order[i] = i;
    std::sort(b.order.begin(), b.order.end(), [&](std::uint32_t i, std::uint32_t j) {
      return b.scores[i] != b.scores[j] ? b.scores[i] > b.scores[j] : b.nodes[i] < b.nodes[j];
    });
    double sum = 0.0;
    std::size_t hits = 0;
    for (std::size_t r = 0; r < b.order.size(); ++r) {
      if (b.relevant[b.order[r]]) {
        ++hits;
        sum += static_cast<double>(hits) / static_cast<double>(r + 1);
      }
    }
    return sum / static_cast<double>(b.total_relevant);
  }

  std::vector<const TrainingQuery*> queries_;
  std::vector<Block> blocks_;
  FeatureVector weights_{};
};

}  // namespace detail

/// Min-max statistics over every candidate of the training queries.
inline LinearModel fit_normalization(std::span<const TrainingQuery> train, bool enabled) {
  LinearModel m;
  m.normalized = enabled;
  if (!enabled) return m;
  bool first = true;
  for (const TrainingQuery& q : train) {
    for (const FeatureRow& r : q.rows) {
      for (std::size_t f = 0; f < kFeatureCount; ++f) {
        m.min[f] = first ? r.x[f] : std::min(m.min[f], r.x[f]);
        m.max[f] = first ? r.x[f] : std::max(m.max[f], r.x[f]);
      }
      first = false;
    }
  }
  return m;
}

/// Coordinate ascent on training MAP over a linear model. Each restart
/// starts from uniform weights over the active features (later restarts
/// jitter them by a seeded factor in [0.5, 1.5)), sweeps the features in
/// index order probing geometrically growing steps in both directions, and
/// keeps a step only if it strictly raises MAP. A restart ends when a sweep
/// gains less than the tolerance.
inline TrainResult train_coordinate_ascent(std::span<const TrainingQuery> train, const CAConfig& cfg,
                                           const FeatureMask& active = feature_mask(FeatureSet::All)) {
  cfg.validate();
  std::vector<const TrainingQuery*> usable;
  for (const TrainingQuery& q : train) {
    if (q.has_relevant_candidate()) usable.push_back(&q);
  }
  if (usable.empty()) throw Error("degenerate training set: no query has a relevant candidate");
  const std::size_t n_active = static_cast<std::size_t>(std::count(active.begin(), active.end(), true));
  if (n_active == 0) throw Error("no active features");

  const LinearModel norm = fit_normalization(train, cfg.normalize);
  detail::CoordinateAscentState state(usable, norm);
  std::mt19937_64 rng(derive_seed(cfg.rng_seed, "coordinate-ascent"));

  TrainResult best;
  bool have_best = false;
  for (std::size_t restart = 0; restart < cfg.restarts; ++restart) {
    FeatureVector w{};
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
      if (!active[f]) continue;
      const double jitter = restart == 0 ? 1.0 : 0.5 + unit_real(rng);
      w[f] = jitter / static_cast<double>(n_active);
    }
    state.set_weights(w);
    double current = state.mean_average_precision();
    std::vector<double> trace{current};
    for (std::size_t sweep = 0; sweep < cfg.max_sweeps; ++sweep) {
      const double before = current;
      for (std::size_t f = 0; f < kFeatureCount; ++f) {
        if (!active[f]) continue;
        const double origin = state.weights()[f];
        double best_value = origin;
        for (const double dir : {1.0, -1.0}) {
          double step = cfg.step_base;
          for (std::size_t j = 0; j < cfg.steps_per_direction; ++j, step *= cfg.step_scale) {
            state.move_weight(f, origin + dir * step);
            const double map = state.mean_average_precision();
            if (map > current) {
              current = map;
              best_value = origin + dir * step;
            }
          }
        }
        state.move_weight(f, best_value);
      }
      trace.push_back(current);
      if (current - before < cfg.tolerance) break;
    }
    if (!have_best || current > best.train_map) {
      have_best = true;
      best.train_map = current;
      best.map_trace = std::move(trace);
      best.model = norm;
      best.model.weights = state.weights();
    }
  }
  return best;
}

/// Model file: `name <TAB> weight` per feature, then `name <TAB> min <TAB> max`
/// per feature when normalization is on.
inline void save_model(const LinearModel& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "# feature\tweight\n";
  for (std::size_t f = 0; f < kFeatureCount; ++f) out << kFeatureNames[f] << '\t' << text::format_real(m.weights[f]) << '\n';
  if (m.normalized) {
    out << "# feature\tmin\tmax\n";
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
      out << kFeatureNames[f] << '\t' << text::format_real(m.min[f]) << '\t' << text::format_real(m.max[f]) << '\n';
    }
  }
}

inline LinearModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  LinearModel m;
  std::array<bool, kFeatureCount> has_weight{};
  std::array<bool, kFeatureCount> has_range{};
  std::string raw;
  for (std::size_t lineno = 1; std::getline(in, raw); ++lineno) {
    const std::string_view line = text::chomp(raw);
    if (text::is_comment_or_blank(line)) continue;
    const auto f = text::split(line, '\t');
    const auto idx = feature_index(f[0]);
    if (!idx) throw ParseError(path.string(), lineno, "feature name mismatch: unknown feature '" + std::string(f[0]) + "'");
    if (f.size() == 2) {
      if (!text::parse_double(f[1], m.weights[*idx])) throw ParseError(path.string(), lineno, "bad weight");
      has_weight[*idx] = true;
    } else if (f.size() == 3) {
      if (!text::parse_double(f[1], m.min[*idx]) || !text::parse_double(f[2], m.max[*idx]))
        throw ParseError(path.string(), lineno, "bad normalization range");
      has_range[*idx] = true;
      m.normalized = true;
    } else {
      throw ParseError(path.string(), lineno, "expected 2 or 3 fields");
    }
  }
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    if (!has_weight[f]) throw Error("feature name mismatch: model has no weight for " + std::string(kFeatureNames[f]));
    if (m.normalized && !has_range[f])
      throw Error("feature name mismatch: model has no range for " + std::string(kFeatureNames[f]));
  }
  return m;
}

}  // namespace gist
