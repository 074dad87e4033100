#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "gist/error.hpp"
#include "gist/graph_view.hpp"
#include "gist/kg.hpp"

namespace gist {

struct RelatednessParams {
  double alpha = 0.25;           // length decay
  std::size_t k_paths = 3;       // paths summed per pair
  std::size_t path_len_cap = 4;  // longest path considered, in edges

  void validate() const {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw Error("alpha must lie in (0, 1]");
    if (k_paths < 1) throw Error("k_paths must be >= 1");
    if (path_len_cap < 1) throw Error("path_len_cap must be >= 1");
  }
};

struct ScoredPath {
  std::vector<NodeId> nodes;
  std::size_t length = 0;  // edges
  double cost = 0.0;
};

namespace detail {

/// Ranking key: shorter first, then cheaper, then lexicographic node ids.
/// Local indices follow NodeId order so comparing them is equivalent.
struct LocalPath {
  std::vector<std::uint32_t> nodes;
  double cost;

  friend bool operator<(const LocalPath& a, const LocalPath& b) {
    if (a.cost != b.cost) return a.cost < b.cost;
    return a.nodes < b.nodes;
  }
};

class BoundedPathSearch {
 public:
  BoundedPathSearch(const GraphView& view, std::uint32_t target, std::size_t cap)
      : view_(view), target_(target), dist_(view.size(), kFar), on_path_(view.size(), false) {
    std::deque<std::uint32_t> frontier{target};
    dist_[target] = 0;
    while (!frontier.empty()) {
      const std::uint32_t u = frontier.front();
      frontier.pop_front();
      if (dist_[u] == cap) continue;
      for (const auto& h : view.hops(u)) {
        if (dist_[h.to] == kFar) {
          dist_[h.to] = dist_[u] + 1;
          frontier.push_back(h.to);
        }
      }
    }
  }

  std::size_t distance(std::uint32_t v) const { return dist_[v]; }

  /// The `keep` best simple paths of exactly `length` edges from `source`.
  std::vector<LocalPath> best_of_length(std::uint32_t source, std::size_t length, std::size_t keep) {
    best_.clear();
    keep_ = keep;
    length_ = length;
    stack_.assign(1, source);
    on_path_[source] = true;
    dfs(source, 0.0);
    on_path_[source] = false;
    std::sort(best_.begin(), best_.end());
    return std::move(best_);
  }

 private:
  static constexpr std::size_t kFar = std::numeric_limits<std::size_t>::max();

  void dfs(std::uint32_t u, double cost) {
    const std::size_t depth = stack_.size() - 1;
    const std::size_t remaining = length_ - depth;
    for (const auto& h : view_.hops(u)) {
      if (on_path_[h.to] || dist_[h.to] == kFar || dist_[h.to] + 1 > remaining) continue;
      const double next_cost = cost + h.cost;
      if (h.to == target_) {
        if (remaining == 1) offer(next_cost, h.to);
        continue;  // the target only ends a path
      }
      if (remaining == 1) continue;
      // Every further edge costs at least 1.
      if (best_.size() == keep_ && next_cost + static_cast<double>(remaining - 1) > worst_cost()) continue;
      stack_.push_back(h.to);
      on_path_[h.to] = true;
      dfs(h.to, next_cost);
      on_path_[h.to] = false;
      stack_.pop_back();
    }
  }

  double worst_cost() const {
    return std::max_element(best_.begin(), best_.end())->cost;
  }

  void offer(double cost, std::uint32_t last) {
    LocalPath p{stack_, cost};
    p.nodes.push_back(last);
    if (best_.size() < keep_) {
      best_.push_back(std::move(p));
      return;
    }
    const auto worst = std::max_element(best_.begin(), best_.end());
    if (p < *worst) *worst = std::move(p);
  }

  const GraphView& view_;
  std::uint32_t target_;
  std::vector<std::size_t> dist_;
  std::vector<bool> on_path_;
  std::vector<std::uint32_t> stack_;
  std::vector<LocalPath> best_;
  std::size_t keep_ = 0;
  std::size_t length_ = 0;
};

}  // namespace detail

/// The k best simple undirected paths between `s` and `t` in `view` with
/// at most `path_len_cap` edges, ordered by (length, cost, node ids).
/// Bounded-depth search, one exact path length at a time.
inline std::vector<ScoredPath> top_k_paths(const GraphView& view, NodeId s, NodeId t, const RelatednessParams& params) {
  params.validate();
  if (s == t) throw Error("top_k_paths needs two distinct nodes");
  const auto si = view.index(s);
  const auto ti = view.index(t);
  std::vector<ScoredPath> out;
  if (!si || !ti) return out;
  detail::BoundedPathSearch search(view, *ti, params.path_len_cap);
  const std::size_t shortest = search.distance(*si);
  for (std::size_t len = std::max<std::size_t>(shortest, 1); len <= params.path_len_cap && out.size() < params.k_paths;
       ++len) {
    for (auto& lp : search.best_of_length(*si, len, params.k_paths - out.size())) {
      ScoredPath sp;
      sp.length = len;
      sp.cost = lp.cost;
      sp.nodes.reserve(lp.nodes.size());
      for (const std::uint32_t v : lp.nodes) sp.nodes.push_back(view.id(v));
      out.push_back(std::move(sp));
    }
  }
  return out;
}

/// Path-based relatedness: sum over the top-k paths of alpha^length / cost.
inline double sigma(const GraphView& view, NodeId s, NodeId t, const RelatednessParams& params) {
  double total = 0.0;
  for (const ScoredPath& p : top_k_paths(view, s, t, params)) {
    total += std::pow(params.alpha, static_cast<double>(p.length)) / p.cost;
  }
  return total;
}

/// Mean relatedness of `x` to the members of `cluster`. A member equal to
/// `x` is left out of the mean; a cluster holding only `x` gives 0.
inline double sigma_bar(const GraphView& view, NodeId x, std::span<const NodeId> cluster, const RelatednessParams& params) {
  if (cluster.empty()) throw Error("sigma_bar of an empty cluster");
  double total = 0.0;
  std::size_t members = 0;
  for (const NodeId y : cluster) {
    if (y == x) continue;
    total += sigma(view, x, y, params);
    ++members;
  }
  return members == 0 ? 0.0 : total / static_cast<double>(members);
}

/// Memoizing front end for repeated pairwise relatedness over one view.
/// Not thread-safe; use one instance per worker.
class PairwiseRelatedness {
 public:
  PairwiseRelatedness(const GraphView& view, RelatednessParams params) : view_(view), params_(params) {
    params_.validate();
  }

  const GraphView& view() const noexcept { return view_; }
  const RelatednessParams& params() const noexcept { return params_; }

  double sigma(NodeId a, NodeId b) {
    if (a == b) throw Error("sigma needs two distinct nodes");
    const std::pair<NodeId, NodeId> key = std::minmax(a, b);
    const auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    // Always evaluate from the smaller id so the cached value does not
    // depend on call order.
    const double v = gist::sigma(view_, key.first, key.second, params_);
    cache_.emplace(key, v);
    return v;
  }

  double sigma_bar(NodeId x, std::span<const NodeId> cluster) {
    if (cluster.empty()) throw Error("sigma_bar of an empty cluster");
    double total = 0.0;
    std::size_t members = 0;
    for (const NodeId y : cluster) {
      if (y == x) continue;
      total += sigma(x, y);
      ++members;
    }
    return members == 0 ? 0.0 : total / static_cast<double>(members);
  }

 private:
  const GraphView& view_;
  RelatednessParams params_;
  std::map<std::pair<NodeId, NodeId>, double> cache_;
};

}  // namespace gist
