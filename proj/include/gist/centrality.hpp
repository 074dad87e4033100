#pragma once

#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <vector>

#include "gist/error.hpp"
#include "gist/graph_view.hpp"

namespace gist {

struct PageRankParams {
  double damping = 0.85;
  double eps = 1e-8;  // L1 change between iterates
  std::size_t max_iter = 200;
};

struct PageRankResult {
  std::map<NodeId, double> score;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Power iteration on the undirected view (each edge walked both ways)
/// with uniform teleport; isolated nodes spread their mass uniformly.
inline PageRankResult pagerank(const GraphView& view, const PageRankParams& p = {}) {
  const std::size_t n = view.size();
  if (n == 0) throw Error("pagerank on an empty graph");
  const double inv_n = 1.0 / static_cast<double>(n);
  std::vector<double> rank(n, inv_n);
  std::vector<double> next(n);
  PageRankResult result;
  for (std::size_t iter = 1; iter <= p.max_iter; ++iter) {
    double dangling = 0.0;
    for (std::uint32_t u = 0; u < n; ++u) {
      if (view.hops(u).empty()) dangling += rank[u];
    }
    const double base = (1.0 - p.damping) * inv_n + p.damping * dangling * inv_n;
    std::fill(next.begin(), next.end(), base);
    for (std::uint32_t u = 0; u < n; ++u) {
      const auto hops = view.hops(u);
      if (hops.empty()) continue;
      const double share = p.damping * rank[u] / static_cast<double>(hops.size());
      for (const auto& h : hops) next[h.to] += share;
    }
    double sum = 0.0;
    for (const double v : next) sum += v;
    double delta = 0.0;
    for (std::uint32_t u = 0; u < n; ++u) {
      next[u] /= sum;
      delta += std::abs(next[u] - rank[u]);
    }
    rank.swap(next);
    result.iterations = iter;
    if (delta < p.eps) {
      result.converged = true;
      break;
    }
  }
  for (std::uint32_t u = 0; u < n; ++u) result.score.emplace(view.id(u), rank[u]);
  return result;
}

/// Exact unweighted betweenness on the undirected view (Brandes
/// accumulation). Each unordered pair counts once; endpoints excluded.
inline std::map<NodeId, double> betweenness(const GraphView& view) {
  const std::size_t n = view.size();
  if (n == 0) throw Error("betweenness on an empty graph");
  std::vector<double> cb(n, 0.0);
  std::vector<std::vector<std::uint32_t>> preds(n);
  std::vector<double> sigma(n);
  std::vector<std::int64_t> dist(n);
  std::vector<double> delta(n);
  std::vector<std::uint32_t> order;
  for (std::uint32_t s = 0; s < n; ++s) {
    for (auto& p : preds) p.clear();
    std::fill(sigma.begin(), sigma.end(), 0.0);
    std::fill(dist.begin(), dist.end(), -1);
    std::fill(delta.begin(), delta.end(), 0.0);
    order.clear();
    sigma[s] = 1.0;
    dist[s] = 0;
    std::deque<std::uint32_t> queue{s};
    while (!queue.empty()) {
      const std::uint32_t v = queue.front();
      queue.pop_front();
      order.push_back(v);
      for (const auto& h : view.hops(v)) {
        const std::uint32_t w = h.to;
        if (dist[w] < 0) {
          dist[w] = dist[v] + 1;
          queue.push_back(w);
        }
        if (dist[w] == dist[v] + 1) {
          sigma[w] += sigma[v];
          preds[w].push_back(v);
        }
      }
    }
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const std::uint32_t w = *it;
      for (const std::uint32_t v : preds[w]) delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
      if (w != s) cb[w] += delta[w];
    }
  }
  std::map<NodeId, double> out;
  for (std::uint32_t v = 0; v < n; ++v) out.emplace(view.id(v), cb[v] / 2.0);
  return out;
}

}  // namespace gist
