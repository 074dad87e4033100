#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "gist/error.hpp"
#include "gist/kg.hpp"
#include "gist/text.hpp"

namespace gist {

/// Graded relevance per (query, node), 0..5. Grade >= 4 is a relevant
/// gist, grade 5 the core gist (at most one per query).
class Judgments {
 public:
  static constexpr int kRelevantGrade = 4;
  static constexpr int kCoreGrade = 5;

  void set(const std::string& query, NodeId node, int grade) {
    if (grade < 0 || grade > 5) throw Error("grade must lie in 0..5");
    auto& q = grades_[query];
    if (grade == kCoreGrade) {
      for (const auto& [n, g] : q) {
        if (g == kCoreGrade && n != node) throw Error("query " + query + " has more than one grade-5 node");
      }
    }
    q[node] = grade;
  }

  int grade(const std::string& query, NodeId node) const {
    const auto q = grades_.find(query);
    if (q == grades_.end()) return 0;
    const auto it = q->second.find(node);
    return it == q->second.end() ? 0 : it->second;
  }

  bool has_query(const std::string& query) const { return grades_.contains(query); }

  std::set<NodeId> relevant(const std::string& query, int threshold = kRelevantGrade) const {
    std::set<NodeId> out;
    const auto q = grades_.find(query);
    if (q == grades_.end()) return out;
    for (const auto& [n, g] : q->second) {
      if (g >= threshold) out.insert(n);
    }
    return out;
  }

  const std::map<std::string, std::map<NodeId, int>>& all() const noexcept { return grades_; }

 private:
  std::map<std::string, std::map<NodeId, int>> grades_;
};

/// qrels: `query_id <TAB> node_id <TAB> grade`.
inline Judgments read_qrels(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  Judgments j;
  std::string raw;
  for (std::size_t lineno = 1; std::getline(in, raw); ++lineno) {
    const std::string_view line = text::chomp(raw);
    if (text::is_comment_or_blank(line)) continue;
    const auto f = text::split(line, '\t');
    NodeId node;
    int grade = 0;
    if (f.size() != 3 || !text::parse_int(f[1], node.value) || !text::parse_int(f[2], grade))
      throw ParseError(path.string(), lineno, "expected query_id, node_id and integer grade");
    try {
      j.set(std::string(f[0]), node, grade);
    } catch (const Error& e) {
      throw ParseError(path.string(), lineno, e.what());
    }
  }
  return j;
}

inline void write_qrels(const Judgments& j, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& [q, grades] : j.all()) {
    for (const auto& [n, g] : grades) out << q << '\t' << n.value << '\t' << g << '\n';
  }
}

/// Mean of precision@r over the ranks r of relevant nodes; relevant nodes
/// absent from `ranked` count as misses. nullopt when nothing is relevant.
inline std::optional<double> average_precision(std::span<const NodeId> ranked, const std::set<NodeId>& relevant) {
  if (relevant.empty()) return std::nullopt;
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    if (relevant.contains(ranked[i])) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(i + 1);
    }
  }
  return sum / static_cast<double>(relevant.size());
}

/// NDCG@k with binary gains and 1/log2(i+1) discount; 0 with no relevant node.
inline double ndcg_at_k(std::span<const NodeId> ranked, const std::set<NodeId>& relevant, std::size_t k = 10) {
  if (k < 1) throw Error("k must be >= 1");
  if (relevant.empty()) return 0.0;
  double dcg = 0.0;
  for (std::size_t i = 0; i < std::min(k, ranked.size()); ++i) {
    if (relevant.contains(ranked[i])) dcg += 1.0 / std::log2(static_cast<double>(i + 2));
  }
  double ideal = 0.0;
  for (std::size_t i = 0; i < std::min(k, relevant.size()); ++i) ideal += 1.0 / std::log2(static_cast<double>(i + 2));
  return dcg / ideal;
}

/// |relevant ∩ top-k| / k; the denominator stays k for short lists.
inline double precision_at_k(std::span<const NodeId> ranked, const std::set<NodeId>& relevant, std::size_t k = 10) {
  if (k < 1) throw Error("k must be >= 1");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < std::min(k, ranked.size()); ++i) {
    if (relevant.contains(ranked[i])) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(k);
}

struct QueryMetrics {
  std::string query;
  double ap = 0.0;
  double ndcg = 0.0;
  double precision = 0.0;
};

struct MetricSummary {
  std::vector<QueryMetrics> per_query;  // evaluated queries only
  std::vector<std::string> excluded;    // no relevant node judged
  double map = 0.0;
  double ndcg = 0.0;
  double precision = 0.0;

  void pool() {
    map = ndcg = precision = 0.0;
    if (per_query.empty()) return;
    for (const auto& m : per_query) {
      map += m.ap;
      ndcg += m.ndcg;
      precision += m.precision;
    }
    const double n = static_cast<double>(per_query.size());
    map /= n;
    ndcg /= n;
    precision /= n;
  }
};

/// Adds one query's metrics to `summary`, or records it as excluded.
inline void evaluate_query(MetricSummary& summary, const std::string& query, std::span<const NodeId> ranked,
                           const std::set<NodeId>& relevant, std::size_t k = 10) {
  const auto ap = average_precision(ranked, relevant);
  if (!ap) {
    summary.excluded.push_back(query);
    return;
  }
  summary.per_query.push_back({query, *ap, ndcg_at_k(ranked, relevant, k), precision_at_k(ranked, relevant, k)});
}

}  // namespace gist
