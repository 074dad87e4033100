#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "gist/error.hpp"
#include "gist/features.hpp"
#include "gist/metrics.hpp"
#include "gist/ranker.hpp"
#include "gist/text.hpp"

namespace gist {

// Run file: `query_id <TAB> node_id <TAB> rank <TAB> score <TAB> run_tag`,
// ranks starting at 1.

struct RunEntry {
  NodeId node;
  std::size_t rank = 0;
  double score = 0.0;
};

struct RunFile {
  std::map<std::string, std::vector<RunEntry>> queries;  // entries sorted by rank
  std::string tag;
};

inline void write_run_block(std::ostream& out, const std::string& query, std::span<const RankedNode> ranked,
                            std::string_view tag) {
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    out << query << '\t' << ranked[i].node.value << '\t' << (i + 1) << '\t' << text::format_real(ranked[i].score) << '\t'
        << tag << '\n';
  }
}

inline void write_run(const std::map<std::string, std::vector<RankedNode>>& run, std::string_view tag,
                      const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& [q, ranked] : run) write_run_block(out, q, ranked, tag);
}

inline RunFile read_run(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  RunFile run;
  std::map<std::string, std::set<NodeId>> seen;
  std::string raw;
  for (std::size_t lineno = 1; std::getline(in, raw); ++lineno) {
    const std::string_view line = text::chomp(raw);
    if (text::is_comment_or_blank(line)) continue;
    const auto f = text::split(line, '\t');
    RunEntry e;
    if (f.size() != 5 || f[0].empty() || !text::parse_int(f[1], e.node.value) || !text::parse_int(f[2], e.rank) ||
        e.rank < 1 || !text::parse_double(f[3], e.score))
      throw ParseError(path.string(), lineno, "expected query_id, node_id, rank >= 1, score and run_tag");
    const std::string q(f[0]);
    if (!seen[q].insert(e.node).second) throw ParseError(path.string(), lineno, "node listed twice for query " + q);
    if (run.tag.empty()) run.tag = std::string(f[4]);
    run.queries[q].push_back(e);
  }
  for (auto& [q, entries] : run.queries) {
    std::stable_sort(entries.begin(), entries.end(), [](const RunEntry& a, const RunEntry& b) { return a.rank < b.rank; });
  }
  return run;
}

inline std::vector<NodeId> ranked_nodes(std::span<const RunEntry> entries) {
  std::vector<NodeId> out;
  out.reserve(entries.size());
  for (const RunEntry& e : entries) out.push_back(e.node);
  return out;
}

/// Scores a run against judgments. Every query in the run must be judged;
/// judged queries missing from the run are not scored.
inline MetricSummary evaluate_run(const RunFile& run, const Judgments& qrels, int threshold, std::size_t k = 10) {
  MetricSummary s;
  for (const auto& [q, entries] : run.queries) {
    if (!qrels.has_query(q)) throw LookupError("run references unknown query " + q);
    evaluate_query(s, q, ranked_nodes(entries), qrels.relevant(q, threshold), k);
  }
  s.pool();
  return s;
}

// Report: one TSV row per evaluated query and a pooled `all` row.

inline void write_report(const MetricSummary& s, std::size_t k, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  const std::string ks = std::to_string(k);
  out << "# query_id\tap\tndcg@" << ks << "\tp@" << ks << '\n';
  for (const QueryMetrics& m : s.per_query) {
    out << m.query << '\t' << text::format_real(m.ap) << '\t' << text::format_real(m.ndcg) << '\t'
        << text::format_real(m.precision) << '\n';
  }
  out << "all\t" << text::format_real(s.map) << '\t' << text::format_real(s.ndcg) << '\t' << text::format_real(s.precision)
      << '\n';
}

inline void write_summary(std::ostream& out, const MetricSummary& s, std::size_t k) {
  out << "evaluated queries: " << s.per_query.size() << '\n';
  out << "excluded queries: " << s.excluded.size();
  for (std::size_t i = 0; i < s.excluded.size(); ++i) out << (i ? ", " : " (") << s.excluded[i];
  out << (s.excluded.empty() ? "" : ")") << '\n';
  out << "MAP: " << text::format_real(s.map) << '\n';
  out << "NDCG@" << k << ": " << text::format_real(s.ndcg) << '\n';
  out << "P@" << k << ": " << text::format_real(s.precision) << '\n';
}

// Features file: header row, then one row per candidate.

inline std::string layer_of(const FeatureRow& r) {
  if (r.x[kIsSeed] == 1.0) return "S";
  if (r.x[kIsIntermediate] == 1.0) return "I";
  return "B";
}

inline void write_features_header(std::ostream& out) {
  out << "query_id\tnode_id\tlayer";
  for (const auto name : kFeatureNames) out << '\t' << name;
  out << "\tseeds_in_cluster\tmembers_in_cluster\n";
}

inline void write_feature_rows(std::ostream& out, const std::string& query, std::span<const FeatureRow> rows) {
  for (const FeatureRow& r : rows) {
    out << query << '\t' << r.node.value << '\t' << layer_of(r);
    for (const double v : r.x) out << '\t' << text::format_real(v);
    out << '\t' << text::format_real(r.seeds_in_cluster) << '\t' << text::format_real(r.members_in_cluster) << '\n';
  }
}

inline std::map<std::string, std::vector<FeatureRow>> read_features(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::map<std::string, std::vector<FeatureRow>> out;
  std::string raw;
  bool header = false;
  constexpr std::size_t kCols = 3 + kFeatureCount + 2;
  for (std::size_t lineno = 1; std::getline(in, raw); ++lineno) {
    const std::string_view line = text::chomp(raw);
    if (line.empty()) continue;
    const auto f = text::split(line, '\t');
    if (!header) {
      if (f.size() != kCols || f[0] != "query_id") throw ParseError(path.string(), lineno, "missing features header");
      for (std::size_t i = 0; i < kFeatureCount; ++i) {
        if (f[3 + i] != kFeatureNames[i])
          throw ParseError(path.string(), lineno, "feature name mismatch: column '" + std::string(f[3 + i]) + "'");
      }
      header = true;
      continue;
    }
    FeatureRow r;
    bool ok = f.size() == kCols && text::parse_int(f[1], r.node.value);
    for (std::size_t i = 0; ok && i < kFeatureCount; ++i) ok = text::parse_double(f[3 + i], r.x[i]);
    ok = ok && text::parse_double(f[3 + kFeatureCount], r.seeds_in_cluster) &&
         text::parse_double(f[4 + kFeatureCount], r.members_in_cluster);
    if (!ok) throw ParseError(path.string(), lineno, "malformed feature row");
    out[std::string(f[0])].push_back(r);
  }
  if (!header) throw ParseError(path.string(), 1, "missing features header");
  return out;
}

}  // namespace gist
