#pragma once

#include <algorithm>
#include <deque>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "gist/kg.hpp"
#include "gist/text.hpp"

namespace gist {

/// One image-caption pair: object labels from the image and entity
/// mentions extracted from the caption.
struct GistQuery {
  std::string id;
  std::vector<std::string> image_labels;
  std::vector<std::string> caption_mentions;
};

/// Link outcome for one input string. An empty `nodes` is the undefined
/// link; more than one node only happens through a disambiguation page.
struct StringLink {
  std::string text;
  std::vector<NodeId> nodes;
  bool via_disambiguation = false;

  bool linked() const noexcept { return !nodes.empty(); }
};

struct LinkResult {
  std::vector<StringLink> labels;
  std::vector<StringLink> mentions;
  std::vector<NodeId> seeds;  // ascending, deduplicated
};

struct LinkOptions {
  /// Fall back to category titles when no article matches.
  bool match_categories = false;
};

/// Candidate targets of disambiguation page `d` that lie within two
/// undirected hops of any anchor. Targets are `d`'s out-neighbours.
inline std::vector<NodeId> resolve_disambiguation(const KnowledgeGraph& g, NodeId d,
                                                  std::span<const NodeId> anchors) {
  if (anchors.empty()) return {};
  constexpr int kMaxHops = 2;
  std::unordered_map<NodeId, int> dist;
  std::deque<NodeId> frontier;
  for (const NodeId a : anchors) {
    if (dist.emplace(a, 0).second) frontier.push_back(a);
  }
  while (!frontier.empty()) {
    const NodeId u = frontier.front();
    frontier.pop_front();
    const int du = dist.at(u);
    if (du == kMaxHops) continue;
    for (const NodeId w : g.neighbors(u)) {
      if (dist.emplace(w, du + 1).second) frontier.push_back(w);
    }
  }
  std::vector<NodeId> targets;
  for (const EdgeIndex e : g.out_edges(d)) {
    const NodeId t = g.edge(e).dst;
    if (t == d || g.node(t).is_disambiguation) continue;
    if (dist.contains(t)) targets.push_back(t);
  }
  std::sort(targets.begin(), targets.end());
  targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
  return targets;
}

namespace detail {

struct TitleMatch {
  std::optional<NodeId> node;
  std::vector<NodeId> disambiguation_pages;
};

inline TitleMatch match_title(const KnowledgeGraph& g, const std::string& raw, const LinkOptions& opts) {
  TitleMatch m;
  const std::string key = text::normalize_title(raw);
  if (key.empty()) return m;
  std::vector<NodeId> articles;
  std::vector<NodeId> categories;
  for (const NodeId id : g.lookup_title(key)) {
    const NodeRecord& rec = g.node(id);
    if (rec.is_disambiguation) {
      m.disambiguation_pages.push_back(id);
    } else if (rec.kind == NodeKind::Article) {
      articles.push_back(id);
    } else {
      categories.push_back(id);
    }
  }
  for (const NodeId id : g.lookup_title(key + " (disambiguation)")) {
    if (g.node(id).is_disambiguation) m.disambiguation_pages.push_back(id);
  }
  if (articles.size() == 1) {
    m.node = articles.front();
  } else if (articles.empty() && opts.match_categories && categories.size() == 1) {
    m.node = categories.front();
  }
  return m;
}

}  // namespace detail

/// Maps every label and mention to a node by normalized title equality.
/// Exact matches are resolved first; disambiguation pages are then
/// resolved against the exact-match seeds, so input order never matters.
inline LinkResult link(const KnowledgeGraph& g, const GistQuery& q, const LinkOptions& opts = {}) {
  LinkResult result;
  std::vector<std::vector<NodeId>> pending_labels;
  std::vector<std::vector<NodeId>> pending_mentions;
  std::set<NodeId> exact;

  const auto first_pass = [&](const std::vector<std::string>& inputs, std::vector<StringLink>& out,
                              std::vector<std::vector<NodeId>>& pending) {
    for (const std::string& s : inputs) {
      detail::TitleMatch m = detail::match_title(g, s, opts);
      StringLink sl{s, {}, false};
      if (m.node) {
        sl.nodes.push_back(*m.node);
        exact.insert(*m.node);
        m.disambiguation_pages.clear();
      }
      out.push_back(std::move(sl));
      pending.push_back(std::move(m.disambiguation_pages));
    }
  };
  first_pass(q.image_labels, result.labels, pending_labels);
  first_pass(q.caption_mentions, result.mentions, pending_mentions);

  const std::vector<NodeId> anchors(exact.begin(), exact.end());
  std::set<NodeId> seeds = exact;
  const auto second_pass = [&](std::vector<StringLink>& links, const std::vector<std::vector<NodeId>>& pending) {
    for (std::size_t i = 0; i < links.size(); ++i) {
      std::set<NodeId> resolved;
      for (const NodeId d : pending[i]) {
        for (const NodeId t : resolve_disambiguation(g, d, anchors)) resolved.insert(t);
      }
      if (resolved.empty()) continue;
      links[i].nodes.assign(resolved.begin(), resolved.end());
      links[i].via_disambiguation = true;
      seeds.insert(resolved.begin(), resolved.end());
    }
  };
  second_pass(result.labels, pending_labels);
  second_pass(result.mentions, pending_mentions);

  result.seeds.assign(seeds.begin(), seeds.end());
  return result;
}

struct QueryFile {
  std::vector<GistQuery> queries;
  std::vector<std::string> problems;  // skipped lines, with reasons
};

namespace detail {

inline std::vector<std::string> parse_list(std::string_view field) {
  std::vector<std::string> items;
  if (field == "-" || field.empty()) return items;
  for (const std::string_view part : text::split(field, '|')) {
    std::string item = text::unescape_field(part);
    if (!item.empty()) items.push_back(std::move(item));
  }
  return items;
}

}  // namespace detail

/// Reads `query_id <TAB> label|label <TAB> mention|mention`; `-` is an
/// empty list. Malformed lines are reported in `problems` and skipped.
inline QueryFile read_queries(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  QueryFile qf;
  std::unordered_set<std::string> ids;
  std::string raw;
  for (std::size_t lineno = 1; std::getline(in, raw); ++lineno) {
    const std::string_view line = text::chomp(raw);
    if (text::is_comment_or_blank(line)) continue;
    const auto f = text::split(line, '\t');
    const std::string where = path.string() + ":" + std::to_string(lineno) + ": ";
    if (f.size() != 3 || f[0].empty()) {
      qf.problems.push_back(where + "expected query_id, labels and mentions");
      continue;
    }
    GistQuery q{std::string(f[0]), detail::parse_list(f[1]), detail::parse_list(f[2])};
    if (q.image_labels.empty() && q.caption_mentions.empty()) {
      qf.problems.push_back(where + "query " + q.id + " has neither labels nor mentions");
      continue;
    }
    if (!ids.insert(q.id).second) {
      qf.problems.push_back(where + "duplicate query id " + q.id);
      continue;
    }
    qf.queries.push_back(std::move(q));
  }
  return qf;
}

inline void write_queries(const std::vector<GistQuery>& queries, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  const auto join = [](const std::vector<std::string>& items) {
    if (items.empty()) return std::string("-");
    std::string s;
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (i) s += '|';
      s += text::escape_field(items[i]);
    }
    return s;
  };
  out << "# query_id\timage_labels\tcaption_mentions\n";
  for (const GistQuery& q : queries) out << q.id << '\t' << join(q.image_labels) << '\t' << join(q.caption_mentions) << '\n';
}

}  // namespace gist
