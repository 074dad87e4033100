#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "gist/error.hpp"
#include "gist/text.hpp"

namespace gist {

struct NodeId {
  std::uint32_t value = 0;
  friend constexpr auto operator<=>(NodeId, NodeId) = default;
};

inline std::string to_string(NodeId id) { return std::to_string(id.value); }

}  // namespace gist

template <>
struct std::hash<gist::NodeId> {
  std::size_t operator()(gist::NodeId id) const noexcept { return std::hash<std::uint32_t>{}(id.value); }
};

namespace gist {

enum class NodeKind { Article, Category };

struct NodeRecord {
  NodeId id;
  NodeKind kind = NodeKind::Article;
  std::string title;
  bool is_disambiguation = false;
  std::string text;
};

using EdgeTypeId = std::uint32_t;
using EdgeIndex = std::uint32_t;

struct Edge {
  NodeId src;
  EdgeTypeId etype = 0;
  NodeId dst;
};

class GraphBuilder;

/// Typed directed multigraph of articles and categories. Immutable once
/// built; every accessor is safe for concurrent readers.
class KnowledgeGraph {
 public:
  std::size_t size() const noexcept { return nodes_.size(); }
  std::size_t edge_count() const noexcept { return edges_.size(); }

  std::span<const NodeRecord> nodes() const noexcept { return nodes_; }
  std::span<const Edge> edges() const noexcept { return edges_; }
  const Edge& edge(EdgeIndex e) const { return edges_.at(e); }

  bool contains(NodeId id) const { return slot_.contains(id); }

  const NodeRecord& node(NodeId id) const { return nodes_[slot_of(id)]; }

  std::span<const EdgeIndex> out_edges(NodeId id) const { return out_[slot_of(id)]; }
  std::span<const EdgeIndex> in_edges(NodeId id) const { return in_[slot_of(id)]; }

  /// Distinct undirected neighbours in ascending id order, self excluded.
  std::span<const NodeId> neighbors(NodeId id) const { return neighbors_[slot_of(id)]; }

  std::size_t edge_type_count() const noexcept { return type_names_.size(); }
  const std::string& edge_type_name(EdgeTypeId t) const { return type_names_.at(t); }

  std::optional<EdgeTypeId> find_edge_type(std::string_view name) const {
    const auto it = std::find(type_names_.begin(), type_names_.end(), name);
    if (it == type_names_.end()) return std::nullopt;
    return static_cast<EdgeTypeId>(it - type_names_.begin());
  }

  std::size_t typed_out_count(NodeId id, EdgeTypeId t) const {
    const auto it = typed_out_.find(key(slot_of(id), t));
    return it == typed_out_.end() ? 0 : it->second;
  }

  std::size_t typed_in_count(NodeId id, EdgeTypeId t) const {
    const auto it = typed_in_.find(key(slot_of(id), t));
    return it == typed_in_.end() ? 0 : it->second;
  }

  std::optional<EdgeIndex> find_edge(NodeId src, EdgeTypeId t, NodeId dst) const {
    if (!contains(src) || !contains(dst)) return std::nullopt;
    for (const EdgeIndex e : out_edges(src)) {
      if (edges_[e].etype == t && edges_[e].dst == dst) return e;
    }
    return std::nullopt;
  }

  /// Articles and categories whose normalized title equals `key`.
  std::span<const NodeId> lookup_title(std::string_view normalized_key) const {
    const auto it = title_index_.find(std::string(normalized_key));
    if (it == title_index_.end()) return {};
    return it->second;
  }

 private:
  friend class GraphBuilder;

  static std::uint64_t key(std::size_t slot, EdgeTypeId t) {
    return (static_cast<std::uint64_t>(slot) << 32) | t;
  }

  std::size_t slot_of(NodeId id) const {
    const auto it = slot_.find(id);
    if (it == slot_.end()) throw LookupError("unknown node id " + to_string(id));
    return it->second;
  }

  std::vector<NodeRecord> nodes_;
  std::unordered_map<NodeId, std::size_t> slot_;
  std::vector<Edge> edges_;
  std::vector<std::vector<EdgeIndex>> out_;
  std::vector<std::vector<EdgeIndex>> in_;
  std::vector<std::vector<NodeId>> neighbors_;
  std::vector<std::string> type_names_;
  std::unordered_map<std::uint64_t, std::size_t> typed_out_;
  std::unordered_map<std::uint64_t, std::size_t> typed_in_;
  std::unordered_map<std::string, std::vector<NodeId>> title_index_;
};

/// Accumulates nodes and edges, validates them, and produces a graph.
/// Node ids keep the values given by the caller.
class GraphBuilder {
 public:
  GraphBuilder& add_node(NodeRecord record) {
    if (record.title.empty()) throw Error("node " + to_string(record.id) + " has an empty title");
    if (record.is_disambiguation && record.kind != NodeKind::Article)
      throw Error("node " + to_string(record.id) + ": only articles can be disambiguation pages");
    if (!g_.slot_.emplace(record.id, g_.nodes_.size()).second)
      throw Error("duplicate node id " + to_string(record.id));
    g_.nodes_.push_back(std::move(record));
    return *this;
  }

  GraphBuilder& add_article(std::uint32_t id, std::string title, std::string body = {}) {
    return add_node({NodeId{id}, NodeKind::Article, std::move(title), false, std::move(body)});
  }

  GraphBuilder& add_category(std::uint32_t id, std::string title, std::string body = {}) {
    return add_node({NodeId{id}, NodeKind::Category, std::move(title), false, std::move(body)});
  }

  GraphBuilder& add_edge(NodeId src, std::string_view type, NodeId dst) {
    if (!g_.contains(src)) throw LookupError("dangling edge endpoint: unknown node id " + to_string(src));
    if (!g_.contains(dst)) throw LookupError("dangling edge endpoint: unknown node id " + to_string(dst));
    const EdgeTypeId t = intern(type);
    if (!seen_.emplace(src.value, t, dst.value).second) {
      throw Error("duplicate edge " + to_string(src) + " " + std::string(type) + " " + to_string(dst));
    }
    g_.edges_.push_back({src, t, dst});
    return *this;
  }

  GraphBuilder& add_edge(std::uint32_t src, std::string_view type, std::uint32_t dst) {
    return add_edge(NodeId{src}, type, NodeId{dst});
  }

  KnowledgeGraph build() && {
    KnowledgeGraph& g = g_;
    const std::size_t n = g.nodes_.size();
    g.out_.assign(n, {});
    g.in_.assign(n, {});
    g.neighbors_.assign(n, {});
    for (EdgeIndex e = 0; e < g.edges_.size(); ++e) {
      const Edge& edge = g.edges_[e];
      const std::size_t s = g.slot_.at(edge.src);
      const std::size_t d = g.slot_.at(edge.dst);
      g.out_[s].push_back(e);
      g.in_[d].push_back(e);
      ++g.typed_out_[KnowledgeGraph::key(s, edge.etype)];
      ++g.typed_in_[KnowledgeGraph::key(d, edge.etype)];
      if (s != d) {
        g.neighbors_[s].push_back(edge.dst);
        g.neighbors_[d].push_back(edge.src);
      }
    }
    for (auto& list : g.neighbors_) {
      std::sort(list.begin(), list.end());
      list.erase(std::unique(list.begin(), list.end()), list.end());
    }
    for (const NodeRecord& rec : g.nodes_) {
      g.title_index_[text::normalize_title(rec.title)].push_back(rec.id);
    }
    for (auto& [_, ids] : g.title_index_) std::sort(ids.begin(), ids.end());
    return std::move(g_);
  }

 private:
  struct TripleHash {
    std::size_t operator()(const std::tuple<std::uint32_t, EdgeTypeId, std::uint32_t>& t) const noexcept {
      const auto [a, b, c] = t;
      std::uint64_t h = a;
      h = h * 0x9E3779B97F4A7C15ULL + b;
      h = h * 0x9E3779B97F4A7C15ULL + c;
      return static_cast<std::size_t>(h ^ (h >> 29));
    }
  };

  EdgeTypeId intern(std::string_view name) {
    if (const auto t = g_.find_edge_type(name)) return *t;
    g_.type_names_.emplace_back(name);
    return static_cast<EdgeTypeId>(g_.type_names_.size() - 1);
  }

  KnowledgeGraph g_;
  std::unordered_set<std::tuple<std::uint32_t, EdgeTypeId, std::uint32_t>, TripleHash> seen_;
};

/// Edges incident to `v` ignoring direction; a self-loop counts once.
inline std::size_t degree(const KnowledgeGraph& g, NodeId v) {
  const auto out = g.out_edges(v);
  const auto in = g.in_edges(v);
  const auto loops = std::count_if(out.begin(), out.end(), [&](EdgeIndex e) { return g.edge(e).dst == v; });
  return out.size() + in.size() - static_cast<std::size_t>(loops);
}

inline std::size_t in_degree(const KnowledgeGraph& g, NodeId v) { return g.in_edges(v).size(); }

/// Local clustering coefficient over the undirected simple neighbourhood:
/// linked neighbour pairs over all neighbour pairs, 0 below two neighbours.
inline double clustering_coefficient(const KnowledgeGraph& g, NodeId v) {
  const auto nbrs = g.neighbors(v);
  const std::size_t k = nbrs.size();
  if (k < 2) return 0.0;
  std::size_t linked = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const auto adj = g.neighbors(nbrs[i]);
    for (std::size_t j = i + 1; j < k; ++j) {
      if (std::binary_search(adj.begin(), adj.end(), nbrs[j])) ++linked;
    }
  }
  return static_cast<double>(linked) / (static_cast<double>(k) * static_cast<double>(k - 1) / 2.0);
}

namespace detail {

inline std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return in;
}

}  // namespace detail

/// Reads the nodes and edges TSV files.
///
/// nodes: `id  kind  is_disambiguation(0|1)  title  text`
/// edges: `src_id  edge_type  dst_id`
/// Lines starting with `#` are comments. Fields use `\t`/`\n` escapes.
inline KnowledgeGraph load_graph(const std::filesystem::path& nodes_path, const std::filesystem::path& edges_path) {
  GraphBuilder builder;
  {
    std::ifstream in = detail::open_input(nodes_path);
    const std::string file = nodes_path.string();
    std::string raw;
    for (std::size_t lineno = 1; std::getline(in, raw); ++lineno) {
      const std::string_view line = text::chomp(raw);
      if (text::is_comment_or_blank(line)) continue;
      const auto f = text::split(line, '\t');
      if (f.size() != 5 && f.size() != 4) throw ParseError(file, lineno, "expected 5 tab-separated fields");
      NodeRecord rec;
      if (!text::parse_int(f[0], rec.id.value)) throw ParseError(file, lineno, "bad node id '" + std::string(f[0]) + "'");
      if (f[1] == "article") {
        rec.kind = NodeKind::Article;
      } else if (f[1] == "category") {
        rec.kind = NodeKind::Category;
      } else {
        throw ParseError(file, lineno, "kind must be article or category");
      }
      if (f[2] != "0" && f[2] != "1") throw ParseError(file, lineno, "is_disambiguation must be 0 or 1");
      rec.is_disambiguation = f[2] == "1";
      rec.title = text::unescape_field(f[3]);
      if (f.size() == 5) rec.text = text::unescape_field(f[4]);
      try {
        builder.add_node(std::move(rec));
      } catch (const Error& e) {
        throw ParseError(file, lineno, e.what());
      }
    }
  }
  {
    std::ifstream in = detail::open_input(edges_path);
    const std::string file = edges_path.string();
    std::string raw;
    for (std::size_t lineno = 1; std::getline(in, raw); ++lineno) {
      const std::string_view line = text::chomp(raw);
      if (text::is_comment_or_blank(line)) continue;
      const auto f = text::split(line, '\t');
      if (f.size() != 3) throw ParseError(file, lineno, "expected 3 tab-separated fields");
      std::uint32_t src = 0;
      std::uint32_t dst = 0;
      if (!text::parse_int(f[0], src) || !text::parse_int(f[2], dst)) throw ParseError(file, lineno, "bad node id");
      if (f[1].empty()) throw ParseError(file, lineno, "empty edge type");
      try {
        builder.add_edge(src, f[1], dst);
      } catch (const Error& e) {
        throw ParseError(file, lineno, e.what());
      }
    }
  }
  return std::move(builder).build();
}

/// Writes the graph back in the format read by load_graph.
inline void save_graph(const KnowledgeGraph& g, const std::filesystem::path& nodes_path,
                       const std::filesystem::path& edges_path) {
  std::ofstream nodes(nodes_path);
  std::ofstream edges(edges_path);
  if (!nodes || !edges) throw Error("cannot write graph files");
  nodes << "# id\tkind\tis_disambiguation\ttitle\ttext\n";
  for (const NodeRecord& r : g.nodes()) {
    nodes << r.id.value << '\t' << (r.kind == NodeKind::Article ? "article" : "category") << '\t'
          << (r.is_disambiguation ? 1 : 0) << '\t' << text::escape_field(r.title) << '\t'
          << text::escape_field(r.text) << '\n';
  }
  edges << "# src\tedge_type\tdst\n";
  for (const Edge& e : g.edges()) {
    edges << e.src.value << '\t' << g.edge_type_name(e.etype) << '\t' << e.dst.value << '\n';
  }
}

}  // namespace gist
