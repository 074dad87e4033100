#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "gist/error.hpp"
#include "gist/kg.hpp"
#include "gist/linker.hpp"
#include "gist/text.hpp"

namespace gist {

/// Token post-processing shared by the index and its queries.
struct Analyzer {
  bool stopwords = false;  // drop a small English stopword list
  bool stem = false;       // Harman's S-stemmer (plural stripping)

  static bool is_stopword(const std::string& t) {
    static const std::set<std::string> words = {
        "a",    "an",   "and",  "are",  "as",   "at",   "be",    "by",   "for",  "from", "has", "he",
        "in",   "is",   "it",   "its",  "of",   "on",   "or",    "that", "the",  "to",   "was", "were",
        "will", "with", "this", "these", "those", "their", "they", "but", "not", "which"};
    return words.contains(t);
  }

  static std::string s_stem(std::string t) {
    const auto ends = [&](std::string_view suffix) {
      return t.size() >= suffix.size() && t.compare(t.size() - suffix.size(), suffix.size(), suffix) == 0;
    };
    if (ends("ies") && !ends("eies") && !ends("aies")) {
      t.replace(t.size() - 3, 3, "y");
    } else if (ends("es") && !ends("aes") && !ends("ees") && !ends("oes")) {
      t.pop_back();
    } else if (ends("s") && !ends("us") && !ends("ss")) {
      t.pop_back();
    }
    return t;
  }

  std::vector<std::string> operator()(std::string_view body) const {
    std::vector<std::string> out;
    for (std::string& tok : text::tokenize(body)) {
      if (stopwords && is_stopword(tok)) continue;
      out.push_back(stem ? s_stem(std::move(tok)) : std::move(tok));
    }
    return out;
  }
};

/// Unigram language models over node texts, Dirichlet-smoothed against the
/// collection model.
class TextIndex {
 public:
  using TermId = std::uint32_t;

  static constexpr double kDefaultMu = 2000.0;

  explicit TextIndex(const KnowledgeGraph& g, double mu = kDefaultMu, Analyzer analyzer = {})
      : mu_(mu), analyzer_(analyzer) {
    if (!(mu > 0.0)) throw Error("mu must be positive");
    std::vector<std::size_t> cf;
    for (const NodeRecord& rec : g.nodes()) {
      std::map<TermId, std::uint32_t> tf;
      std::size_t len = 0;
      for (const std::string& tok : analyzer_(rec.text)) {
        auto [it, fresh] = vocab_.emplace(tok, static_cast<TermId>(vocab_.size()));
        if (fresh) cf.push_back(0);
        ++tf[it->second];
        ++cf[it->second];
        ++len;
      }
      Doc doc;
      doc.length = len;
      doc.tf.assign(tf.begin(), tf.end());
      docs_.emplace(rec.id, std::move(doc));
      total_ += len;
    }
    if (total_ == 0) throw Error("cannot build a text index: no node has text");
    p_coll_.resize(cf.size());
    for (std::size_t t = 0; t < cf.size(); ++t) p_coll_[t] = static_cast<double>(cf[t]) / static_cast<double>(total_);
  }

  double mu() const noexcept { return mu_; }
  const Analyzer& analyzer() const noexcept { return analyzer_; }
  std::size_t vocabulary_size() const noexcept { return vocab_.size(); }
  std::size_t collection_length() const noexcept { return total_; }

  std::optional<TermId> term(const std::string& token) const {
    const auto it = vocab_.find(token);
    if (it == vocab_.end()) return std::nullopt;
    return it->second;
  }

  double collection_probability(const std::string& token) const {
    const auto t = term(token);
    return t ? p_coll_[*t] : 0.0;
  }

  std::size_t doc_length(NodeId v) const { return doc(v).length; }

  std::size_t term_frequency(NodeId v, const std::string& token) const {
    const auto t = term(token);
    return t ? tf(doc(v), *t) : 0;
  }

  /// Σ_t log[(tf(t,d) + μ p(t|C)) / (|d| + μ)] over in-vocabulary terms;
  /// nullopt when every term is out of vocabulary.
  std::optional<double> query_likelihood(std::span<const std::string> query_terms, NodeId v) const {
    const Doc& d = doc(v);
    double score = 0.0;
    bool any = false;
    for (const std::string& tok : query_terms) {
      const auto t = term(tok);
      if (!t) continue;
      any = true;
      const double num = static_cast<double>(tf(d, *t)) + mu_ * p_coll_[*t];
      score += std::log(num / (static_cast<double>(d.length) + mu_));
    }
    if (!any) return std::nullopt;
    return score;
  }

 private:
  struct Doc {
    std::vector<std::pair<TermId, std::uint32_t>> tf;  // ascending term id
    std::size_t length = 0;
  };

  const Doc& doc(NodeId v) const {
    const auto it = docs_.find(v);
    if (it == docs_.end()) throw LookupError("node " + to_string(v) + " is not indexed");
    return it->second;
  }

  static std::size_t tf(const Doc& d, TermId t) {
    const auto it = std::lower_bound(d.tf.begin(), d.tf.end(), t, [](const auto& p, TermId x) { return p.first < x; });
    return it != d.tf.end() && it->first == t ? it->second : 0;
  }

  double mu_;
  Analyzer analyzer_;
  std::unordered_map<std::string, TermId> vocab_;
  std::vector<double> p_coll_;
  std::unordered_map<NodeId, Doc> docs_;
  std::size_t total_ = 0;
};

inline TextIndex build_index(const KnowledgeGraph& g, double mu = TextIndex::kDefaultMu, Analyzer analyzer = {}) {
  return TextIndex(g, mu, analyzer);
}

inline std::optional<double> query_likelihood(const TextIndex& idx, std::span<const std::string> terms, NodeId v) {
  return idx.query_likelihood(terms, v);
}

/// Keyword query for a pair: tokens of every distinct label and mention.
/// Repeats inside one string are kept; repeated strings contribute once.
inline std::vector<std::string> query_terms(const GistQuery& q, const Analyzer& analyzer = {}) {
  std::set<std::string> seen;
  std::vector<std::string> terms;
  const auto add = [&](const std::vector<std::string>& strings) {
    for (const std::string& s : strings) {
      if (!seen.insert(text::normalize_title(s)).second) continue;
      for (std::string& tok : analyzer(s)) terms.push_back(std::move(tok));
    }
  };
  add(q.caption_mentions);
  add(q.image_labels);
  return terms;
}

struct QlRanked {
  NodeId node;
  std::optional<double> score;
  double reciprocal_rank;
};

/// Candidates by query likelihood, best first; unscored nodes last and ties
/// by ascending id. Reciprocal ranks are 0 for unscored nodes.
inline std::vector<QlRanked> ql_rank(const TextIndex& idx, std::span<const std::string> terms,
                                     std::span<const NodeId> candidates) {
  std::vector<QlRanked> ranked;
  ranked.reserve(candidates.size());
  for (const NodeId v : candidates) ranked.push_back({v, idx.query_likelihood(terms, v), 0.0});
  std::sort(ranked.begin(), ranked.end(), [](const QlRanked& a, const QlRanked& b) {
    if (a.score.has_value() != b.score.has_value()) return a.score.has_value();
    if (a.score && *a.score != *b.score) return *a.score > *b.score;
    return a.node < b.node;
  });
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    if (ranked[i].score) ranked[i].reciprocal_rank = 1.0 / static_cast<double>(i + 1);
  }
  return ranked;
}

inline std::vector<QlRanked> ql_rank(const TextIndex& idx, const GistQuery& q, std::span<const NodeId> candidates) {
  const std::vector<std::string> terms = query_terms(q, idx.analyzer());
  return ql_rank(idx, terms, candidates);
}

}  // namespace gist
