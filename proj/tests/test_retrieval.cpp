#include <catch_amalgamated.hpp>

#include <cmath>

#include "gist/retrieval.hpp"

using namespace gist;
using Catch::Approx;

namespace {

KnowledgeGraph docs(std::initializer_list<const char*> texts) {
  GraphBuilder b;
  std::uint32_t id = 1;
  for (const char* t : texts) {
    b.add_article(id, "doc " + std::to_string(id), t);
    ++id;
  }
  return std::move(b).build();
}

}  // namespace

TEST_CASE("collection statistics by hand count") {
  const KnowledgeGraph g = docs({"a a b", "b"});
  const TextIndex idx(g);
  CHECK(idx.collection_probability("a") == 0.5);
  CHECK(idx.collection_probability("b") == 0.5);
  CHECK(idx.doc_length(NodeId{1}) == 3);
  CHECK(idx.doc_length(NodeId{2}) == 1);
  CHECK(idx.term_frequency(NodeId{1}, "a") == 2);

  const TextIndex single(docs({"", "x"}));
  CHECK(single.vocabulary_size() == 1);
  CHECK(single.collection_probability("x") == 1.0);
  CHECK_THROWS_AS(TextIndex(docs({"", ""})), Error);
}

TEST_CASE("Dirichlet-smoothed query likelihood") {
  const KnowledgeGraph g = docs({"a a b", "b"});
  const std::vector<std::string> q{"a"};
  CHECK(*TextIndex(g, 1.0).query_likelihood(q, NodeId{1}) == Approx(std::log(0.625)).margin(1e-15));
  CHECK(*TextIndex(g, 1e-9).query_likelihood(q, NodeId{1}) == Approx(std::log(2.0 / 3.0)).margin(1e-8));
  // Absent from the document but present in the collection: finite.
  const auto absent = TextIndex(g, 1.0).query_likelihood(q, NodeId{2});
  REQUIRE(absent);
  CHECK(std::isfinite(*absent));
  CHECK(*absent < 0.0);
  const std::vector<std::string> oov{"zebra"};
  CHECK_FALSE(TextIndex(g).query_likelihood(oov, NodeId{1}).has_value());
  CHECK_THROWS_AS(TextIndex(g, 0.0), Error);
}

TEST_CASE("raising tf of a query term raises the score") {
  const KnowledgeGraph g = docs({"a b c", "a a b c", "c"});
  const TextIndex idx(g, 50.0);
  const std::vector<std::string> q{"a"};
  CHECK(*idx.query_likelihood(q, NodeId{2}) > *idx.query_likelihood(q, NodeId{1}));
}

TEST_CASE("ql ranking, reciprocal ranks and ties") {
  const KnowledgeGraph g = docs({"orangutan", "orangutan wildlife", "orangutan wildlife", "rock"});
  const TextIndex idx(g);
  const std::vector<std::string> q{"orangutan", "wildlife"};
  const std::vector<NodeId> cands{NodeId{1}, NodeId{2}, NodeId{3}, NodeId{4}};
  const auto ranked = ql_rank(idx, q, cands);
  CHECK(ranked[0].node == NodeId{2});  // identical texts: lower id first
  CHECK(ranked[1].node == NodeId{3});
  CHECK(ranked[0].reciprocal_rank == 1.0);
  CHECK(ranked[1].reciprocal_rank == 0.5);
  CHECK(ranked[2].node == NodeId{1});

  const std::vector<std::string> oov{"zebra"};
  for (const auto& r : ql_rank(idx, oov, cands)) CHECK(r.reciprocal_rank == 0.0);
}

TEST_CASE("the document with every query term wins") {
  const KnowledgeGraph g = docs({"orangutan", "orangutan wildlife"});
  const TextIndex idx(g);
  const GistQuery q{"q", {"Orangutan"}, {"wildlife"}};
  const std::vector<NodeId> cands{NodeId{1}, NodeId{2}};
  const auto ranked = ql_rank(idx, q, cands);
  CHECK(ranked[0].node == NodeId{2});
  CHECK(ranked[1].reciprocal_rank == 0.5);
}

TEST_CASE("query terms dedupe repeated strings but keep repeats inside one") {
  const GistQuery q{"q", {"Bear", "bear"}, {"Polar Bear", "bear bear"}};
  CHECK(query_terms(q) == std::vector<std::string>{"polar", "bear", "bear", "bear", "bear"});
}

TEST_CASE("analyzer options") {
  Analyzer a;
  a.stopwords = true;
  a.stem = true;
  CHECK(a("The ponies of the islands") == std::vector<std::string>{"pony", "island"});
  CHECK(Analyzer::s_stem("glass") == "glass");
  CHECK(Analyzer::s_stem("status") == "status");
  CHECK(Analyzer::s_stem("horses") == "horse");
}
