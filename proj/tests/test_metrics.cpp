#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "gist/metrics.hpp"

using namespace gist;
using Catch::Approx;

namespace {

std::vector<NodeId> ranking(std::initializer_list<std::uint32_t> v) {
  std::vector<NodeId> out;
  for (const auto i : v) out.push_back(NodeId{i});
  return out;
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "gist-test-metrics";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("average precision by hand") {
  // Relevant at ranks 1 and 3: (1 + 2/3) / 2.
  const std::set<NodeId> rel{NodeId{1}, NodeId{3}};
  CHECK(*average_precision(ranking({1, 2, 3, 4}), rel) == Approx(0.8333333333).margin(1e-9));
  // A relevant node missing from the list counts as a miss.
  CHECK(*average_precision(ranking({1, 2}), rel) == 0.5);
  CHECK_FALSE(average_precision(ranking({1, 2}), {}).has_value());
}

TEST_CASE("NDCG with binary gains") {
  // Single relevant node at rank 2: 1 / log2(3).
  const std::set<NodeId> rel{NodeId{2}};
  CHECK(ndcg_at_k(ranking({1, 2, 3}), rel) == Approx(0.6309297536).margin(1e-9));
  CHECK(ndcg_at_k(ranking({2, 1, 3}), rel) == 1.0);
  CHECK(ndcg_at_k(ranking({1, 2, 3}), rel, 1) == 0.0);
  CHECK(ndcg_at_k(ranking({1, 2}), {}) == 0.0);
  CHECK_THROWS_AS(ndcg_at_k(ranking({1}), rel, 0), Error);
}

TEST_CASE("precision at k keeps k as the denominator") {
  std::set<NodeId> rel;
  for (std::uint32_t i = 1; i <= 7; ++i) rel.insert(NodeId{i});
  CHECK(precision_at_k(ranking({1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11}), rel) == Approx(0.7).margin(1e-15));
  CHECK(precision_at_k(ranking({1, 2, 3}), rel) == Approx(0.3).margin(1e-15));
  CHECK(precision_at_k(ranking({}), rel) == 0.0);
}

TEST_CASE("metric ranges hold on permutations") {
  const std::set<NodeId> rel{NodeId{2}, NodeId{5}};
  std::vector<NodeId> order = ranking({1, 2, 3, 4, 5, 6});
  do {
    const double ap = *average_precision(order, rel);
    CHECK(ap > 0.0);
    CHECK(ap <= 1.0);
    const double nd = ndcg_at_k(order, rel, 3);
    CHECK(nd >= 0.0);
    CHECK(nd <= 1.0 + 1e-15);
  } while (std::next_permutation(order.begin(), order.end()));
}

TEST_CASE("judgments enforce one core gist per query") {
  Judgments j;
  j.set("q", NodeId{1}, 5);
  j.set("q", NodeId{1}, 5);
  CHECK_THROWS_AS(j.set("q", NodeId{2}, 5), Error);
  j.set("q", NodeId{2}, 4);
  j.set("q", NodeId{3}, 2);
  CHECK_THROWS_AS(j.set("q", NodeId{4}, 6), Error);
  CHECK(j.relevant("q") == std::set<NodeId>{NodeId{1}, NodeId{2}});
  CHECK(j.relevant("q", Judgments::kCoreGrade) == std::set<NodeId>{NodeId{1}});
  CHECK(j.grade("q", NodeId{9}) == 0);
  CHECK(j.grade("other", NodeId{1}) == 0);
}

TEST_CASE("qrels files round-trip and report bad lines") {
  Judgments j;
  j.set("q1", NodeId{7}, 5);
  j.set("q1", NodeId{8}, 3);
  j.set("q2", NodeId{1}, 4);
  const auto path = scratch("qrels.tsv");
  write_qrels(j, path);
  CHECK(read_qrels(path).all() == j.all());

  const auto bad = scratch("bad.tsv");
  std::ofstream(bad) << "q1\t7\t5\nq1\t8\t5\n";
  try {
    read_qrels(bad);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK_THAT(e.what(), Catch::Matchers::ContainsSubstring(":2"));
  }
  std::ofstream(bad) << "q1\tseven\t5\n";
  CHECK_THROWS_AS(read_qrels(bad), ParseError);
}

TEST_CASE("evaluation summary pools evaluated queries and lists excluded ones") {
  Judgments j;
  j.set("a", NodeId{1}, 5);
  j.set("a", NodeId{2}, 4);
  j.set("b", NodeId{3}, 4);
  j.set("c", NodeId{9}, 2);
  MetricSummary s;
  evaluate_query(s, "a", ranking({2, 5, 1}), j.relevant("a"));
  evaluate_query(s, "b", ranking({4, 3}), j.relevant("b"));
  evaluate_query(s, "c", ranking({9}), j.relevant("c"));
  s.pool();
  REQUIRE(s.per_query.size() == 2);
  CHECK(s.excluded == std::vector<std::string>{"c"});
  CHECK(s.map == Approx(((1.0 + 2.0 / 3.0) / 2.0 + 0.5) / 2.0).margin(1e-15));

  // Core threshold: only node 1 counts for query a.
  MetricSummary core;
  evaluate_query(core, "a", ranking({2, 5, 1}), j.relevant("a", Judgments::kCoreGrade));
  evaluate_query(core, "b", ranking({4, 3}), j.relevant("b", Judgments::kCoreGrade));
  core.pool();
  REQUIRE(core.per_query.size() == 1);
  CHECK(core.map == Approx(1.0 / 3.0).margin(1e-15));
  CHECK(core.excluded == std::vector<std::string>{"b"});
}
