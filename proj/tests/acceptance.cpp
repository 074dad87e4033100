// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "gist/centrality.hpp"
#include "gist/clustering.hpp"
#include "gist/cross_validation.hpp"
#include "gist/expander.hpp"
#include "gist/fixtures.hpp"
#include "gist/metrics.hpp"
#include "gist/relatedness.hpp"
#include "gist/run_files.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"

using namespace gist;
namespace fs = std::filesystem;

namespace {

// Collects the first few mismatches so a FAIL line says what went wrong.
struct Check {
  std::size_t failures = 0;
  std::ostringstream first;

  void expect(bool ok, const std::string& what) {
    if (ok) return;
    if (failures++ == 0) first << what;
  }
};

int run_shell(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path workdir(const std::string& name) {
  const fs::path dir = fs::current_path() / "acceptance-work" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string pipeline_cmd(const fs::path& fx, const fs::path& out, const std::string& extra = "") {
  return std::string(GISTKG_PATH) + " pipeline --quiet --nodes " + (fx / "nodes.tsv").string() + " --edges " +
         (fx / "edges.tsv").string() + " --queries " + (fx / "queries.tsv").string() + " --qrels " +
         (fx / "qrels.tsv").string() + " --out-dir " + out.string() + " " + extra + " >/dev/null 2>&1";
}

std::vector<std::tuple<std::size_t, std::size_t, double>> two_cliques() {
  return {{0, 1, 1}, {0, 2, 1}, {1, 2, 1}, {3, 4, 1}, {3, 5, 1}, {4, 5, 1}, {2, 3, 1}};
}

WeightedGraph weighted(std::size_t n, const std::vector<std::tuple<std::size_t, std::size_t, double>>& edges) {
  WeightedGraph wg;
  for (std::uint32_t i = 0; i < n; ++i) wg.vertices.push_back(NodeId{i + 1});
  for (const auto& [u, v, w] : edges) {
    wg.edges.push_back({NodeId{static_cast<std::uint32_t>(std::min(u, v) + 1)},
                        NodeId{static_cast<std::uint32_t>(std::max(u, v) + 1)}, w});
  }
  return wg;
}

std::vector<KnowledgeGraph> random_graphs() {
  std::mt19937_64 rng(20240601);
  std::vector<KnowledgeGraph> out;
  for (int i = 0; i < 200; ++i) {
    const std::uint32_t n = 2 + static_cast<std::uint32_t>(rng() % 11);
    out.push_back(oracle::random_graph(rng, n, 1 + rng() % 30, 3, rng() % 2 == 0));
  }
  return out;
}

// 1. Relatedness against brute-force path enumeration.
void relatedness(Check& c) {
  for (const KnowledgeGraph& g : random_graphs()) {
    for (EdgeIndex e = 0; e < g.edge_count(); ++e) {
      c.expect(edge_cost(g, e) == oracle::edge_cost(g, g.edge(e)), "edge cost differs");
    }
    const GraphView view(g);
    const auto adj = oracle::adjacency(g, oracle::all_edges(g));
    const RelatednessParams p;
    for (const auto& s : g.nodes()) {
      for (const auto& t : g.nodes()) {
        if (s.id == t.id) continue;
        const double got = sigma(view, s.id, t.id, p);
        const double want = oracle::sigma(adj, s.id, t.id, p.alpha, p.k_paths, p.path_len_cap);
        c.expect(std::abs(got - want) <= 1e-9,
                 "sigma(" + to_string(s.id) + "," + to_string(t.id) + ") " + std::to_string(got) + " vs " +
                     std::to_string(want));
      }
    }
  }
}

// 2. Expansion against brute-force enumeration, monotone in L.
void expansion(Check& c) {
  std::mt19937_64 rng(7);
  for (const KnowledgeGraph& g : random_graphs()) {
    std::vector<NodeId> ids;
    for (const auto& r : g.nodes()) ids.push_back(r.id);
    std::set<NodeId> seeds;
    const std::size_t k = 1 + rng() % std::min<std::size_t>(3, ids.size());
    while (seeds.size() < k) seeds.insert(ids[rng() % ids.size()]);
    std::set<NodeId> prev_inter, prev_border;
    for (std::size_t L = 1; L <= 5; ++L) {
      ExpansionConfig cfg;
      cfg.max_path_len = L;
      const LayeredNodeSets got = expand(g, seeds, cfg);
      const oracle::Expansion want = oracle::expand(g, seeds, L, cfg.border_hops);
      c.expect(got.intermediate_graph.nodes == want.inter_nodes, "intermediate nodes differ at L=" + std::to_string(L));
      c.expect(got.border_graph.nodes == want.border_nodes, "border nodes differ at L=" + std::to_string(L));
      c.expect(std::includes(got.intermediate_graph.nodes.begin(), got.intermediate_graph.nodes.end(),
                             prev_inter.begin(), prev_inter.end()),
               "intermediate layer shrank at L=" + std::to_string(L));
      c.expect(std::includes(got.border_graph.nodes.begin(), got.border_graph.nodes.end(), prev_border.begin(),
                             prev_border.end()),
               "border layer shrank at L=" + std::to_string(L));
      prev_inter = got.intermediate_graph.nodes;
      prev_border = got.border_graph.nodes;
    }
  }
}

// 3. Louvain on two joined triangles, and Q never dropping.
void clustering(Check& c) {
  const auto edges = two_cliques();
  const ClusterSet cs = louvain(weighted(6, edges), 0);
  const Partition want = {{NodeId{1}, NodeId{2}, NodeId{3}}, {NodeId{4}, NodeId{5}, NodeId{6}}};
  c.expect(cs.clusters == want, "two cliques not recovered");
  const double best = oracle::max_modularity(6, edges).first;
  c.expect(std::abs(cs.modularity - best) <= 1e-9, "Q " + std::to_string(cs.modularity) + " vs max " +
                                                        std::to_string(best));

  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + rng() % 14;
    std::vector<std::tuple<std::size_t, std::size_t, double>> es;
    for (std::size_t u = 0; u < n; ++u) {
      for (std::size_t v = u + 1; v < n; ++v) {
        if (rng() % 3 == 0) es.emplace_back(u, v, 0.05 + unit_real(rng));
      }
    }
    const ClusterSet r = louvain(weighted(n, es), LouvainOptions{trial % 2 == 1, rng()});
    for (std::size_t i = 1; i < r.q_trace.size(); ++i) c.expect(r.q_trace[i] >= r.q_trace[i - 1], "Q dropped");
  }
}

// 4. PageRank and betweenness against dense oracles.
void centrality(Check& c) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const std::uint32_t n = 1 + static_cast<std::uint32_t>(rng() % 20);
    const KnowledgeGraph g = oracle::random_graph(rng, n, rng() % (3 * n + 1));
    std::vector<NodeId> ids;
    const auto A = oracle::dense(g, ids);
    const GraphView view(g);
    const auto pr = pagerank(view);
    const auto want = oracle::pagerank(A);
    double sum = 0.0;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      sum += pr.score.at(ids[i]);
      c.expect(std::abs(pr.score.at(ids[i]) - want[i]) <= 1e-6, "pagerank differs from the dense oracle");
    }
    c.expect(std::abs(sum - 1.0) <= 1e-9, "pagerank sums to " + std::to_string(sum));
    if (n <= 10) {
      const auto bc = betweenness(view);
      const auto bw = oracle::betweenness(A);
      for (std::size_t i = 0; i < ids.size(); ++i) {
        c.expect(std::abs(bc.at(ids[i]) - bw[i]) <= 1e-9, "betweenness differs from path counting");
      }
    }
  }
}

// 5. Hand-computed metric values.
void metrics(Check& c) {
  const auto nodes = [](std::initializer_list<std::uint32_t> v) {
    std::vector<NodeId> out;
    for (const auto i : v) out.push_back(NodeId{i});
    return out;
  };
  const std::set<NodeId> r13{NodeId{1}, NodeId{3}};
  c.expect(average_precision(nodes({1, 2, 3, 4, 5}), r13) == (1.0 + 2.0 / 3.0) / 2.0, "AP ranks 1,3");
  c.expect(average_precision(nodes({1, 3, 2}), r13) == 1.0, "AP all at top");
  c.expect(average_precision(nodes({1, 2}), r13) == 0.5, "AP with an unretrieved relevant node");
  c.expect(!average_precision(nodes({1}), {}).has_value(), "AP without relevant nodes");
  const std::set<NodeId> r2{NodeId{2}};
  c.expect(ndcg_at_k(nodes({1, 2, 3}), r2) == (1.0 / std::log2(3.0)) / (1.0 / std::log2(2.0)), "NDCG rank 2");
  c.expect(std::abs(ndcg_at_k(nodes({1, 2, 3}), r2) - 0.6309297535714574) <= 1e-15, "NDCG 0.6309");
  c.expect(ndcg_at_k(nodes({2, 1}), r2) == 1.0, "NDCG perfect");
  c.expect(ndcg_at_k(nodes({2, 1}), {}) == 0.0, "NDCG without relevant nodes");
  std::set<NodeId> seven;
  for (std::uint32_t i = 1; i <= 7; ++i) seven.insert(NodeId{i});
  c.expect(precision_at_k(nodes({1, 2, 3, 4, 5, 6, 7, 8, 9, 10}), seven) == 0.7, "P@10 7 of 10");
  c.expect(precision_at_k(nodes({1, 2, 3}), seven) == 0.3, "P@10 short list");
  c.expect(precision_at_k(nodes({1, 2, 3, 4, 5, 6, 7}), seven, 7) == 1.0, "P@k all relevant");

  Judgments j;
  j.set("q", NodeId{1}, 5);
  j.set("q", NodeId{3}, 4);
  MetricSummary perfect;
  evaluate_query(perfect, "q", nodes({1, 3, 2}), j.relevant("q"));
  perfect.pool();
  c.expect(perfect.map == 1.0 && perfect.ndcg == 1.0, "perfect run");
  MetricSummary core;
  evaluate_query(core, "q", nodes({1, 2, 3}), j.relevant("q", Judgments::kCoreGrade));
  core.pool();
  c.expect(core.map == 1.0, "core threshold");
}

// 6. Coordinate ascent on the planted-feature set, and with the feature hidden.
void learning(Check& c) {
  const auto queries = synthetic::planted(50, 30, kMaxClusterProximity, 2024);
  CAConfig cfg;
  cfg.rng_seed = 42;
  const CrossValidationResult cv = cross_validate(queries, 5, cfg);
  c.expect(cv.pooled.map >= 0.95, "held-out MAP " + std::to_string(cv.pooled.map));
  const TrainResult tr = train_coordinate_ascent(queries, cfg);
  for (std::size_t i = 1; i < tr.map_trace.size(); ++i) c.expect(tr.map_trace[i] >= tr.map_trace[i - 1], "trace dropped");
  FeatureMask hidden = feature_mask(FeatureSet::All);
  hidden[kMaxClusterProximity] = false;
  const CrossValidationResult blind = cross_validate(queries, 5, cfg, hidden);
  c.expect(blind.pooled.map <= 0.6, "MAP without the planted feature " + std::to_string(blind.pooled.map));
  std::cout << "  held-out MAP " << cv.pooled.map << ", without planted feature " << blind.pooled.map << '\n';
}

// 7. gen-fixtures + pipeline on the toy graph.
void end_to_end(Check& c) {
  const fs::path dir = workdir("toy");
  c.expect(run_shell(std::string(GISTKG_PATH) + " gen-fixtures --out " + (dir / "fx").string() + " >/dev/null") == 0,
           "gen-fixtures failed");
  const auto start = std::chrono::steady_clock::now();
  const int code = run_shell(pipeline_cmd(dir / "fx", dir / "out", "--dump"));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  c.expect(code == 0, "pipeline exit code " + std::to_string(code));
  c.expect(secs < 10.0, "pipeline took " + std::to_string(secs) + " s");

  const RunFile run = read_run(dir / "out" / "run.tsv");
  std::set<std::pair<std::string, NodeId>> borders;
  {
    std::ifstream in(dir / "out" / "layers.tsv");
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      const auto f = text::split(line, '\t');
      NodeId v;
      if (f.size() == 3 && f[1] == "B" && text::parse_int(f[2], v.value)) borders.emplace(std::string(f[0]), v);
    }
  }
  std::size_t hits = 0;
  for (const auto& [q, gist] : make_toy_fixture().planted) {
    c.expect(borders.contains({q, gist}), "planted gist of " + q + " is not a border node");
    const auto it = run.queries.find(q);
    if (it == run.queries.end()) continue;
    for (const RunEntry& e : it->second) {
      if (e.node == gist && e.rank <= 3) ++hits;
    }
  }
  c.expect(hits >= 4, "planted gist in the top 3 for " + std::to_string(hits) + " of 5 queries");
  std::cout << "  planted gist in top 3: " << hits << "/5, runtime " << secs << " s\n";
}

// 8. Two identical pipeline runs give identical outputs.
void determinism(Check& c) {
  const fs::path dir = workdir("repeat");
  run_shell(std::string(GISTKG_PATH) + " gen-fixtures --out " + (dir / "fx").string() + " >/dev/null");
  c.expect(run_shell(pipeline_cmd(dir / "fx", dir / "a", "--threads 4")) == 0, "first run failed");
  c.expect(run_shell(pipeline_cmd(dir / "fx", dir / "b", "--threads 4")) == 0, "second run failed");
  for (const char* f : {"run.tsv", "model.tsv", "report.tsv"}) {
    const std::string a = slurp(dir / "a" / f);
    c.expect(!a.empty() && a == slurp(dir / "b" / f), std::string(f) + " differs between runs");
  }
}

// 9. Ablation runs: all four sets execute; border-only signal favours
// only-border over no-border.
void ablation_harness(Check& c) {
  const fs::path dir = workdir("ablation");
  run_shell(std::string(GISTKG_PATH) + " gen-fixtures --out " + (dir / "fx").string() + " >/dev/null");
  c.expect(run_shell(pipeline_cmd(dir / "fx", dir / "out", "--ablation")) == 0, "pipeline --ablation failed");
  std::ifstream in(dir / "out" / "ablation.tsv");
  std::vector<std::string> labels;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '#') labels.emplace_back(text::split(line, '\t').at(0));
  }
  c.expect(labels == std::vector<std::string>{"all", "no-border", "no-intermediate", "only-border"},
           "ablation table rows");

  const auto queries = synthetic::planted(40, 25, kMaxClusterProximity, 99);
  CAConfig cfg;
  cfg.rng_seed = 9;
  const auto runs = ablation(queries, 5, cfg);
  double only_border = 0.0, no_border = 0.0;
  for (const auto& r : runs) {
    if (r.label == "only-border") only_border = r.pooled.map;
    if (r.label == "no-border") no_border = r.pooled.map;
  }
  c.expect(only_border > no_border,
           "only-border MAP " + std::to_string(only_border) + " vs no-border " + std::to_string(no_border));
  std::cout << "  synthetic border signal: only-border MAP " << only_border << ", no-border " << no_border << '\n';
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Check&)>>> criteria = {
      {"relatedness matches path enumeration", relatedness},
      {"expansion matches enumeration and grows with L", expansion},
      {"louvain recovers two cliques at maximum Q", clustering},
      {"pagerank and betweenness match dense oracles", centrality},
      {"metrics reproduce hand values", metrics},
      {"coordinate ascent learns the planted feature", learning},
      {"toy pipeline ranks planted gists in the top 3", end_to_end},
      {"pipeline output is deterministic", determinism},
      {"feature-set ablation runs", ablation_harness},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Check c;
    try {
      criteria[i].second(c);
    } catch (const std::exception& e) {
      c.expect(false, std::string("exception: ") + e.what());
    }
    const bool ok = c.failures == 0;
    std::cout << (ok ? "PASS" : "FAIL") << " criterion " << (i + 1) << ": " << criteria[i].first;
    if (!ok) std::cout << " (" << c.failures << " failures; first: " << c.first.str() << ")";
    std::cout << std::endl;
    failed += ok ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
