#pragma once

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "gist/candidates.hpp"
#include "gist/clustering.hpp"
#include "gist/cross_validation.hpp"
#include "gist/expander.hpp"
#include "gist/features.hpp"
#include "gist/graph_view.hpp"
#include "gist/kg.hpp"
#include "gist/linker.hpp"
#include "gist/metrics.hpp"
#include "gist/ranker.hpp"
#include "gist/relatedness.hpp"
#include "gist/retrieval.hpp"
#include "gist/rng.hpp"
#include "gist/run_files.hpp"

namespace gist {

enum class Baseline { Ql, MaxCluster, RandomSeeds };

inline std::string_view to_string(Baseline b) {
  switch (b) {
    case Baseline::Ql: return "ql";
    case Baseline::MaxCluster: return "max_cluster";
    case Baseline::RandomSeeds: return "random_seeds";
  }
  return "ql";
}

inline Baseline parse_baseline(std::string_view s) {
  for (const Baseline b : {Baseline::Ql, Baseline::MaxCluster, Baseline::RandomSeeds}) {
    if (to_string(b) == s) return b;
  }
  throw Error("unknown baseline '" + std::string(s) + "'");
}

struct PipelineConfig {
  std::filesystem::path nodes;
  std::filesystem::path edges;
  std::filesystem::path queries;
  std::filesystem::path qrels;
  std::filesystem::path out_dir = "out";
  std::filesystem::path model;  // ranks with this model instead of cross-validating

  LinkOptions linking;
  RelatednessParams relatedness;
  ExpansionConfig expansion;
  CandidateParams candidates;
  double mu = TextIndex::kDefaultMu;
  Analyzer analyzer;
  CAConfig ca;
  std::size_t folds = 5;
  std::uint64_t rng_seed = 42;
  FeatureSet feature_set = FeatureSet::All;
  Baseline baseline = Baseline::Ql;
  bool louvain_shuffle = false;
  std::size_t metric_k = 10;
  bool core_only = false;  // grade 5 only
  std::size_t threads = 0;  // 0: hardware concurrency
  bool dump = false;        // layer, cluster and candidate dumps
  bool ablation = false;    // also cross-validate all four feature sets

  int grade_threshold() const { return core_only ? Judgments::kCoreGrade : Judgments::kRelevantGrade; }

  void validate() const {
    relatedness.validate();
    expansion.validate();
    ca.validate();
    if (candidates.top_k < 1) throw Error("top_k must be >= 1");
    if (!(mu > 0.0)) throw Error("mu must be > 0");
    if (folds < 2) throw Error("folds must be >= 2");
    if (metric_k < 1) throw Error("k must be >= 1");
  }
};

inline nlohmann::ordered_json to_json(const PipelineConfig& c) {
  nlohmann::ordered_json j;
  j["nodes"] = c.nodes.string();
  j["edges"] = c.edges.string();
  j["queries"] = c.queries.string();
  j["qrels"] = c.qrels.string();
  j["out_dir"] = c.out_dir.string();
  j["model"] = c.model.string();
  j["match_categories"] = c.linking.match_categories;
  j["alpha"] = c.relatedness.alpha;
  j["k_paths"] = c.relatedness.k_paths;
  j["path_len_cap"] = c.relatedness.path_len_cap;
  j["max_path_len"] = c.expansion.max_path_len;
  j["border_hops"] = c.expansion.border_hops;
  j["degree_cap"] = c.expansion.degree_cap ? nlohmann::ordered_json(*c.expansion.degree_cap) : nullptr;
  j["directed"] = c.expansion.directed;
  j["top_k"] = c.candidates.top_k;
  j["global_cap"] = c.candidates.global_cap ? nlohmann::ordered_json(*c.candidates.global_cap) : nullptr;
  j["mu"] = c.mu;
  j["stopwords"] = c.analyzer.stopwords;
  j["stem"] = c.analyzer.stem;
  j["ca_restarts"] = c.ca.restarts;
  j["ca_max_sweeps"] = c.ca.max_sweeps;
  j["ca_step_base"] = c.ca.step_base;
  j["ca_step_scale"] = c.ca.step_scale;
  j["ca_steps"] = c.ca.steps_per_direction;
  j["ca_tolerance"] = c.ca.tolerance;
  j["normalize"] = c.ca.normalize;
  j["folds"] = c.folds;
  j["seed"] = c.rng_seed;
  j["feature_set"] = std::string(to_string(c.feature_set));
  j["baseline"] = std::string(to_string(c.baseline));
  j["louvain_shuffle"] = c.louvain_shuffle;
  j["k"] = c.metric_k;
  j["core"] = c.core_only;
  j["dump"] = c.dump;
  j["ablation"] = c.ablation;
  return j;
}

/// Overwrites the fields present in `j`; unknown keys are an error.
inline void apply_json(PipelineConfig& c, const nlohmann::json& j) {
  if (!j.is_object()) throw Error("config must be a JSON object");
  const auto opt_size = [](const nlohmann::json& v) -> std::optional<std::size_t> {
    if (v.is_null()) return std::nullopt;
    return v.get<std::size_t>();
  };
  for (const auto& [key, v] : j.items()) {
    try {
      if (key == "nodes") c.nodes = v.get<std::string>();
      else if (key == "edges") c.edges = v.get<std::string>();
      else if (key == "queries") c.queries = v.get<std::string>();
      else if (key == "qrels") c.qrels = v.get<std::string>();
      else if (key == "out_dir") c.out_dir = v.get<std::string>();
      else if (key == "model") c.model = v.get<std::string>();
      else if (key == "match_categories") c.linking.match_categories = v.get<bool>();
      else if (key == "alpha") c.relatedness.alpha = v.get<double>();
      else if (key == "k_paths") c.relatedness.k_paths = v.get<std::size_t>();
      else if (key == "path_len_cap") c.relatedness.path_len_cap = v.get<std::size_t>();
      else if (key == "max_path_len") c.expansion.max_path_len = v.get<std::size_t>();
      else if (key == "border_hops") c.expansion.border_hops = v.get<std::size_t>();
      else if (key == "degree_cap") c.expansion.degree_cap = opt_size(v);
      else if (key == "directed") c.expansion.directed = v.get<bool>();
      else if (key == "top_k") c.candidates.top_k = v.get<std::size_t>();
      else if (key == "global_cap") c.candidates.global_cap = opt_size(v);
      else if (key == "mu") c.mu = v.get<double>();
      else if (key == "stopwords") c.analyzer.stopwords = v.get<bool>();
      else if (key == "stem") c.analyzer.stem = v.get<bool>();
      else if (key == "ca_restarts") c.ca.restarts = v.get<std::size_t>();
      else if (key == "ca_max_sweeps") c.ca.max_sweeps = v.get<std::size_t>();
      else if (key == "ca_step_base") c.ca.step_base = v.get<double>();
      else if (key == "ca_step_scale") c.ca.step_scale = v.get<double>();
      else if (key == "ca_steps") c.ca.steps_per_direction = v.get<std::size_t>();
      else if (key == "ca_tolerance") c.ca.tolerance = v.get<double>();
      else if (key == "normalize") c.ca.normalize = v.get<bool>();
      else if (key == "folds") c.folds = v.get<std::size_t>();
      else if (key == "seed") c.rng_seed = v.get<std::uint64_t>();
      else if (key == "feature_set") c.feature_set = parse_feature_set(v.get<std::string>());
      else if (key == "baseline") c.baseline = parse_baseline(v.get<std::string>());
      else if (key == "louvain_shuffle") c.louvain_shuffle = v.get<bool>();
      else if (key == "k") c.metric_k = v.get<std::size_t>();
      else if (key == "core") c.core_only = v.get<bool>();
      else if (key == "dump") c.dump = v.get<bool>();
      else if (key == "ablation") c.ablation = v.get<bool>();
      else throw Error("unknown config key '" + key + "'");
    } catch (const nlohmann::json::exception& e) {
      throw Error("config key '" + key + "': " + e.what());
    }
  }
}

inline void load_config_file(PipelineConfig& c, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(path.string() + ": " + e.what());
  }
  apply_json(c, j);
}

/// Everything computed for one query. `error` is set when a stage threw;
/// the later fields are then empty.
struct QueryArtifacts {
  GistQuery query;
  LinkResult links;
  LayeredNodeSets layers;
  ClusterSet clusters;
  CandidateSet candidates;
  std::vector<QlRanked> ql;
  std::vector<FeatureRow> rows;
  std::vector<std::string> warnings;
  std::optional<std::string> error;
};

/// Link, expand, cluster, select candidates and extract features.
inline QueryArtifacts process_query(const KnowledgeGraph& g, const TextIndex& idx, const GistQuery& q,
                                    const PipelineConfig& cfg) {
  QueryArtifacts a;
  a.query = q;
  try {
    a.links = link(g, q, cfg.linking);
    for (const auto* list : {&a.links.labels, &a.links.mentions}) {
      for (const StringLink& s : *list) {
        if (!s.linked()) a.warnings.push_back("query " + q.id + ": '" + s.text + "' did not link");
      }
    }
    if (a.links.seeds.empty()) {
      a.warnings.push_back("query " + q.id + ": no linkable strings, empty candidate list");
      return a;
    }
    a.layers = expand(g, std::span<const NodeId>(a.links.seeds), cfg.expansion);
    const GraphView view(g, a.layers.border_graph);
    PairwiseRelatedness rel(view, cfg.relatedness);
    const WeightedGraph wg = build_similarity_graph(a.layers, rel);
    a.clusters = louvain(wg, LouvainOptions{cfg.louvain_shuffle, derive_seed(cfg.rng_seed, "louvain:" + q.id)});
    a.candidates = select_candidates(a.layers, a.clusters, rel, cfg.candidates);
    a.ql = ql_rank(idx, q, a.candidates.candidates);
    a.rows = extract_features(g, a.layers, a.clusters, a.candidates, a.ql);
  } catch (const std::exception& e) {
    a.error = e.what();
    a.rows.clear();
  }
  return a;
}

/// Runs `fn(i)` for i in [0, n) on at most `threads` workers.
inline void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  }
}

/// Processes queries in parallel; the result is in ascending query-id order.
inline std::vector<QueryArtifacts> process_queries(const KnowledgeGraph& g, const TextIndex& idx,
                                                   std::vector<GistQuery> queries, const PipelineConfig& cfg) {
  std::sort(queries.begin(), queries.end(), [](const GistQuery& a, const GistQuery& b) { return a.id < b.id; });
  std::vector<QueryArtifacts> out(queries.size());
  parallel_for(queries.size(), cfg.threads, [&](std::size_t i) { out[i] = process_query(g, idx, queries[i], cfg); });
  return out;
}

/// Problems collected during a command; any entry means exit status 2.
struct Diagnostics {
  std::vector<std::string> warnings;

  void add(std::string w) { warnings.push_back(std::move(w)); }
  void take(const QueryArtifacts& a) {
    for (const auto& w : a.warnings) add(w);
    if (a.error) add("query " + a.query.id + " failed: " + *a.error);
  }
};

struct Inputs {
  KnowledgeGraph graph;
  std::vector<GistQuery> queries;
  std::optional<Judgments> qrels;
};

inline Inputs load_inputs(const PipelineConfig& cfg, Diagnostics& diag, bool need_qrels) {
  if (cfg.nodes.empty() || cfg.edges.empty()) throw Error("--nodes and --edges are required");
  if (cfg.queries.empty()) throw Error("--queries is required");
  Inputs in{load_graph(cfg.nodes, cfg.edges), {}, std::nullopt};
  QueryFile qf = read_queries(cfg.queries);
  for (auto& p : qf.problems) diag.add(std::move(p));
  in.queries = std::move(qf.queries);
  if (!cfg.qrels.empty()) {
    in.qrels = read_qrels(cfg.qrels);
  } else if (need_qrels) {
    throw Error("--qrels is required");
  }
  return in;
}

inline std::vector<QueryArtifacts> run_stages(const Inputs& in, const PipelineConfig& cfg, Diagnostics& diag) {
  const TextIndex idx(in.graph, cfg.mu, cfg.analyzer);
  std::vector<QueryArtifacts> arts = process_queries(in.graph, idx, in.queries, cfg);
  for (const auto& a : arts) diag.take(a);
  return arts;
}

// Debug dumps.

inline void write_layers(std::ostream& out, const QueryArtifacts& a) {
  const std::pair<char, const std::set<NodeId>*> layers[] = {
      {'S', &a.layers.seeds}, {'I', &a.layers.intermediates}, {'B', &a.layers.borders}};
  for (const auto& [tag, nodes] : layers) {
    for (const NodeId v : *nodes) out << a.query.id << '\t' << tag << '\t' << v.value << '\n';
  }
}

inline void write_clusters(std::ostream& out, const QueryArtifacts& a) {
  for (std::size_t c = 0; c < a.clusters.clusters.size(); ++c) {
    for (const NodeId v : a.clusters.clusters[c]) out << a.query.id << '\t' << c << '\t' << v.value << '\n';
  }
}

inline void write_candidates(std::ostream& out, const QueryArtifacts& a) {
  for (const NodeId v : a.candidates.candidates) {
    const std::vector<double>& prox = a.candidates.proximity_of(v);
    for (std::size_t c = 0; c < prox.size(); ++c) {
      out << a.query.id << '\t' << v.value << '\t' << c << '\t' << text::format_real(prox[c]) << '\n';
    }
  }
}

inline void write_links(std::ostream& out, const QueryArtifacts& a) {
  const auto rows = [&](const std::vector<StringLink>& links, std::string_view source) {
    for (const StringLink& s : links) {
      out << a.query.id << '\t' << source << '\t' << text::escape_field(s.text) << '\t';
      if (!s.linked()) out << '-';
      for (std::size_t i = 0; i < s.nodes.size(); ++i) out << (i ? "|" : "") << s.nodes[i].value;
      out << '\t' << (s.via_disambiguation ? "disambiguation" : "exact") << '\n';
    }
  };
  rows(a.links.labels, "label");
  rows(a.links.mentions, "mention");
}

template <typename Writer>
void dump_all(const std::filesystem::path& path, std::string_view header, const std::vector<QueryArtifacts>& arts,
              Writer&& w) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << header << '\n';
  for (const auto& a : arts) {
    if (!a.error) w(out, a);
  }
}

inline constexpr std::string_view kLayersHeader = "# query_id\tlayer\tnode_id";
inline constexpr std::string_view kClustersHeader = "# query_id\tcluster\tnode_id";
inline constexpr std::string_view kCandidatesHeader = "# query_id\tnode_id\tcluster\tsigma_bar";
inline constexpr std::string_view kLinksHeader = "# query_id\tsource\ttext\tnodes\tvia";

// Ranking.

inline std::vector<TrainingQuery> training_queries(const std::vector<QueryArtifacts>& arts, const Judgments& qrels,
                                                   int threshold) {
  std::vector<TrainingQuery> out;
  for (const auto& a : arts) {
    if (a.error || a.rows.empty() || !qrels.has_query(a.query.id)) continue;
    out.push_back({a.query.id, a.rows, qrels.relevant(a.query.id, threshold)});
  }
  return out;
}

struct PipelineOutcome {
  std::map<std::string, std::vector<RankedNode>> run;
  LinearModel model;
  MetricSummary metrics;
  std::vector<CrossValidationResult> ablation;
};

/// Scores the run with queries lacking a relevant candidate left out.
inline MetricSummary score_run(const std::map<std::string, std::vector<RankedNode>>& run,
                               std::span<const TrainingQuery> judged, std::size_t k) {
  MetricSummary s;
  for (const TrainingQuery& q : judged) {
    if (!q.has_relevant_candidate()) {
      s.excluded.push_back(q.id);
      continue;
    }
    const auto it = run.find(q.id);
    evaluate_query(s, q.id, node_order(it->second), q.relevant, k);
  }
  s.pool();
  return s;
}

inline PipelineOutcome rank_queries(const std::vector<QueryArtifacts>& arts, const std::optional<Judgments>& qrels,
                                    const PipelineConfig& cfg) {
  PipelineOutcome out;
  const std::vector<TrainingQuery> judged =
      qrels ? training_queries(arts, *qrels, cfg.grade_threshold()) : std::vector<TrainingQuery>{};
  std::optional<CrossValidationResult> cv;
  if (!cfg.model.empty()) {
    out.model = load_model(cfg.model);
  } else {
    if (!qrels) throw Error("training needs --qrels or a --model");
    CAConfig ca = cfg.ca;
    ca.rng_seed = derive_seed(cfg.rng_seed, "cross-validation");
    cv = cross_validate(judged, cfg.folds, ca, cfg.feature_set, cfg.metric_k);
    ca.rng_seed = derive_seed(cfg.rng_seed, "final-model");
    out.model = train_coordinate_ascent(judged, ca, feature_mask(cfg.feature_set)).model;
    if (cfg.ablation) out.ablation = ablation(judged, cfg.folds, ca, cfg.metric_k);
  }
  for (const auto& a : arts) {
    if (a.error) continue;
    if (cv) {
      if (const auto it = cv->rankings.find(a.query.id); it != cv->rankings.end()) {
        out.run.emplace(a.query.id, it->second);
        continue;
      }
    }
    out.run.emplace(a.query.id, rank(out.model, a.rows));
  }
  out.metrics = score_run(out.run, judged, cfg.metric_k);
  return out;
}

inline void write_ablation(const std::vector<CrossValidationResult>& runs, std::size_t k,
                           const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "# feature_set\tmap\tndcg@" << k << "\tp@" << k << "\tqueries\n";
  for (const auto& r : runs) {
    out << r.label << '\t' << text::format_real(r.pooled.map) << '\t'
        << text::format_real(r.pooled.ndcg) << '\t' << text::format_real(r.pooled.precision) << '\t'
        << r.pooled.per_query.size() << '\n';
  }
}

inline void write_config(const PipelineConfig& cfg, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << to_json(cfg).dump(2) << '\n';
}

/// The full pipeline. Writes run.tsv, model.tsv (when trained), report.tsv,
/// summary.txt, features.tsv, config.json and optional dumps into out_dir.
inline PipelineOutcome run_pipeline(const PipelineConfig& cfg, Diagnostics& diag) {
  cfg.validate();
  const Inputs in = load_inputs(cfg, diag, cfg.model.empty());
  std::filesystem::create_directories(cfg.out_dir);
  write_config(cfg, cfg.out_dir / "config.json");
  const std::vector<QueryArtifacts> arts = run_stages(in, cfg, diag);

  {
    std::ofstream f(cfg.out_dir / "features.tsv");
    write_features_header(f);
    for (const auto& a : arts) write_feature_rows(f, a.query.id, a.rows);
  }
  if (cfg.dump) {
    dump_all(cfg.out_dir / "links.tsv", kLinksHeader, arts, write_links);
    dump_all(cfg.out_dir / "layers.tsv", kLayersHeader, arts, write_layers);
    dump_all(cfg.out_dir / "clusters.tsv", kClustersHeader, arts, write_clusters);
    dump_all(cfg.out_dir / "candidates.tsv", kCandidatesHeader, arts, write_candidates);
  }

  PipelineOutcome out = rank_queries(arts, in.qrels, cfg);
  write_run(out.run, "gist-" + std::string(to_string(cfg.feature_set)), cfg.out_dir / "run.tsv");
  if (cfg.model.empty()) save_model(out.model, cfg.out_dir / "model.tsv");
  write_report(out.metrics, cfg.metric_k, cfg.out_dir / "report.tsv");
  {
    std::ofstream s(cfg.out_dir / "summary.txt");
    s << "run: gist-" << to_string(cfg.feature_set) << '\n';
    s << "queries: " << arts.size() << ", failed: "
      << std::count_if(arts.begin(), arts.end(), [](const QueryArtifacts& a) { return a.error.has_value(); }) << '\n';
    write_summary(s, out.metrics, cfg.metric_k);
  }
  if (!out.ablation.empty()) write_ablation(out.ablation, cfg.metric_k, cfg.out_dir / "ablation.tsv");
  return out;
}

/// Baseline rankings over the same per-query artifacts.
inline std::map<std::string, std::vector<RankedNode>> run_baseline(const std::vector<QueryArtifacts>& arts,
                                                                   const PipelineConfig& cfg) {
  std::map<std::string, std::vector<RankedNode>> run;
  for (const auto& a : arts) {
    if (a.error) continue;
    std::vector<RankedNode> ranked;
    switch (cfg.baseline) {
      case Baseline::Ql:
        for (const QlRanked& r : a.ql) ranked.push_back({r.node, r.reciprocal_rank});
        break;
      case Baseline::MaxCluster:
        for (const FeatureRow& r : a.rows) ranked.push_back({r.node, r.x[kMaxClusterProximity]});
        sort_ranking(ranked);
        break;
      case Baseline::RandomSeeds: {
        std::vector<NodeId> seeds(a.links.seeds);
        std::mt19937_64 rng(derive_seed(derive_seed(cfg.rng_seed, "random-seeds"), a.query.id));
        portable_shuffle(seeds, rng);
        for (std::size_t i = 0; i < seeds.size(); ++i) ranked.push_back({seeds[i], 1.0 / static_cast<double>(i + 1)});
        break;
      }
    }
    run.emplace(a.query.id, std::move(ranked));
  }
  return run;
}

}  // namespace gist
