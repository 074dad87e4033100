// gistkg: command-line front end for the gist detection pipeline.
//
// Exit status: 0 success, 1 error, 2 completed with warnings.

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>

#include "gist/fixtures.hpp"
#include "gist/pipeline.hpp"

namespace {

using namespace gist;

constexpr int kExitError = 1;
constexpr int kExitWarnings = 2;

struct Options {
  PipelineConfig cfg;
  std::string config_file;
  std::string feature_set = "all";
  std::string baseline = "ql";
  std::string out;  // output file; stdout when empty
  std::string features;
  std::string run;
  std::string report;
  bool quiet = false;
};

void add_input_flags(CLI::App* sub, Options& o, bool queries) {
  sub->add_option("--nodes", o.cfg.nodes, "node file");
  sub->add_option("--edges", o.cfg.edges, "edge file");
  if (queries) sub->add_option("--queries", o.cfg.queries, "query file");
  sub->add_option("--config", o.config_file, "JSON config; its values override flags");
  sub->add_flag("--quiet", o.quiet, "do not echo the effective config");
}

void add_stage_flags(CLI::App* sub, Options& o) {
  auto& c = o.cfg;
  sub->add_flag("--match-categories", c.linking.match_categories, "link strings to category titles as a fallback");
  sub->add_option("--max-path-len", c.expansion.max_path_len, "longest seed-seed path, in edges");
  sub->add_option("--border-hops", c.expansion.border_hops, "border radius around the intermediate graph");
  sub->add_option("--degree-cap", c.expansion.degree_cap, "skip hubs above this degree as path interiors");
  sub->add_flag("--directed", c.expansion.directed, "follow stored edge direction only");
  sub->add_option("--alpha", c.relatedness.alpha, "path length decay");
  sub->add_option("--k-paths", c.relatedness.k_paths, "paths summed per node pair");
  sub->add_option("--path-len-cap", c.relatedness.path_len_cap, "longest relatedness path, in edges");
  sub->add_flag("--louvain-shuffle", c.louvain_shuffle, "seeded node order in local moving");
  sub->add_option("--top-k", c.candidates.top_k, "border candidates kept per cluster");
  sub->add_option("--global-cap", c.candidates.global_cap, "cap on border candidates per query");
  sub->add_option("--mu", c.mu, "Dirichlet prior");
  sub->add_flag("--stopwords", c.analyzer.stopwords, "drop English stopwords");
  sub->add_flag("--stem", c.analyzer.stem, "strip plurals");
  sub->add_option("--seed", c.rng_seed, "run seed");
  sub->add_option("--threads", c.threads, "worker threads, 0 for all cores");
}

void add_training_flags(CLI::App* sub, Options& o) {
  auto& c = o.cfg;
  sub->add_option("--qrels", c.qrels, "graded judgments");
  sub->add_option("--folds", c.folds, "cross-validation folds");
  sub->add_option("--feature-set", o.feature_set, "all | no-border | no-intermediate | only-border");
  sub->add_option("--restarts", c.ca.restarts, "coordinate ascent restarts");
  sub->add_option("--max-sweeps", c.ca.max_sweeps, "sweeps per restart");
  sub->add_option("--step-base", c.ca.step_base, "smallest weight step");
  sub->add_option("--step-scale", c.ca.step_scale, "step growth factor");
  sub->add_option("--steps", c.ca.steps_per_direction, "steps probed per direction");
  sub->add_option("--tolerance", c.ca.tolerance, "minimum MAP gain per sweep");
  sub->add_option("--normalize", c.ca.normalize, "min-max scale features (true|false)");
  sub->add_option("--k", c.metric_k, "metric cutoff");
  sub->add_flag("--core", c.core_only, "only grade 5 counts as relevant");
  sub->add_flag("--ablation", c.ablation, "cross-validate all four feature sets");
}

/// Flags first, then the config file on top; echoes the result.
void finalize(Options& o) {
  o.cfg.feature_set = parse_feature_set(o.feature_set);
  o.cfg.baseline = parse_baseline(o.baseline);
  if (!o.config_file.empty()) load_config_file(o.cfg, o.config_file);
  o.cfg.validate();
  if (!o.quiet) std::cerr << "effective config: " << to_json(o.cfg).dump() << '\n';
}

/// Output file, or stdout when no path is given.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw Error("cannot write " + path);
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

int report(const Diagnostics& diag) {
  for (const auto& w : diag.warnings) std::cerr << "warning: " << w << '\n';
  return diag.warnings.empty() ? 0 : kExitWarnings;
}

int cmd_load_check(const Options& o) {
  const KnowledgeGraph g = load_graph(o.cfg.nodes, o.cfg.edges);
  std::size_t articles = 0, categories = 0, disamb = 0;
  for (const NodeRecord& r : g.nodes()) {
    (r.kind == NodeKind::Article ? articles : categories)++;
    if (r.is_disambiguation) ++disamb;
  }
  std::cout << "nodes\t" << g.size() << "\narticles\t" << articles << "\ncategories\t" << categories
            << "\ndisambiguation\t" << disamb << "\nedges\t" << g.edge_count() << "\nedge_types\t" << g.edge_type_count()
            << '\n';
  return 0;
}

template <typename Writer>
int cmd_dump(Options& o, std::string_view header, Writer&& write) {
  Diagnostics diag;
  const Inputs in = load_inputs(o.cfg, diag, false);
  const auto arts = run_stages(in, o.cfg, diag);
  Output out(o.out);
  out.stream() << header << '\n';
  for (const auto& a : arts) {
    if (!a.error) write(out.stream(), a);
  }
  return report(diag);
}

int cmd_features(Options& o) {
  Diagnostics diag;
  const Inputs in = load_inputs(o.cfg, diag, false);
  const auto arts = run_stages(in, o.cfg, diag);
  Output out(o.out);
  write_features_header(out.stream());
  for (const auto& a : arts) write_feature_rows(out.stream(), a.query.id, a.rows);
  return report(diag);
}

std::vector<TrainingQuery> load_training(const Options& o) {
  if (o.features.empty() || o.cfg.qrels.empty()) throw Error("--features and --qrels are required");
  const auto rows = read_features(o.features);
  const Judgments qrels = read_qrels(o.cfg.qrels);
  std::vector<TrainingQuery> out;
  for (const auto& [q, r] : rows) {
    if (qrels.has_query(q)) out.push_back({q, r, qrels.relevant(q, o.cfg.grade_threshold())});
  }
  return out;
}

int cmd_train(Options& o) {
  const std::vector<TrainingQuery> queries = load_training(o);
  CAConfig ca = o.cfg.ca;
  ca.rng_seed = derive_seed(o.cfg.rng_seed, "final-model");
  const TrainResult r = train_coordinate_ascent(queries, ca, feature_mask(o.cfg.feature_set));
  if (o.out.empty()) throw Error("--out is required");
  save_model(r.model, o.out);
  std::cout << "training MAP: " << text::format_real(r.train_map) << '\n';
  ca.rng_seed = derive_seed(o.cfg.rng_seed, "cross-validation");
  const CrossValidationResult cv = cross_validate(queries, o.cfg.folds, ca, o.cfg.feature_set, o.cfg.metric_k);
  std::cout << o.cfg.folds << "-fold cross-validation (" << to_string(o.cfg.feature_set) << ")\n";
  write_summary(std::cout, cv.pooled, o.cfg.metric_k);
  if (!o.report.empty()) write_report(cv.pooled, o.cfg.metric_k, o.report);
  if (o.cfg.ablation) {
    const auto runs = ablation(queries, o.cfg.folds, ca, o.cfg.metric_k);
    const std::string path = o.out + ".ablation.tsv";
    write_ablation(runs, o.cfg.metric_k, path);
    std::cout << "ablation table: " << path << '\n';
  }
  return 0;
}

int cmd_rank(Options& o) {
  if (o.features.empty() || o.cfg.model.empty()) throw Error("--features and --model are required");
  const LinearModel m = load_model(o.cfg.model);
  const auto rows = read_features(o.features);
  Output out(o.out);
  for (const auto& [q, r] : rows) write_run_block(out.stream(), q, rank(m, r), "gist-model");
  return 0;
}

int cmd_pipeline(Options& o) {
  Diagnostics diag;
  const auto start = std::chrono::steady_clock::now();
  const PipelineOutcome res = run_pipeline(o.cfg, diag);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_summary(std::cout, res.metrics, o.cfg.metric_k);
  std::cout << "output: " << o.cfg.out_dir.string() << '\n';
  std::cerr << "elapsed: " << secs << " s\n";
  return report(diag);
}

int cmd_baseline(Options& o) {
  Diagnostics diag;
  const Inputs in = load_inputs(o.cfg, diag, false);
  const auto arts = run_stages(in, o.cfg, diag);
  const auto run = run_baseline(arts, o.cfg);
  Output out(o.out);
  for (const auto& [q, ranked] : run) write_run_block(out.stream(), q, ranked, "baseline-" + std::string(to_string(o.cfg.baseline)));
  return report(diag);
}

int cmd_eval(Options& o) {
  if (o.run.empty() || o.cfg.qrels.empty()) throw Error("--run and --qrels are required");
  const RunFile run = read_run(o.run);
  const Judgments qrels = read_qrels(o.cfg.qrels);
  const MetricSummary s = evaluate_run(run, qrels, o.cfg.grade_threshold(), o.cfg.metric_k);
  if (!o.report.empty()) write_report(s, o.cfg.metric_k, o.report);
  write_summary(std::cout, s, o.cfg.metric_k);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gist detection over a typed knowledge graph"};
  app.require_subcommand(1);
  Options o;

  auto* load_check = app.add_subcommand("load-check", "validate and summarize the graph files");
  add_input_flags(load_check, o, false);

  auto* link_cmd = app.add_subcommand("link", "link query strings to nodes");
  auto* expand_cmd = app.add_subcommand("expand", "seed, intermediate and border layers");
  auto* cluster_cmd = app.add_subcommand("cluster", "clusters of the intermediate graph");
  auto* cand_cmd = app.add_subcommand("candidates", "candidate nodes per query");
  auto* feat_cmd = app.add_subcommand("features", "feature rows per candidate");
  for (auto* sub : {link_cmd, expand_cmd, cluster_cmd, cand_cmd, feat_cmd}) {
    add_input_flags(sub, o, true);
    add_stage_flags(sub, o);
    sub->add_option("--out", o.out, "output file (default stdout)");
  }

  auto* train_cmd = app.add_subcommand("train", "fit a ranking model on a features file");
  train_cmd->add_option("--features", o.features, "features file")->required();
  train_cmd->add_option("--out", o.out, "model file")->required();
  train_cmd->add_option("--report", o.report, "cross-validation report TSV");
  train_cmd->add_option("--seed", o.cfg.rng_seed, "run seed");
  train_cmd->add_option("--config", o.config_file, "JSON config; its values override flags");
  train_cmd->add_flag("--quiet", o.quiet, "do not echo the effective config");
  add_training_flags(train_cmd, o);

  auto* rank_cmd = app.add_subcommand("rank", "rank candidates with a model");
  rank_cmd->add_option("--features", o.features, "features file")->required();
  rank_cmd->add_option("--model", o.cfg.model, "model file")->required();
  rank_cmd->add_option("--out", o.out, "run file (default stdout)");
  rank_cmd->add_flag("--quiet", o.quiet, "do not echo the effective config");

  auto* pipe_cmd = app.add_subcommand("pipeline", "run every stage, train or apply a model, write a run");
  add_input_flags(pipe_cmd, o, true);
  add_stage_flags(pipe_cmd, o);
  add_training_flags(pipe_cmd, o);
  pipe_cmd->add_option("--out-dir", o.cfg.out_dir, "output directory");
  pipe_cmd->add_option("--model", o.cfg.model, "apply this model instead of cross-validating");
  pipe_cmd->add_flag("--dump", o.cfg.dump, "write link, layer, cluster and candidate dumps");

  auto* base_cmd = app.add_subcommand("baseline", "baseline rankings");
  add_input_flags(base_cmd, o, true);
  add_stage_flags(base_cmd, o);
  base_cmd->add_option("--which", o.baseline, "ql | max_cluster | random_seeds");
  base_cmd->add_option("--out", o.out, "run file (default stdout)");

  auto* eval_cmd = app.add_subcommand("eval", "score a run file against judgments");
  eval_cmd->add_option("--run", o.run, "run file")->required();
  eval_cmd->add_option("--qrels", o.cfg.qrels, "judgments")->required();
  eval_cmd->add_option("--k", o.cfg.metric_k, "metric cutoff");
  eval_cmd->add_flag("--core", o.cfg.core_only, "only grade 5 counts as relevant");
  eval_cmd->add_option("--report", o.report, "report TSV");

  auto* fix_cmd = app.add_subcommand("gen-fixtures", "write the bundled toy graph, queries and judgments");
  fix_cmd->add_option("--out", o.out, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (!fix_cmd->parsed() && !eval_cmd->parsed()) finalize(o);
    if (load_check->parsed()) return cmd_load_check(o);
    if (link_cmd->parsed()) {
      Diagnostics diag;
      const Inputs in = load_inputs(o.cfg, diag, false);
      Output out(o.out);
      out.stream() << kLinksHeader << '\n';
      for (const GistQuery& q : in.queries) {
        QueryArtifacts a;
        a.query = q;
        a.links = link(in.graph, q, o.cfg.linking);
        if (a.links.seeds.empty()) diag.add("query " + q.id + ": no linkable strings");
        write_links(out.stream(), a);
      }
      return report(diag);
    }
    if (expand_cmd->parsed()) return cmd_dump(o, kLayersHeader, write_layers);
    if (cluster_cmd->parsed()) return cmd_dump(o, kClustersHeader, write_clusters);
    if (cand_cmd->parsed()) return cmd_dump(o, kCandidatesHeader, write_candidates);
    if (feat_cmd->parsed()) return cmd_features(o);
    if (train_cmd->parsed()) return cmd_train(o);
    if (rank_cmd->parsed()) return cmd_rank(o);
    if (pipe_cmd->parsed()) return cmd_pipeline(o);
    if (base_cmd->parsed()) return cmd_baseline(o);
    if (eval_cmd->parsed()) return cmd_eval(o);
    if (fix_cmd->parsed()) {
      write_toy_fixture(o.out);
      std::cout << "wrote toy fixture to " << o.out << '\n';
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
