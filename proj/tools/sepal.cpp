// Copyright 2026 the sepal authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sepal/blocs.hpp"
#include "sepal/checkpoint.hpp"
#include "sepal/config.hpp"
#include "sepal/core_select.hpp"
#include "sepal/error.hpp"
#include "sepal/eval.hpp"
#include "sepal/pipeline.hpp"
#include "sepal/propagate.hpp"
#include "sepal/stats.hpp"
#include "sepal/train.hpp"
#include "sepal/triple_store.hpp"

namespace {

using nlohmann::json;

struct GlobalOpts {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::optional<std::string> out_dir;
};

sepal::PipelineConfig resolve_config(const GlobalOpts& g) {
  sepal::PipelineConfig cfg;
  if (!g.config_path.empty()) cfg = sepal::load_config(g.config_path);
  if (g.seed) cfg.train.seed = *g.seed;
  if (g.threads) cfg.threads = *g.threads;
  if (g.out_dir) cfg.out_dir = *g.out_dir;
  return cfg;
}

void print_json(const json& j) { std::cout << j.dump(2) << "\n"; }

sepal::TripleStore load_store(const std::string& path) {
  return sepal::TripleStore::load_cache(path);
}

json stats_to_json(const sepal::GraphStats& s) {
  return json{{"n_entities", s.n_entities},
              {"n_relations", s.n_relations},
              {"n_triples", s.n_triples},
              {"density", s.density},
              {"lcc_fraction", s.lcc_fraction},
              {"max_degree", s.max_degree},
              {"avg_degree", s.avg_degree},
              {"mspl", s.mspl},
              {"diameter", s.diameter},
              {"path_stats_approximate", s.path_stats_approximate},
              {"mspl_roots", s.mspl_roots}};
}

int run_app(int argc, char** argv) {
  CLI::App app{"sepal: memory-bounded knowledge-graph embedding"};
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--config", g.config_path, "pipeline config file (JSON)");
  app.add_option("--seed", g.seed, "override the training seed");
  app.add_option("--threads", g.threads, "override the thread count");
  app.add_option("--out-dir", g.out_dir, "override the artifact directory");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "parse triples and build the graph cache");
  std::string ingest_input;
  std::string ingest_format;
  bool ingest_raw = false;
  ingest->add_option("input", ingest_input, "triple file (head<TAB>relation<TAB>tail)");
  ingest->add_option("--format", ingest_format, "tab | whitespace");
  ingest->add_flag("--raw", ingest_raw,
                   "keep the graph as parsed (skip LCC extraction and inverse relations)");
  ingest->callback([&] {
    sepal::PipelineConfig cfg = resolve_config(g);
    if (!ingest_input.empty()) cfg.input = ingest_input;
    if (!ingest_format.empty()) cfg.format = ingest_format;
    if (cfg.input.empty()) throw sepal::ConfigError("ingest needs an input file");
    const sepal::TripleFormat fmt = sepal::triple_format_from_name(cfg.format);
    sepal::TripleStore store =
        ingest_raw ? sepal::TripleStore::ingest_file(cfg.input, fmt)
                   : sepal::prepare_store(cfg.input, fmt);
    std::filesystem::create_directories(cfg.out_dir);
    const std::string path = cfg.out_dir + "/graph.spkg";
    store.save_cache(path);
    print_json(json{{"cache", path},
                    {"raw", ingest_raw},
                    {"n_entities", store.n_entities()},
                    {"n_relations", store.n_relations()},
                    {"n_triples", store.n_triples()}});
  });

  // stats
  auto* stats = app.add_subcommand("stats", "graph statistics (path stats on the LCC)");
  std::string stats_input, stats_store, stats_format;
  std::size_t stats_samples = 0;
  stats->add_option("input", stats_input, "triple file to analyze");
  stats->add_option("--store", stats_store, "graph cache to analyze instead of a triple file");
  stats->add_option("--format", stats_format, "tab | whitespace");
  stats->add_option("--mspl-samples", stats_samples,
                    "BFS root count for path stats (0 = automatic)");
  stats->callback([&] {
    sepal::PipelineConfig cfg = resolve_config(g);
    if (!stats_format.empty()) cfg.format = stats_format;
    sepal::TripleStore store = [&] {
      if (!stats_store.empty()) return load_store(stats_store);
      const std::string input = !stats_input.empty() ? stats_input : cfg.input;
      if (input.empty()) throw sepal::ConfigError("stats needs an input file or --store");
      return sepal::TripleStore::ingest_file(input,
                                             sepal::triple_format_from_name(cfg.format));
    }();
    print_json(stats_to_json(
        sepal::graph_stats(store, stats_samples, cfg.train.seed, cfg.threads)));
  });

  // core
  auto* core_cmd = app.add_subcommand("core", "select the core subgraph");
  std::string core_store, core_strategy;
  std::optional<double> core_eta_n, core_eta_e;
  core_cmd->add_option("--store", core_store, "graph cache (default <out-dir>/graph.spkg)");
  core_cmd->add_option("--strategy", core_strategy, "degree | hybrid");
  core_cmd->add_option("--eta-n", core_eta_n, "entity fraction");
  core_cmd->add_option("--eta-e", core_eta_e, "per-relation edge fraction (hybrid)");
  core_cmd->callback([&] {
    sepal::PipelineConfig cfg = resolve_config(g);
    if (!core_strategy.empty()) cfg.core.strategy = core_strategy;
    if (core_eta_n) cfg.core.eta_n = *core_eta_n;
    if (core_eta_e) cfg.core.eta_e = *core_eta_e;
    sepal::validate_config_core(cfg);
    const std::string store_path =
        !core_store.empty() ? core_store : cfg.out_dir + "/graph.spkg";
    sepal::TripleStore store = load_store(store_path);
    const sepal::CoreStrategy strategy = cfg.core.strategy == "hybrid"
                                             ? sepal::CoreStrategy::hybrid
                                             : sepal::CoreStrategy::degree;
    const sepal::CoreSubgraph core =
        sepal::select_core(store, strategy, cfg.core.eta_n, cfg.core.eta_e);
    std::filesystem::create_directories(cfg.out_dir);
    sepal::write_core_artifacts(cfg.out_dir, store, core);
    print_json(json{{"core", cfg.out_dir + "/core.json"},
                    {"strategy", cfg.core.strategy},
                    {"eta_n", cfg.core.eta_n},
                    {"eta_e", cfg.core.eta_e},
                    {"n_entities", core.entities.size()},
                    {"n_triples", core.triple_indices.size()},
                    {"relations_covered", core.n_relations_covered()},
                    {"relations_total", core.relation_coverage.size()}});
  });

  // partition
  auto* part_cmd = app.add_subcommand("partition", "generate outer subgraphs");
  // The flag --h needs the single-letter name the automatic -h alias claims.
  part_cmd->set_help_flag("--help", "print this help message and exit");
  std::string part_store, part_core;
  std::optional<double> part_h;
  std::optional<std::size_t> part_m;
  part_cmd->add_option("--store", part_store, "graph cache (default <out-dir>/graph.spkg)");
  part_cmd->add_option("--core", part_core, "core sidecar (default <out-dir>/core.json)");
  part_cmd->add_option("--h", part_h, "diffusion assignment fraction, in (0, 1)");
  part_cmd->add_option("--m", part_m, "maximum subgraph size");
  part_cmd->callback([&] {
    sepal::PipelineConfig cfg = resolve_config(g);
    if (part_h) cfg.blocs.h = *part_h;
    if (part_m) cfg.blocs.m = *part_m;
    sepal::validate_config_blocs(cfg);
    const std::string store_path =
        !part_store.empty() ? part_store : cfg.out_dir + "/graph.spkg";
    const std::string core_path = !part_core.empty() ? part_core : cfg.out_dir + "/core.json";
    sepal::TripleStore store = load_store(store_path);
    const sepal::CoreSubgraph core = sepal::read_core_artifact(core_path, store);
    const sepal::Partition part =
        sepal::partition(store, core, cfg.blocs.h, cfg.blocs.m, cfg.train.seed);
    const sepal::PartitionStats stats = sepal::partition_stats(store, part);
    sepal::write_partition_artifacts(cfg.out_dir + "/partition", part, stats);
    print_json(json{{"manifest", cfg.out_dir + "/partition/manifest.json"},
                    {"n_subgraphs", stats.n_subgraphs},
                    {"replication_factor", stats.replication_factor},
                    {"max_size", stats.max_size},
                    {"coverage", stats.coverage},
                    {"connected_fraction", stats.connected_fraction}});
  });

  // train
  auto* train_cmd = app.add_subcommand("train", "train core embeddings");
  std::string train_store, train_core_path, train_loss_csv, train_operator;
  std::optional<std::size_t> train_dim, train_epochs, train_batch, train_negatives;
  std::optional<double> train_lr;
  train_cmd->add_option("--store", train_store, "graph cache (default <out-dir>/graph.spkg)");
  train_cmd->add_option("--core", train_core_path, "core sidecar (default <out-dir>/core.json)");
  train_cmd->add_option("--operator", train_operator, "distmult | transe | rotate");
  train_cmd->add_option("--dim", train_dim, "embedding dimension");
  train_cmd->add_option("--epochs", train_epochs, "training epochs");
  train_cmd->add_option("--batch-size", train_batch, "positives per batch");
  train_cmd->add_option("--negatives", train_negatives, "corruptions per positive");
  train_cmd->add_option("--lr", train_lr, "Adam learning rate");
  train_cmd->add_option("--loss-csv", train_loss_csv, "write the per-epoch loss curve here");
  train_cmd->callback([&] {
    sepal::PipelineConfig cfg = resolve_config(g);
    if (!train_operator.empty()) cfg.train.op = train_operator;
    if (train_dim) cfg.train.d = *train_dim;
    if (train_epochs) cfg.train.n_epoch = *train_epochs;
    if (train_batch) cfg.train.b = *train_batch;
    if (train_negatives) cfg.train.p = *train_negatives;
    if (train_lr) cfg.train.lr = *train_lr;
    sepal::validate_config_train(cfg);
    const std::string store_path =
        !train_store.empty() ? train_store : cfg.out_dir + "/graph.spkg";
    const std::string core_path =
        !train_core_path.empty() ? train_core_path : cfg.out_dir + "/core.json";
    sepal::TripleStore store = load_store(store_path);
    const sepal::CoreSubgraph core = sepal::read_core_artifact(core_path, store);
    const sepal::TrainResult trained =
        sepal::train_core(store, core, sepal::train_config_from(cfg));
    std::vector<std::string> core_labels, relation_labels;
    for (sepal::EntityId u : trained.entity_ids) core_labels.push_back(store.entity_label(u));
    for (sepal::RelationId r = 0; r < store.n_relations(); ++r)
      relation_labels.push_back(store.relation_label(r));
    std::filesystem::create_directories(cfg.out_dir);
    const std::string checkpoint = cfg.out_dir + "/core_embeddings.spem";
    sepal::save_checkpoint(checkpoint, trained.model, core_labels, relation_labels);
    if (!train_loss_csv.empty()) sepal::write_loss_csv(train_loss_csv, trained.epoch_loss);
    print_json(json{{"checkpoint", checkpoint},
                    {"operator", cfg.train.op},
                    {"d", cfg.train.d},
                    {"epochs", cfg.train.n_epoch},
                    {"n_core_entities", trained.entity_ids.size()},
                    {"final_loss",
                     trained.epoch_loss.empty() ? 0.0 : trained.epoch_loss.back()}});
  });

  // propagate
  auto* prop_cmd = app.add_subcommand("propagate", "spread core embeddings over the graph");
  std::string prop_store, prop_checkpoint, prop_manifest;
  std::optional<std::size_t> prop_steps;
  std::optional<double> prop_alpha;
  prop_cmd->add_option("--store", prop_store, "graph cache (default <out-dir>/graph.spkg)");
  prop_cmd->add_option("--core-checkpoint", prop_checkpoint,
                       "core checkpoint (default <out-dir>/core_embeddings.spem)");
  prop_cmd->add_option("--partition", prop_manifest,
                       "partition manifest (default <out-dir>/partition/manifest.json)");
  prop_cmd->add_option("--steps", prop_steps, "propagation rounds T (default: derived)");
  prop_cmd->add_option("--alpha", prop_alpha, "message step size");
  prop_cmd->callback([&] {
    sepal::PipelineConfig cfg = resolve_config(g);
    if (prop_steps) cfg.propagate.T = *prop_steps;
    if (prop_alpha) cfg.propagate.alpha = *prop_alpha;
    if (cfg.propagate.alpha <= 0.0)
      throw sepal::ConfigError("config field propagate.alpha: must be > 0");
    const std::string store_path =
        !prop_store.empty() ? prop_store : cfg.out_dir + "/graph.spkg";
    const std::string cp_path =
        !prop_checkpoint.empty() ? prop_checkpoint : cfg.out_dir + "/core_embeddings.spem";
    const std::string manifest_path =
        !prop_manifest.empty() ? prop_manifest : cfg.out_dir + "/partition/manifest.json";
    sepal::TripleStore store = load_store(store_path);
    const sepal::Checkpoint core_cp = sepal::load_checkpoint(cp_path);
    std::vector<sepal::EntityId> core_ids;
    core_ids.reserve(core_cp.entity_labels.size());
    for (const std::string& label : core_cp.entity_labels) {
      const auto id = store.find_entity(label);
      if (!id)
        throw sepal::DataError("checkpoint entity not present in the store: " + label);
      core_ids.push_back(*id);
    }
    const sepal::Partition part =
        sepal::read_partition_artifacts(manifest_path, store, core_ids);

    const std::size_t T = cfg.propagate.T >= 1
                              ? cfg.propagate.T
                              : sepal::resolve_propagation_steps(cfg, store);
    sepal::PropagationConfig pc{T, cfg.propagate.alpha};
    sepal::EmbeddingModel full;
    full.op = core_cp.model.op;
    full.dim = core_cp.model.dim;
    full.entity = sepal::init_embeddings(store.n_entities(), core_cp.model.entity, core_ids);
    full.relation = core_cp.model.relation;
    const sepal::PropagationReport report = sepal::propagate_all(
        store, part, core_ids, full.entity, full.relation, full.op, pc);

    std::vector<std::string> entity_labels;
    for (sepal::EntityId u = 0; u < store.n_entities(); ++u)
      entity_labels.push_back(store.entity_label(u));
    const std::string out_cp = cfg.out_dir + "/embeddings.spem";
    sepal::save_checkpoint(out_cp, full, entity_labels, core_cp.relation_labels);
    json pj{{"T", report.steps},
            {"alpha", report.alpha},
            {"zero_rows_remaining", report.zero_rows_remaining},
            {"subgraphs_processed", report.subgraphs_processed},
            {"peak_resident_rows", report.peak_resident_rows},
            {"warnings", report.warnings}};
    sepal::detail::write_json_file(cfg.out_dir + "/propagation.json", pj);
    pj["checkpoint"] = out_cp;
    print_json(pj);
  });

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "link-prediction metrics on a held-out split");
  std::string eval_store, eval_checkpoint, eval_ranks_csv, eval_split = "test";
  std::vector<double> eval_ratios;
  std::optional<std::size_t> eval_negatives;
  eval_cmd->add_option("--store", eval_store, "graph cache (default <out-dir>/graph.spkg)");
  eval_cmd->add_option("--checkpoint", eval_checkpoint,
                       "embedding checkpoint (default <out-dir>/embeddings.spem)");
  eval_cmd->add_option("--ratios", eval_ratios, "train/valid/test fractions")
      ->expected(3);
  eval_cmd->add_option("--n-negatives", eval_negatives, "negative candidates per triple");
  eval_cmd->add_option("--split", eval_split, "test | valid");
  eval_cmd->add_option("--ranks-csv", eval_ranks_csv, "write per-triple ranks here");
  eval_cmd->callback([&] {
    sepal::PipelineConfig cfg = resolve_config(g);
    if (!eval_ratios.empty())
      cfg.eval.ratios = {eval_ratios[0], eval_ratios[1], eval_ratios[2]};
    if (eval_negatives) cfg.eval.n_negatives = *eval_negatives;
    if (eval_split != "test" && eval_split != "valid")
      throw sepal::ConfigError("--split must be test or valid");
    sepal::validate_config_eval(cfg);
    const std::string store_path =
        !eval_store.empty() ? eval_store : cfg.out_dir + "/graph.spkg";
    const std::string cp_path =
        !eval_checkpoint.empty() ? eval_checkpoint : cfg.out_dir + "/embeddings.spem";
    sepal::TripleStore store = load_store(store_path);
    sepal::TripleStore stripped =
        store.augmented() ? store.strip_inverse_relations() : std::move(store);
    const sepal::Checkpoint cp = sepal::load_checkpoint(cp_path);
    if (cp.model.entity.rows() != stripped.n_entities())
      throw sepal::DimensionMismatchError(
          "checkpoint entity count does not match the store");
    const sepal::SplitResult split =
        sepal::stratify(stripped, cfg.eval.ratios[0], cfg.eval.ratios[1], cfg.eval.ratios[2],
                        cfg.train.seed);
    const std::vector<std::uint32_t>& indices =
        eval_split == "test" ? split.test : split.valid;
    sepal::EvalConfig ec;
    ec.n_negatives = cfg.eval.n_negatives;
    ec.seed = cfg.train.seed;
    ec.threads = cfg.threads;
    const sepal::EvalMetrics metrics =
        sepal::link_prediction_eval(stripped, indices, cp.model, ec);
    if (!eval_ranks_csv.empty()) {
      std::ofstream out(eval_ranks_csv);
      if (!out) throw sepal::DataError("cannot open for writing: " + eval_ranks_csv);
      out << "head,relation,tail,rank\n";
      for (std::size_t i = 0; i < indices.size(); ++i) {
        const sepal::Triple& t = stripped.triple(indices[i]);
        out << stripped.entity_label(t.head) << ',' << stripped.relation_label(t.relation)
            << ',' << stripped.entity_label(t.tail) << ',' << metrics.ranks[i] << '\n';
      }
    }
    json hits = json::object();
    for (const auto& [k, v] : metrics.hits) hits[std::to_string(k)] = v;
    print_json(json{{"split", eval_split},
                    {"n_evaluated", metrics.n_evaluated},
                    {"n_candidates", metrics.n_candidates},
                    {"mrr", metrics.mrr},
                    {"mr", metrics.mr},
                    {"hits", hits},
                    {"moved_for_connectivity", split.moved_for_connectivity}});
  });

  // export
  auto* export_cmd = app.add_subcommand("export", "export an embedding checkpoint");
  std::string export_checkpoint, export_format = "tsv", export_output, export_labels;
  export_cmd->add_option("checkpoint", export_checkpoint, "checkpoint to export")->required();
  export_cmd->add_option("--format", export_format, "tsv | binary");
  export_cmd->add_option("--output", export_output, "output file")->required();
  export_cmd->add_option("--labels", export_labels,
                         "label list file: emit only matching entities");
  export_cmd->callback([&] {
    const sepal::Checkpoint cp = sepal::load_checkpoint(export_checkpoint);
    if (export_format == "binary") {
      sepal::save_checkpoint(export_output, cp.model, cp.entity_labels, cp.relation_labels);
      print_json(json{{"output", export_output},
                      {"format", "binary"},
                      {"rows_written", cp.model.entity.rows()}});
      return;
    }
    if (export_format != "tsv")
      throw sepal::ConfigError("--format must be tsv or binary, got " + export_format);
    std::optional<std::vector<std::string>> filter;
    if (!export_labels.empty()) {
      std::ifstream in(export_labels);
      if (!in) throw sepal::DataError("cannot open: " + export_labels);
      filter.emplace();
      std::string line;
      while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) filter->push_back(line);
      }
    }
    const sepal::ExportReport report =
        sepal::export_tsv(export_output, cp, filter ? &*filter : nullptr);
    json out{{"output", export_output},
             {"format", "tsv"},
             {"rows_written", report.rows_written}};
    if (filter) {
      out["unmatched_labels"] = report.unmatched_labels;
      out["unmatched_file"] = export_output + ".unmatched";
    }
    print_json(out);
  });

  // run
  auto* run_cmd = app.add_subcommand("run", "full pipeline from a config file");
  std::string run_input;
  run_cmd->add_option("input", run_input, "triple file (overrides the config's input)");
  run_cmd->callback([&] {
    sepal::PipelineConfig cfg = resolve_config(g);
    if (!run_input.empty()) cfg.input = run_input;
    if (cfg.input.empty())
      throw sepal::ConfigError("run needs an input file (config field input or argument)");
    const sepal::PipelineResult result = sepal::run_pipeline(cfg);
    json timings = json::array();
    for (const sepal::PhaseTiming& t : result.timings)
      timings.push_back({{"phase", t.phase}, {"seconds", t.seconds}});
    json out{{"checkpoint", result.checkpoint_path},
             {"out_dir", cfg.out_dir},
             {"T", result.resolved_T},
             {"n_subgraphs", result.partition.n_subgraphs},
             {"replication_factor", result.partition.replication_factor},
             {"coverage", result.partition.coverage},
             {"zero_rows_remaining", result.propagation.zero_rows_remaining},
             {"timings", timings}};
    if (result.eval_ran) {
      json hits = json::object();
      for (const auto& [k, v] : result.metrics.hits) hits[std::to_string(k)] = v;
      out["metrics"] = json{{"mrr", result.metrics.mrr},
                            {"mr", result.metrics.mr},
                            {"hits", hits},
                            {"n_evaluated", result.metrics.n_evaluated}};
    }
    print_json(out);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_app(argc, argv);
  } catch (const sepal::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const sepal::DivergedError& e) {
    std::cerr << "divergence: " << e.what() << "\n";
    return 4;
  } catch (const sepal::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const sepal::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
