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

#pragma once

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sepal/blocs.hpp"
#include "sepal/checkpoint.hpp"
#include "sepal/config.hpp"
#include "sepal/core_select.hpp"
#include "sepal/error.hpp"
#include "sepal/eval.hpp"
#include "sepal/propagate.hpp"
#include "sepal/stats.hpp"
#include "sepal/train.hpp"
#include "sepal/triple_store.hpp"

namespace sepal {

struct PhaseTiming {
  std::string phase;
  double seconds = 0.0;
};

struct PipelineResult {
  std::vector<PhaseTiming> timings;  // core_extraction, subgraph_generation,
                                     // core_embedding, propagation
  std::string checkpoint_path;       // final full-graph checkpoint
  PartitionStats partition;
  PropagationReport propagation;
  std::size_t resolved_T = 0;
  bool eval_ran = false;
  EvalMetrics metrics;               // meaningful only when eval_ran
};

namespace detail {

class PhaseClock {
 public:
  PhaseClock() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path);
  out << content;
}

inline void write_json_file(const std::string& path, const nlohmann::json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("JSON parse error in " + path + ": " + e.what());
  }
  return j;
}

}  // namespace detail

inline TripleFormat triple_format_from_name(const std::string& name) {
  if (name == "tab") return TripleFormat::tab;
  if (name == "whitespace") return TripleFormat::whitespace;
  throw ConfigError("unknown triple format: " + name + " (expected tab or whitespace)");
}

// Ingest phase: parse, keep the largest connected component, add inverse
// relations. The result is the canonical store every later phase works on.
inline TripleStore prepare_store(const std::string& input, TripleFormat fmt) {
  TripleStore raw = TripleStore::ingest_file(input, fmt);
  TripleStore lcc = raw.largest_connected_component();
  return lcc.add_inverse_relations();
}

inline void write_core_artifacts(const std::string& dir, const TripleStore& store,
                                 const CoreSubgraph& core) {
  std::ofstream tsv(dir + "/core.tsv");
  if (!tsv) throw DataError("cannot open for writing: " + dir + "/core.tsv");
  tsv << "# sepal core subgraph v1: induced triples, head<TAB>relation<TAB>tail\n";
  for (std::uint32_t idx : core.triple_indices) {
    const Triple& t = store.triple(idx);
    tsv << store.entity_label(t.head) << '\t' << store.relation_label(t.relation) << '\t'
        << store.entity_label(t.tail) << '\n';
  }

  nlohmann::json j;
  j["version"] = 1;
  j["strategy"] = core.strategy == CoreStrategy::degree ? "degree" : "hybrid";
  j["eta_n"] = core.eta_n;
  j["eta_e"] = core.eta_e;
  j["n_entities"] = core.entities.size();
  j["n_triples"] = core.triple_indices.size();
  j["relations_covered"] = core.n_relations_covered();
  j["relations_total"] = core.relation_coverage.size();
  nlohmann::json labels = nlohmann::json::array();
  for (EntityId u : core.entities) labels.push_back(store.entity_label(u));
  j["entity_labels"] = std::move(labels);
  detail::write_json_file(dir + "/core.json", j);
}

inline CoreSubgraph read_core_artifact(const std::string& path, const TripleStore& store) {
  const nlohmann::json j = detail::read_json_file(path);
  if (!j.contains("entity_labels") || !j["entity_labels"].is_array())
    throw DataError("core sidecar missing entity_labels: " + path);
  CoreSubgraph core;
  core.strategy =
      j.value("strategy", "degree") == "hybrid" ? CoreStrategy::hybrid : CoreStrategy::degree;
  core.eta_n = j.value("eta_n", 0.0);
  core.eta_e = j.value("eta_e", 0.0);
  for (const auto& label : j["entity_labels"]) {
    const auto id = store.find_entity(label.get<std::string>());
    if (!id) throw DataError("core entity not present in the store: " + label.get<std::string>());
    core.entities.push_back(*id);
  }
  std::sort(core.entities.begin(), core.entities.end());
  core.entities.erase(std::unique(core.entities.begin(), core.entities.end()),
                      core.entities.end());
  EntityMask mask(store.n_entities());
  mask.add(core.entities);
  core.triple_indices = induced_triple_indices(store, core.entities, mask);
  core.relation_coverage.assign(store.n_relations(), 0);
  for (std::uint32_t idx : core.triple_indices)
    core.relation_coverage[store.triple(idx).relation] = 1;
  return core;
}

inline void write_partition_artifacts(const std::string& dir, const Partition& part,
                                      const PartitionStats& stats) {
  std::filesystem::create_directories(dir);
  nlohmann::json files = nlohmann::json::array();
  char name[32];
  for (std::size_t i = 0; i < part.subgraphs.size(); ++i) {
    std::snprintf(name, sizeof(name), "subgraph_%04zu.txt", i);
    std::ofstream out(dir + "/" + name);
    if (!out) throw DataError(std::string("cannot open for writing: ") + dir + "/" + name);
    out << "# sepal subgraph v1: one entity id per line\n";
    for (EntityId u : part.subgraphs[i].entities) out << u << '\n';
    files.push_back(name);
  }

  nlohmann::json j;
  j["version"] = 1;
  j["h"] = part.h;
  j["m"] = part.m;
  j["n_entities"] = part.n_entities;
  j["n_subgraphs"] = part.subgraphs.size();
  j["replication_factor"] = stats.replication_factor;
  j["max_size"] = stats.max_size;
  j["coverage"] = stats.coverage;
  j["connected_fraction"] = stats.connected_fraction;
  j["files"] = std::move(files);
  j["warnings"] = part.warnings;
  detail::write_json_file(dir + "/manifest.json", j);
}

inline Partition read_partition_artifacts(const std::string& manifest_path,
                                          const TripleStore& store,
                                          const std::vector<EntityId>& core_ids) {
  const nlohmann::json j = detail::read_json_file(manifest_path);
  Partition part;
  part.h = j.value("h", 0.0);
  part.m = j.value("m", std::size_t{0});
  part.n_entities = j.value("n_entities", store.n_entities());
  if (part.n_entities != store.n_entities())
    throw DataError("partition manifest entity count does not match the store");
  part.core = core_ids;
  const std::filesystem::path base = std::filesystem::path(manifest_path).parent_path();
  if (!j.contains("files") || !j["files"].is_array())
    throw DataError("partition manifest missing files: " + manifest_path);
  for (const auto& f : j["files"]) {
    const std::string path = (base / f.get<std::string>()).string();
    std::ifstream in(path);
    if (!in) throw DataError("cannot open: " + path);
    std::vector<EntityId> members;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      members.push_back(static_cast<EntityId>(std::stoul(line)));
    }
    if (members.empty()) throw DataError("empty subgraph file: " + path);
    for (EntityId u : members)
      if (u >= store.n_entities()) throw DataError("entity id out of range in " + path);
    part.subgraphs.push_back(make_subgraph(std::move(members)));
  }
  return part;
}

inline void write_loss_csv(const std::string& path, const std::vector<double>& epoch_loss) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path);
  out << "epoch,loss\n";
  char buf[48];
  for (std::size_t i = 0; i < epoch_loss.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%zu,%.9g\n", i, epoch_loss[i]);
    out << buf;
  }
}

inline TrainConfig train_config_from(const PipelineConfig& cfg) {
  TrainConfig tc;
  tc.op = operator_from_name(cfg.train.op);
  tc.dim = cfg.train.d;
  tc.epochs = cfg.train.n_epoch;
  tc.batch_size = cfg.train.b;
  tc.negatives = cfg.train.p;
  tc.learning_rate = cfg.train.lr;
  tc.seed = cfg.train.seed;
  return tc;
}

// T = fixed value from the config, or 2.5x the sampled mean shortest path
// length rounded up (at least 1) when the config leaves it at 0.
inline std::size_t resolve_propagation_steps(const PipelineConfig& cfg, const TripleStore& store) {
  if (cfg.propagate.T >= 1) return cfg.propagate.T;
  const GraphStats stats = graph_stats(store, 0, cfg.train.seed, cfg.threads);
  const double t = std::ceil(2.5 * stats.mspl);
  return t < 1.0 ? 1 : static_cast<std::size_t>(t);
}

inline void save_metrics_json(const std::string& path, const EvalMetrics& metrics,
                              const SplitResult& split, const PipelineConfig& cfg) {
  nlohmann::json j;
  j["operator"] = cfg.train.op;
  j["mrr"] = metrics.mrr;
  j["mr"] = metrics.mr;
  nlohmann::json hits = nlohmann::json::object();
  for (const auto& [k, v] : metrics.hits) hits[std::to_string(k)] = v;
  j["hits"] = std::move(hits);
  j["n_evaluated"] = metrics.n_evaluated;
  j["n_candidates"] = metrics.n_candidates;
  j["n_negatives"] = cfg.eval.n_negatives;
  j["split"] = {{"train", split.train.size()},
                {"valid", split.valid.size()},
                {"test", split.test.size()},
                {"moved_for_connectivity", split.moved_for_connectivity}};
  detail::write_json_file(path, j);
}

inline PipelineResult run_pipeline(const PipelineConfig& cfg) {
  validate_config(cfg);
  std::filesystem::create_directories(cfg.out_dir);
  const std::string dir = cfg.out_dir;
  save_config(dir + "/config.json", cfg);

  PipelineResult result;
  TripleStore store = prepare_store(cfg.input, triple_format_from_name(cfg.format));
  store.save_cache(dir + "/graph.spkg");

  detail::PhaseClock core_clock;
  const CoreStrategy strategy =
      cfg.core.strategy == "hybrid" ? CoreStrategy::hybrid : CoreStrategy::degree;
  const CoreSubgraph core = select_core(store, strategy, cfg.core.eta_n, cfg.core.eta_e);
  write_core_artifacts(dir, store, core);
  result.timings.push_back({"core_extraction", core_clock.seconds()});

  detail::PhaseClock partition_clock;
  const Partition part = partition(store, core, cfg.blocs.h, cfg.blocs.m, cfg.train.seed);
  result.partition = partition_stats(store, part);
  write_partition_artifacts(dir + "/partition", part, result.partition);
  result.timings.push_back({"subgraph_generation", partition_clock.seconds()});

  detail::PhaseClock train_clock;
  const TrainResult trained = train_core(store, core, train_config_from(cfg));
  std::vector<std::string> core_labels;
  core_labels.reserve(trained.entity_ids.size());
  for (EntityId u : trained.entity_ids) core_labels.push_back(store.entity_label(u));
  std::vector<std::string> relation_labels;
  relation_labels.reserve(store.n_relations());
  for (RelationId r = 0; r < store.n_relations(); ++r)
    relation_labels.push_back(store.relation_label(r));
  save_checkpoint(dir + "/core_embeddings.spem", trained.model, core_labels, relation_labels);
  write_loss_csv(dir + "/loss.csv", trained.epoch_loss);
  result.timings.push_back({"core_embedding", train_clock.seconds()});

  detail::PhaseClock propagate_clock;
  result.resolved_T = resolve_propagation_steps(cfg, store);
  PropagationConfig pc{result.resolved_T, cfg.propagate.alpha};
  EmbeddingModel full;
  full.op = trained.model.op;
  full.dim = trained.model.dim;
  full.entity = init_embeddings(store.n_entities(), trained.model.entity, trained.entity_ids);
  full.relation = trained.model.relation;
  result.propagation =
      propagate_all(store, part, trained.entity_ids, full.entity, full.relation, full.op, pc);
  std::vector<std::string> entity_labels;
  entity_labels.reserve(store.n_entities());
  for (EntityId u = 0; u < store.n_entities(); ++u) entity_labels.push_back(store.entity_label(u));
  result.checkpoint_path = dir + "/embeddings.spem";
  save_checkpoint(result.checkpoint_path, full, entity_labels, relation_labels);
  nlohmann::json pj;
  pj["T"] = result.propagation.steps;
  pj["alpha"] = result.propagation.alpha;
  pj["zero_rows_remaining"] = result.propagation.zero_rows_remaining;
  pj["subgraphs_processed"] = result.propagation.subgraphs_processed;
  pj["peak_resident_rows"] = result.propagation.peak_resident_rows;
  pj["warnings"] = result.propagation.warnings;
  detail::write_json_file(dir + "/propagation.json", pj);
  result.timings.push_back({"propagation", propagate_clock.seconds()});

  nlohmann::json tj = nlohmann::json::array();
  for (const PhaseTiming& t : result.timings)
    tj.push_back({{"phase", t.phase}, {"seconds", t.seconds}});
  detail::write_json_file(dir + "/timings.json", tj);

  if (cfg.eval.enabled) {
    // Held-out tail prediction on the original relation directions. The split
    // is made after embedding, so the embeddings have seen every triple; the
    // numbers are consistency diagnostics, not generalization estimates.
    TripleStore stripped = store.strip_inverse_relations();
    const SplitResult split = stratify(stripped, cfg.eval.ratios[0], cfg.eval.ratios[1],
                                       cfg.eval.ratios[2], cfg.train.seed);
    EvalConfig ec;
    ec.n_negatives = cfg.eval.n_negatives;
    ec.seed = cfg.train.seed;
    ec.threads = cfg.threads;
    result.metrics = link_prediction_eval(stripped, split.test, full, ec);
    save_metrics_json(dir + "/metrics.json", result.metrics, split, cfg);
    result.eval_ran = true;
  }
  return result;
}

}  // namespace sepal
