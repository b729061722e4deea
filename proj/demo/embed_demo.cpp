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

// End-to-end walkthrough on a synthetic scale-free graph: core selection,
// partitioning, core training, propagation, and a small evaluation, all
// in-process through the library API.

#include <cstdio>

#include "sepal/blocs.hpp"
#include "sepal/core_select.hpp"
#include "sepal/eval.hpp"
#include "sepal/propagate.hpp"
#include "sepal/stats.hpp"
#include "sepal/synthetic.hpp"
#include "sepal/train.hpp"
#include "sepal/triple_store.hpp"

int main() {
  using namespace sepal;

  TripleStore base = preferential_attachment_graph(2000, 3, 7, 4);
  TripleStore store = base.largest_connected_component().add_inverse_relations();
  std::printf("graph: %zu entities, %zu relations, %zu triples\n", store.n_entities(),
              store.n_relations(), store.n_triples());

  const GraphStats gs = graph_stats(store);
  std::printf("stats: avg degree %.2f, mspl %.2f, diameter %zu\n", gs.avg_degree, gs.mspl,
              gs.diameter);

  const CoreSubgraph core = select_core(store, CoreStrategy::hybrid, 0.1, 0.05);
  std::printf("core: %zu entities, %zu triples, %zu/%zu relations covered\n",
              core.entities.size(), core.triple_indices.size(), core.n_relations_covered(),
              core.relation_coverage.size());

  const Partition part = partition(store, core, 0.7, 400);
  const PartitionStats ps = partition_stats(store, part);
  std::printf("partition: %zu subgraphs, max size %zu, coverage %.3f, replication %.3f\n",
              ps.n_subgraphs, ps.max_size, ps.coverage, ps.replication_factor);

  TrainConfig tc;
  tc.op = Operator::distmult;
  tc.dim = 32;
  tc.epochs = 30;
  tc.batch_size = 256;
  tc.negatives = 10;
  tc.seed = 7;
  const TrainResult trained = train_core(store, core, tc);
  std::printf("train: %zu epochs, loss %.4f -> %.4f\n", trained.epoch_loss.size(),
              trained.epoch_loss.front(), trained.epoch_loss.back());

  EmbeddingMatrix emb = init_embeddings(store.n_entities(), trained.model.entity,
                                        trained.entity_ids);
  PropagationConfig pc{static_cast<std::size_t>(2.5 * gs.mspl) + 1, 1.0};
  const PropagationReport report = propagate_all(store, part, trained.entity_ids, emb,
                                                 trained.model.relation, tc.op, pc);
  std::printf("propagate: T=%zu, %zu zero rows left, peak resident rows %zu\n", report.steps,
              report.zero_rows_remaining, report.peak_resident_rows);

  EmbeddingModel model;
  model.op = tc.op;
  model.dim = tc.dim;
  model.entity = std::move(emb);
  model.relation = trained.model.relation;
  TripleStore plain = store.strip_inverse_relations();
  const SplitResult split = stratify(plain, 0.9, 0.05, 0.05, 7);
  EvalConfig ec;
  ec.n_negatives = 200;
  ec.seed = 7;
  const EvalMetrics metrics = link_prediction_eval(plain, split.test, model, ec);
  std::printf("eval: %zu test triples, MRR %.4f, Hits@10 %.4f, MR %.1f\n", metrics.n_evaluated,
              metrics.mrr, metrics.hits.at(10), metrics.mr);
  return 0;
}
