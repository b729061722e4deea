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

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "sepal/core_select.hpp"
#include "sepal/rng.hpp"
#include "sepal/synthetic.hpp"
#include "sepal/train.hpp"
#include "sepal/triple_store.hpp"

using sepal::CoreSubgraph;
using sepal::Operator;
using sepal::TrainConfig;
using sepal::TrainResult;
using sepal::Triple;
using sepal::TripleStore;

namespace {

CoreSubgraph whole_graph_core(const TripleStore& s) {
  return sepal::select_core_degree(s, 1.0);
}

double mean_positive_score(const TripleStore& s, const CoreSubgraph& core,
                           const TrainResult& r) {
  std::vector<std::uint32_t> local(s.n_entities(), UINT32_MAX);
  for (std::uint32_t i = 0; i < r.entity_ids.size(); ++i) local[r.entity_ids[i]] = i;
  double sum = 0.0;
  for (std::uint32_t idx : core.triple_indices) {
    const Triple& t = s.triple(idx);
    sum += sepal::score(r.model.op, r.model.entity.row(local[t.head]),
                        r.model.relation.row(t.relation), r.model.entity.row(local[t.tail]));
  }
  return sum / static_cast<double>(core.triple_indices.size());
}

}  // namespace

TEST_CASE("negative sampling corrupts exactly one endpoint with fixed parity") {
  std::vector<Triple> batch{{3, 1, 4}, {0, 0, 2}};
  sepal::Rng rng{11};
  const auto negs = sepal::sample_negatives(batch, 6, 10, rng);
  REQUIRE(negs.size() == 12);
  for (std::size_t i = 0; i < negs.size(); ++i) {
    const Triple& pos = batch[i / 6];
    const Triple& neg = negs[i];
    REQUIRE(neg.relation == pos.relation);
    if (i % 6 % 2 == 0) {
      REQUIRE(neg.head == pos.head);  // even j corrupts the tail
      REQUIRE(neg.tail < 10);
    } else {
      REQUIRE(neg.tail == pos.tail);  // odd j corrupts the head
      REQUIRE(neg.head < 10);
    }
  }
}

TEST_CASE("negative sampling is reproducible for a fixed generator state") {
  std::vector<Triple> batch{{1, 0, 2}, {2, 1, 3}, {0, 0, 1}};
  sepal::Rng a{42}, b{42};
  REQUIRE(sepal::sample_negatives(batch, 7, 50, a) ==
          sepal::sample_negatives(batch, 7, 50, b));
}

TEST_CASE("corrupted entities are uniform") {
  std::vector<Triple> batch(2000, Triple{0, 0, 1});
  sepal::Rng rng{123};
  const std::size_t n = 1000;
  const auto negs = sepal::sample_negatives(batch, 100, n, rng);
  std::vector<std::size_t> counts(n, 0);
  std::size_t draws = 0;
  for (std::size_t i = 0; i < negs.size(); ++i) {
    if (i % 100 % 2 != 0) continue;  // tail-corruption draws only
    ++counts[negs[i].tail];
    ++draws;
  }
  const double expect = static_cast<double>(draws) / static_cast<double>(n);
  double chi2 = 0.0;
  for (std::size_t c : counts) {
    const double dlt = static_cast<double>(c) - expect;
    chi2 += dlt * dlt / expect;
  }
  REQUIRE(chi2 < oracle::chi_square_critical(n - 1));
}

TEST_CASE("config validation") {
  const TripleStore s = sepal::preferential_attachment_graph(30, 2, 1, 1);
  const CoreSubgraph core = whole_graph_core(s);
  TrainConfig cfg;
  cfg.batch_size = 0;
  REQUIRE_THROWS_AS(sepal::train_core(s, core, cfg), sepal::ConfigError);
  cfg = TrainConfig{};
  cfg.learning_rate = 0.0;
  REQUIRE_THROWS_AS(sepal::train_core(s, core, cfg), sepal::ConfigError);
}

TEST_CASE("zero epochs returns the untouched initialization") {
  const TripleStore s = sepal::preferential_attachment_graph(40, 2, 5, 2);
  const CoreSubgraph core = whole_graph_core(s);
  TrainConfig cfg;
  cfg.dim = 16;
  cfg.epochs = 0;
  cfg.seed = 9;
  const TrainResult r = sepal::train_core(s, core, cfg);
  const auto init = sepal::init_model(cfg.op, core.size(), s.n_relations(), cfg.dim, 9);
  REQUIRE(r.model.entity.data() == init.entity.data());
  REQUIRE(r.model.relation.data() == init.relation.data());
  REQUIRE(r.epoch_loss.empty());
}

TEST_CASE("entity rows stay on the unit sphere") {
  const TripleStore s = sepal::preferential_attachment_graph(60, 3, 15, 2);
  const CoreSubgraph core = whole_graph_core(s);
  TrainConfig cfg;
  cfg.dim = 24;
  cfg.epochs = 5;
  cfg.batch_size = 64;
  cfg.negatives = 4;
  cfg.seed = 3;
  for (Operator op : {Operator::distmult, Operator::transe, Operator::rotate}) {
    cfg.op = op;
    const TrainResult r = sepal::train_core(s, core, cfg);
    for (std::size_t i = 0; i < r.model.entity.rows(); ++i)
      REQUIRE(sepal::row_norm(r.model.entity.row(i)) == Catch::Approx(1.0).margin(1e-5));
  }
}

TEST_CASE("rotate relation rows keep unit modulus") {
  const TripleStore s = sepal::preferential_attachment_graph(50, 2, 8, 3);
  const CoreSubgraph core = whole_graph_core(s);
  TrainConfig cfg;
  cfg.op = Operator::rotate;
  cfg.dim = 16;
  cfg.epochs = 4;
  cfg.batch_size = 32;
  cfg.negatives = 4;
  const TrainResult r = sepal::train_core(s, core, cfg);
  for (std::size_t i = 0; i < r.model.relation.rows(); ++i) {
    const auto row = r.model.relation.row(i);
    for (std::size_t k = 0; k + 1 < row.size(); k += 2) {
      const double mod = std::sqrt(static_cast<double>(row[k]) * row[k] +
                                   static_cast<double>(row[k + 1]) * row[k + 1]);
      REQUIRE(mod == Catch::Approx(1.0).margin(1e-5));
    }
  }
}

TEST_CASE("relations absent from the core keep their initialization") {
  std::istringstream in("a r b\nb r c\nc q d\n");
  const TripleStore s = TripleStore::ingest_stream(in, sepal::TripleFormat::whitespace);
  CoreSubgraph core;
  core.entities = {0, 1, 2};      // a, b, c
  core.triple_indices = {0, 1};   // both r triples; q appears only outside
  core.relation_coverage = {1, 0};
  TrainConfig cfg;
  cfg.dim = 8;
  cfg.epochs = 10;
  cfg.batch_size = 2;
  cfg.negatives = 2;
  cfg.seed = 21;
  const TrainResult r = sepal::train_core(s, core, cfg);
  const auto init = sepal::init_model(cfg.op, 3, 2, cfg.dim, 21);
  const auto got = r.model.relation.row(1);
  const auto expect = init.relation.row(1);
  REQUIRE(std::vector<float>(got.begin(), got.end()) ==
          std::vector<float>(expect.begin(), expect.end()));
  // the trained relation moved
  const auto moved = r.model.relation.row(0);
  const auto start = init.relation.row(0);
  bool any = false;
  for (std::size_t k = 0; k < moved.size(); ++k) any |= moved[k] != start[k];
  REQUIRE(any);
}

TEST_CASE("training separates planted triples from random corruptions") {
  const auto kg = sepal::planted_factorization_kg(200, 3, 32, 2, 31);
  const CoreSubgraph core = whole_graph_core(kg.store);
  TrainConfig cfg;
  cfg.dim = 32;
  cfg.epochs = 100;
  cfg.batch_size = 256;
  // One corruption per positive: summed negative terms otherwise dominate the
  // objective on a graph this small and push every score down uniformly.
  cfg.negatives = 1;
  cfg.learning_rate = 5e-3;
  cfg.seed = 4;
  const TrainResult r = sepal::train_core(kg.store, core, cfg);
  REQUIRE(r.epoch_loss.back() < r.epoch_loss.front());

  const double pos_mean = mean_positive_score(kg.store, core, r);
  sepal::Rng rng{777};
  std::vector<double> neg_scores;
  for (int i = 0; i < 100; ++i) {
    const auto h = rng.uniform_below(r.entity_ids.size());
    const auto t = rng.uniform_below(r.entity_ids.size());
    const auto rel = rng.uniform_below(kg.store.n_relations());
    neg_scores.push_back(sepal::score(cfg.op, r.model.entity.row(h),
                                      r.model.relation.row(rel), r.model.entity.row(t)));
  }
  const auto [neg_mean, neg_sd] = oracle::mean_stddev(neg_scores);
  REQUIRE(pos_mean >= neg_mean + 2.0 * neg_sd);
}

TEST_CASE("training is bit-deterministic in the seed") {
  const TripleStore s = sepal::preferential_attachment_graph(80, 3, 19, 2);
  const CoreSubgraph core = sepal::select_core_degree(s, 0.5);
  TrainConfig cfg;
  cfg.dim = 16;
  cfg.epochs = 6;
  cfg.batch_size = 32;
  cfg.negatives = 6;
  cfg.seed = 12;
  const TrainResult a = sepal::train_core(s, core, cfg);
  const TrainResult b = sepal::train_core(s, core, cfg);
  REQUIRE(a.model.entity.data() == b.model.entity.data());
  REQUIRE(a.model.relation.data() == b.model.relation.data());
  REQUIRE(a.epoch_loss == b.epoch_loss);

  cfg.seed = 13;
  const TrainResult c = sepal::train_core(s, core, cfg);
  REQUIRE(a.model.entity.data() != c.model.entity.data());
}

TEST_CASE("an absurd learning rate raises DivergedError") {
  const TripleStore s = sepal::preferential_attachment_graph(40, 2, 2, 1);
  const CoreSubgraph core = whole_graph_core(s);
  TrainConfig cfg;
  cfg.dim = 8;
  cfg.epochs = 5;
  cfg.batch_size = 1;
  cfg.negatives = 2;
  cfg.learning_rate = 1e39;
  REQUIRE_THROWS_AS(sepal::train_core(s, core, cfg), sepal::DivergedError);
}
