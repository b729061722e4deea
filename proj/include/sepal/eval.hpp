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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "sepal/embedding.hpp"
#include "sepal/error.hpp"
#include "sepal/operators.hpp"
#include "sepal/parallel.hpp"
#include "sepal/rng.hpp"
#include "sepal/triple_store.hpp"

namespace sepal {

struct SplitResult {
  std::vector<std::uint32_t> train, valid, test;  // triple indices, ascending
  std::size_t moved_for_connectivity = 0;
};

// Uniform random split by the given fractions, followed by a connectivity
// repair: holdout triples are scanned in stored order and the ones that bridge
// two train components move to train, until the train graph is undirected-
// connected over every entity. A single Kruskal-style pass is exactly the
// repeated move-first-bridging-triple rule, because moving a bridge never
// makes an earlier non-bridge triple a bridge.
inline SplitResult stratify(const TripleStore& store, double train_fraction,
                            double valid_fraction, double test_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0) || valid_fraction < 0.0 || test_fraction < 0.0)
    throw ConfigError("split fractions must be positive (train) and non-negative");
  if (std::abs(train_fraction + valid_fraction + test_fraction - 1.0) > 1e-9)
    throw ConfigError("split fractions must sum to 1");

  const std::size_t n = store.n_triples();
  std::vector<std::uint32_t> shuffled(n);
  for (std::uint32_t i = 0; i < n; ++i) shuffled[i] = i;
  Rng rng = Rng{seed}.fork(0x5b17u);
  rng.shuffle(shuffled);

  const auto n_train = static_cast<std::size_t>(train_fraction * static_cast<double>(n));
  const auto n_valid = static_cast<std::size_t>(valid_fraction * static_cast<double>(n));
  // 0 = train, 1 = valid, 2 = test.
  std::vector<std::uint8_t> bucket(n, 2);
  for (std::size_t i = 0; i < n_train && i < n; ++i) bucket[shuffled[i]] = 0;
  for (std::size_t i = n_train; i < n_train + n_valid && i < n; ++i) bucket[shuffled[i]] = 1;

  std::vector<EntityId> parent(store.n_entities());
  for (EntityId i = 0; i < parent.size(); ++i) parent[i] = i;
  auto find = [&parent](EntityId x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  auto unite = [&](EntityId a, EntityId b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[std::max(a, b)] = std::min(a, b);
    return true;
  };

  SplitResult result;
  for (std::uint32_t i = 0; i < n; ++i)
    if (bucket[i] == 0) unite(store.triple(i).head, store.triple(i).tail);
  for (std::uint32_t i = 0; i < n; ++i) {
    if (bucket[i] == 0) continue;
    if (unite(store.triple(i).head, store.triple(i).tail)) {
      bucket[i] = 0;
      ++result.moved_for_connectivity;
    }
  }
  for (std::uint32_t i = 0; i < n; ++i) {
    (bucket[i] == 0 ? result.train : bucket[i] == 1 ? result.valid : result.test).push_back(i);
  }
  return result;
}

// Expected 1-based position of the target under a uniform random shuffle of
// tied candidates: (#strictly better) + (#tied including the target + 1) / 2.
inline double realistic_rank(std::span<const double> scores, std::size_t target_index) {
  const double target = scores[target_index];
  std::size_t better = 0, tied = 0;
  for (double s : scores) {
    if (s > target) ++better;
    else if (s == target) ++tied;
  }
  return static_cast<double>(better) + (static_cast<double>(tied) + 1.0) / 2.0;
}

struct EvalConfig {
  std::size_t n_negatives = 10000;
  std::vector<std::size_t> hits_at = {1, 10, 50};
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

struct EvalMetrics {
  double mrr = 0.0;
  double mr = 0.0;
  std::map<std::size_t, double> hits;  // k -> Hits@k
  std::size_t n_evaluated = 0;
  std::size_t n_candidates = 0;  // candidate pool size per triple (0 when full)
  std::vector<double> ranks;     // per evaluated triple, eval order
};

// Tail prediction with realistic ranks: each triple's true tail competes
// against n_negatives entities drawn uniformly with replacement (the target
// itself excluded and redrawn), or against every entity when the store is
// small enough. Candidate scores are unfiltered: other true tails are not
// removed. Per-triple derived seed streams keep results independent of thread
// scheduling.
inline EvalMetrics link_prediction_eval(const TripleStore& store,
                                        std::span<const std::uint32_t> eval_indices,
                                        const EmbeddingModel& model, const EvalConfig& cfg) {
  if (model.entity.rows() != store.n_entities())
    throw DimensionMismatchError("embedding table does not cover the store's entities");
  if (model.relation.rows() < store.n_relations())
    throw DimensionMismatchError("relation table does not cover the store's relations");

  const std::size_t n_entities = store.n_entities();
  const bool exhaustive = n_entities <= cfg.n_negatives;
  EvalMetrics metrics;
  metrics.n_evaluated = eval_indices.size();
  metrics.n_candidates = exhaustive ? n_entities : cfg.n_negatives + 1;
  metrics.ranks.assign(eval_indices.size(), 0.0);

  const Rng base = Rng{cfg.seed}.fork(0x4c50u);
  parallel_for(eval_indices.size(), cfg.threads, [&](std::size_t i) {
    const Triple& t = store.triple(eval_indices[i]);
    const auto head = model.entity.row(t.head);
    const auto rel = model.relation.row(t.relation);
    const double target_score = score(model.op, head, rel, model.entity.row(t.tail));

    std::size_t better = 0, tied = 1;  // the target ties with itself
    if (exhaustive) {
      for (EntityId e = 0; e < n_entities; ++e) {
        if (e == t.tail) continue;
        const double s = score(model.op, head, rel, model.entity.row(e));
        if (s > target_score) ++better;
        else if (s == target_score) ++tied;
      }
    } else {
      Rng rng = base.fork(i);
      for (std::size_t j = 0; j < cfg.n_negatives; ++j) {
        EntityId e;
        do {
          e = static_cast<EntityId>(rng.uniform_below(n_entities));
        } while (e == t.tail);
        const double s = score(model.op, head, rel, model.entity.row(e));
        if (s > target_score) ++better;
        else if (s == target_score) ++tied;
      }
    }
    metrics.ranks[i] =
        static_cast<double>(better) + (static_cast<double>(tied) + 1.0) / 2.0;
  });

  for (std::size_t k : cfg.hits_at) metrics.hits[k] = 0.0;
  for (double r : metrics.ranks) {
    metrics.mrr += 1.0 / r;
    metrics.mr += r;
    for (std::size_t k : cfg.hits_at)
      if (r <= static_cast<double>(k)) metrics.hits[k] += 1.0;
  }
  if (!metrics.ranks.empty()) {
    const auto n = static_cast<double>(metrics.ranks.size());
    metrics.mrr /= n;
    metrics.mr /= n;
    for (auto& [k, v] : metrics.hits) v /= n;
  }
  return metrics;
}

struct QueriabilityResult {
  double hits_at_10 = 0.0;
  std::size_t n_probed = 0;   // heads with a known tail for the relation
  std::size_t n_skipped = 0;  // sampled heads without one
};

// Direct-query probe for one relation: for each sampled head with a known
// (head, relation, tail) triple, every entity is scored as a candidate tail
// and the known tail's realistic rank is checked against 10. When a head has
// several known tails the first by triple order is probed.
inline QueriabilityResult queriability_probe(const TripleStore& store,
                                             std::span<const EntityId> heads, RelationId relation,
                                             const EmbeddingModel& model, unsigned threads = 1) {
  if (model.entity.rows() != store.n_entities())
    throw DimensionMismatchError("embedding table does not cover the store's entities");
  std::vector<EntityId> first_tail(store.n_entities(), UINT32_MAX);
  bool seen = false;
  for (const Triple& t : store.triples()) {
    if (t.relation != relation) continue;
    seen = true;
    if (first_tail[t.head] == UINT32_MAX) first_tail[t.head] = t.tail;
  }
  if (!seen)
    throw RelationUnseenError("relation has no triples in the evaluation store: " +
                              store.relation_label(relation));

  std::vector<EntityId> probed;
  QueriabilityResult result;
  for (EntityId u : heads) {
    if (first_tail[u] == UINT32_MAX)
      ++result.n_skipped;
    else
      probed.push_back(u);
  }
  result.n_probed = probed.size();
  if (probed.empty()) return result;

  std::vector<std::uint8_t> hit(probed.size(), 0);
  const auto rel = model.relation.row(relation);
  parallel_for(probed.size(), threads, [&](std::size_t i) {
    const EntityId u = probed[i];
    const EntityId target = first_tail[u];
    const auto head = model.entity.row(u);
    const double target_score = score(model.op, head, rel, model.entity.row(target));
    std::size_t better = 0, tied = 1;
    for (EntityId e = 0; e < store.n_entities(); ++e) {
      if (e == target) continue;
      const double s = score(model.op, head, rel, model.entity.row(e));
      if (s > target_score) ++better;
      else if (s == target_score) ++tied;
    }
    const double rank =
        static_cast<double>(better) + (static_cast<double>(tied) + 1.0) / 2.0;
    hit[i] = rank <= 10.0 ? 1 : 0;
  });
  for (std::uint8_t h : hit) result.hits_at_10 += h;
  result.hits_at_10 /= static_cast<double>(probed.size());
  return result;
}

}  // namespace sepal
