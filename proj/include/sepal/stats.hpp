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
#include <cstdint>
#include <vector>

#include "sepal/parallel.hpp"
#include "sepal/rng.hpp"
#include "sepal/triple_store.hpp"

namespace sepal {

struct GraphStats {
  std::size_t n_entities = 0;
  std::size_t n_relations = 0;
  std::size_t n_triples = 0;
  double density = 0.0;        // n_triples / (n_entities * (n_entities - 1))
  double lcc_fraction = 0.0;   // largest undirected component share
  std::size_t max_degree = 0;
  double avg_degree = 0.0;     // 2 * n_triples / n_entities
  double mspl = 0.0;           // mean shortest path length over the LCC
  std::size_t diameter = 0;    // longest observed shortest path in the LCC
  bool path_stats_approximate = false;  // true when BFS roots were sampled
  std::size_t mspl_roots = 0;  // BFS roots actually used
};

// Path lengths are measured on the undirected largest component. With
// mspl_samples == 0 the root count is chosen automatically: every LCC entity
// when the LCC has at most 10,000 entities (exact), otherwise 32 sampled
// roots. Sampling makes mspl an estimate and diameter a lower bound.
inline GraphStats graph_stats(const TripleStore& store, std::size_t mspl_samples = 0,
                              std::uint64_t seed = 0, unsigned threads = 1) {
  GraphStats out;
  out.n_entities = store.n_entities();
  out.n_relations = store.n_relations();
  out.n_triples = store.n_triples();
  const double n = static_cast<double>(out.n_entities);
  out.density = out.n_entities >= 2 ? static_cast<double>(out.n_triples) / (n * (n - 1.0)) : 0.0;
  out.avg_degree = 2.0 * static_cast<double>(out.n_triples) / n;
  for (EntityId u = 0; u < out.n_entities; ++u)
    out.max_degree = std::max(out.max_degree, store.degree(u));

  std::vector<EntityId> lcc = store.largest_component_members();
  out.lcc_fraction = static_cast<double>(lcc.size()) / n;

  std::size_t roots = mspl_samples;
  if (roots == 0) roots = lcc.size() <= 10000 ? lcc.size() : 32;
  roots = std::min(roots, lcc.size());
  out.mspl_roots = roots;
  out.path_stats_approximate = roots < lcc.size();
  if (lcc.size() < 2 || roots == 0) return out;

  if (out.path_stats_approximate) {
    Rng rng(Rng{seed}.fork(0x5374u).next_u64());
    // Partial Fisher-Yates: the first `roots` slots become the sample.
    for (std::size_t i = 0; i < roots; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.uniform_below(lcc.size() - i));
      std::swap(lcc[i], lcc[j]);
    }
  }

  struct RootResult {
    std::uint64_t dist_sum = 0;
    std::uint64_t reached = 0;
    std::uint32_t ecc = 0;
  };
  std::vector<RootResult> per_root(roots);
  parallel_for(roots, threads, [&](std::size_t i) {
    std::vector<std::uint32_t> dist(store.n_entities(), UINT32_MAX);
    std::vector<EntityId> frontier{lcc[i]}, next;
    dist[lcc[i]] = 0;
    RootResult res;
    std::uint32_t level = 0;
    while (!frontier.empty()) {
      ++level;
      next.clear();
      for (EntityId u : frontier) {
        for (EntityId v : store.neighbors(u)) {
          if (dist[v] != UINT32_MAX) continue;
          dist[v] = level;
          res.dist_sum += level;
          ++res.reached;
          next.push_back(v);
        }
      }
      if (!next.empty()) res.ecc = level;
      frontier.swap(next);
    }
    per_root[i] = res;
  });

  std::uint64_t total = 0, pairs = 0;
  for (const RootResult& r : per_root) {
    total += r.dist_sum;
    pairs += r.reached;
    out.diameter = std::max<std::size_t>(out.diameter, r.ecc);
  }
  out.mspl = pairs ? static_cast<double>(total) / static_cast<double>(pairs) : 0.0;
  return out;
}

}  // namespace sepal
