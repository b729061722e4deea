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
#include <string>
#include <vector>

#include "sepal/embedding.hpp"
#include "sepal/error.hpp"
#include "sepal/operators.hpp"
#include "sepal/rng.hpp"
#include "sepal/triple_store.hpp"

namespace sepal {

// Preferential-attachment multigraph in triple form. Seeded with a clique on
// edges_per_node + 1 nodes; every later node attaches to edges_per_node
// distinct existing nodes, sampled proportionally to degree via the endpoint
// list. Relations are drawn uniformly per edge. Entity labels are "e<i>",
// relation labels "r<i>".
inline TripleStore preferential_attachment_graph(std::size_t n_nodes, std::size_t edges_per_node,
                                                 std::uint64_t seed, std::size_t n_relations = 1) {
  if (edges_per_node == 0 || n_nodes < edges_per_node + 1)
    throw ConfigError("preferential attachment needs n_nodes > edges_per_node >= 1");
  if (n_relations == 0) throw ConfigError("n_relations must be positive");

  Rng rng = Rng{seed}.fork(0x9a41u);
  std::vector<Triple> triples;
  std::vector<std::uint32_t> endpoints;
  auto emit = [&](std::uint32_t head, std::uint32_t tail) {
    const auto rel = static_cast<std::uint32_t>(rng.uniform_below(n_relations));
    triples.push_back(Triple{head, rel, tail});
    endpoints.push_back(head);
    endpoints.push_back(tail);
  };

  const std::size_t m0 = edges_per_node + 1;
  for (std::uint32_t u = 0; u < m0; ++u)
    for (std::uint32_t v = u + 1; v < m0; ++v) emit(u, v);

  std::vector<std::uint32_t> picked;
  for (std::uint32_t u = static_cast<std::uint32_t>(m0); u < n_nodes; ++u) {
    picked.clear();
    while (picked.size() < edges_per_node) {
      const std::uint32_t v = endpoints[rng.uniform_below(endpoints.size())];
      if (std::find(picked.begin(), picked.end(), v) == picked.end()) picked.push_back(v);
    }
    for (std::uint32_t v : picked) emit(u, v);
  }

  return TripleStore::from_ids(n_nodes, n_relations, triples);
}

struct PlantedKg {
  TripleStore store;
  EmbeddingModel truth;  // the generating embeddings
};

// Knowledge graph with a recoverable bilinear structure: random ground-truth
// embeddings score every (head, relation, tail) combination and the top_k
// best tails per (head, relation) become triples. Ties break toward the
// smaller tail id.
inline PlantedKg planted_factorization_kg(std::size_t n_entities, std::size_t n_relations,
                                          std::size_t dim, std::size_t top_k,
                                          std::uint64_t seed) {
  if (top_k == 0 || top_k > n_entities) throw ConfigError("top_k must be in [1, n_entities]");
  EmbeddingModel truth = init_model(Operator::distmult, n_entities, n_relations, dim, seed);

  std::vector<Triple> triples;
  triples.reserve(n_entities * n_relations * top_k);
  std::vector<std::pair<double, std::uint32_t>> scored(n_entities);
  for (std::uint32_t h = 0; h < n_entities; ++h) {
    for (std::uint32_t r = 0; r < n_relations; ++r) {
      for (std::uint32_t t = 0; t < n_entities; ++t)
        scored[t] = {score(Operator::distmult, truth.entity.row(h), truth.relation.row(r),
                           truth.entity.row(t)),
                     t};
      std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(top_k),
                        scored.end(), [](const auto& a, const auto& b) {
                          if (a.first != b.first) return a.first > b.first;
                          return a.second < b.second;
                        });
      for (std::size_t k = 0; k < top_k; ++k) triples.push_back(Triple{h, r, scored[k].second});
    }
  }

  PlantedKg out{TripleStore::from_ids(n_entities, n_relations, triples), std::move(truth)};
  return out;
}

}  // namespace sepal
