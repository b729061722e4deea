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
#include <numeric>
#include <vector>

#include "sepal/error.hpp"
#include "sepal/subgraph.hpp"
#include "sepal/triple_store.hpp"

namespace sepal {

enum class CoreStrategy { degree, hybrid };

struct CoreSubgraph {
  std::vector<EntityId> entities;             // sorted ascending
  std::vector<std::uint32_t> triple_indices;  // induced triples, ascending
  std::vector<char> relation_coverage;        // indexed by relation id
  CoreStrategy strategy = CoreStrategy::degree;
  double eta_n = 0.0;
  double eta_e = 0.0;

  std::size_t size() const { return entities.size(); }
  std::size_t n_relations_covered() const {
    return static_cast<std::size_t>(
        std::count(relation_coverage.begin(), relation_coverage.end(), char(1)));
  }
};

// Top-k entities by (degree desc, id asc). Exposed separately because the
// selection order must be monotone in k.
inline std::vector<EntityId> top_entities_by_degree(const TripleStore& store, std::size_t k) {
  std::vector<EntityId> ids(store.n_entities());
  std::iota(ids.begin(), ids.end(), 0u);
  k = std::min(k, ids.size());
  std::partial_sort(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(k), ids.end(),
                    [&store](EntityId a, EntityId b) {
                      const std::size_t da = store.degree(a), db = store.degree(b);
                      return da != db ? da > db : a < b;
                    });
  ids.resize(k);
  return ids;
}

namespace detail {

inline std::size_t fraction_count(double eta, std::size_t n) {
  return static_cast<std::size_t>(std::ceil(eta * static_cast<double>(n)));
}

// Connected components of the induced subgraph on `members`; returns them in
// ascending order of their smallest member, each sorted ascending.
inline std::vector<std::vector<EntityId>> induced_components(const TripleStore& store,
                                                             const std::vector<EntityId>& members) {
  EntityMask mask(store.n_entities());
  mask.add(members);
  std::vector<char> seen(store.n_entities(), 0);
  std::vector<std::vector<EntityId>> comps;
  for (EntityId seed : members) {  // members ascending, so seed = component minimum
    if (seen[seed]) continue;
    std::vector<EntityId> comp{seed};
    std::vector<EntityId> stack{seed};
    seen[seed] = 1;
    while (!stack.empty()) {
      const EntityId u = stack.back();
      stack.pop_back();
      for (EntityId v : store.neighbors(u)) {
        if (!mask.test(v) || seen[v]) continue;
        seen[v] = 1;
        comp.push_back(v);
        stack.push_back(v);
      }
    }
    std::sort(comp.begin(), comp.end());
    comps.push_back(std::move(comp));
  }
  return comps;
}

// Shortest path from `source` to any entity with target_mask set, over the
// full store. Neighbors expand in ascending id order, so among equal-length
// paths the id-lexicographically first is returned. Includes both endpoints.
inline std::vector<EntityId> bfs_path_to_set(const TripleStore& store, EntityId source,
                                             const EntityMask& target_mask) {
  constexpr EntityId kUnset = UINT32_MAX;
  std::vector<EntityId> parent(store.n_entities(), kUnset);
  std::vector<EntityId> frontier{source}, next;
  parent[source] = source;
  if (target_mask.test(source)) return {source};
  for (;;) {
    next.clear();
    for (EntityId u : frontier) {
      for (EntityId v : store.neighbors(u)) {
        if (parent[v] != kUnset) continue;
        parent[v] = u;
        if (target_mask.test(v)) {
          std::vector<EntityId> path{v};
          for (EntityId w = u; w != source; w = parent[w]) path.push_back(w);
          path.push_back(source);
          std::reverse(path.begin(), path.end());
          return path;
        }
        next.push_back(v);
      }
    }
    if (next.empty()) return {};  // unreachable
    frontier.swap(next);
  }
}

inline CoreSubgraph finish_core(const TripleStore& store, std::vector<EntityId> entities,
                                CoreStrategy strategy, double eta_n, double eta_e) {
  std::sort(entities.begin(), entities.end());
  entities.erase(std::unique(entities.begin(), entities.end()), entities.end());
  if (entities.empty()) throw EmptyCoreError("core selection produced no entities");
  CoreSubgraph core;
  core.entities = std::move(entities);
  core.strategy = strategy;
  core.eta_n = eta_n;
  core.eta_e = eta_e;
  EntityMask mask(store.n_entities());
  mask.add(core.entities);
  core.triple_indices = induced_triple_indices(store, core.entities, mask);
  core.relation_coverage.assign(store.n_relations(), 0);
  for (std::uint32_t i : core.triple_indices) core.relation_coverage[store.triple(i).relation] = 1;
  return core;
}

}  // namespace detail

// Degree selection: top ceil(eta_n * n) entities by degree, induced subgraph,
// keep only its largest connected component (ties by smallest contained id).
inline CoreSubgraph select_core_degree(const TripleStore& store, double eta_n) {
  if (!(eta_n > 0.0 && eta_n <= 1.0)) throw ConfigError("eta_n must lie in (0, 1]");
  const std::size_t k =
      std::clamp<std::size_t>(detail::fraction_count(eta_n, store.n_entities()), 1,
                              store.n_entities());
  std::vector<EntityId> selected = top_entities_by_degree(store, k);
  std::sort(selected.begin(), selected.end());
  auto comps = detail::induced_components(store, selected);
  std::size_t best = 0;
  for (std::size_t i = 1; i < comps.size(); ++i)
    if (comps[i].size() > comps[best].size()) best = i;  // earlier index wins ties: smaller min id
  return detail::finish_core(store, std::move(comps[best]), CoreStrategy::degree, eta_n, 0.0);
}

// Hybrid selection: degree set, plus per relation the top ceil(eta_e * m_r)
// triples by endpoint-degree sum (at least one per non-empty relation), then
// reconnection of every non-largest component through a BFS shortest path from
// its highest-degree entity to the largest component.
inline CoreSubgraph select_core_hybrid(const TripleStore& store, double eta_n, double eta_e) {
  if (!(eta_n > 0.0 && eta_n <= 1.0)) throw ConfigError("eta_n must lie in (0, 1]");
  if (!(eta_e >= 0.0 && eta_e <= 1.0)) throw ConfigError("eta_e must lie in [0, 1]");

  const std::size_t k =
      std::clamp<std::size_t>(detail::fraction_count(eta_n, store.n_entities()), 1,
                              store.n_entities());
  std::vector<EntityId> selected = top_entities_by_degree(store, k);

  std::vector<std::vector<std::uint32_t>> by_relation(store.n_relations());
  for (std::uint32_t i = 0; i < store.n_triples(); ++i)
    by_relation[store.triple(i).relation].push_back(i);
  for (RelationId r = 0; r < store.n_relations(); ++r) {
    auto& tris = by_relation[r];
    if (tris.empty()) continue;  // relation absent from the store's triples
    const std::size_t kr =
        std::clamp<std::size_t>(detail::fraction_count(eta_e, tris.size()), 1, tris.size());
    std::partial_sort(tris.begin(), tris.begin() + static_cast<std::ptrdiff_t>(kr), tris.end(),
                      [&store](std::uint32_t a, std::uint32_t b) {
                        const auto& ta = store.triple(a);
                        const auto& tb = store.triple(b);
                        const std::size_t da = store.degree(ta.head) + store.degree(ta.tail);
                        const std::size_t db = store.degree(tb.head) + store.degree(tb.tail);
                        return da != db ? da > db : a < b;
                      });
    for (std::size_t j = 0; j < kr; ++j) {
      selected.push_back(store.triple(tris[j]).head);
      selected.push_back(store.triple(tris[j]).tail);
    }
  }
  std::sort(selected.begin(), selected.end());
  selected.erase(std::unique(selected.begin(), selected.end()), selected.end());

  auto comps = detail::induced_components(store, selected);
  if (comps.size() > 1) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < comps.size(); ++i)
      if (comps[i].size() > comps[best].size()) best = i;
    EntityMask region(store.n_entities());
    region.add(comps[best]);
    for (std::size_t i = 0; i < comps.size(); ++i) {
      if (i == best) continue;
      EntityId source = comps[i][0];
      for (EntityId u : comps[i])
        if (store.degree(u) > store.degree(source)) source = u;  // ascending scan: ties keep low id
      const std::vector<EntityId> path = detail::bfs_path_to_set(store, source, region);
      if (path.empty())
        throw DataError("core component unreachable from the largest component; "
                        "run selection on a connected store");
      for (EntityId u : path) {
        region.set(u);
        selected.push_back(u);
      }
      region.add(comps[i]);
    }
  }
  return detail::finish_core(store, std::move(selected), CoreStrategy::hybrid, eta_n, eta_e);
}

inline CoreSubgraph select_core(const TripleStore& store, CoreStrategy strategy, double eta_n,
                                double eta_e) {
  return strategy == CoreStrategy::degree ? select_core_degree(store, eta_n)
                                          : select_core_hybrid(store, eta_n, eta_e);
}

}  // namespace sepal
