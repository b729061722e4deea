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
#include <vector>

#include "sepal/triple_store.hpp"

namespace sepal {

// Entity set, sorted ascending and duplicate-free. Induced edges are always
// derived from a TripleStore on demand; a Subgraph owns no edge storage.
struct Subgraph {
  std::vector<EntityId> entities;

  std::size_t size() const { return entities.size(); }
  bool contains(EntityId u) const {
    return std::binary_search(entities.begin(), entities.end(), u);
  }
};

inline Subgraph make_subgraph(std::vector<EntityId> entities) {
  std::sort(entities.begin(), entities.end());
  entities.erase(std::unique(entities.begin(), entities.end()), entities.end());
  return Subgraph{std::move(entities)};
}

// Reusable membership bitmap sized to a store's entity table.
class EntityMask {
 public:
  explicit EntityMask(std::size_t n) : bits_(n, 0) {}

  void add(const std::vector<EntityId>& ids) {
    for (EntityId u : ids) bits_[u] = 1;
  }
  void remove(const std::vector<EntityId>& ids) {
    for (EntityId u : ids) bits_[u] = 0;
  }
  void set(EntityId u) { bits_[u] = 1; }
  void clear(EntityId u) { bits_[u] = 0; }
  bool test(EntityId u) const { return bits_[u] != 0; }

 private:
  std::vector<char> bits_;
};

// Indices of triples whose both endpoints lie in the masked set, ascending.
// Enumerates via member incidence, so cost scales with the members' degrees,
// not the store size.
inline std::vector<std::uint32_t> induced_triple_indices(const TripleStore& store,
                                                         const std::vector<EntityId>& members,
                                                         const EntityMask& mask) {
  std::vector<std::uint32_t> out;
  for (EntityId u : members) {
    for (std::uint32_t entry : store.incident(u)) {
      if (TripleStore::incident_is_tail(entry)) continue;  // count each triple at its head
      const std::uint32_t i = TripleStore::incident_triple(entry);
      if (mask.test(store.triple(i).tail)) out.push_back(i);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Undirected connectivity of the induced subgraph on `members`. The empty set
// and singletons count as connected.
inline bool is_connected(const TripleStore& store, const std::vector<EntityId>& members,
                         const EntityMask& mask) {
  if (members.size() <= 1) return true;
  std::vector<char> seen(store.n_entities(), 0);
  std::vector<EntityId> stack{members[0]};
  seen[members[0]] = 1;
  std::size_t reached = 1;
  while (!stack.empty()) {
    const EntityId u = stack.back();
    stack.pop_back();
    for (EntityId v : store.neighbors(u)) {
      if (!mask.test(v) || seen[v]) continue;
      seen[v] = 1;
      ++reached;
      stack.push_back(v);
    }
  }
  return reached == members.size();
}

inline bool is_connected(const TripleStore& store, const std::vector<EntityId>& members) {
  EntityMask mask(store.n_entities());
  mask.add(members);
  return is_connected(store, members, mask);
}

// Connectivity of the union of two entity sets (typically subgraph + core).
inline bool is_connected_union(const TripleStore& store, const std::vector<EntityId>& a,
                               const std::vector<EntityId>& b) {
  std::vector<EntityId> merged;
  merged.reserve(a.size() + b.size());
  std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(merged));
  merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
  return is_connected(store, merged);
}

}  // namespace sepal
