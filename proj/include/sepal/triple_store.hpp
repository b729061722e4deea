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
#include <array>
#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "sepal/binio.hpp"
#include "sepal/error.hpp"

namespace sepal {

using EntityId = std::uint32_t;
using RelationId = std::uint32_t;

struct Triple {
  EntityId head;
  RelationId relation;
  EntityId tail;

  friend bool operator==(const Triple&, const Triple&) = default;
};

enum class TripleFormat { tab, whitespace };

// Immutable directed multigraph of (head, relation, tail) facts with dense
// interned ids, per-entity incidence, and sorted neighbor lists. Entity ids are
// assigned in first-appearance order; exact duplicate triples are dropped at
// ingest (first occurrence kept). Self-loops are legal and count twice toward
// the degree of their endpoint (head slot and tail slot).
class TripleStore {
 public:
  static constexpr std::uint32_t kCacheMagic = 0x474b5053u;  // "SPKG"
  static constexpr std::uint16_t kCacheVersion = 1;

  static TripleStore ingest_file(const std::string& path, TripleFormat fmt = TripleFormat::tab) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open triple file: " + path);
    return ingest_stream(in, fmt, path);
  }

  static TripleStore ingest_stream(std::istream& in, TripleFormat fmt,
                                   const std::string& name = "<stream>") {
    TripleStore s;
    std::string line;
    std::size_t lineno = 0;
    std::array<std::string, 3> fields;
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      std::size_t first = line.find_first_not_of(" \t");
      if (first == std::string::npos || line[first] == '#') continue;
      if (!split_fields(line, fmt, fields))
        throw MalformedRecordError(name + ":" + std::to_string(lineno) +
                                   ": expected 3 fields (head, relation, tail)");
      const EntityId h = s.intern_entity(fields[0]);
      const RelationId r = s.intern_relation(fields[1]);
      const EntityId t = s.intern_entity(fields[2]);
      s.push_triple({h, r, t});
    }
    if (s.triples_.empty()) throw EmptyGraphError(name + ": no triples after parsing");
    s.finalize();
    return s;
  }

  static TripleStore from_labeled(const std::vector<std::array<std::string, 3>>& rows) {
    TripleStore s;
    for (const auto& row : rows) {
      const EntityId h = s.intern_entity(row[0]);
      const RelationId r = s.intern_relation(row[1]);
      const EntityId t = s.intern_entity(row[2]);
      s.push_triple({h, r, t});
    }
    if (s.triples_.empty()) throw EmptyGraphError("no triples given");
    s.finalize();
    return s;
  }

  // Direct construction from pre-assigned dense ids; labels are generated.
  // Every id below the stated counts gets a slot even if unused in a triple.
  static TripleStore from_ids(std::size_t n_entities, std::size_t n_relations,
                              const std::vector<Triple>& triples,
                              const std::string& entity_prefix = "e",
                              const std::string& relation_prefix = "r") {
    TripleStore s;
    s.entity_labels_.reserve(n_entities);
    for (std::size_t i = 0; i < n_entities; ++i) {
      s.entity_labels_.push_back(entity_prefix + std::to_string(i));
      s.entity_ids_.emplace(s.entity_labels_.back(), static_cast<EntityId>(i));
    }
    for (std::size_t i = 0; i < n_relations; ++i) {
      s.relation_labels_.push_back(relation_prefix + std::to_string(i));
      s.relation_ids_.emplace(s.relation_labels_.back(), static_cast<RelationId>(i));
    }
    for (const Triple& t : triples) {
      if (t.head >= n_entities || t.tail >= n_entities || t.relation >= n_relations)
        throw DataError("triple id out of declared range");
      s.push_triple(t);
    }
    if (s.triples_.empty()) throw EmptyGraphError("no triples given");
    s.finalize();
    return s;
  }

  std::size_t n_entities() const { return entity_labels_.size(); }
  std::size_t n_relations() const { return relation_labels_.size(); }
  std::size_t n_triples() const { return triples_.size(); }
  std::size_t n_duplicates_dropped() const { return n_duplicates_; }

  std::span<const Triple> triples() const { return triples_; }
  const Triple& triple(std::size_t i) const { return triples_[i]; }

  const std::string& entity_label(EntityId id) const { return entity_labels_[id]; }
  const std::string& relation_label(RelationId id) const { return relation_labels_[id]; }

  std::optional<EntityId> find_entity(const std::string& label) const {
    auto it = entity_ids_.find(label);
    if (it == entity_ids_.end()) return std::nullopt;
    return it->second;
  }

  std::optional<RelationId> find_relation(const std::string& label) const {
    auto it = relation_ids_.find(label);
    if (it == relation_ids_.end()) return std::nullopt;
    return it->second;
  }

  // Endpoint count: one per head slot plus one per tail slot.
  std::size_t degree(EntityId u) const { return inc_offsets_[u + 1] - inc_offsets_[u]; }

  // Incident triples of u as packed entries (triple_index << 1 | tail_slot),
  // in triple-index order.
  std::span<const std::uint32_t> incident(EntityId u) const {
    return {incidence_.data() + inc_offsets_[u], incidence_.data() + inc_offsets_[u + 1]};
  }

  static std::uint32_t incident_triple(std::uint32_t entry) { return entry >> 1; }
  static bool incident_is_tail(std::uint32_t entry) { return (entry & 1u) != 0; }

  // Sorted unique neighbor ids of u, excluding u itself.
  std::span<const EntityId> neighbors(EntityId u) const {
    return {adjacency_.data() + adj_offsets_[u], adjacency_.data() + adj_offsets_[u + 1]};
  }

  bool augmented() const { return augmented_; }
  std::size_t n_original_relations() const {
    return augmented_ ? n_original_relations_ : relation_labels_.size();
  }

  RelationId inverse_of(RelationId r) const {
    if (!augmented_) throw DataError("store is not augmented with inverse relations");
    const auto half = static_cast<RelationId>(n_original_relations_);
    return r < half ? r + half : r - half;
  }

  // Union-find roots under undirected reachability; exposed for reuse by
  // stats and split repair.
  std::vector<EntityId> component_roots() const {
    std::vector<EntityId> parent(n_entities());
    for (EntityId i = 0; i < parent.size(); ++i) parent[i] = i;
    auto find = [&parent](EntityId x) {
      while (parent[x] != x) {
        parent[x] = parent[parent[x]];
        x = parent[x];
      }
      return x;
    };
    for (const Triple& t : triples_) {
      EntityId a = find(t.head), b = find(t.tail);
      if (a != b) parent[b < a ? a : b] = b < a ? b : a;
    }
    for (EntityId i = 0; i < parent.size(); ++i) parent[i] = find(i);
    return parent;
  }

  // Members of the largest undirected component; ties broken by the smallest
  // contained entity id. Result is sorted ascending.
  std::vector<EntityId> largest_component_members() const {
    const std::vector<EntityId> root = component_roots();
    std::vector<std::size_t> size(n_entities(), 0);
    for (EntityId r : root) ++size[r];
    EntityId best = root[0];
    for (EntityId i = 1; i < root.size(); ++i) {
      const EntityId r = root[i];
      if (r == best) continue;
      if (size[r] > size[best]) best = r;
      // Roots are component minima, so smaller root = smaller contained id.
      else if (size[r] == size[best] && r < best) best = r;
    }
    std::vector<EntityId> members;
    members.reserve(size[best]);
    for (EntityId i = 0; i < root.size(); ++i)
      if (root[i] == best) members.push_back(i);
    return members;
  }

  // Restriction to the largest undirected component, entity ids re-interned in
  // first-appearance order over the retained triples. Relation ids are kept
  // verbatim for augmented stores (preserving the inverse pairing) and
  // compacted in first-appearance order otherwise.
  TripleStore largest_connected_component() const {
    const std::vector<EntityId> members = largest_component_members();
    std::vector<char> keep(n_entities(), 0);
    for (EntityId u : members) keep[u] = 1;

    TripleStore s;
    if (augmented_) {
      s.relation_labels_ = relation_labels_;
      s.relation_ids_ = relation_ids_;
      s.augmented_ = true;
      s.n_original_relations_ = n_original_relations_;
    }
    for (const Triple& t : triples_) {
      if (!keep[t.head] || !keep[t.tail]) continue;
      const EntityId h = s.intern_entity(entity_labels_[t.head]);
      const RelationId r = augmented_ ? t.relation : s.intern_relation(relation_labels_[t.relation]);
      const EntityId tl = s.intern_entity(entity_labels_[t.tail]);
      s.push_triple({h, r, tl});
    }
    if (s.triples_.empty()) throw EmptyGraphError("largest component has no triples");
    s.finalize();
    return s;
  }

  // Appends one mirrored triple (t, r~inv, h) per stored triple, doubling the
  // relation vocabulary and every entity degree.
  TripleStore add_inverse_relations() const {
    if (augmented_) throw AlreadyAugmentedError("store already carries inverse relations");
    TripleStore s;
    s.entity_labels_ = entity_labels_;
    s.entity_ids_ = entity_ids_;
    s.relation_labels_ = relation_labels_;
    s.relation_ids_ = relation_ids_;
    const auto half = static_cast<RelationId>(relation_labels_.size());
    for (RelationId r = 0; r < half; ++r) {
      std::string inv = relation_labels_[r] + "~inv";
      if (s.relation_ids_.count(inv))
        throw DataError("inverse label collision for relation: " + relation_labels_[r]);
      s.relation_ids_.emplace(inv, static_cast<RelationId>(s.relation_labels_.size()));
      s.relation_labels_.push_back(std::move(inv));
    }
    s.triples_ = triples_;
    s.triples_.reserve(triples_.size() * 2);
    for (const Triple& t : triples_)
      s.triples_.push_back({t.tail, static_cast<RelationId>(t.relation + half), t.head});
    s.augmented_ = true;
    s.n_original_relations_ = half;
    s.finalize();
    return s;
  }

  // Inverse of add_inverse_relations: drops mirror triples and the inverse
  // half of the relation table.
  TripleStore strip_inverse_relations() const {
    if (!augmented_) throw DataError("store carries no inverse relations to strip");
    const auto half = static_cast<RelationId>(n_original_relations_);
    TripleStore s;
    s.entity_labels_ = entity_labels_;
    s.entity_ids_ = entity_ids_;
    s.relation_labels_.assign(relation_labels_.begin(), relation_labels_.begin() + half);
    for (RelationId r = 0; r < half; ++r) s.relation_ids_.emplace(s.relation_labels_[r], r);
    for (const Triple& t : triples_)
      if (t.relation < half) s.triples_.push_back(t);
    if (s.triples_.empty()) throw EmptyGraphError("no original triples to keep");
    s.finalize();
    return s;
  }

  void save_cache(const std::string& path) const {
    BinWriter w(path);
    w.pod(kCacheMagic);
    w.pod(kCacheVersion);
    w.pod(static_cast<std::uint8_t>(augmented_ ? 1 : 0));
    w.pod(static_cast<std::uint64_t>(n_entities()));
    w.pod(static_cast<std::uint64_t>(n_relations()));
    w.pod(static_cast<std::uint64_t>(n_original_relations()));
    w.pod(static_cast<std::uint64_t>(n_triples()));
    for (const Triple& t : triples_) {
      w.pod(t.head);
      w.pod(t.relation);
      w.pod(t.tail);
    }
    for (const auto& l : entity_labels_) w.str(l);
    for (const auto& l : relation_labels_) w.str(l);
    w.finish();
  }

  static TripleStore load_cache(const std::string& path) {
    BinReader r(path);
    if (r.pod<std::uint32_t>() != kCacheMagic)
      throw UnknownFormatError("not a graph cache file: " + path);
    if (r.pod<std::uint16_t>() != kCacheVersion)
      throw UnknownFormatError("unsupported graph cache version: " + path);
    TripleStore s;
    s.augmented_ = r.pod<std::uint8_t>() != 0;
    const auto n_ent = r.pod<std::uint64_t>();
    const auto n_rel = r.pod<std::uint64_t>();
    const auto n_orig = r.pod<std::uint64_t>();
    const auto n_tri = r.pod<std::uint64_t>();
    s.n_original_relations_ = n_orig;
    s.triples_.reserve(n_tri);
    for (std::uint64_t i = 0; i < n_tri; ++i) {
      Triple t;
      t.head = r.pod<EntityId>();
      t.relation = r.pod<RelationId>();
      t.tail = r.pod<EntityId>();
      s.triples_.push_back(t);
    }
    s.entity_labels_.reserve(n_ent);
    for (std::uint64_t i = 0; i < n_ent; ++i) {
      s.entity_labels_.push_back(r.str());
      s.entity_ids_.emplace(s.entity_labels_.back(), static_cast<EntityId>(i));
    }
    for (std::uint64_t i = 0; i < n_rel; ++i) {
      s.relation_labels_.push_back(r.str());
      s.relation_ids_.emplace(s.relation_labels_.back(), static_cast<RelationId>(i));
    }
    r.verify_checksum();
    for (const Triple& t : s.triples_)
      if (t.head >= n_ent || t.tail >= n_ent || t.relation >= n_rel)
        throw UnknownFormatError("triple id out of range in cache: " + path);
    s.finalize();
    return s;
  }

 private:
  static bool split_fields(const std::string& line, TripleFormat fmt,
                           std::array<std::string, 3>& out) {
    if (fmt == TripleFormat::tab) {
      const std::size_t a = line.find('\t');
      if (a == std::string::npos) return false;
      const std::size_t b = line.find('\t', a + 1);
      if (b == std::string::npos || line.find('\t', b + 1) != std::string::npos) return false;
      out[0] = line.substr(0, a);
      out[1] = line.substr(a + 1, b - a - 1);
      out[2] = line.substr(b + 1);
    } else {
      std::istringstream ss(line);
      std::string extra;
      if (!(ss >> out[0] >> out[1] >> out[2]) || (ss >> extra)) return false;
    }
    return !out[0].empty() && !out[1].empty() && !out[2].empty();
  }

  EntityId intern_entity(const std::string& label) {
    auto [it, inserted] = entity_ids_.try_emplace(label, static_cast<EntityId>(entity_labels_.size()));
    if (inserted) entity_labels_.push_back(label);
    return it->second;
  }

  RelationId intern_relation(const std::string& label) {
    auto [it, inserted] =
        relation_ids_.try_emplace(label, static_cast<RelationId>(relation_labels_.size()));
    if (inserted) relation_labels_.push_back(label);
    return it->second;
  }

  struct TripleHash {
    std::size_t operator()(const Triple& t) const {
      std::uint64_t x = (static_cast<std::uint64_t>(t.head) << 32) | t.tail;
      x ^= 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(t.relation) + 1);
      x ^= x >> 33;
      x *= 0xff51afd7ed558ccdULL;
      x ^= x >> 33;
      return static_cast<std::size_t>(x);
    }
  };

  void push_triple(const Triple& t) {
    if (seen_.insert(t).second)
      triples_.push_back(t);
    else
      ++n_duplicates_;
  }

  void finalize() {
    seen_ = {};
    if (triples_.size() >= (1ull << 31))
      throw DataError("triple count exceeds incidence index capacity");
    const std::size_t n = n_entities();
    inc_offsets_.assign(n + 1, 0);
    for (const Triple& t : triples_) {
      ++inc_offsets_[t.head + 1];
      ++inc_offsets_[t.tail + 1];
    }
    for (std::size_t i = 0; i < n; ++i) inc_offsets_[i + 1] += inc_offsets_[i];
    incidence_.assign(inc_offsets_[n], 0);
    std::vector<std::uint64_t> cursor(inc_offsets_.begin(), inc_offsets_.end() - 1);
    for (std::uint32_t i = 0; i < triples_.size(); ++i) {
      const Triple& t = triples_[i];
      incidence_[cursor[t.head]++] = (i << 1) | 0u;
      incidence_[cursor[t.tail]++] = (i << 1) | 1u;
    }
    build_adjacency();
  }

  void build_adjacency() {
    const std::size_t n = n_entities();
    adj_offsets_.assign(n + 1, 0);
    adjacency_.clear();
    adjacency_.reserve(incidence_.size());
    std::vector<EntityId> scratch;
    for (EntityId u = 0; u < n; ++u) {
      scratch.clear();
      for (std::uint32_t entry : incident(u)) {
        const Triple& t = triples_[incident_triple(entry)];
        const EntityId other = incident_is_tail(entry) ? t.head : t.tail;
        if (other != u) scratch.push_back(other);
      }
      std::sort(scratch.begin(), scratch.end());
      scratch.erase(std::unique(scratch.begin(), scratch.end()), scratch.end());
      adjacency_.insert(adjacency_.end(), scratch.begin(), scratch.end());
      adj_offsets_[u + 1] = adjacency_.size();
    }
  }

  std::vector<std::string> entity_labels_;
  std::vector<std::string> relation_labels_;
  std::unordered_map<std::string, EntityId> entity_ids_;
  std::unordered_map<std::string, RelationId> relation_ids_;
  std::vector<Triple> triples_;
  std::unordered_set<Triple, TripleHash> seen_;
  std::size_t n_duplicates_ = 0;

  std::vector<std::uint64_t> inc_offsets_;
  std::vector<std::uint32_t> incidence_;
  std::vector<std::uint64_t> adj_offsets_;
  std::vector<EntityId> adjacency_;

  bool augmented_ = false;
  std::size_t n_original_relations_ = 0;
};

}  // namespace sepal
