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

#include <array>
#include <numeric>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "sepal/blocs.hpp"
#include "sepal/core_select.hpp"
#include "sepal/synthetic.hpp"
#include "sepal/triple_store.hpp"

using sepal::CoreSubgraph;
using sepal::EntityId;
using sepal::Partition;
using sepal::Subgraph;
using sepal::TripleStore;

namespace {

TripleStore star(std::size_t leaves) {
  std::vector<std::array<std::string, 3>> rows;
  for (std::size_t i = 1; i <= leaves; ++i)
    rows.push_back({"c", "r", "l" + std::to_string(i)});
  return TripleStore::from_labeled(rows);
}

TripleStore chain(std::size_t n) {
  std::vector<std::array<std::string, 3>> rows;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    // zero-padded labels so interning order equals numeric order
    char a[8], b[8];
    std::snprintf(a, sizeof a, "n%03zu", i);
    std::snprintf(b, sizeof b, "n%03zu", i + 1);
    rows.push_back({a, "r", b});
  }
  return TripleStore::from_labeled(rows);
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> edge_list(const TripleStore& s) {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
  for (const sepal::Triple& t : s.triples()) edges.emplace_back(t.head, t.tail);
  return edges;
}

CoreSubgraph core_of(std::vector<EntityId> ids) {
  CoreSubgraph core;
  core.entities = std::move(ids);
  return core;
}

}  // namespace

TEST_CASE("split_neighbors chunks a 25-neighbor hub into 11, 11, 6") {
  const TripleStore s = star(25);
  const EntityId hub = s.find_entity("c").value();
  const auto subs = sepal::split_neighbors(s, hub, 10);
  REQUIRE(subs.size() == 3);
  REQUIRE(subs[0].size() == 11);
  REQUIRE(subs[1].size() == 11);
  REQUIRE(subs[2].size() == 6);

  auto nbrs = s.neighbors(hub);
  const auto chunks =
      oracle::chunked(std::vector<std::uint32_t>(nbrs.begin(), nbrs.end()), 10);
  for (std::size_t i = 0; i < 3; ++i) {
    std::vector<EntityId> expect(chunks[i].begin(), chunks[i].end());
    expect.insert(std::lower_bound(expect.begin(), expect.end(), hub), hub);
    REQUIRE(subs[i].entities == expect);
  }
}

TEST_CASE("split_neighbors of an exact multiple leaves no remainder chunk") {
  const TripleStore s = star(20);
  const auto subs = sepal::split_neighbors(s, s.find_entity("c").value(), 10);
  REQUIRE(subs.size() == 2);
  REQUIRE(subs[0].size() == 11);
  REQUIRE(subs[1].size() == 11);
}

TEST_CASE("diffusion stops before the size bound and keeps the previous set") {
  const TripleStore s = star(100);
  const EntityId center = s.find_entity("c").value();
  const Subgraph out = sepal::diffuse(s, Subgraph{{center}}, 50);
  // one step would reach 101 entities, well past 0.8 * 50
  REQUIRE(out.entities == std::vector<EntityId>{center});
}

TEST_CASE("diffusion on a chain expands hop by hop until the bound") {
  const TripleStore s = chain(21);
  const Subgraph out = sepal::diffuse(s, Subgraph{{10}}, 12);
  // sets grow 1, 3, 5, ...; 11 entities would break 5*size >= 4*12
  std::vector<EntityId> expect(9);
  std::iota(expect.begin(), expect.end(), 6u);
  REQUIRE(out.entities == expect);
}

TEST_CASE("diffusion returns the fixpoint when the region is exhausted") {
  const TripleStore s = chain(5);
  const Subgraph out = sepal::diffuse(s, Subgraph{{2}}, 100);
  std::vector<EntityId> expect{0, 1, 2, 3, 4};
  REQUIRE(out.entities == expect);
}

TEST_CASE("dilate grows every subgraph by one hop of unassigned entities") {
  const TripleStore s = chain(5);
  Partition p;
  p.n_entities = s.n_entities();
  p.subgraphs.push_back(Subgraph{{2}});
  const Partition once = sepal::dilate(s, p);
  REQUIRE(once.subgraphs[0].entities == std::vector<EntityId>{1, 2, 3});
  const Partition twice = sepal::dilate(s, once);
  REQUIRE(twice.subgraphs[0].entities == std::vector<EntityId>{0, 1, 2, 3, 4});
}

TEST_CASE("dilate does not absorb core entities") {
  const TripleStore s = chain(5);
  Partition p;
  p.n_entities = s.n_entities();
  p.core = {3};
  p.subgraphs.push_back(Subgraph{{2}});
  const Partition once = sepal::dilate(s, p);
  REQUIRE(once.subgraphs[0].entities == std::vector<EntityId>{1, 2});
}

TEST_CASE("parameter validation") {
  const TripleStore s = chain(5);
  const CoreSubgraph core = core_of({0});
  REQUIRE_THROWS_AS(sepal::partition(s, core, 0.0, 10), sepal::ConfigError);
  REQUIRE_THROWS_AS(sepal::partition(s, core, 1.0, 10), sepal::ConfigError);
  REQUIRE_THROWS_AS(sepal::partition(s, core, 0.5, 1), sepal::ConfigError);
  REQUIRE_THROWS_AS(sepal::partition(s, core_of({99}), 0.5, 10),
                    sepal::CoreNotInStoreError);
}

TEST_CASE("a graph smaller than the budget becomes one subgraph") {
  const TripleStore s = sepal::preferential_attachment_graph(60, 2, 3, 2);
  const CoreSubgraph core = sepal::select_core_degree(s, 0.1);
  const Partition part = sepal::partition(s, core, 0.5, 1000);
  REQUIRE(part.subgraphs.size() == 1);
  const sepal::PartitionStats stats = sepal::partition_stats(s, part);
  REQUIRE(stats.coverage == 1.0);
  REQUIRE(stats.replication_factor == Catch::Approx(1.0));
  REQUIRE(stats.connected_fraction == 1.0);
}

TEST_CASE("dilation reseeds with diffusion bursts every fifth round") {
  // Chain of 31 with the core at one end. Diffusion stops at h = 0.5; the far
  // tail is then reachable only one hop per dilation round, so round 5 fires a
  // reseeding burst.
  const TripleStore s = chain(31);
  const Partition part = sepal::partition(s, core_of({0}), 0.5, 20);
  REQUIRE(part.build_info.diffusion_subgraphs >= 2);
  REQUIRE(part.build_info.dilation_rounds == 5);
  REQUIRE(part.build_info.burst_subgraphs >= 1);
  const sepal::PartitionStats stats = sepal::partition_stats(s, part);
  REQUIRE(stats.coverage == 1.0);
  REQUIRE(stats.max_size <= 20);
}

TEST_CASE("replication factor averages subgraph membership over outer entities") {
  std::istringstream in("a r b\nb r c\n");
  const TripleStore s = TripleStore::ingest_stream(in, sepal::TripleFormat::whitespace);
  Partition p;
  p.n_entities = 3;
  p.subgraphs.push_back(Subgraph{{0, 1}});
  p.subgraphs.push_back(Subgraph{{1, 2}});
  const sepal::PartitionStats stats = sepal::partition_stats(s, p);
  REQUIRE(stats.replication_factor == Catch::Approx(4.0 / 3.0));
  REQUIRE(stats.coverage == 1.0);
  REQUIRE(stats.connected_fraction == 1.0);
  REQUIRE(stats.sizes == std::vector<std::size_t>{2, 2});
}

TEST_CASE("cover requirements hold on a scale-free instance") {
  const TripleStore s = sepal::preferential_attachment_graph(800, 3, 41, 4);
  const CoreSubgraph core = sepal::select_core(s, sepal::CoreStrategy::hybrid, 0.1, 0.05);
  const std::size_t m = 150;
  const Partition part = sepal::partition(s, core, 0.7, m);
  const sepal::PartitionStats stats = sepal::partition_stats(s, part);

  REQUIRE(stats.coverage == 1.0);
  if (part.warnings.empty()) REQUIRE(stats.max_size <= m);
  REQUIRE(stats.replication_factor >= 1.0);

  // connectivity of every subgraph joined with the core, checked against an
  // independent BFS
  const auto edges = edge_list(s);
  for (const Subgraph& sub : part.subgraphs) {
    std::vector<std::uint32_t> members(sub.entities.begin(), sub.entities.end());
    for (EntityId u : part.core) members.push_back(u);
    std::sort(members.begin(), members.end());
    members.erase(std::unique(members.begin(), members.end()), members.end());
    REQUIRE(oracle::connected(s.n_entities(), edges, members));
  }
  REQUIRE(stats.connected_fraction == 1.0);

  // histogram is consistent with the size list
  std::size_t total = 0;
  for (const auto& [size, count] : stats.size_histogram) total += count;
  REQUIRE(total == stats.n_subgraphs);
}

TEST_CASE("partitioning is deterministic") {
  const TripleStore s = sepal::preferential_attachment_graph(500, 3, 23, 3);
  const CoreSubgraph core = sepal::select_core_degree(s, 0.08);
  const Partition a = sepal::partition(s, core, 0.6, 120, 1);
  const Partition b = sepal::partition(s, core, 0.6, 120, 2);
  REQUIRE(a.subgraphs.size() == b.subgraphs.size());
  for (std::size_t i = 0; i < a.subgraphs.size(); ++i)
    REQUIRE(a.subgraphs[i].entities == b.subgraphs[i].entities);
}

TEST_CASE("a higher assignment fraction does not reduce overlap") {
  const TripleStore s = sepal::preferential_attachment_graph(600, 3, 29, 2);
  const CoreSubgraph core = sepal::select_core_degree(s, 0.1);
  const double lo =
      sepal::partition_stats(s, sepal::partition(s, core, 0.3, 120)).replication_factor;
  const double hi =
      sepal::partition_stats(s, sepal::partition(s, core, 0.9, 120)).replication_factor;
  REQUIRE(hi + 1e-9 >= lo);
}
