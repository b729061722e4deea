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
#include <span>
#include <string>
#include <vector>

#include "sepal/blocs.hpp"
#include "sepal/embedding.hpp"
#include "sepal/error.hpp"
#include "sepal/operators.hpp"
#include "sepal/subgraph.hpp"
#include "sepal/triple_store.hpp"

namespace sepal {

struct PropagationConfig {
  std::size_t steps = 1;  // synchronous update rounds T
  double alpha = 1.0;     // message step size
};

struct SubgraphPropagationReport {
  std::size_t n_targets = 0;     // outer entities updated in this subgraph
  std::size_t n_still_zero = 0;  // targets left at zero after the final step
  std::size_t resident_rows = 0; // subgraph-union-core rows plus relation rows
};

struct PropagationReport {
  std::size_t subgraphs_processed = 0;
  std::size_t zero_rows_remaining = 0;
  std::size_t peak_resident_rows = 0;
  std::size_t steps = 0;
  double alpha = 0.0;
  std::vector<std::string> warnings;
};

// Full-graph embedding table: core rows copied bitwise and frozen, all other
// rows zero with the zero flag set.
inline EmbeddingMatrix init_embeddings(std::size_t n_total, const EmbeddingMatrix& core_emb,
                                       const std::vector<EntityId>& core_ids) {
  if (core_emb.rows() != core_ids.size())
    throw DimensionMismatchError("core embedding row count does not match core id count");
  EmbeddingMatrix emb(n_total, core_emb.dim());
  for (std::size_t i = 0; i < n_total; ++i) emb.set_zero_row(i, true);
  for (std::size_t i = 0; i < core_ids.size(); ++i) {
    const EntityId u = core_ids[i];
    if (u >= n_total) throw CoreNotInStoreError("core entity id outside the embedding table");
    auto dst = emb.row(u);
    auto src = core_emb.row(i);
    std::copy(src.begin(), src.end(), dst.begin());
    emb.set_frozen(u, true);
    emb.set_zero_row(u, false);
  }
  return emb;
}

// T synchronous message-passing rounds over the subgraph merged with the core.
// Every non-core member u of `sub` receives a_u, the sum of phi(head, rel)
// over induced triples pointing at u (reverse edges are expected to be present
// as inverse relations); its row becomes (theta_u + alpha * a_u), renormalized
// to the unit sphere. All reads use the previous round's values; core rows are
// never written. A zero-norm update leaves the row untouched and keeps its
// zero flag, which is how entities unreachable from the core stay flagged.
inline SubgraphPropagationReport propagate_subgraph(const TripleStore& store, const Subgraph& sub,
                                                    const std::vector<EntityId>& core_ids,
                                                    EmbeddingMatrix& emb,
                                                    const EmbeddingMatrix& rel_emb, Operator op,
                                                    const PropagationConfig& cfg) {
  if (emb.rows() != store.n_entities())
    throw DimensionMismatchError("embedding table does not cover the store's entities");
  if (rel_emb.rows() < store.n_relations())
    throw DimensionMismatchError("relation table does not cover the store's relations");
  if (emb.dim() != rel_emb.dim())
    throw DimensionMismatchError("entity and relation dimensions disagree");
  const std::size_t d = emb.dim();

  // Working set: subgraph union core.
  std::vector<EntityId> working = detail::sorted_union(sub.entities, core_ids);
  EntityMask in_working(store.n_entities());
  in_working.add(working);

  EntityMask in_core(store.n_entities());
  in_core.add(core_ids);
  std::vector<EntityId> targets;
  for (EntityId u : sub.entities)
    if (!in_core.test(u) && !emb.frozen(u)) targets.push_back(u);

  SubgraphPropagationReport report;
  report.n_targets = targets.size();
  report.resident_rows = working.size() + rel_emb.rows();
  if (targets.empty() || cfg.steps == 0) {
    for (EntityId u : targets) report.n_still_zero += emb.zero_row(u) ? 1 : 0;
    return report;
  }

  // Incoming induced triples per target, fixed across rounds.
  std::vector<std::uint32_t> target_slot(store.n_entities(), UINT32_MAX);
  for (std::uint32_t i = 0; i < targets.size(); ++i) target_slot[targets[i]] = i;
  std::vector<std::vector<std::uint32_t>> incoming(targets.size());
  for (std::uint32_t i = 0; i < targets.size(); ++i) {
    for (std::uint32_t entry : store.incident(targets[i])) {
      if (!TripleStore::incident_is_tail(entry)) continue;
      const std::uint32_t idx = TripleStore::incident_triple(entry);
      if (in_working.test(store.triple(idx).head)) incoming[i].push_back(idx);
    }
  }

  // Double buffer over target rows only; everything else is read from emb.
  std::vector<float> cur(targets.size() * d), next(targets.size() * d);
  for (std::size_t i = 0; i < targets.size(); ++i) {
    auto src = emb.row(targets[i]);
    std::copy(src.begin(), src.end(), cur.begin() + static_cast<std::ptrdiff_t>(i * d));
  }
  auto row_of = [&](const std::vector<float>& buf, std::size_t slot) {
    return std::span<const float>(buf.data() + slot * d, d);
  };

  std::vector<double> acc(d);
  for (std::size_t step = 0; step < cfg.steps; ++step) {
    for (std::size_t i = 0; i < targets.size(); ++i) {
      std::fill(acc.begin(), acc.end(), 0.0);
      for (std::uint32_t idx : incoming[i]) {
        const Triple& t = store.triple(idx);
        const std::uint32_t hs = target_slot[t.head];
        const std::span<const float> head =
            hs == UINT32_MAX ? std::span<const float>(emb.row(t.head)) : row_of(cur, hs);
        accumulate_phi(op, head, rel_emb.row(t.relation), acc);
      }
      const std::span<const float> self = row_of(cur, i);
      double ss = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        acc[k] = static_cast<double>(self[k]) + cfg.alpha * acc[k];
        ss += acc[k] * acc[k];
      }
      const double nrm = std::sqrt(ss);
      float* dst = next.data() + i * d;
      if (nrm == 0.0) {
        for (std::size_t k = 0; k < d; ++k) dst[k] = self[k];
      } else {
        for (std::size_t k = 0; k < d; ++k) dst[k] = static_cast<float>(acc[k] / nrm);
      }
    }
    cur.swap(next);
  }

  for (std::size_t i = 0; i < targets.size(); ++i) {
    auto dst = emb.row(targets[i]);
    const auto src = row_of(cur, i);
    std::copy(src.begin(), src.end(), dst.begin());
    const bool zero = row_norm(dst) == 0.0;
    emb.set_zero_row(targets[i], zero);
    report.n_still_zero += zero ? 1 : 0;
  }
  return report;
}

// Processes subgraphs in emission order against the shared embedding table, so
// overlap entities carry their latest value forward. Only one subgraph's rows
// (plus core and relations) are live per pass.
inline PropagationReport propagate_all(const TripleStore& store, const Partition& part,
                                       const std::vector<EntityId>& core_ids,
                                       EmbeddingMatrix& emb, const EmbeddingMatrix& rel_emb,
                                       Operator op, const PropagationConfig& cfg) {
  PropagationReport report;
  report.steps = cfg.steps;
  report.alpha = cfg.alpha;
  for (const Subgraph& sub : part.subgraphs) {
    const SubgraphPropagationReport r =
        propagate_subgraph(store, sub, core_ids, emb, rel_emb, op, cfg);
    ++report.subgraphs_processed;
    report.peak_resident_rows = std::max(report.peak_resident_rows, r.resident_rows);
    if (r.n_still_zero > 0)
      report.warnings.push_back("subgraph " + std::to_string(report.subgraphs_processed - 1) +
                                ": " + std::to_string(r.n_still_zero) +
                                " entities disconnected from the core kept zero rows");
  }
  report.zero_rows_remaining = emb.count_zero_rows() -
                               std::count_if(core_ids.begin(), core_ids.end(),
                                             [&emb](EntityId u) { return emb.zero_row(u); });
  return report;
}

// Whole-graph propagation: a single pass treating every entity as one
// subgraph. The single-subgraph ablation of partitioned propagation.
inline PropagationReport propagate_whole(const TripleStore& store,
                                         const std::vector<EntityId>& core_ids,
                                         EmbeddingMatrix& emb, const EmbeddingMatrix& rel_emb,
                                         Operator op, const PropagationConfig& cfg) {
  Partition part;
  part.n_entities = store.n_entities();
  part.core = core_ids;
  std::vector<EntityId> all(store.n_entities());
  for (EntityId u = 0; u < all.size(); ++u) all[u] = u;
  part.subgraphs.push_back(Subgraph{std::move(all)});
  return propagate_all(store, part, core_ids, emb, rel_emb, op, cfg);
}

// Global alignment objective: the negative sum over all triples of
// <theta_tail, theta_head * w_rel>, accumulated in 64-bit. Defined for the
// multiplicative operator only.
inline double alignment_energy(const TripleStore& store, std::span<const std::uint32_t> indices,
                               const EmbeddingMatrix& emb, const EmbeddingMatrix& rel_emb,
                               Operator op) {
  if (op != Operator::distmult)
    throw OperatorUnsupportedError("alignment energy is defined for distmult only");
  const std::size_t d = emb.dim();
  double acc = 0.0;
  for (std::uint32_t idx : indices) {
    const Triple& t = store.triple(idx);
    const auto h = emb.row(t.head), w = rel_emb.row(t.relation), tl = emb.row(t.tail);
    for (std::size_t k = 0; k < d; ++k)
      acc += static_cast<double>(tl[k]) * static_cast<double>(h[k]) * static_cast<double>(w[k]);
  }
  return -acc;
}

inline double alignment_energy(const TripleStore& store, const EmbeddingMatrix& emb,
                               const EmbeddingMatrix& rel_emb, Operator op) {
  std::vector<std::uint32_t> all(store.n_triples());
  for (std::uint32_t i = 0; i < all.size(); ++i) all[i] = i;
  return alignment_energy(store, all, emb, rel_emb, op);
}

struct GradientCheckResult {
  double max_update_deviation = 0.0;  // propagation update vs analytic gradient step
  double max_fd_rel_error = 0.0;      // analytic gradient vs central differences
};

// Verifies, on a snapshot, that the pre-normalization propagation update
// theta_u + alpha * a_u equals the gradient step theta_u - alpha * dE/dtheta_u
// of the alignment energy restricted to the triples pointing at u, and that
// the analytic restricted gradient matches central finite differences. The
// restricted energy treats head-slot occurrences of u as snapshot constants,
// so the check is well-defined with self-loops. distmult only.
inline GradientCheckResult gradient_equivalence_check(const TripleStore& store,
                                                      const std::vector<EntityId>& core_ids,
                                                      const EmbeddingMatrix& emb,
                                                      const EmbeddingMatrix& rel_emb, Operator op,
                                                      double alpha, double fd_step = 1e-4) {
  if (op != Operator::distmult)
    throw OperatorUnsupportedError("gradient equivalence check is defined for distmult only");
  if (emb.rows() != store.n_entities())
    throw DimensionMismatchError("embedding table does not cover the store's entities");
  const std::size_t d = emb.dim();

  EntityMask in_core(store.n_entities());
  in_core.add(core_ids);

  // Independent gradient path: one sweep over the global triple list,
  // accumulating -phi(head, rel) into the tail's row.
  std::vector<double> grad(store.n_entities() * d, 0.0);
  for (const Triple& t : store.triples()) {
    double* g = grad.data() + static_cast<std::size_t>(t.tail) * d;
    const auto h = emb.row(t.head), w = rel_emb.row(t.relation);
    for (std::size_t k = 0; k < d; ++k)
      g[k] -= static_cast<double>(h[k]) * static_cast<double>(w[k]);
  }

  GradientCheckResult result;
  std::vector<double> acc(d);
  for (EntityId u = 0; u < store.n_entities(); ++u) {
    if (in_core.test(u)) continue;
    // Propagation-side accumulation: incidence order, like the kernel.
    std::fill(acc.begin(), acc.end(), 0.0);
    for (std::uint32_t entry : store.incident(u)) {
      if (!TripleStore::incident_is_tail(entry)) continue;
      const Triple& t = store.triple(TripleStore::incident_triple(entry));
      accumulate_phi(op, emb.row(t.head), rel_emb.row(t.relation), acc);
    }
    const auto self = emb.row(u);
    const double* g = grad.data() + static_cast<std::size_t>(u) * d;
    for (std::size_t k = 0; k < d; ++k) {
      const double update = static_cast<double>(self[k]) + alpha * acc[k];
      const double grad_step = static_cast<double>(self[k]) - alpha * g[k];
      result.max_update_deviation =
          std::max(result.max_update_deviation, std::abs(update - grad_step));
    }

    // Central finite differences of the restricted energy
    // E_u(x) = -sum_{(v,r,u)} <x, phi(theta_v, w_r)>.
    auto restricted_energy = [&](const std::vector<double>& x) {
      double e = 0.0;
      for (std::uint32_t entry : store.incident(u)) {
        if (!TripleStore::incident_is_tail(entry)) continue;
        const Triple& t = store.triple(TripleStore::incident_triple(entry));
        const auto h = emb.row(t.head), w = rel_emb.row(t.relation);
        for (std::size_t k = 0; k < d; ++k)
          e -= x[k] * static_cast<double>(h[k]) * static_cast<double>(w[k]);
      }
      return e;
    };
    std::vector<double> x(d);
    for (std::size_t k = 0; k < d; ++k) x[k] = static_cast<double>(self[k]);
    for (std::size_t k = 0; k < d; ++k) {
      const double keep = x[k];
      x[k] = keep + fd_step;
      const double e_plus = restricted_energy(x);
      x[k] = keep - fd_step;
      const double e_minus = restricted_energy(x);
      x[k] = keep;
      const double fd = (e_plus - e_minus) / (2.0 * fd_step);
      const double rel_err = std::abs(fd - g[k]) / std::max(1e-8, std::abs(g[k]));
      result.max_fd_rel_error = std::max(result.max_fd_rel_error, rel_err);
    }
  }
  return result;
}

}  // namespace sepal
