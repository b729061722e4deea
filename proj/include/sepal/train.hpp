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
#include <vector>

#include "sepal/core_select.hpp"
#include "sepal/embedding.hpp"
#include "sepal/error.hpp"
#include "sepal/operators.hpp"
#include "sepal/rng.hpp"
#include "sepal/triple_store.hpp"

namespace sepal {

struct TrainConfig {
  Operator op = Operator::distmult;
  std::size_t dim = 100;
  std::size_t epochs = 10;
  std::size_t batch_size = 1024;
  std::size_t negatives = 100;  // corruptions per positive
  double learning_rate = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;
};

struct TrainResult {
  EmbeddingModel model;              // entity rows indexed by position in entity_ids
  std::vector<EntityId> entity_ids;  // trained entities, ascending store ids
  std::vector<double> epoch_loss;    // mean loss per positive, one entry per epoch
};

// Uniform corruption sampling: negative j of each positive replaces the tail
// when j is even and the head when j is odd, with an entity drawn uniformly
// from [0, n_entities). Draws advance `rng` in (positive, j) order.
inline std::vector<Triple> sample_negatives(std::span<const Triple> batch, std::size_t p,
                                            std::size_t n_entities, Rng& rng) {
  std::vector<Triple> out;
  out.reserve(batch.size() * p);
  for (const Triple& pos : batch) {
    for (std::size_t j = 0; j < p; ++j) {
      Triple neg = pos;
      const auto e = static_cast<EntityId>(rng.uniform_below(n_entities));
      if (j % 2 == 0)
        neg.tail = e;
      else
        neg.head = e;
      out.push_back(neg);
    }
  }
  return out;
}

namespace detail {

inline double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

inline double sigmoid(double x) {
  return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

// Per-row Adam with lazy updates: moments and the bias-correction step count
// advance only for rows touched by the current batch, so untouched rows stay
// bit-identical.
class RowAdam {
 public:
  RowAdam(std::size_t rows, std::size_t dim, const TrainConfig& cfg)
      : dim_(dim), lr_(cfg.learning_rate), b1_(cfg.adam_beta1), b2_(cfg.adam_beta2),
        eps_(cfg.adam_eps), m_(rows * dim, 0.0), v_(rows * dim, 0.0), steps_(rows, 0) {}

  void apply(std::size_t row, const double* grad, std::span<float> params) {
    const std::size_t t = ++steps_[row];
    const double c1 = 1.0 - std::pow(b1_, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(b2_, static_cast<double>(t));
    double* m = m_.data() + row * dim_;
    double* v = v_.data() + row * dim_;
    for (std::size_t k = 0; k < dim_; ++k) {
      const double g = grad[k];
      m[k] = b1_ * m[k] + (1.0 - b1_) * g;
      v[k] = b2_ * v[k] + (1.0 - b2_) * g * g;
      const double update = lr_ * (m[k] / c1) / (std::sqrt(v[k] / c2) + eps_);
      params[k] = static_cast<float>(static_cast<double>(params[k]) - update);
    }
  }

 private:
  std::size_t dim_;
  double lr_, b1_, b2_, eps_;
  std::vector<double> m_, v_;
  std::vector<std::size_t> steps_;
};

// Unit-modulus reprojection of a rotate relation row; degenerate pairs reset
// to phase zero.
inline void project_rotate_row(std::span<float> row) {
  for (std::size_t k = 0; k + 1 < row.size(); k += 2) {
    const double re = row[k], im = row[k + 1];
    const double mod = std::sqrt(re * re + im * im);
    if (mod > 0.0) {
      row[k] = static_cast<float>(re / mod);
      row[k + 1] = static_cast<float>(im / mod);
    } else {
      row[k] = 1.0f;
      row[k + 1] = 0.0f;
    }
  }
}

// Sparse gradient sink: dense double buffers plus a touched-row list, cleared
// after each optimizer step.
class GradSink {
 public:
  GradSink(std::size_t rows, std::size_t dim) : dim_(dim), grad_(rows * dim, 0.0),
                                                touched_mark_(rows, 0) {}

  double* at(std::size_t row) {
    if (!touched_mark_[row]) {
      touched_mark_[row] = 1;
      touched_.push_back(static_cast<std::uint32_t>(row));
    }
    return grad_.data() + row * dim_;
  }

  // Ascending row order: the optimizer visits rows deterministically.
  const std::vector<std::uint32_t>& touched_sorted() {
    std::sort(touched_.begin(), touched_.end());
    return touched_;
  }

  void clear() {
    for (std::uint32_t row : touched_) {
      double* g = grad_.data() + static_cast<std::size_t>(row) * dim_;
      for (std::size_t k = 0; k < dim_; ++k) g[k] = 0.0;
      touched_mark_[row] = 0;
    }
    touched_.clear();
  }

 private:
  std::size_t dim_;
  std::vector<double> grad_;
  std::vector<std::uint32_t> touched_;
  std::vector<std::uint8_t> touched_mark_;
};

}  // namespace detail

// Contrastive training of the core: logistic loss with uniform tail/head
// corruption, per-row Adam, entity rows renormalized to the unit sphere after
// every step (rotate relation rows reprojected to unit modulus). Entity rows
// of the result are indexed core-locally (ascending store id order); the
// relation table covers every store relation, and relations absent from the
// core keep their initialization. Single-worker and bit-deterministic in the
// seed.
inline TrainResult train_core(const TripleStore& store, const CoreSubgraph& core,
                              const TrainConfig& cfg) {
  if (cfg.batch_size == 0) throw ConfigError("batch_size must be positive");
  if (cfg.learning_rate <= 0.0) throw ConfigError("learning_rate must be positive");
  TrainResult result;
  result.entity_ids = core.entities;
  const std::size_t n = core.entities.size();
  result.model = init_model(cfg.op, n, store.n_relations(), cfg.dim, cfg.seed);

  // Core-local triple list.
  std::vector<std::uint32_t> local_of(store.n_entities(), UINT32_MAX);
  for (std::uint32_t i = 0; i < n; ++i) local_of[core.entities[i]] = i;
  std::vector<Triple> triples;
  triples.reserve(core.triple_indices.size());
  for (std::uint32_t idx : core.triple_indices) {
    const Triple& t = store.triple(idx);
    triples.push_back({local_of[t.head], t.relation, local_of[t.tail]});
  }
  if (triples.empty() || cfg.epochs == 0) return result;

  Rng shuffle_rng = Rng{cfg.seed}.fork(0x5481u);
  Rng negative_rng = Rng{cfg.seed}.fork(0x4e45u);

  EmbeddingMatrix& ent = result.model.entity;
  EmbeddingMatrix& rel = result.model.relation;
  detail::RowAdam ent_adam(n, cfg.dim, cfg);
  detail::RowAdam rel_adam(store.n_relations(), cfg.dim, cfg);
  detail::GradSink ent_grad(n, cfg.dim);
  detail::GradSink rel_grad(store.n_relations(), cfg.dim);

  std::vector<std::size_t> order(triples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::vector<Triple> batch;
  batch.reserve(cfg.batch_size);

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(start + cfg.batch_size, order.size());
      batch.clear();
      for (std::size_t i = start; i < stop; ++i) batch.push_back(triples[order[i]]);
      const std::vector<Triple> negatives =
          sample_negatives(batch, cfg.negatives, n, negative_rng);

      auto contribute = [&](const Triple& t, bool positive) {
        const auto h = ent.row(t.head), w = rel.row(t.relation), tl = ent.row(t.tail);
        const double f = score(cfg.op, h, w, tl);
        // d/df of softplus(-f) is sigmoid(f) - 1; of softplus(f) it is sigmoid(f).
        const double coef = positive ? detail::sigmoid(f) - 1.0 : detail::sigmoid(f);
        score_with_grad(cfg.op, h, w, tl, coef, ent_grad.at(t.head), rel_grad.at(t.relation),
                        ent_grad.at(t.tail));
        return positive ? detail::softplus(-f) : detail::softplus(f);
      };

      for (const Triple& t : batch) epoch_loss += contribute(t, true);
      for (const Triple& t : negatives) epoch_loss += contribute(t, false);

      for (std::uint32_t row : ent_grad.touched_sorted()) {
        ent_adam.apply(row, ent_grad.at(row), ent.row(row));
        normalize_row(ent.row(row));
      }
      for (std::uint32_t row : rel_grad.touched_sorted()) {
        rel_adam.apply(row, rel_grad.at(row), rel.row(row));
        if (cfg.op == Operator::rotate) detail::project_rotate_row(rel.row(row));
      }
      ent_grad.clear();
      rel_grad.clear();
    }
    epoch_loss /= static_cast<double>(triples.size());
    if (!std::isfinite(epoch_loss))
      throw DivergedError("training loss became non-finite at epoch " + std::to_string(epoch));
    result.epoch_loss.push_back(epoch_loss);
  }
  return result;
}

}  // namespace sepal
