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

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "sepal/error.hpp"
#include "sepal/rng.hpp"

namespace sepal {

// Row-major f32 matrix with per-row frozen and zero flags. Frozen rows must
// never be written by optimizers or propagation; zero rows mark entities that
// have not yet received a value.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;
  EmbeddingMatrix(std::size_t rows, std::size_t dim)
      : rows_(rows), dim_(dim), data_(rows * dim, 0.0f), frozen_(rows, 0), zero_(rows, 0) {}

  std::size_t rows() const { return rows_; }
  std::size_t dim() const { return dim_; }

  std::span<float> row(std::size_t i) { return {data_.data() + i * dim_, dim_}; }
  std::span<const float> row(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }

  const std::vector<float>& data() const { return data_; }
  std::vector<float>& data() { return data_; }

  bool frozen(std::size_t i) const { return frozen_[i] != 0; }
  void set_frozen(std::size_t i, bool f) { frozen_[i] = f ? 1 : 0; }
  bool zero_row(std::size_t i) const { return zero_[i] != 0; }
  void set_zero_row(std::size_t i, bool z) { zero_[i] = z ? 1 : 0; }

  std::size_t count_zero_rows() const {
    std::size_t c = 0;
    for (auto z : zero_) c += z != 0;
    return c;
  }

 private:
  std::size_t rows_ = 0, dim_ = 0;
  std::vector<float> data_;
  std::vector<std::uint8_t> frozen_, zero_;
};

// L2-normalizes in place with 64-bit accumulation; a zero row is left
// untouched. Returns the pre-normalization norm.
inline double normalize_row(std::span<float> row) {
  double ss = 0.0;
  for (float v : row) ss += static_cast<double>(v) * static_cast<double>(v);
  const double nrm = std::sqrt(ss);
  if (nrm > 0.0)
    for (float& v : row) v = static_cast<float>(static_cast<double>(v) / nrm);
  return nrm;
}

inline double row_norm(std::span<const float> row) {
  double ss = 0.0;
  for (float v : row) ss += static_cast<double>(v) * static_cast<double>(v);
  return std::sqrt(ss);
}

enum class Operator { distmult, transe, rotate };

inline const char* operator_name(Operator op) {
  switch (op) {
    case Operator::distmult: return "distmult";
    case Operator::transe: return "transe";
    case Operator::rotate: return "rotate";
  }
  return "?";
}

inline Operator operator_from_name(const std::string& name) {
  if (name == "distmult") return Operator::distmult;
  if (name == "transe") return Operator::transe;
  if (name == "rotate") return Operator::rotate;
  throw ConfigError("unknown operator: " + name + " (expected distmult, transe, or rotate)");
}

struct EmbeddingModel {
  Operator op = Operator::distmult;
  std::size_t dim = 0;
  EmbeddingMatrix entity;    // one row per entity
  EmbeddingMatrix relation;  // one row per relation, inverses included
};

// Fresh model: entity rows are uniform in [-1/sqrt(d), 1/sqrt(d)] then
// L2-normalized; relation rows stay uniform for distmult/transe and are unit
// phases per complex pair for rotate. Draw order is row-major and fixed, so a
// seed pins every bit.
inline EmbeddingModel init_model(Operator op, std::size_t n_entities, std::size_t n_relations,
                                 std::size_t dim, std::uint64_t seed) {
  if (dim == 0) throw ConfigError("embedding dimension must be positive");
  if (op == Operator::rotate && dim % 2 != 0)
    throw DimensionMismatchError("rotate requires an even embedding dimension");
  EmbeddingModel model;
  model.op = op;
  model.dim = dim;
  model.entity = EmbeddingMatrix(n_entities, dim);
  model.relation = EmbeddingMatrix(n_relations, dim);

  Rng rng = Rng{seed}.fork(0x1e17u);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
  for (std::size_t i = 0; i < n_entities; ++i) {
    auto row = model.entity.row(i);
    for (float& v : row) v = static_cast<float>(rng.uniform_range(-scale, scale));
    normalize_row(row);
  }
  constexpr double kPi = 3.14159265358979323846;
  for (std::size_t i = 0; i < n_relations; ++i) {
    auto row = model.relation.row(i);
    if (op == Operator::rotate) {
      for (std::size_t k = 0; k + 1 < dim; k += 2) {
        const double phase = rng.uniform_range(-kPi, kPi);
        row[k] = static_cast<float>(std::cos(phase));
        row[k + 1] = static_cast<float>(std::sin(phase));
      }
    } else {
      for (float& v : row) v = static_cast<float>(rng.uniform_range(-scale, scale));
    }
  }
  return model;
}

}  // namespace sepal
