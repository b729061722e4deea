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
#include <span>

#include "sepal/embedding.hpp"
#include "sepal/error.hpp"

namespace sepal {

// Relational composition phi(head, relation) and the plausibility score
// f(h, r, t). Conventions: higher score = more plausible; distmult scores by
// inner product, transe and rotate by negative Euclidean distance to the
// tail. rotate interprets rows as interleaved (re, im) pairs and relation
// pairs as unit-modulus phases. Sums run in 64-bit.

namespace detail {

inline void check_dims(std::size_t a, std::size_t b, std::size_t c, Operator op) {
  if (a != b || b != c) throw DimensionMismatchError("embedding dimensions disagree");
  if (op == Operator::rotate && a % 2 != 0)
    throw DimensionMismatchError("rotate requires an even embedding dimension");
}

}  // namespace detail

inline void phi(Operator op, std::span<const float> head, std::span<const float> rel,
                std::span<float> out) {
  detail::check_dims(head.size(), rel.size(), out.size(), op);
  const std::size_t d = head.size();
  switch (op) {
    case Operator::distmult:
      for (std::size_t k = 0; k < d; ++k) out[k] = head[k] * rel[k];
      break;
    case Operator::transe:
      for (std::size_t k = 0; k < d; ++k) out[k] = head[k] + rel[k];
      break;
    case Operator::rotate:
      for (std::size_t k = 0; k < d; k += 2) {
        const float a = head[k], b = head[k + 1], c = rel[k], s = rel[k + 1];
        out[k] = a * c - b * s;
        out[k + 1] = a * s + b * c;
      }
      break;
  }
}

// acc[k] += phi(head, rel)[k] in double precision; the propagation message
// accumulator.
inline void accumulate_phi(Operator op, std::span<const float> head, std::span<const float> rel,
                           std::span<double> acc) {
  const std::size_t d = head.size();
  switch (op) {
    case Operator::distmult:
      for (std::size_t k = 0; k < d; ++k)
        acc[k] += static_cast<double>(head[k]) * static_cast<double>(rel[k]);
      break;
    case Operator::transe:
      for (std::size_t k = 0; k < d; ++k)
        acc[k] += static_cast<double>(head[k]) + static_cast<double>(rel[k]);
      break;
    case Operator::rotate:
      for (std::size_t k = 0; k < d; k += 2) {
        const double a = head[k], b = head[k + 1], c = rel[k], s = rel[k + 1];
        acc[k] += a * c - b * s;
        acc[k + 1] += a * s + b * c;
      }
      break;
  }
}

inline double score(Operator op, std::span<const float> head, std::span<const float> rel,
                    std::span<const float> tail) {
  detail::check_dims(head.size(), rel.size(), tail.size(), op);
  const std::size_t d = head.size();
  double acc = 0.0;
  switch (op) {
    case Operator::distmult:
      for (std::size_t k = 0; k < d; ++k)
        acc += static_cast<double>(head[k]) * static_cast<double>(rel[k]) *
               static_cast<double>(tail[k]);
      return acc;
    case Operator::transe:
      for (std::size_t k = 0; k < d; ++k) {
        const double r = static_cast<double>(head[k]) + static_cast<double>(rel[k]) -
                         static_cast<double>(tail[k]);
        acc += r * r;
      }
      return -std::sqrt(acc);
    case Operator::rotate:
      for (std::size_t k = 0; k < d; k += 2) {
        const double a = head[k], b = head[k + 1], c = rel[k], s = rel[k + 1];
        const double re = a * c - b * s - static_cast<double>(tail[k]);
        const double im = a * s + b * c - static_cast<double>(tail[k + 1]);
        acc += re * re + im * im;
      }
      return -std::sqrt(acc);
  }
  return 0.0;
}

// Score plus gradient accumulation: adds coef * d(score)/d(row) into the three
// double buffers (any of which may be null). The transe/rotate distance has no
// gradient at zero distance; that case contributes nothing.
inline double score_with_grad(Operator op, std::span<const float> head,
                              std::span<const float> rel, std::span<const float> tail,
                              double coef, double* grad_head, double* grad_rel,
                              double* grad_tail) {
  const std::size_t d = head.size();
  double acc = 0.0;
  switch (op) {
    case Operator::distmult: {
      for (std::size_t k = 0; k < d; ++k) {
        const double h = head[k], w = rel[k], t = tail[k];
        acc += h * w * t;
        if (grad_head) grad_head[k] += coef * w * t;
        if (grad_rel) grad_rel[k] += coef * h * t;
        if (grad_tail) grad_tail[k] += coef * h * w;
      }
      return acc;
    }
    case Operator::transe: {
      for (std::size_t k = 0; k < d; ++k) {
        const double r = static_cast<double>(head[k]) + static_cast<double>(rel[k]) -
                         static_cast<double>(tail[k]);
        acc += r * r;
      }
      const double nrm = std::sqrt(acc);
      if (nrm > 0.0) {
        for (std::size_t k = 0; k < d; ++k) {
          const double r = static_cast<double>(head[k]) + static_cast<double>(rel[k]) -
                           static_cast<double>(tail[k]);
          const double g = -coef * r / nrm;
          if (grad_head) grad_head[k] += g;
          if (grad_rel) grad_rel[k] += g;
          if (grad_tail) grad_tail[k] -= g;
        }
      }
      return -nrm;
    }
    case Operator::rotate: {
      for (std::size_t k = 0; k < d; k += 2) {
        const double a = head[k], b = head[k + 1], c = rel[k], s = rel[k + 1];
        const double re = a * c - b * s - static_cast<double>(tail[k]);
        const double im = a * s + b * c - static_cast<double>(tail[k + 1]);
        acc += re * re + im * im;
      }
      const double nrm = std::sqrt(acc);
      if (nrm > 0.0) {
        for (std::size_t k = 0; k < d; k += 2) {
          const double a = head[k], b = head[k + 1], c = rel[k], s = rel[k + 1];
          const double re = a * c - b * s - static_cast<double>(tail[k]);
          const double im = a * s + b * c - static_cast<double>(tail[k + 1]);
          // d(score)/d(phi) for this pair, then chain through the product.
          const double gre = -coef * re / nrm;
          const double gim = -coef * im / nrm;
          if (grad_head) {
            grad_head[k] += gre * c + gim * s;
            grad_head[k + 1] += -gre * s + gim * c;
          }
          if (grad_rel) {
            grad_rel[k] += gre * a + gim * b;
            grad_rel[k + 1] += -gre * b + gim * a;
          }
          if (grad_tail) {
            grad_tail[k] -= gre;
            grad_tail[k + 1] -= gim;
          }
        }
      }
      return -nrm;
    }
  }
  return 0.0;
}

}  // namespace sepal
