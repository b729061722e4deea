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

#include <algorithm>
#include <vector>

#include "oracles.hpp"
#include "sepal/rng.hpp"

using sepal::Rng;

TEST_CASE("identical seeds give identical streams") {
  Rng a{123}, b{123};
  for (int i = 0; i < 1000; ++i) REQUIRE(a.next_u64() == b.next_u64());
}

TEST_CASE("different seeds give different streams") {
  Rng a{1}, b{2};
  bool any_diff = false;
  for (int i = 0; i < 16; ++i) any_diff |= a.next_u64() != b.next_u64();
  REQUIRE(any_diff);
}

TEST_CASE("forks are reproducible and stream ids diverge") {
  REQUIRE(Rng{9}.fork(7).next_u64() == Rng{9}.fork(7).next_u64());
  REQUIRE(Rng{9}.fork(1).next_u64() != Rng{9}.fork(2).next_u64());
  // a fork differs from its parent's own stream
  Rng parent{9};
  REQUIRE(parent.fork(0).next_u64() != Rng{9}.next_u64());
}

TEST_CASE("uniform_below stays in range and covers the range") {
  Rng rng{42};
  std::vector<char> hit(10, 0);
  for (int i = 0; i < 1000; ++i) {
    const auto v = rng.uniform_below(10);
    REQUIRE(v < 10);
    hit[v] = 1;
  }
  REQUIRE(std::count(hit.begin(), hit.end(), 1) == 10);
}

TEST_CASE("uniform_below is uniform by chi-square at alpha 0.01") {
  Rng rng{2024};
  const std::size_t bins = 1000, draws = 1000000;
  std::vector<std::size_t> count(bins, 0);
  for (std::size_t i = 0; i < draws; ++i) ++count[rng.uniform_below(bins)];
  const double expected = static_cast<double>(draws) / static_cast<double>(bins);
  double chi2 = 0.0;
  for (std::size_t c : count) {
    const double d = static_cast<double>(c) - expected;
    chi2 += d * d / expected;
  }
  REQUIRE(chi2 < oracle::chi_square_critical(bins - 1));
}

TEST_CASE("uniform_real lies in [0, 1)") {
  Rng rng{5};
  double lo = 1.0, hi = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double v = rng.uniform_real();
    REQUIRE(v >= 0.0);
    REQUIRE(v < 1.0);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  REQUIRE(lo < 0.01);
  REQUIRE(hi > 0.99);
}

TEST_CASE("shuffle yields a permutation and is seed-deterministic") {
  std::vector<int> v(100), w(100);
  for (int i = 0; i < 100; ++i) v[i] = w[i] = i;
  Rng a{7}, b{7};
  a.shuffle(v);
  b.shuffle(w);
  REQUIRE(v == w);
  std::vector<int> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 100; ++i) REQUIRE(sorted[i] == i);
  bool moved = false;
  for (int i = 0; i < 100; ++i) moved |= v[i] != i;
  REQUIRE(moved);
}
