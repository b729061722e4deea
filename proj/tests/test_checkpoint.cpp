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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "sepal/checkpoint.hpp"
#include "sepal/embedding.hpp"

using sepal::Checkpoint;
using sepal::EmbeddingModel;
using sepal::Operator;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

std::vector<std::string> numbered(const std::string& prefix, std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

std::vector<std::vector<std::string>> read_tsv(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
      const std::size_t tab = line.find('\t', start);
      if (tab == std::string::npos) {
        fields.push_back(line.substr(start));
        break;
      }
      fields.push_back(line.substr(start, tab - start));
      start = tab + 1;
    }
    rows.push_back(std::move(fields));
  }
  return rows;
}

}  // namespace

TEST_CASE("checkpoint round-trip preserves every bit") {
  const EmbeddingModel model = sepal::init_model(Operator::rotate, 7, 3, 10, 55);
  const auto ent_labels = numbered("entity_", 7);
  const auto rel_labels = numbered("rel_", 3);
  const std::string path = temp_path("sepal_ckpt_roundtrip.spem");
  sepal::save_checkpoint(path, model, ent_labels, rel_labels);

  const Checkpoint cp = sepal::load_checkpoint(path);
  REQUIRE(cp.model.op == Operator::rotate);
  REQUIRE(cp.model.dim == 10);
  REQUIRE(cp.model.entity.rows() == 7);
  REQUIRE(cp.model.relation.rows() == 3);
  REQUIRE(cp.model.entity.data() == model.entity.data());
  REQUIRE(cp.model.relation.data() == model.relation.data());
  REQUIRE(cp.entity_labels == ent_labels);
  REQUIRE(cp.relation_labels == rel_labels);
  std::filesystem::remove(path);
}

TEST_CASE("label tables must match the embedding tables") {
  const EmbeddingModel model = sepal::init_model(Operator::distmult, 4, 2, 6, 1);
  REQUIRE_THROWS_AS(
      sepal::save_checkpoint(temp_path("sepal_ckpt_bad.spem"), model,
                             numbered("e", 3), numbered("r", 2)),
      sepal::DimensionMismatchError);
}

TEST_CASE("a corrupted checkpoint fails its checksum") {
  const EmbeddingModel model = sepal::init_model(Operator::distmult, 5, 2, 8, 9);
  const std::string path = temp_path("sepal_ckpt_corrupt.spem");
  sepal::save_checkpoint(path, model, numbered("e", 5), numbered("r", 2));
  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(40);  // inside the entity float block
    char byte;
    f.seekg(40);
    f.read(&byte, 1);
    byte = static_cast<char>(byte ^ 0x40);
    f.seekp(40);
    f.write(&byte, 1);
  }
  REQUIRE_THROWS_AS(sepal::load_checkpoint(path), sepal::ChecksumMismatchError);
  std::filesystem::remove(path);
}

TEST_CASE("foreign and future files are rejected before any table is read") {
  const std::string path = temp_path("sepal_ckpt_magic.spem");
  {
    std::ofstream f(path, std::ios::binary);
    f << "GIF89a definitely not embeddings";
  }
  REQUIRE_THROWS_AS(sepal::load_checkpoint(path), sepal::UnknownFormatError);

  const EmbeddingModel model = sepal::init_model(Operator::distmult, 3, 1, 4, 2);
  sepal::save_checkpoint(path, model, numbered("e", 3), numbered("r", 1));
  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(4);  // version field
    const std::uint16_t bad = 99;
    f.write(reinterpret_cast<const char*>(&bad), sizeof bad);
  }
  REQUIRE_THROWS_AS(sepal::load_checkpoint(path), sepal::UnknownFormatError);
  std::filesystem::remove(path);
}

TEST_CASE("tsv export writes one labeled row per entity") {
  const EmbeddingModel model = sepal::init_model(Operator::distmult, 3, 1, 4, 31);
  Checkpoint cp;
  cp.model = model;
  cp.entity_labels = {"alpha", "beta", "gamma"};
  cp.relation_labels = {"r"};
  const std::string path = temp_path("sepal_export_all.tsv");
  std::filesystem::remove(path + ".unmatched");  // stale runs must not leak in
  const auto report = sepal::export_tsv(path, cp);
  REQUIRE(report.rows_written == 3);
  REQUIRE(report.unmatched_labels == 0);

  const auto rows = read_tsv(path);
  REQUIRE(rows.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    REQUIRE(rows[i].size() == 5);  // label + dim fields
    REQUIRE(rows[i][0] == cp.entity_labels[i]);
    for (std::size_t k = 0; k < 4; ++k) {
      const double parsed = std::stod(rows[i][k + 1]);
      REQUIRE(parsed ==
              Catch::Approx(static_cast<double>(model.entity.row(i)[k])).margin(1e-6));
    }
  }
  REQUIRE_FALSE(std::filesystem::exists(path + ".unmatched"));
  std::filesystem::remove(path);
}

TEST_CASE("a label filter selects rows in filter order and reports the rest") {
  const EmbeddingModel model = sepal::init_model(Operator::distmult, 3, 1, 4, 8);
  Checkpoint cp;
  cp.model = model;
  cp.entity_labels = {"alpha", "beta", "gamma"};
  cp.relation_labels = {"r"};
  const std::string path = temp_path("sepal_export_filtered.tsv");
  const std::vector<std::string> filter{"gamma", "missing_label", "alpha"};
  const auto report = sepal::export_tsv(path, cp, &filter);
  REQUIRE(report.rows_written == 2);
  REQUIRE(report.unmatched_labels == 1);

  const auto rows = read_tsv(path);
  REQUIRE(rows.size() == 2);
  REQUIRE(rows[0][0] == "gamma");
  REQUIRE(rows[1][0] == "alpha");

  std::ifstream side(path + ".unmatched");
  REQUIRE(side.good());
  std::string line;
  REQUIRE(std::getline(side, line));
  REQUIRE(line == "missing_label");
  REQUIRE_FALSE(std::getline(side, line));
  side.close();
  std::filesystem::remove(path);
  std::filesystem::remove(path + ".unmatched");
}

TEST_CASE("exported values parse back to the stored floats") {
  const EmbeddingModel model = sepal::init_model(Operator::transe, 2, 1, 6, 77);
  Checkpoint cp;
  cp.model = model;
  cp.entity_labels = {"x", "y"};
  cp.relation_labels = {"r"};
  const std::string path = temp_path("sepal_export_precision.tsv");
  sepal::export_tsv(path, cp);
  const auto rows = read_tsv(path);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t k = 0; k < 6; ++k) {
      // nine significant digits reproduce the float exactly
      const float parsed = std::stof(rows[i][k + 1]);
      REQUIRE(parsed == model.entity.row(i)[k]);
    }
  std::filesystem::remove(path);
}
