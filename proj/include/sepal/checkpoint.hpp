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

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "sepal/binio.hpp"
#include "sepal/embedding.hpp"
#include "sepal/error.hpp"

namespace sepal {

// "SPEM" as a little-endian u32.
inline constexpr std::uint32_t kCheckpointMagic = 0x4d455053u;
inline constexpr std::uint16_t kCheckpointVersion = 1;

struct Checkpoint {
  EmbeddingModel model;
  std::vector<std::string> entity_labels;
  std::vector<std::string> relation_labels;
};

inline void save_checkpoint(const std::string& path, const EmbeddingModel& model,
                            const std::vector<std::string>& entity_labels,
                            const std::vector<std::string>& relation_labels) {
  if (entity_labels.size() != model.entity.rows() ||
      relation_labels.size() != model.relation.rows())
    throw DimensionMismatchError("label tables do not match the embedding tables");
  BinWriter w(path);
  w.pod<std::uint32_t>(kCheckpointMagic);
  w.pod<std::uint16_t>(kCheckpointVersion);
  w.pod<std::uint8_t>(static_cast<std::uint8_t>(model.op));
  w.pod<std::uint32_t>(static_cast<std::uint32_t>(model.dim));
  w.pod<std::uint64_t>(model.entity.rows());
  w.pod<std::uint64_t>(model.relation.rows());
  w.array(model.entity.data());
  w.array(model.relation.data());
  for (const auto& s : entity_labels) w.str(s);
  for (const auto& s : relation_labels) w.str(s);
  w.finish();
}

inline Checkpoint load_checkpoint(const std::string& path) {
  BinReader r(path);
  if (r.pod<std::uint32_t>() != kCheckpointMagic)
    throw UnknownFormatError("not a checkpoint file: " + path);
  const auto version = r.pod<std::uint16_t>();
  if (version != kCheckpointVersion)
    throw UnknownFormatError("unsupported checkpoint version " + std::to_string(version));
  const auto op_raw = r.pod<std::uint8_t>();
  if (op_raw > 2) throw UnknownFormatError("unknown operator id in checkpoint");
  const auto dim = r.pod<std::uint32_t>();
  const auto n_entities = r.pod<std::uint64_t>();
  const auto n_relations = r.pod<std::uint64_t>();

  Checkpoint cp;
  cp.model.op = static_cast<Operator>(op_raw);
  cp.model.dim = dim;
  cp.model.entity = EmbeddingMatrix(n_entities, dim);
  cp.model.relation = EmbeddingMatrix(n_relations, dim);
  cp.model.entity.data() = r.array<float>(n_entities * dim);
  cp.model.relation.data() = r.array<float>(n_relations * dim);
  cp.entity_labels.reserve(n_entities);
  for (std::uint64_t i = 0; i < n_entities; ++i) cp.entity_labels.push_back(r.str());
  cp.relation_labels.reserve(n_relations);
  for (std::uint64_t i = 0; i < n_relations; ++i) cp.relation_labels.push_back(r.str());
  r.verify_checksum();
  return cp;
}

struct ExportReport {
  std::size_t rows_written = 0;
  std::size_t unmatched_labels = 0;
};

// Writes one entity row per line: label, then the vector, tab-separated, with
// 9 significant decimal digits. With a label filter only matching labels are
// written, in filter order, and the missing ones go to `path + ".unmatched"`.
inline ExportReport export_tsv(const std::string& path, const Checkpoint& cp,
                               const std::vector<std::string>* label_filter = nullptr) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path);
  char buf[64];
  auto write_row = [&](const std::string& label, std::span<const float> row) {
    out << label;
    for (float v : row) {
      std::snprintf(buf, sizeof(buf), "%.9g", static_cast<double>(v));
      out << '\t' << buf;
    }
    out << '\n';
  };

  ExportReport report;
  if (label_filter == nullptr) {
    for (std::size_t i = 0; i < cp.model.entity.rows(); ++i)
      write_row(cp.entity_labels[i], cp.model.entity.row(i));
    report.rows_written = cp.model.entity.rows();
    return report;
  }

  std::unordered_map<std::string, std::size_t> index;
  index.reserve(cp.entity_labels.size());
  for (std::size_t i = 0; i < cp.entity_labels.size(); ++i) index.emplace(cp.entity_labels[i], i);
  std::vector<std::string> unmatched;
  for (const std::string& label : *label_filter) {
    auto it = index.find(label);
    if (it == index.end()) {
      unmatched.push_back(label);
    } else {
      write_row(label, cp.model.entity.row(it->second));
      ++report.rows_written;
    }
  }
  std::ofstream side(path + ".unmatched");
  if (!side) throw DataError("cannot open for writing: " + path + ".unmatched");
  for (const std::string& label : unmatched) side << label << '\n';
  report.unmatched_labels = unmatched.size();
  return report;
}

}  // namespace sepal
