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

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "sepal/error.hpp"

namespace sepal {

static_assert(std::endian::native == std::endian::little,
              "on-disk formats are little-endian; big-endian hosts need byte swaps");

// Incremental FNV-1a64 over everything written/read, so files can carry a
// trailing integrity checksum.
class BinWriter {
 public:
  explicit BinWriter(const std::string& path) : out_(path, std::ios::binary) {
    if (!out_) throw DataError("cannot open for writing: " + path);
  }

  void bytes(const void* data, std::size_t n) {
    out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
    fnv_update(data, n);
  }

  template <typename T>
  void pod(T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    bytes(&value, sizeof value);
  }

  void str(const std::string& s) {
    pod(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }

  template <typename T>
  void array(const std::vector<T>& v) {
    static_assert(std::is_trivially_copyable_v<T>);
    bytes(v.data(), v.size() * sizeof(T));
  }

  // Writes the running checksum itself (not folded into the hash) and closes.
  void finish() {
    const std::uint64_t h = hash_;
    out_.write(reinterpret_cast<const char*>(&h), sizeof h);
    out_.close();
    if (!out_) throw DataError("short write while closing output file");
  }

  std::uint64_t hash() const { return hash_; }

 private:
  void fnv_update(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      hash_ ^= p[i];
      hash_ *= 0x100000001b3ULL;
    }
  }

  std::ofstream out_;
  std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

class BinReader {
 public:
  explicit BinReader(const std::string& path) : path_(path), in_(path, std::ios::binary) {
    if (!in_) throw DataError("cannot open for reading: " + path);
  }

  void bytes(void* data, std::size_t n) {
    in_.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n)
      throw UnknownFormatError("truncated file: " + path_);
    fnv_update(data, n);
  }

  template <typename T>
  T pod() {
    static_assert(std::is_trivially_copyable_v<T>);
    T value;
    bytes(&value, sizeof value);
    return value;
  }

  std::string str() {
    const auto n = pod<std::uint32_t>();
    std::string s(n, '\0');
    bytes(s.data(), n);
    return s;
  }

  template <typename T>
  std::vector<T> array(std::size_t count) {
    static_assert(std::is_trivially_copyable_v<T>);
    std::vector<T> v(count);
    bytes(v.data(), count * sizeof(T));
    return v;
  }

  // Reads the trailing checksum and compares with the running hash.
  void verify_checksum() {
    const std::uint64_t expect = hash_;
    std::uint64_t stored;
    in_.read(reinterpret_cast<char*>(&stored), sizeof stored);
    if (static_cast<std::size_t>(in_.gcount()) != sizeof stored)
      throw UnknownFormatError("missing checksum trailer: " + path_);
    if (stored != expect)
      throw ChecksumMismatchError("checksum mismatch in " + path_);
  }

 private:
  void fnv_update(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      hash_ ^= p[i];
      hash_ *= 0x100000001b3ULL;
    }
  }

  std::string path_;
  std::ifstream in_;
  std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

}  // namespace sepal
