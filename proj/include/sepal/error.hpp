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

#include <stdexcept>
#include <string>

namespace sepal {

// Error taxonomy. Process exit codes: config errors map to 2, data errors to 3,
// numeric divergence to 4.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct ConfigError : Error {
  using Error::Error;
};

struct DataError : Error {
  using Error::Error;
};

struct EmptyGraphError : DataError {
  using DataError::DataError;
};

struct MalformedRecordError : DataError {
  using DataError::DataError;
};

struct AlreadyAugmentedError : DataError {
  using DataError::DataError;
};

struct EmptyCoreError : DataError {
  using DataError::DataError;
};

struct CoreNotInStoreError : DataError {
  using DataError::DataError;
};

struct InfeasibleSizeError : DataError {
  using DataError::DataError;
};

struct DimensionMismatchError : DataError {
  using DataError::DataError;
};

struct OperatorUnsupportedError : DataError {
  using DataError::DataError;
};

struct UnknownFormatError : DataError {
  using DataError::DataError;
};

struct ChecksumMismatchError : DataError {
  using DataError::DataError;
};

struct RelationUnseenError : DataError {
  using DataError::DataError;
};

struct DivergedError : Error {
  using Error::Error;
};

}  // namespace sepal
