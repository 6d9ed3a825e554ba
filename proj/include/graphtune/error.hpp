// Copyright 2026 The graphtune Authors.
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

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace graphtune {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A graph metric is not defined on the given graph (too few nodes, zero
/// denominator). `feature()` is empty when raised by a bare metric and holds
/// the feature name when raised through compute_features.
class UndefinedMetricError : public Error {
 public:
  UndefinedMetricError(const std::string& what, std::string feature = {})
      : Error(feature.empty() ? what : feature + ": " + what),
        feature_(std::move(feature)) {}
  const std::string& feature() const { return feature_; }

 private:
  std::string feature_;
};

class InvalidGraphError : public Error {
 public:
  using Error::Error;
};

/// The DFS encoder only accepts connected graphs with at least one edge.
class NotEncodableError : public Error {
 public:
  using Error::Error;
};

/// A DFS code or token sequence violates the code invariants.
class InvalidCodeError : public Error {
 public:
  enum class Kind {
    kEmpty,
    kBadStart,
    kSelfLoop,
    kTimestampGap,
    kDanglingBackward,
    kNotAtFrontier,
    kDuplicateEdge,
    kBadLabel,
    kBadToken,
  };

  InvalidCodeError(Kind kind, std::size_t position, const std::string& what)
      : Error("invalid code at position " + std::to_string(position) + ": " +
              what),
        kind_(kind),
        position_(position) {}

  Kind kind() const { return kind_; }
  std::size_t position() const { return position_; }

 private:
  Kind kind_;
  std::size_t position_;
};

/// A timestamp does not fit the token vocabulary.
class CapacityError : public Error {
 public:
  using Error::Error;
};

class IngestError : public Error {
 public:
  IngestError(const std::string& path, std::size_t line, const std::string& what)
      : Error(path + ":" + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class SamplingExhaustedError : public Error {
 public:
  using Error::Error;
};

class EmptyDatasetError : public Error {
 public:
  using Error::Error;
};

/// Dimension or configuration mismatch.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Caller violated an operation contract (length or ordering mismatch).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// A phase loss was requested while the wrong partition is trainable.
class TrainingContractError : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace graphtune
