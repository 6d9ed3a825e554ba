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

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace graphtune {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

/// Which network a parameter belongs to. The partition drives freezing
/// during alternate training.
enum class Owner : std::uint8_t { kEncoder = 0, kDecoder = 1, kEstimator = 2 };
inline constexpr std::array<Owner, 3> kAllOwners = {
    Owner::kEncoder, Owner::kDecoder, Owner::kEstimator};

std::string_view owner_name(Owner owner);

using ParamId = std::size_t;

/// Named, owner-tagged trainable arrays. Entries are only ever added; names
/// and owner tags are fixed once registered.
class ModelParams {
 public:
  ParamId add(std::string name, Owner owner, int rows, int cols);

  std::size_t size() const { return entries_.size(); }
  Matrix& value(ParamId id) { return entries_[id].value; }
  const Matrix& value(ParamId id) const { return entries_[id].value; }
  const std::string& name(ParamId id) const { return entries_[id].name; }
  Owner owner(ParamId id) const { return entries_[id].owner; }
  std::optional<ParamId> find(std::string_view name) const;

  void set_frozen(Owner owner, bool frozen) {
    frozen_[static_cast<int>(owner)] = frozen;
  }
  bool frozen(Owner owner) const { return frozen_[static_cast<int>(owner)]; }
  void freeze_only(Owner owner);
  void freeze_all_except(Owner owner);

  /// FNV-1a over names and raw values of one partition.
  std::uint64_t hash(Owner owner) const;
  std::size_t scalar_count(Owner owner) const;
  bool all_finite() const;

 private:
  struct Entry {
    std::string name;
    Owner owner;
    Matrix value;
  };
  std::vector<Entry> entries_;
  std::array<bool, 3> frozen_{false, false, false};
};

/// Gradient buffers shaped like a ModelParams. Partitions that were frozen
/// when the buffer was created are not tracked: layers skip them and they
/// stay zero.
class Gradients {
 public:
  explicit Gradients(const ModelParams& params);

  bool tracks(ParamId id) const { return tracked_[id]; }
  Matrix& operator[](ParamId id) { return grads_[id]; }
  const Matrix& operator[](ParamId id) const { return grads_[id]; }
  std::size_t size() const { return grads_.size(); }

  void zero();
  double norm() const;
  void scale(double factor);

 private:
  std::vector<Matrix> grads_;
  std::vector<bool> tracked_;
};

}  // namespace graphtune
