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

#include "graphtune/params.hpp"

#include <cmath>
#include <cstring>

#include "graphtune/error.hpp"

namespace graphtune {

std::string_view owner_name(Owner owner) {
  switch (owner) {
    case Owner::kEncoder:
      return "encoder";
    case Owner::kDecoder:
      return "decoder";
    case Owner::kEstimator:
      return "estimator";
  }
  return "unknown";
}

ParamId ModelParams::add(std::string name, Owner owner, int rows, int cols) {
  if (find(name)) throw ConfigError("duplicate parameter name " + name);
  if (rows < 1 || cols < 1) throw ConfigError("empty parameter " + name);
  entries_.push_back({std::move(name), owner, Matrix::Zero(rows, cols)});
  return entries_.size() - 1;
}

std::optional<ParamId> ModelParams::find(std::string_view name) const {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].name == name) return i;
  }
  return std::nullopt;
}

void ModelParams::freeze_only(Owner owner) {
  for (Owner o : kAllOwners) set_frozen(o, o == owner);
}

void ModelParams::freeze_all_except(Owner owner) {
  for (Owner o : kAllOwners) set_frozen(o, o != owner);
}

std::uint64_t ModelParams::hash(Owner owner) const {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const void* data, std::size_t bytes) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < bytes; ++i) {
      h ^= p[i];
      h *= 1099511628211ULL;
    }
  };
  for (const auto& e : entries_) {
    if (e.owner != owner) continue;
    mix(e.name.data(), e.name.size());
    mix(e.value.data(), sizeof(double) * static_cast<std::size_t>(e.value.size()));
  }
  return h;
}

std::size_t ModelParams::scalar_count(Owner owner) const {
  std::size_t n = 0;
  for (const auto& e : entries_) {
    if (e.owner == owner) n += static_cast<std::size_t>(e.value.size());
  }
  return n;
}

bool ModelParams::all_finite() const {
  for (const auto& e : entries_) {
    if (!e.value.allFinite()) return false;
  }
  return true;
}

Gradients::Gradients(const ModelParams& params) {
  grads_.reserve(params.size());
  tracked_.reserve(params.size());
  for (ParamId id = 0; id < params.size(); ++id) {
    const bool tracked = !params.frozen(params.owner(id));
    tracked_.push_back(tracked);
    const Matrix& v = params.value(id);
    grads_.push_back(tracked ? Matrix::Zero(v.rows(), v.cols()) : Matrix());
  }
}

void Gradients::zero() {
  for (auto& g : grads_) g.setZero();
}

double Gradients::norm() const {
  double sq = 0.0;
  for (const auto& g : grads_) sq += g.squaredNorm();
  return std::sqrt(sq);
}

void Gradients::scale(double factor) {
  for (auto& g : grads_) g *= factor;
}

}  // namespace graphtune
