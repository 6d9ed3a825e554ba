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

#include <filesystem>
#include <string>

#include "graphtune/training.hpp"

namespace graphtune {

/// Checkpoint layout, version 1 (all integers little-endian):
///
///   "GTCK"  u32 version  u64 header_bytes  header (UTF-8 JSON)
///   u32 array_count, then per array:
///     u32 name_bytes  name  u8 owner  u8 kind  u32 rows  u32 cols
///     rows*cols f64, column-major
///
/// The header holds the model and train configs, feature order,
/// standardizer and the scalar training state. `kind` is 0 for a parameter,
/// 1 and 2 for its Adam first and second moments.
inline constexpr std::uint32_t kCheckpointVersion = 1;

std::string checkpoint_bytes(const TrainCheckpoint& checkpoint);
TrainCheckpoint parse_checkpoint(const std::string& bytes,
                                 const std::string& source = "<memory>");

void save_checkpoint(const TrainCheckpoint& checkpoint,
                     const std::filesystem::path& path);
/// Throws FormatError on unreadable, truncated or inconsistent files.
TrainCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace graphtune
