// Copyright 2026 The MorphMLP Authors
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

// Checkpoint file layout (all integers little-endian):
//
//   "MORPHNET1"                       9 bytes
//   u32 entry count
//   per entry:  u32 name length, name bytes (UTF-8),
//               u8 dtype (0 = f32, 1 = f64), u32 rank, rank x u64 extents
//   payloads:   each entry's scalars, little-endian, in manifest order

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "morphmlp/init.hpp"

namespace morph {

inline constexpr char kCheckpointMagic[] = "MORPHNET1";

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CheckpointEntry {
  std::string name;
  DType dtype = DType::f32;
  Shape shape;
};

template <typename T>
void save_checkpoint(const ParamList<T>& params, const std::filesystem::path& path);

/// Reads only the manifest.
std::vector<CheckpointEntry> read_checkpoint_manifest(const std::filesystem::path& path);

struct LoadReport {
  std::vector<std::string> loaded;
  std::vector<std::string> missing;     // in the model, absent from the file
  std::vector<std::string> unexpected;  // in the file, absent from the model
  std::vector<std::string> mismatched;  // present in both with different shapes
};

/// Copies stored values into matching parameters, converting dtype when the
/// file and the model differ. Strict loading throws CheckpointError unless
/// every parameter is loaded and nothing is left over; non-strict loading
/// (e.g. image weights into a video model) reports the differences instead.
template <typename T>
LoadReport load_checkpoint(ParamList<T>& params, const std::filesystem::path& path,
                           bool strict = true);

}  // namespace morph
