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

// Datasets for the training harness: two synthetic toy tasks and a binary
// file format for anything else.
//
// MDAT1 file layout (all integers little-endian):
//
//   "MDAT1"                     5 bytes
//   u8  dtype (0 = f32, 1 = f64)
//   u32 rank, rank x u64        per-sample extents
//   u64 sample count
//   u32 class count
//   payload                     count x prod(extents) scalars
//   labels                      count x i32

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "morphmlp/model.hpp"

namespace morph {

inline constexpr char kDatasetMagic[] = "MDAT1";

class DatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Dataset {
  Shape sample_shape;  // [H, W, C] or [H, W, T, C]
  std::int64_t num_classes = 0;
  std::vector<float> inputs;
  std::vector<std::int32_t> labels;

  std::int64_t size() const { return static_cast<std::int64_t>(labels.size()); }
  std::int64_t sample_numel() const { return numel(sample_shape); }

  /// Stacks the selected samples into [N, ...sample_shape].
  template <typename T>
  Tensor<T> batch_inputs(std::span<const std::int64_t> indices) const;
  std::vector<std::int32_t> batch_labels(std::span<const std::int64_t> indices) const;
  Dataset subset(std::span<const std::int64_t> indices) const;
  /// Throws DatasetError if sizes or labels are inconsistent.
  void validate() const;
};

// chunk_parity: images whose class is a +/- sign pattern written into the
// first horizontal chunk of patch tokens (the first chunk_len patches of the
// top row). Every other patch is noise.
//
// frame_order: clips with a bright patch that steps one token left or right
// per tubelet, wrapping around its row. The class is the direction of motion,
// so any single frame, and the bag of frames, carries no label information.
enum class SynthKind { chunk_parity, frame_order };

SynthKind parse_synth_kind(const std::string& text);
std::string to_string(SynthKind kind);

struct SynthOptions {
  SynthKind kind = SynthKind::chunk_parity;
  std::int64_t size = 512;
  std::uint64_t seed = 0;
  double noise = 1.0;
  double amplitude = 1.0;
  std::int64_t num_classes = 4;  // chunk_parity only; frame_order is binary
  std::int64_t chunk_len = 4;    // chunk_parity only
  std::int64_t patch = 4;
  std::int64_t tubelet = 2;
  InputShape input{16, 16, 0};
  std::int64_t channels = 3;
  /// frame_order only: permute the tubelets of each clip, which destroys the
  /// relation between label and input.
  bool shuffle_frames = false;
};

/// Deterministic in `options.seed`. The chunk_parity class patterns depend
/// only on num_classes and chunk_len, so train and held-out sets drawn with
/// different seeds share them.
Dataset make_synthetic(const SynthOptions& options);

void write_dataset(const Dataset& data, const std::filesystem::path& path,
                   DType dtype = DType::f32);
Dataset read_dataset(const std::filesystem::path& path);

/// Endless stream of batches: each epoch is a fresh permutation drawn from
/// the seed, and a batch that runs past the end continues into the next.
class BatchSampler {
 public:
  BatchSampler(std::int64_t dataset_size, std::int64_t batch_size, std::uint64_t seed);
  std::vector<std::int64_t> next();

 private:
  void reshuffle();
  std::int64_t batch_size_;
  Rng rng_;
  std::vector<std::int64_t> order_;
  std::size_t cursor_ = 0;
};

struct ProbeOptions {
  std::int64_t epochs = 200;
  double lr = 0.1;
  double l2 = 1e-4;
};

/// Multinomial logistic regression on the raw pixels, trained by full-batch
/// gradient descent. Returns accuracy on `eval` (on `train` when eval is null).
double logistic_probe_accuracy(const Dataset& train, const Dataset* eval = nullptr,
                               const ProbeOptions& options = {});

}  // namespace morph
