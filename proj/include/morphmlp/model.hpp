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

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "morphmlp/blocks.hpp"
#include "morphmlp/morphfc.hpp"

namespace morph {

/// Spatial (and optionally temporal) extent of the network input.
struct InputShape {
  std::int64_t height = 224;
  std::int64_t width = 224;
  std::int64_t frames = 0;  // 0 for images

  bool is_video() const { return frames > 0; }
  /// "224", "224x224" or "224x224x16".
  static InputShape parse(const std::string& text);
  std::string str() const;
};

struct StageConfig {
  std::int64_t depth = 1;
  std::int64_t channels = 0;
  std::int64_t chunk_len = 0;
  std::int64_t group_width = 0;  // 0 applies ModelConfig::group_rule
};

struct ModelConfig {
  std::string variant = "custom";
  std::vector<StageConfig> stages;
  double stoch_depth_max = 0.0;
  std::int64_t num_classes = 1000;
  InputShape input;
  std::int64_t in_channels = 3;
  std::int64_t mlp_ratio = 4;
  std::int64_t patch_size = 4;
  std::int64_t tubelet = 2;
  bool gate = false;
  bool channel_bias = false;
  Pathways pathways;
  GroupRule group_rule = GroupRule::c_over_l;
  // Video only.
  VideoWiring wiring = VideoWiring::ts_skip;
  bool temporal_enabled = true;
  std::int64_t temporal_group_width = 0;  // 0 derives C / T'

  /// The published T, S, B and L settings at 224 x 224.
  static ModelConfig published(const std::string& variant);

  /// Throws std::invalid_argument naming the stage at fault.
  void validate() const;

  std::int64_t total_depth() const;
  /// Linear ramp from 0 to stoch_depth_max over all blocks.
  std::vector<double> drop_path_rates() const;
  std::int64_t stage_group_width(std::size_t stage) const;
  /// Frame count after tubelet embedding.
  std::int64_t embedded_frames() const;
  /// Token-grid extent of each stage.
  std::vector<std::pair<std::int64_t, std::int64_t>> stage_resolutions() const;
};

template <typename T>
class Model {
 public:
  /// `initialize == false` leaves every weight zero, which makes building the
  /// large variants for counting cheap.
  explicit Model(ModelConfig config, std::uint64_t seed = 0, bool initialize = true);

  /// [N, H, W, C_in] (image) or [N, H, W, T, C_in] (video) -> [N, classes].
  Tensor<T> forward(const Tensor<T>& x, const ForwardContext& ctx = {}) const;

  ParamList<T> named_parameters() const;
  const ModelConfig& config() const { return config_; }

  struct Stage {
    std::vector<ImageBlock<T>> image_blocks;
    std::vector<VideoBlock<T>> video_blocks;
    std::optional<Downsample<T>> downsample;
  };
  const std::vector<Stage>& stages() const { return stages_; }
  std::vector<Stage>& stages() { return stages_; }

 private:
  ModelConfig config_;
  PatchEmbed<T> embed_;
  std::vector<Stage> stages_;
  LayerNorm<T> norm_;
  Linear<T> head_;
};

/// Exact number of learnable scalars.
template <typename T>
std::int64_t count_params(const Model<T>& model);

/// Builds the model without initializing it and counts its parameters.
std::int64_t count_params(const ModelConfig& config);

/// Multiply-accumulate count of one forward pass at `input` (one MAC is
/// counted as one FLOP). Covers every matrix product: patch embedding,
/// MorphFC pathways, temporal layers, MLPs, downsampling and the head.
/// Normalization, activations, residual adds and pooling are not counted.
std::int64_t count_flops(const ModelConfig& config, const InputShape& input);

template <typename T>
std::int64_t count_flops(const Model<T>& model, const InputShape& input) {
  return count_flops(model.config(), input);
}

}  // namespace morph
