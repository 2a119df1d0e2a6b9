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

#include <optional>
#include <string>
#include <vector>

#include "morphmlp/init.hpp"
#include "morphmlp/morphfc.hpp"
#include "morphmlp/tensor.hpp"

namespace morph {

struct ForwardContext {
  bool training = false;
  Rng* rng = nullptr;  // required when training with a nonzero drop-path rate
};

/// Stochastic depth on a batched residual branch: each sample's branch is
/// zeroed with probability `rate` and survivors are scaled by 1 / (1 - rate).
/// Identity outside training.
template <typename T>
Tensor<T> drop_path(const Tensor<T>& branch, double rate, const ForwardContext& ctx);

template <typename T>
struct LayerNorm {
  Tensor<T> gamma;
  Tensor<T> beta;

  explicit LayerNorm(std::int64_t channels);
  Tensor<T> forward(const Tensor<T>& x) const;
  void collect_params(const std::string& prefix, ParamList<T>& out) const;
};

template <typename T>
struct Linear {
  Tensor<T> weight;  // [in, out]
  Tensor<T> bias;    // [out], optional

  Linear(std::int64_t in, std::int64_t out, bool with_bias, Rng* rng);
  Tensor<T> forward(const Tensor<T>& x) const;
  void collect_params(const std::string& prefix, ParamList<T>& out) const;
  std::int64_t in_features() const { return weight.dim(0); }
  std::int64_t out_features() const { return weight.dim(1); }
};

/// C -> r*C -> C with GELU in between.
template <typename T>
struct Mlp {
  Linear<T> fc1;
  Linear<T> fc2;

  Mlp(std::int64_t channels, std::int64_t ratio, Rng* rng);
  Tensor<T> forward(const Tensor<T>& x) const;
  void collect_params(const std::string& prefix, ParamList<T>& out) const;
  std::int64_t macs_per_token() const;
};

/// Cuts a [N, S_0, ..., S_k-1, C] tensor into non-overlapping patches of
/// extent patch[i] along each S axis and flattens every patch, giving
/// [N, ceil(S_0/p_0), ..., ceil(S_k-1/p_k-1), prod(p) * C]. Inside a patch
/// the vector is ordered (o_0, ..., o_k-1, c). Ragged edges are zero-padded,
/// or filled by repeating the last slice where replicate[i] is set.
template <typename T>
Tensor<T> patchify(const Tensor<T>& x, const std::vector<std::int64_t>& patch,
                   const std::vector<bool>& replicate);

struct ImageBlockOptions {
  MorphFCOptions morphfc;
  std::int64_t mlp_ratio = 4;
  double drop_path_rate = 0.0;
};

/// u = x + DropPath(GELU(MorphFC(LN(x)))); y = u + DropPath(MLP(LN(u))).
template <typename T>
class ImageBlock {
 public:
  ImageBlock(const ImageBlockOptions& options, Rng* rng);

  /// x: [H, W, C] or [N, H, W, C].
  Tensor<T> forward(const Tensor<T>& x, const ForwardContext& ctx = {}) const;

  void collect_params(const std::string& prefix, ParamList<T>& out) const;
  std::int64_t macs(std::int64_t height, std::int64_t width) const;

  double drop_path_rate() const { return options_.drop_path_rate; }
  LayerNorm<T> norm1;
  MorphFC<T> morphfc;
  LayerNorm<T> norm2;
  Mlp<T> mlp;

 private:
  ImageBlockOptions options_;
};

/// Arrangement of the temporal (T) and spatial (S) sub-layers in a video
/// block. "standard" roots each residual at the previous sub-layer's output;
/// "skip" roots the second sub-layer's residual at the block input.
enum class VideoWiring { parallel, ts_standard, st_standard, ts_skip, st_skip };

VideoWiring parse_video_wiring(const std::string& text);
std::string to_string(VideoWiring wiring);

struct VideoBlockOptions {
  MorphFCOptions morphfc;
  TemporalFCOptions temporal;
  std::int64_t mlp_ratio = 4;
  double drop_path_rate = 0.0;
  VideoWiring wiring = VideoWiring::ts_skip;
  bool temporal_enabled = true;  // false removes the temporal sub-layer
};

/// Default (ts_skip):
///   u = x + DropPath(TemporalFC(LN_t(x)))
///   v = x + DropPath(MorphFC(LN_1(u)))   spatial, per frame
///   y = v + DropPath(MLP(LN_2(v)))
template <typename T>
class VideoBlock {
 public:
  VideoBlock(const VideoBlockOptions& options, Rng* rng);

  /// x: [H, W, T, C] or [N, H, W, T, C].
  Tensor<T> forward(const Tensor<T>& x, const ForwardContext& ctx = {}) const;

  /// MorphFC applied to every frame independently.
  Tensor<T> spatial(const Tensor<T>& x) const;

  void collect_params(const std::string& prefix, ParamList<T>& out) const;
  std::int64_t macs(std::int64_t height, std::int64_t width) const;

  const VideoBlockOptions& options() const { return options_; }
  std::optional<LayerNorm<T>> norm_t;
  std::optional<TemporalFC<T>> temporal;
  LayerNorm<T> norm1;
  MorphFC<T> morphfc;
  LayerNorm<T> norm2;
  Mlp<T> mlp;

 private:
  VideoBlockOptions options_;
};

/// Non-overlapping patch (image) or tubelet (video) projection.
template <typename T>
class PatchEmbed {
 public:
  /// tubelet == 0 builds the image variant.
  PatchEmbed(std::int64_t in_channels, std::int64_t out_channels, std::int64_t patch,
             std::int64_t tubelet, Rng* rng);

  /// [N, H, W, 3] -> [N, H/p, W/p, C], or
  /// [N, H, W, T, 3] -> [N, H/p, W/p, T/t, C].
  Tensor<T> forward(const Tensor<T>& x) const;

  void collect_params(const std::string& prefix, ParamList<T>& out) const;
  std::int64_t patch() const { return patch_; }
  std::int64_t tubelet() const { return tubelet_; }
  Linear<T> proj;

 private:
  std::int64_t patch_;
  std::int64_t tubelet_;
};

/// 2x2 patch merge followed by a 4C -> C' projection. Frames of a video
/// tensor are merged independently.
template <typename T>
class Downsample {
 public:
  Downsample(std::int64_t in_channels, std::int64_t out_channels, Rng* rng);

  /// [N, H, W, C] -> [N, H/2, W/2, C'], or [N, H, W, T, C] -> [N, H/2, W/2, T, C'].
  Tensor<T> forward(const Tensor<T>& x) const;

  void collect_params(const std::string& prefix, ParamList<T>& out) const;
  Linear<T> proj;
};

}  // namespace morph
