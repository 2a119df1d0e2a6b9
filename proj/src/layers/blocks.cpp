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

#include "morphmlp/blocks.hpp"

#include <random>
#include <stdexcept>

#include "morphmlp/ops.hpp"

namespace morph {

namespace {

constexpr double kInitStd = 0.02;

// Adds a leading batch axis of 1 when x is a single sample.
template <typename T>
Tensor<T> as_batch(const Tensor<T>& x, int sample_rank, const char* what) {
  if (x.rank() == sample_rank + 1) return x;
  if (x.rank() == sample_rank) {
    Shape s = x.shape();
    s.insert(s.begin(), 1);
    return reshape(x, s);
  }
  throw ShapeError(std::string(what) + ": unexpected input rank for " + to_string(x.shape()));
}

template <typename T>
Tensor<T> restore_rank(const Tensor<T>& y, const Tensor<T>& x) {
  return y.rank() == x.rank() ? y : reshape(y, x.shape());
}

}  // namespace

template <typename T>
Tensor<T> drop_path(const Tensor<T>& branch, double rate, const ForwardContext& ctx) {
  if (!ctx.training || rate <= 0.0) return branch;
  if (rate >= 1.0) throw std::invalid_argument("drop_path: rate must be below 1");
  if (!ctx.rng) throw std::invalid_argument("drop_path: training forward needs a generator");
  const double keep = 1.0 - rate;
  std::bernoulli_distribution survive(keep);
  std::vector<T> factors(static_cast<std::size_t>(branch.dim(0)));
  for (auto& f : factors) f = survive(*ctx.rng) ? static_cast<T>(1.0 / keep) : T(0);
  return scale_leading(branch, factors);
}

template <typename T>
LayerNorm<T>::LayerNorm(std::int64_t channels)
    : gamma(make_constant_param<T>({channels}, T(1))),
      beta(make_constant_param<T>({channels}, T(0))) {}

template <typename T>
Tensor<T> LayerNorm<T>::forward(const Tensor<T>& x) const {
  return layer_norm(x, gamma, beta);
}

template <typename T>
void LayerNorm<T>::collect_params(const std::string& prefix, ParamList<T>& out) const {
  out.emplace_back(prefix + "gamma", gamma);
  out.emplace_back(prefix + "beta", beta);
}

template <typename T>
Linear<T>::Linear(std::int64_t in, std::int64_t out, bool with_bias, Rng* rng)
    : weight(make_param<T>({in, out}, kInitStd, rng)) {
  if (with_bias) bias = make_constant_param<T>({out}, T(0));
}

template <typename T>
Tensor<T> Linear<T>::forward(const Tensor<T>& x) const {
  return linear(x, weight, bias);
}

template <typename T>
void Linear<T>::collect_params(const std::string& prefix, ParamList<T>& out) const {
  out.emplace_back(prefix + "weight", weight);
  if (bias.defined()) out.emplace_back(prefix + "bias", bias);
}

template <typename T>
Mlp<T>::Mlp(std::int64_t channels, std::int64_t ratio, Rng* rng)
    : fc1(channels, ratio * channels, true, rng), fc2(ratio * channels, channels, true, rng) {
  if (ratio <= 0) throw std::invalid_argument("Mlp: expansion ratio must be positive");
}

template <typename T>
Tensor<T> Mlp<T>::forward(const Tensor<T>& x) const {
  return fc2.forward(gelu(fc1.forward(x)));
}

template <typename T>
void Mlp<T>::collect_params(const std::string& prefix, ParamList<T>& out) const {
  fc1.collect_params(prefix + "fc1.", out);
  fc2.collect_params(prefix + "fc2.", out);
}

template <typename T>
std::int64_t Mlp<T>::macs_per_token() const {
  return fc1.in_features() * fc1.out_features() + fc2.in_features() * fc2.out_features();
}

template <typename T>
Tensor<T> patchify(const Tensor<T>& x, const std::vector<std::int64_t>& patch,
                   const std::vector<bool>& replicate) {
  const int k = x.rank() - 2;
  if (k < 1 || static_cast<int>(patch.size()) != k || static_cast<int>(replicate.size()) != k)
    throw ShapeError("patchify: " + std::to_string(patch.size()) + " patch extents for input " +
                     to_string(x.shape()));
  const auto& s = x.shape();
  const std::int64_t batch = s[0], channels = s.back();
  Shape out_shape{batch};
  std::int64_t patch_numel = 1;
  for (int i = 0; i < k; ++i) {
    if (patch[i] <= 0) throw ShapeError("patchify: patch extents must be positive");
    out_shape.push_back((s[i + 1] + patch[i] - 1) / patch[i]);
    patch_numel *= patch[i];
  }
  out_shape.push_back(patch_numel * channels);
  const Shape in_strides = strides_of(s);

  std::vector<std::int64_t> index;
  index.reserve(static_cast<std::size_t>(numel(out_shape)));
  std::vector<std::int64_t> outer(k, 0), inner(k, 0);
  const std::int64_t outer_count = numel(out_shape) / (batch * patch_numel * channels);
  for (std::int64_t n = 0; n < batch; ++n) {
    std::fill(outer.begin(), outer.end(), 0);
    for (std::int64_t o = 0; o < outer_count; ++o) {
      std::fill(inner.begin(), inner.end(), 0);
      for (std::int64_t q = 0; q < patch_numel; ++q) {
        std::int64_t base = n * in_strides[0];
        bool zero = false;
        for (int i = 0; i < k; ++i) {
          std::int64_t src = outer[i] * patch[i] + inner[i];
          if (src >= s[i + 1]) {
            if (replicate[i])
              src = s[i + 1] - 1;
            else
              zero = true;
          }
          base += src * in_strides[i + 1];
        }
        for (std::int64_t c = 0; c < channels; ++c) index.push_back(zero ? -1 : base + c);
        for (int i = k - 1; i >= 0; --i) {
          if (++inner[i] < patch[i]) break;
          inner[i] = 0;
        }
      }
      for (int i = k - 1; i >= 0; --i) {
        if (++outer[i] < out_shape[i + 1]) break;
        outer[i] = 0;
      }
    }
  }
  return gather(x, index, std::move(out_shape));
}

template <typename T>
ImageBlock<T>::ImageBlock(const ImageBlockOptions& options, Rng* rng)
    : norm1(options.morphfc.channels),
      morphfc(options.morphfc, rng),
      norm2(options.morphfc.channels),
      mlp(options.morphfc.channels, options.mlp_ratio, rng),
      options_(options) {
  if (options.drop_path_rate < 0.0 || options.drop_path_rate >= 1.0)
    throw std::invalid_argument("ImageBlock: drop-path rate must lie in [0, 1)");
  options_.morphfc = morphfc.options();
}

template <typename T>
Tensor<T> ImageBlock<T>::forward(const Tensor<T>& input, const ForwardContext& ctx) const {
  const auto x = as_batch(input, 3, "ImageBlock");
  const double rate = options_.drop_path_rate;
  auto u = add(x, drop_path(gelu(morphfc.forward(norm1.forward(x))), rate, ctx));
  auto y = add(u, drop_path(mlp.forward(norm2.forward(u)), rate, ctx));
  return restore_rank(y, input);
}

template <typename T>
void ImageBlock<T>::collect_params(const std::string& prefix, ParamList<T>& out) const {
  norm1.collect_params(prefix + "norm1.", out);
  morphfc.collect_params(prefix + "morphfc.", out);
  norm2.collect_params(prefix + "norm2.", out);
  mlp.collect_params(prefix + "mlp.", out);
}

template <typename T>
std::int64_t ImageBlock<T>::macs(std::int64_t height, std::int64_t width) const {
  return morphfc.macs(height, width) + height * width * mlp.macs_per_token();
}

VideoWiring parse_video_wiring(const std::string& text) {
  if (text == "parallel") return VideoWiring::parallel;
  if (text == "ts_standard" || text == "T+S/standard") return VideoWiring::ts_standard;
  if (text == "st_standard" || text == "S+T/standard") return VideoWiring::st_standard;
  if (text == "ts_skip" || text == "T+S/skip") return VideoWiring::ts_skip;
  if (text == "st_skip" || text == "S+T/skip") return VideoWiring::st_skip;
  throw std::invalid_argument("unknown video wiring '" + text +
                              "' (expected parallel, ts_standard, st_standard, ts_skip, st_skip)");
}

std::string to_string(VideoWiring wiring) {
  switch (wiring) {
    case VideoWiring::parallel:
      return "parallel";
    case VideoWiring::ts_standard:
      return "ts_standard";
    case VideoWiring::st_standard:
      return "st_standard";
    case VideoWiring::ts_skip:
      return "ts_skip";
    case VideoWiring::st_skip:
      return "st_skip";
  }
  return "?";
}

template <typename T>
VideoBlock<T>::VideoBlock(const VideoBlockOptions& options, Rng* rng)
    : norm1(options.morphfc.channels),
      morphfc(options.morphfc, rng),
      norm2(options.morphfc.channels),
      mlp(options.morphfc.channels, options.mlp_ratio, rng),
      options_(options) {
  if (options.drop_path_rate < 0.0 || options.drop_path_rate >= 1.0)
    throw std::invalid_argument("VideoBlock: drop-path rate must lie in [0, 1)");
  if (options.temporal.channels != options.morphfc.channels)
    throw std::invalid_argument("VideoBlock: temporal and spatial layers must share channels");
  if (options.temporal_enabled) {
    norm_t.emplace(options.temporal.channels);
    temporal.emplace(options.temporal, rng);
    options_.temporal = temporal->options();
  }
  options_.morphfc = morphfc.options();
}

template <typename T>
Tensor<T> VideoBlock<T>::spatial(const Tensor<T>& x) const {
  // [N, H, W, T, C] -> [N*T, H, W, C] -> MorphFC -> back.
  const auto& s = x.shape();
  auto frames = permute(x, {0, 3, 1, 2, 4});
  frames = reshape(frames, {s[0] * s[3], s[1], s[2], s[4]});
  auto y = morphfc.forward(frames);
  y = reshape(y, {s[0], s[3], s[1], s[2], s[4]});
  return permute(y, {0, 2, 3, 1, 4});
}

template <typename T>
Tensor<T> VideoBlock<T>::forward(const Tensor<T>& input, const ForwardContext& ctx) const {
  const auto x = as_batch(input, 4, "VideoBlock");
  const double rate = options_.drop_path_rate;
  auto temporal_branch = [&](const Tensor<T>& z) {
    return drop_path(temporal->forward(norm_t->forward(z)), rate, ctx);
  };
  auto spatial_branch = [&](const Tensor<T>& z) {
    return drop_path(spatial(norm1.forward(z)), rate, ctx);
  };
  const bool has_t = temporal.has_value();

  Tensor<T> v;
  switch (options_.wiring) {
    case VideoWiring::parallel:
      v = add(x, spatial_branch(x));
      if (has_t) v = add(v, temporal_branch(x));
      break;
    case VideoWiring::ts_standard: {
      auto u = has_t ? add(x, temporal_branch(x)) : x;
      v = add(u, spatial_branch(u));
      break;
    }
    case VideoWiring::ts_skip: {
      auto u = has_t ? add(x, temporal_branch(x)) : x;
      v = add(x, spatial_branch(u));
      break;
    }
    case VideoWiring::st_standard: {
      auto u = add(x, spatial_branch(x));
      v = has_t ? add(u, temporal_branch(u)) : u;
      break;
    }
    case VideoWiring::st_skip: {
      auto u = add(x, spatial_branch(x));
      v = has_t ? add(x, temporal_branch(u)) : u;
      break;
    }
  }
  auto y = add(v, drop_path(mlp.forward(norm2.forward(v)), rate, ctx));
  return restore_rank(y, input);
}

template <typename T>
void VideoBlock<T>::collect_params(const std::string& prefix, ParamList<T>& out) const {
  if (norm_t) norm_t->collect_params(prefix + "norm_t.", out);
  if (temporal) temporal->collect_params(prefix + "temporal.", out);
  norm1.collect_params(prefix + "norm1.", out);
  morphfc.collect_params(prefix + "morphfc.", out);
  norm2.collect_params(prefix + "norm2.", out);
  mlp.collect_params(prefix + "mlp.", out);
}

template <typename T>
std::int64_t VideoBlock<T>::macs(std::int64_t height, std::int64_t width) const {
  const std::int64_t frames = options_.temporal.frames;
  std::int64_t total = frames * morphfc.macs(height, width);
  total += height * width * frames * mlp.macs_per_token();
  if (temporal) total += temporal->macs(height, width);
  return total;
}

template <typename T>
PatchEmbed<T>::PatchEmbed(std::int64_t in_channels, std::int64_t out_channels, std::int64_t patch,
                          std::int64_t tubelet, Rng* rng)
    : proj(in_channels * patch * patch * (tubelet > 0 ? tubelet : 1), out_channels, true, rng),
      patch_(patch),
      tubelet_(tubelet) {
  if (patch <= 0 || tubelet < 0) throw std::invalid_argument("PatchEmbed: invalid patch extents");
}

template <typename T>
Tensor<T> PatchEmbed<T>::forward(const Tensor<T>& x) const {
  const int expected = tubelet_ > 0 ? 5 : 4;
  if (x.rank() != expected)
    throw ShapeError("PatchEmbed: expected rank " + std::to_string(expected) + " input, got " +
                     to_string(x.shape()));
  const auto patches = tubelet_ > 0 ? patchify(x, {patch_, patch_, tubelet_}, {false, false, true})
                                    : patchify(x, {patch_, patch_}, {false, false});
  return proj.forward(patches);
}

template <typename T>
void PatchEmbed<T>::collect_params(const std::string& prefix, ParamList<T>& out) const {
  proj.collect_params(prefix + "proj.", out);
}

template <typename T>
Downsample<T>::Downsample(std::int64_t in_channels, std::int64_t out_channels, Rng* rng)
    : proj(4 * in_channels, out_channels, true, rng) {}

template <typename T>
Tensor<T> Downsample<T>::forward(const Tensor<T>& x) const {
  if (x.rank() == 4) return proj.forward(patchify(x, {2, 2}, {false, false}));
  if (x.rank() == 5) return proj.forward(patchify(x, {2, 2, 1}, {false, false, false}));
  throw ShapeError("Downsample: expected rank 4 or 5 input, got " + to_string(x.shape()));
}

template <typename T>
void Downsample<T>::collect_params(const std::string& prefix, ParamList<T>& out) const {
  proj.collect_params(prefix + "proj.", out);
}

#define MORPH_INSTANTIATE_BLOCKS(T)                                                            \
  template Tensor<T> drop_path(const Tensor<T>&, double, const ForwardContext&);               \
  template Tensor<T> patchify(const Tensor<T>&, const std::vector<std::int64_t>&,              \
                              const std::vector<bool>&);                                       \
  template struct LayerNorm<T>;                                                                \
  template struct Linear<T>;                                                                   \
  template struct Mlp<T>;                                                                      \
  template class ImageBlock<T>;                                                                \
  template class VideoBlock<T>;                                                                \
  template class PatchEmbed<T>;                                                                \
  template class Downsample<T>;

MORPH_INSTANTIATE_BLOCKS(float)
MORPH_INSTANTIATE_BLOCKS(double)

}  // namespace morph
