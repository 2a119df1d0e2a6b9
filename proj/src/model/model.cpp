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

#include "morphmlp/model.hpp"

#include <charconv>
#include <stdexcept>

#include "morphmlp/ops.hpp"

namespace morph {

namespace {

std::int64_t parse_extent(std::string_view text, const std::string& whole) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || v <= 0)
    throw std::invalid_argument("malformed input shape '" + whole + "' (expected HxW[xT])");
  return v;
}

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }

}  // namespace

InputShape InputShape::parse(const std::string& text) {
  std::vector<std::int64_t> parts;
  std::size_t start = 0;
  while (true) {
    const auto end = text.find_first_of("xX", start);
    parts.push_back(parse_extent(std::string_view(text).substr(start, end - start), text));
    if (end == std::string::npos) break;
    start = end + 1;
  }
  if (parts.size() == 1) return {parts[0], parts[0], 0};
  if (parts.size() == 2) return {parts[0], parts[1], 0};
  if (parts.size() == 3) return {parts[0], parts[1], parts[2]};
  throw std::invalid_argument("malformed input shape '" + text + "' (expected HxW[xT])");
}

std::string InputShape::str() const {
  std::string s = std::to_string(height) + "x" + std::to_string(width);
  if (frames > 0) s += "x" + std::to_string(frames);
  return s;
}

ModelConfig ModelConfig::published(const std::string& variant) {
  ModelConfig cfg;
  cfg.variant = variant;
  cfg.input = {224, 224, 0};
  cfg.num_classes = 1000;
  const std::int64_t chunk_lens[4] = {14, 28, 28, 49};
  std::int64_t depths[4];
  std::int64_t channels[4] = {112, 224, 392, 784};
  if (variant == "T") {
    const std::int64_t d[4] = {3, 4, 7, 3}, c[4] = {84, 168, 336, 588};
    std::copy(d, d + 4, depths);
    std::copy(c, c + 4, channels);
    cfg.stoch_depth_max = 0.1;
  } else if (variant == "S") {
    const std::int64_t d[4] = {3, 4, 9, 3};
    std::copy(d, d + 4, depths);
    cfg.stoch_depth_max = 0.1;
  } else if (variant == "B") {
    const std::int64_t d[4] = {4, 6, 15, 4};
    std::copy(d, d + 4, depths);
    cfg.stoch_depth_max = 0.3;
  } else if (variant == "L") {
    const std::int64_t d[4] = {4, 8, 18, 6};
    std::copy(d, d + 4, depths);
    cfg.stoch_depth_max = 0.4;
  } else {
    throw std::invalid_argument("unknown variant '" + variant + "' (expected T, S, B or L)");
  }
  for (int j = 0; j < 4; ++j) cfg.stages.push_back({depths[j], channels[j], chunk_lens[j], 0});
  return cfg;
}

void ModelConfig::validate() const {
  const bool published_variant = variant == "T" || variant == "S" || variant == "B" || variant == "L";
  if (published_variant && stages.size() != 4)
    throw std::invalid_argument("variant " + variant + " needs exactly 4 stages");
  if (stages.empty() || stages.size() > 4)
    throw std::invalid_argument("a model has between 1 and 4 stages, got " +
                                std::to_string(stages.size()));
  if (num_classes <= 0) throw std::invalid_argument("num_classes must be positive");
  if (mlp_ratio <= 0) throw std::invalid_argument("mlp_ratio must be positive");
  if (patch_size <= 0 || tubelet <= 0) throw std::invalid_argument("patch extents must be positive");
  if (stoch_depth_max < 0.0 || stoch_depth_max >= 1.0)
    throw std::invalid_argument("stochastic depth rate must lie in [0, 1)");
  if (input.height <= 0 || input.width <= 0 || input.frames < 0)
    throw std::invalid_argument("input extents must be positive");
  if (pathways.count() == 0) throw std::invalid_argument("no MorphFC pathway enabled");
  for (std::size_t j = 0; j < stages.size(); ++j) {
    const auto& s = stages[j];
    const std::string where = "stage " + std::to_string(j);
    if (s.depth <= 0 || s.channels <= 0 || s.chunk_len <= 0)
      throw std::invalid_argument(where + ": depth, channels and chunk length must be positive");
    const std::int64_t d = stage_group_width(j);
    if (s.channels % d != 0)
      throw std::invalid_argument(where + ": group width " + std::to_string(d) +
                                  " does not divide " + std::to_string(s.channels) + " channels");
    if (input.is_video()) {
      const std::int64_t dt = temporal_group_width > 0 ? temporal_group_width
                                                        : derive_group_width(s.channels, embedded_frames());
      if (s.channels % dt != 0)
        throw std::invalid_argument(where + ": temporal group width " + std::to_string(dt) +
                                    " does not divide " + std::to_string(s.channels) + " channels");
    }
  }
}

std::int64_t ModelConfig::total_depth() const {
  std::int64_t n = 0;
  for (const auto& s : stages) n += s.depth;
  return n;
}

std::vector<double> ModelConfig::drop_path_rates() const {
  const std::int64_t n = total_depth();
  std::vector<double> rates(static_cast<std::size_t>(n), 0.0);
  for (std::int64_t i = 0; i < n; ++i)
    rates[i] = n > 1 ? stoch_depth_max * static_cast<double>(i) / static_cast<double>(n - 1)
                     : stoch_depth_max;
  return rates;
}

std::int64_t ModelConfig::stage_group_width(std::size_t stage) const {
  const auto& s = stages.at(stage);
  return s.group_width > 0 ? s.group_width : group_width_for(group_rule, s.channels, s.chunk_len);
}

std::int64_t ModelConfig::embedded_frames() const {
  return input.is_video() ? ceil_div(input.frames, tubelet) : 0;
}

std::vector<std::pair<std::int64_t, std::int64_t>> ModelConfig::stage_resolutions() const {
  std::vector<std::pair<std::int64_t, std::int64_t>> res;
  std::int64_t h = ceil_div(input.height, patch_size), w = ceil_div(input.width, patch_size);
  for (std::size_t j = 0; j < stages.size(); ++j) {
    res.emplace_back(h, w);
    h = ceil_div(h, 2);
    w = ceil_div(w, 2);
  }
  return res;
}

template <typename T>
Model<T>::Model(ModelConfig config, std::uint64_t seed, bool initialize)
    : config_((config.validate(), std::move(config))),
      embed_([&] {
        Rng rng(seed);
        return PatchEmbed<T>(config_.in_channels, config_.stages.front().channels,
                             config_.patch_size, config_.input.is_video() ? config_.tubelet : 0,
                             initialize ? &rng : nullptr);
      }()),
      norm_(config_.stages.back().channels),
      head_(config_.stages.back().channels, config_.num_classes, true, nullptr) {
  // Each component draws from its own stream so layers are reproducible
  // independently of construction order elsewhere.
  Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
  Rng* init = initialize ? &rng : nullptr;
  const auto rates = config_.drop_path_rates();
  const bool video = config_.input.is_video();
  std::size_t block_index = 0;
  for (std::size_t j = 0; j < config_.stages.size(); ++j) {
    const auto& sc = config_.stages[j];
    MorphFCOptions fc;
    fc.channels = sc.channels;
    fc.chunk_len = sc.chunk_len;
    fc.group_width = config_.stage_group_width(j);
    fc.pathways = config_.pathways;
    fc.gate = config_.gate;
    fc.channel_bias = config_.channel_bias;
    Stage stage;
    for (std::int64_t b = 0; b < sc.depth; ++b, ++block_index) {
      if (video) {
        VideoBlockOptions vo;
        vo.morphfc = fc;
        vo.temporal.channels = sc.channels;
        vo.temporal.frames = config_.embedded_frames();
        vo.temporal.group_width = config_.temporal_group_width;
        vo.mlp_ratio = config_.mlp_ratio;
        vo.drop_path_rate = rates[block_index];
        vo.wiring = config_.wiring;
        vo.temporal_enabled = config_.temporal_enabled;
        stage.video_blocks.emplace_back(vo, init);
      } else {
        ImageBlockOptions io;
        io.morphfc = fc;
        io.mlp_ratio = config_.mlp_ratio;
        io.drop_path_rate = rates[block_index];
        stage.image_blocks.emplace_back(io, init);
      }
    }
    if (j + 1 < config_.stages.size())
      stage.downsample.emplace(sc.channels, config_.stages[j + 1].channels, init);
    stages_.push_back(std::move(stage));
  }
  head_ = Linear<T>(config_.stages.back().channels, config_.num_classes, true, init);
}

template <typename T>
Tensor<T> Model<T>::forward(const Tensor<T>& x, const ForwardContext& ctx) const {
  const bool video = config_.input.is_video();
  const int expected = video ? 5 : 4;
  if (x.rank() != expected || x.dim(-1) != config_.in_channels)
    throw ShapeError("Model: expected a batched " + std::string(video ? "[N,H,W,T,C]" : "[N,H,W,C]") +
                     " input with " + std::to_string(config_.in_channels) + " channels, got " +
                     to_string(x.shape()));
  auto h = embed_.forward(x);
  for (const auto& stage : stages_) {
    for (const auto& block : stage.image_blocks) h = block.forward(h, ctx);
    for (const auto& block : stage.video_blocks) h = block.forward(h, ctx);
    if (stage.downsample) h = stage.downsample->forward(h);
  }
  h = norm_.forward(h);
  std::vector<int> token_axes;
  for (int a = 1; a < h.rank() - 1; ++a) token_axes.push_back(a);
  return head_.forward(mean_over_axes(h, token_axes));
}

template <typename T>
ParamList<T> Model<T>::named_parameters() const {
  ParamList<T> out;
  embed_.collect_params("embed.", out);
  for (std::size_t j = 0; j < stages_.size(); ++j) {
    const std::string prefix = "stages." + std::to_string(j) + ".";
    const auto& stage = stages_[j];
    for (std::size_t b = 0; b < stage.image_blocks.size(); ++b)
      stage.image_blocks[b].collect_params(prefix + "blocks." + std::to_string(b) + ".", out);
    for (std::size_t b = 0; b < stage.video_blocks.size(); ++b)
      stage.video_blocks[b].collect_params(prefix + "blocks." + std::to_string(b) + ".", out);
    if (stage.downsample) stage.downsample->collect_params(prefix + "downsample.", out);
  }
  norm_.collect_params("norm.", out);
  head_.collect_params("head.", out);
  return out;
}

template <typename T>
std::int64_t count_params(const Model<T>& model) {
  std::int64_t n = 0;
  for (const auto& [name, p] : model.named_parameters()) n += p.numel();
  return n;
}

std::int64_t count_params(const ModelConfig& config) {
  return count_params(Model<float>(config, 0, false));
}

std::int64_t count_flops(const ModelConfig& config, const InputShape& input) {
  ModelConfig cfg = config;
  cfg.input = input;
  cfg.validate();
  const bool video = input.is_video();
  const std::int64_t frames = video ? cfg.embedded_frames() : 1;
  const auto res = cfg.stage_resolutions();

  std::int64_t patch_in = cfg.in_channels * cfg.patch_size * cfg.patch_size * (video ? cfg.tubelet : 1);
  std::int64_t total = res[0].first * res[0].second * frames * patch_in * cfg.stages[0].channels;

  for (std::size_t j = 0; j < cfg.stages.size(); ++j) {
    const auto& s = cfg.stages[j];
    const auto [h, w] = res[j];
    const std::int64_t c = s.channels;
    const std::int64_t d = cfg.stage_group_width(j);
    const std::int64_t size = s.chunk_len * d;
    const std::int64_t groups = c / d;
    const std::int64_t chunks = ceil_div(h * w, s.chunk_len);
    std::int64_t block = 0;
    const std::int64_t chunked = chunks * groups * size * size;
    if (cfg.pathways.horizontal) block += chunked;
    if (cfg.pathways.vertical) block += chunked;
    if (cfg.pathways.channel) block += h * w * c * c;
    block += h * w * 2 * cfg.mlp_ratio * c * c;
    block *= frames;
    if (video && cfg.temporal_enabled) {
      const std::int64_t dt =
          cfg.temporal_group_width > 0 ? cfg.temporal_group_width : derive_group_width(c, frames);
      const std::int64_t tsize = frames * dt;
      block += h * w * (c / dt) * tsize * tsize;
    }
    total += s.depth * block;
    if (j + 1 < cfg.stages.size()) {
      const std::int64_t oh = ceil_div(h, 2), ow = ceil_div(w, 2);
      total += oh * ow * frames * 4 * c * cfg.stages[j + 1].channels;
    }
  }
  total += cfg.stages.back().channels * cfg.num_classes;
  return total;
}

template class Model<float>;
template class Model<double>;
template std::int64_t count_params(const Model<float>&);
template std::int64_t count_params(const Model<double>&);

}  // namespace morph
