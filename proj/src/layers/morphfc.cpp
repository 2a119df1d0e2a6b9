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

#include "morphmlp/morphfc.hpp"

#include <algorithm>
#include <stdexcept>

#include "morphmlp/ops.hpp"

namespace morph {

namespace {

constexpr double kInitStd = 0.02;

void check_group_width(std::int64_t channels, std::int64_t group_width, const char* what) {
  if (channels <= 0 || group_width <= 0 || channels % group_width != 0)
    throw ShapeError(std::string(what) + ": group width " + std::to_string(group_width) +
                     " does not divide " + std::to_string(channels) + " channels");
}

// Splits x into (batch, leading extents) given how many axes one sample has.
std::int64_t batch_of(const Shape& shape, int sample_rank, const char* what) {
  const int rank = static_cast<int>(shape.size());
  if (rank == sample_rank) return 1;
  if (rank == sample_rank + 1) return shape[0];
  throw ShapeError(std::string(what) + ": expected rank " + std::to_string(sample_rank) + " or " +
                   std::to_string(sample_rank + 1) + ", got " + to_string(shape));
}

int sample_rank(const ChunkPlan& plan) { return plan.direction == Direction::temporal ? 4 : 3; }

Shape sample_shape(const ChunkPlan& plan) {
  if (plan.direction == Direction::temporal)
    return {plan.height, plan.width, plan.frames, plan.channels};
  return {plan.height, plan.width, plan.channels};
}

// Flat sample offset of chunk element (chunk, group, position j, channel d),
// or -1 for a padding slot.
std::int64_t source_offset(const ChunkPlan& plan, std::int64_t chunk, std::int64_t group,
                           std::int64_t j, std::int64_t d) {
  const std::int64_t c = group * plan.group_width + d;
  switch (plan.direction) {
    case Direction::temporal:
      return (chunk * plan.frames + j) * plan.channels + c;
    case Direction::horizontal:
    case Direction::vertical: {
      const std::int64_t p = chunk * plan.chunk_len + j;
      if (p >= plan.height * plan.width) return -1;
      std::int64_t h, w;
      if (plan.direction == Direction::horizontal) {
        h = p / plan.width;
        w = p % plan.width;
      } else {
        w = p / plan.height;
        h = p % plan.height;
      }
      return (h * plan.width + w) * plan.channels + c;
    }
  }
  return -1;
}

}  // namespace

std::string to_string(Direction direction) {
  switch (direction) {
    case Direction::horizontal:
      return "horizontal";
    case Direction::vertical:
      return "vertical";
    case Direction::temporal:
      return "temporal";
  }
  return "?";
}

ChunkPlan ChunkPlan::spatial(Direction direction, std::int64_t height, std::int64_t width,
                             std::int64_t channels, std::int64_t chunk_len,
                             std::int64_t group_width) {
  if (direction == Direction::temporal)
    throw std::invalid_argument("ChunkPlan::spatial called with the temporal direction");
  if (height <= 0 || width <= 0 || chunk_len <= 0)
    throw ShapeError("chunk plan needs positive extents and chunk length");
  check_group_width(channels, group_width, "chunk plan");
  ChunkPlan plan;
  plan.direction = direction;
  plan.height = height;
  plan.width = width;
  plan.channels = channels;
  plan.chunk_len = chunk_len;
  plan.group_width = group_width;
  const std::int64_t tokens = height * width;
  plan.num_chunks = (tokens + chunk_len - 1) / chunk_len;
  plan.pad_len = plan.num_chunks * chunk_len - tokens;
  return plan;
}

ChunkPlan ChunkPlan::temporal(std::int64_t height, std::int64_t width, std::int64_t frames,
                              std::int64_t channels, std::int64_t group_width) {
  if (height <= 0 || width <= 0 || frames <= 0)
    throw ShapeError("temporal chunk plan needs positive extents");
  check_group_width(channels, group_width, "temporal chunk plan");
  ChunkPlan plan;
  plan.direction = Direction::temporal;
  plan.height = height;
  plan.width = width;
  plan.frames = frames;
  plan.channels = channels;
  plan.chunk_len = frames;
  plan.group_width = group_width;
  plan.num_chunks = height * width;
  plan.pad_len = 0;
  return plan;
}

template <typename T>
Tensor<T> chunk_split(const Tensor<T>& x, const ChunkPlan& plan) {
  const int srank = sample_rank(plan);
  const std::int64_t batch = batch_of(x.shape(), srank, "chunk_split");
  const Shape expected = sample_shape(plan);
  if (!std::equal(expected.begin(), expected.end(), x.shape().end() - srank))
    throw ShapeError("chunk_split: input " + to_string(x.shape()) + " does not match plan " +
                     to_string(expected));
  const std::int64_t sample = numel(expected);
  const std::int64_t groups = plan.groups();
  std::vector<std::int64_t> index;
  index.reserve(static_cast<std::size_t>(batch * plan.num_chunks * groups * plan.chunk_size()));
  for (std::int64_t b = 0; b < batch; ++b)
    for (std::int64_t i = 0; i < plan.num_chunks; ++i)
      for (std::int64_t k = 0; k < groups; ++k)
        for (std::int64_t j = 0; j < plan.chunk_len; ++j)
          for (std::int64_t d = 0; d < plan.group_width; ++d) {
            const std::int64_t src = source_offset(plan, i, k, j, d);
            index.push_back(src < 0 ? -1 : b * sample + src);
          }
  Shape out{plan.num_chunks, groups, plan.chunk_size()};
  if (x.rank() == srank + 1) out.insert(out.begin(), batch);
  return gather(x, index, std::move(out));
}

template <typename T>
Tensor<T> chunk_merge(const Tensor<T>& chunks, const ChunkPlan& plan) {
  const std::int64_t batch = batch_of(chunks.shape(), 3, "chunk_merge");
  const std::int64_t groups = plan.groups();
  const Shape expected{plan.num_chunks, groups, plan.chunk_size()};
  if (!std::equal(expected.begin(), expected.end(), chunks.shape().end() - 3))
    throw ShapeError("chunk_merge: chunks " + to_string(chunks.shape()) +
                     " do not match plan layout " + to_string(expected));
  const Shape sample = sample_shape(plan);
  const std::int64_t sample_numel = numel(sample);
  const std::int64_t chunk_numel = numel(expected);

  // Invert the split map once per sample, then offset per batch entry.
  std::vector<std::int64_t> inverse(static_cast<std::size_t>(sample_numel), -1);
  for (std::int64_t i = 0; i < plan.num_chunks; ++i)
    for (std::int64_t k = 0; k < groups; ++k)
      for (std::int64_t j = 0; j < plan.chunk_len; ++j)
        for (std::int64_t d = 0; d < plan.group_width; ++d) {
          const std::int64_t src = source_offset(plan, i, k, j, d);
          if (src >= 0) inverse[src] = ((i * groups + k) * plan.chunk_len + j) * plan.group_width + d;
        }
  std::vector<std::int64_t> index;
  index.reserve(static_cast<std::size_t>(batch * sample_numel));
  for (std::int64_t b = 0; b < batch; ++b)
    for (auto src : inverse) index.push_back(b * chunk_numel + src);

  Shape out = sample;
  if (chunks.rank() == 4) out.insert(out.begin(), batch);
  return gather(chunks, index, std::move(out));
}

std::int64_t derive_group_width(std::int64_t channels, std::int64_t chunk_len) {
  return group_width_for(GroupRule::c_over_l, channels, chunk_len);
}

GroupRule parse_group_rule(const std::string& text) {
  if (text == "C/L" || text == "c_over_l") return GroupRule::c_over_l;
  if (text == "C/2L" || text == "c_over_2l") return GroupRule::c_over_2l;
  if (text == "2C/L" || text == "two_c_over_l") return GroupRule::two_c_over_l;
  throw std::invalid_argument("unknown group rule '" + text + "' (expected C/L, C/2L or 2C/L)");
}

std::string to_string(GroupRule rule) {
  switch (rule) {
    case GroupRule::c_over_l:
      return "C/L";
    case GroupRule::c_over_2l:
      return "C/2L";
    case GroupRule::two_c_over_l:
      return "2C/L";
  }
  return "?";
}

std::int64_t group_width_for(GroupRule rule, std::int64_t channels, std::int64_t chunk_len) {
  if (channels <= 0 || chunk_len <= 0)
    throw std::invalid_argument("group width needs positive channels and chunk length");
  // Largest divisor d of C with d <= num / den.
  std::int64_t num = channels, den = chunk_len;
  if (rule == GroupRule::c_over_2l) den *= 2;
  if (rule == GroupRule::two_c_over_l) num *= 2;
  for (std::int64_t d = std::min(channels, num / den); d > 1; --d)
    if (channels % d == 0) return d;
  return 1;
}

Pathways parse_pathways(const std::string& text) {
  Pathways p{false, false, false};
  for (char ch : text) {
    switch (ch) {
      case 'h':
      case 'H':
        p.horizontal = true;
        break;
      case 'w':
      case 'W':
      case 'v':
      case 'V':
        p.vertical = true;
        break;
      case 'c':
      case 'C':
        p.channel = true;
        break;
      case '+':
        break;
      default:
        throw std::invalid_argument("unknown pathway '" + std::string(1, ch) + "' in '" + text + "'");
    }
  }
  if (p.count() == 0) throw std::invalid_argument("pathway set is empty");
  return p;
}

std::string to_string(Pathways pathways) {
  std::string s;
  if (pathways.horizontal) s += 'h';
  if (pathways.vertical) s += 'w';
  if (pathways.channel) s += 'c';
  return s;
}

template <typename T>
MorphFC<T>::MorphFC(const MorphFCOptions& options, Rng* rng) : options_(options) {
  if (options_.group_width == 0)
    options_.group_width = derive_group_width(options_.channels, options_.chunk_len);
  if (options_.chunk_len <= 0) throw std::invalid_argument("MorphFC: chunk length must be positive");
  if (options_.pathways.count() == 0) throw std::invalid_argument("MorphFC: no pathway enabled");
  check_group_width(options_.channels, options_.group_width, "MorphFC");
  const std::int64_t size = options_.chunk_len * options_.group_width;
  if (size > options_.max_chunk_size)
    throw std::invalid_argument("MorphFC: chunk size L*D = " + std::to_string(size) +
                                " exceeds the configured maximum " +
                                std::to_string(options_.max_chunk_size));
  const std::int64_t c = options_.channels;
  if (options_.pathways.horizontal) w_h_ = make_param<T>({size, size}, kInitStd, rng);
  if (options_.pathways.vertical) w_v_ = make_param<T>({size, size}, kInitStd, rng);
  if (options_.pathways.channel) {
    w_c_ = make_param<T>({c, c}, kInitStd, rng);
    if (options_.channel_bias) b_c_ = make_constant_param<T>({c}, T(0));
  }
  if (options_.gate) gate_ = make_constant_param<T>({c, options_.pathways.count()}, T(0));
}

template <typename T>
Tensor<T> MorphFC<T>::chunked(const Tensor<T>& x, Direction direction,
                              const Tensor<T>& weight) const {
  if (x.rank() != 3 && x.rank() != 4)
    throw ShapeError("MorphFC: expected [H,W,C] or [B,H,W,C], got " + to_string(x.shape()));
  const auto& s = x.shape();
  const std::int64_t height = s[s.size() - 3], width = s[s.size() - 2], channels = s.back();
  if (channels != options_.channels)
    throw ShapeError("MorphFC: built for " + std::to_string(options_.channels) +
                     " channels, input is " + to_string(x.shape()));
  const auto plan = ChunkPlan::spatial(direction, height, width, channels, options_.chunk_len,
                                       options_.group_width);
  auto chunks = chunk_split(x, plan);
  const Shape chunk_shape = chunks.shape();
  auto mixed = matmul(reshape(chunks, {chunks.numel() / plan.chunk_size(), plan.chunk_size()}),
                      weight);
  return chunk_merge(reshape(mixed, chunk_shape), plan);
}

template <typename T>
Tensor<T> MorphFC<T>::horizontal(const Tensor<T>& x) const {
  if (!w_h_.defined()) throw std::logic_error("MorphFC: horizontal pathway disabled");
  return chunked(x, Direction::horizontal, w_h_);
}

template <typename T>
Tensor<T> MorphFC<T>::vertical(const Tensor<T>& x) const {
  if (!w_v_.defined()) throw std::logic_error("MorphFC: vertical pathway disabled");
  return chunked(x, Direction::vertical, w_v_);
}

template <typename T>
Tensor<T> MorphFC<T>::channel(const Tensor<T>& x) const {
  if (!w_c_.defined()) throw std::logic_error("MorphFC: channel pathway disabled");
  if (x.dim(-1) != options_.channels)
    throw ShapeError("MorphFC: built for " + std::to_string(options_.channels) +
                     " channels, input is " + to_string(x.shape()));
  return linear(x, w_c_, b_c_);
}

template <typename T>
Tensor<T> MorphFC<T>::gate_weights() const {
  if (!gate_.defined()) throw std::logic_error("MorphFC: gate disabled");
  return softmax_last(gate_);
}

template <typename T>
Tensor<T> MorphFC<T>::forward(const Tensor<T>& x) const {
  std::vector<Tensor<T>> paths;
  if (options_.pathways.horizontal) paths.push_back(horizontal(x));
  if (options_.pathways.vertical) paths.push_back(vertical(x));
  if (options_.pathways.channel) paths.push_back(channel(x));
  if (gate_.defined()) {
    const auto weights = gate_weights();
    const std::int64_t c = options_.channels;
    for (std::size_t p = 0; p < paths.size(); ++p)
      paths[p] = mul(paths[p], reshape(slice(weights, 1, static_cast<std::int64_t>(p), 1), {c}));
  }
  Tensor<T> out = paths.front();
  for (std::size_t p = 1; p < paths.size(); ++p) out = add(out, paths[p]);
  return out;
}

template <typename T>
void MorphFC<T>::collect_params(const std::string& prefix, ParamList<T>& out) const {
  if (w_h_.defined()) out.emplace_back(prefix + "w_h", w_h_);
  if (w_v_.defined()) out.emplace_back(prefix + "w_v", w_v_);
  if (w_c_.defined()) out.emplace_back(prefix + "w_c", w_c_);
  if (b_c_.defined()) out.emplace_back(prefix + "b_c", b_c_);
  if (gate_.defined()) out.emplace_back(prefix + "gate", gate_);
}

template <typename T>
std::int64_t MorphFC<T>::param_count() const {
  ParamList<T> params;
  collect_params("", params);
  std::int64_t n = 0;
  for (const auto& [name, p] : params) n += p.numel();
  return n;
}

template <typename T>
std::int64_t MorphFC<T>::macs(std::int64_t height, std::int64_t width) const {
  const std::int64_t size = options_.chunk_len * options_.group_width;
  const std::int64_t groups = options_.channels / options_.group_width;
  const std::int64_t chunks = (height * width + options_.chunk_len - 1) / options_.chunk_len;
  std::int64_t total = 0;
  const std::int64_t per_pathway = chunks * groups * size * size;
  if (options_.pathways.horizontal) total += per_pathway;
  if (options_.pathways.vertical) total += per_pathway;
  if (options_.pathways.channel) total += height * width * options_.channels * options_.channels;
  return total;
}

template <typename T>
TemporalFC<T>::TemporalFC(const TemporalFCOptions& options, Rng* rng) : options_(options) {
  if (options_.frames <= 0) throw std::invalid_argument("TemporalFC: frame count must be positive");
  if (options_.group_width == 0)
    options_.group_width = derive_group_width(options_.channels, options_.frames);
  check_group_width(options_.channels, options_.group_width, "TemporalFC");
  const std::int64_t size = options_.frames * options_.group_width;
  if (size > options_.max_chunk_size)
    throw std::invalid_argument("TemporalFC: chunk size T*D = " + std::to_string(size) +
                                " exceeds the configured maximum");
  w_t_ = make_param<T>({size, size}, kInitStd, rng);
}

template <typename T>
Tensor<T> TemporalFC<T>::forward(const Tensor<T>& x) const {
  if (x.rank() != 4 && x.rank() != 5)
    throw ShapeError("TemporalFC: expected [H,W,T,C] or [B,H,W,T,C], got " + to_string(x.shape()));
  const auto& s = x.shape();
  const std::int64_t height = s[s.size() - 4], width = s[s.size() - 3], frames = s[s.size() - 2];
  if (frames != options_.frames || s.back() != options_.channels)
    throw ShapeError("TemporalFC: built for " + std::to_string(options_.frames) + " frames x " +
                     std::to_string(options_.channels) + " channels, input is " +
                     to_string(x.shape()));
  const auto plan =
      ChunkPlan::temporal(height, width, frames, options_.channels, options_.group_width);
  auto chunks = chunk_split(x, plan);
  const Shape chunk_shape = chunks.shape();
  auto mixed = matmul(reshape(chunks, {chunks.numel() / plan.chunk_size(), plan.chunk_size()}),
                      w_t_);
  return chunk_merge(reshape(mixed, chunk_shape), plan);
}

template <typename T>
void TemporalFC<T>::collect_params(const std::string& prefix, ParamList<T>& out) const {
  out.emplace_back(prefix + "w_t", w_t_);
}

template <typename T>
std::int64_t TemporalFC<T>::param_count() const {
  return w_t_.numel();
}

template <typename T>
std::int64_t TemporalFC<T>::macs(std::int64_t height, std::int64_t width) const {
  const std::int64_t size = options_.frames * options_.group_width;
  return height * width * (options_.channels / options_.group_width) * size * size;
}

template Tensor<float> chunk_split(const Tensor<float>&, const ChunkPlan&);
template Tensor<double> chunk_split(const Tensor<double>&, const ChunkPlan&);
template Tensor<float> chunk_merge(const Tensor<float>&, const ChunkPlan&);
template Tensor<double> chunk_merge(const Tensor<double>&, const ChunkPlan&);
template class MorphFC<float>;
template class MorphFC<double>;
template class TemporalFC<float>;
template class TemporalFC<double>;

}  // namespace morph
