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

// Chunked fully-connected token mixing.
//
// A spatial MorphFC layer mixes tokens of an [H, W, C] map along three
// pathways and sums them:
//   horizontal  tokens read row-major, cut into runs of L, each run's
//               (L tokens x D group channels) vector multiplied by W_h
//   vertical    the same over a column-major read, with its own W_v
//   channel     a per-token C x C linear layer
// The temporal layer applies one (T*D) x (T*D) matrix per spatial position
// and channel group of an [H, W, T, C] clip.
//
// Inside a chunk the flattened vector is token-major: element j*D + d is
// channel d of the chunk's j-th token. When L does not divide H*W the token
// sequence is zero-padded to a multiple of L and the padding is cropped on
// the way back.

#pragma once

#include <cstdint>
#include <string>

#include "morphmlp/init.hpp"
#include "morphmlp/tensor.hpp"

namespace morph {

enum class Direction { horizontal, vertical, temporal };

std::string to_string(Direction direction);

struct ChunkPlan {
  Direction direction = Direction::horizontal;
  std::int64_t height = 0;
  std::int64_t width = 0;
  std::int64_t frames = 1;  // temporal plans only
  std::int64_t channels = 0;
  std::int64_t chunk_len = 0;  // tokens (spatial) or frames (temporal) per chunk
  std::int64_t group_width = 0;
  std::int64_t num_chunks = 0;
  std::int64_t pad_len = 0;

  std::int64_t groups() const { return channels / group_width; }
  std::int64_t chunk_size() const { return chunk_len * group_width; }

  static ChunkPlan spatial(Direction direction, std::int64_t height, std::int64_t width,
                           std::int64_t channels, std::int64_t chunk_len, std::int64_t group_width);
  static ChunkPlan temporal(std::int64_t height, std::int64_t width, std::int64_t frames,
                            std::int64_t channels, std::int64_t group_width);
};

/// Splits x ([H,W,C] / [B,H,W,C], or [H,W,T,C] / [B,H,W,T,C] for temporal
/// plans) into [B, num_chunks, groups, L*D]. The batch axis is dropped from
/// the result when x has none.
template <typename T>
Tensor<T> chunk_split(const Tensor<T>& x, const ChunkPlan& plan);

/// Exact inverse of chunk_split, padding removed.
template <typename T>
Tensor<T> chunk_merge(const Tensor<T>& chunks, const ChunkPlan& plan);

/// C / L when integral; otherwise the largest divisor of C not above C / L
/// (at least 1).
std::int64_t derive_group_width(std::int64_t channels, std::int64_t chunk_len);

/// Channel-group width rules compared in the group-width ablation.
enum class GroupRule { c_over_l, c_over_2l, two_c_over_l };

GroupRule parse_group_rule(const std::string& text);
std::string to_string(GroupRule rule);
std::int64_t group_width_for(GroupRule rule, std::int64_t channels, std::int64_t chunk_len);

struct Pathways {
  bool horizontal = true;
  bool vertical = true;
  bool channel = true;

  int count() const { return int(horizontal) + int(vertical) + int(channel); }
};

/// Parses a pathway subset such as "hwc" or "hw".
Pathways parse_pathways(const std::string& text);
std::string to_string(Pathways pathways);

struct MorphFCOptions {
  std::int64_t channels = 0;
  std::int64_t chunk_len = 0;
  std::int64_t group_width = 0;  // 0 selects derive_group_width(channels, chunk_len)
  Pathways pathways;
  bool gate = false;          // per-channel softmax reweighting of the pathways
  bool channel_bias = false;  // bias on the channel pathway
  std::int64_t max_chunk_size = 16384;  // upper bound on L * D
};

template <typename T>
class MorphFC {
 public:
  MorphFC(const MorphFCOptions& options, Rng* rng);

  /// x: [H, W, C] or [B, H, W, C].
  Tensor<T> forward(const Tensor<T>& x) const;

  /// One pathway's output before the pathways are combined.
  Tensor<T> horizontal(const Tensor<T>& x) const;
  Tensor<T> vertical(const Tensor<T>& x) const;
  Tensor<T> channel(const Tensor<T>& x) const;

  /// Per-channel combination weights, [C, pathways]; rows sum to one.
  Tensor<T> gate_weights() const;

  void collect_params(const std::string& prefix, ParamList<T>& out) const;
  std::int64_t param_count() const;
  /// Multiply-accumulates for one [H, W, C] input.
  std::int64_t macs(std::int64_t height, std::int64_t width) const;

  const MorphFCOptions& options() const { return options_; }
  Tensor<T>& w_h() { return w_h_; }
  Tensor<T>& w_v() { return w_v_; }
  Tensor<T>& w_c() { return w_c_; }
  Tensor<T>& b_c() { return b_c_; }
  Tensor<T>& gate_logits() { return gate_; }

 private:
  Tensor<T> chunked(const Tensor<T>& x, Direction direction, const Tensor<T>& weight) const;

  MorphFCOptions options_;
  Tensor<T> w_h_;   // [L*D, L*D]
  Tensor<T> w_v_;   // [L*D, L*D]
  Tensor<T> w_c_;   // [C, C]
  Tensor<T> b_c_;   // [C], when channel_bias
  Tensor<T> gate_;  // [C, pathways], when gate
};

struct TemporalFCOptions {
  std::int64_t channels = 0;
  std::int64_t frames = 0;       // post-embedding frame count
  std::int64_t group_width = 0;  // 0 selects derive_group_width(channels, frames)
  std::int64_t max_chunk_size = 16384;
};

template <typename T>
class TemporalFC {
 public:
  TemporalFC(const TemporalFCOptions& options, Rng* rng);

  /// x: [H, W, T, C] or [B, H, W, T, C].
  Tensor<T> forward(const Tensor<T>& x) const;

  void collect_params(const std::string& prefix, ParamList<T>& out) const;
  std::int64_t param_count() const;
  std::int64_t macs(std::int64_t height, std::int64_t width) const;

  const TemporalFCOptions& options() const { return options_; }
  Tensor<T>& w_t() { return w_t_; }

 private:
  TemporalFCOptions options_;
  Tensor<T> w_t_;  // [T*D, T*D]
};

}  // namespace morph
