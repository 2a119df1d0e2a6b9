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

// Brute-force references. Everything here is scalar loops over plain
// row-major double buffers; this library does not link against the tensor
// engine, so it cannot share a bug with it.

#pragma once

#include <cstdint>
#include <vector>

namespace morph::oracle {

/// Weights of one MorphFC layer. An empty matrix disables that pathway.
struct MorphFCWeights {
  std::int64_t chunk_len = 0;
  std::int64_t group_width = 0;
  std::vector<double> w_h;   // (L*D) x (L*D)
  std::vector<double> w_v;   // (L*D) x (L*D)
  std::vector<double> w_c;   // C x C
  std::vector<double> b_c;   // C, optional
  std::vector<double> gate;  // C x (enabled pathways) logits, optional
};

struct TemporalWeights {
  std::int64_t group_width = 0;
  std::vector<double> w_t;  // (T*D) x (T*D)
};

/// x is an [H, W, C] map; returns the [H, W, C] output.
std::vector<double> naive_morphfc(const std::vector<double>& x, std::int64_t height,
                                  std::int64_t width, std::int64_t channels,
                                  const MorphFCWeights& weights);

/// Horizontal pathway alone (no combination, no gate).
std::vector<double> naive_horizontal(const std::vector<double>& x, std::int64_t height,
                                     std::int64_t width, std::int64_t channels,
                                     std::int64_t chunk_len, std::int64_t group_width,
                                     const std::vector<double>& w_h);

/// x is an [H, W, T, C] clip.
std::vector<double> naive_morphfc_t(const std::vector<double>& x, std::int64_t height,
                                    std::int64_t width, std::int64_t frames,
                                    std::int64_t channels, const TemporalWeights& weights);

struct Conv1dSpec {
  std::int64_t kernel_len = 3;
  std::int64_t stride = 1;
  std::int64_t padding = 0;  // zeros on both ends
  std::int64_t groups = 1;
  std::int64_t out_per_group = 1;
  // Shared: weights [groups][K][D_in][out_per_group].
  // Non-shared: weights [out_len][groups][K][D_in][out_per_group], one
  // kernel per output position.
  bool shared_weights = true;
};

std::int64_t conv1d_output_length(std::int64_t length, const Conv1dSpec& spec);

/// Grouped 1-D convolution over a [length, channels] sequence:
///   out[t][g*O + o] = sum_j sum_i w(t)[g][j][i][o] * x_pad[t*stride + j][g*D + i]
/// Returns [out_len, groups * out_per_group].
std::vector<double> grouped_conv1d_reference(const std::vector<double>& x, std::int64_t length,
                                             std::int64_t channels,
                                             const std::vector<double>& weights,
                                             const Conv1dSpec& spec);

/// Non-shared, stride-L, unpadded grouped convolution whose every window
/// applies W_h, reshaped back to one token per row: the literal
/// "non-shared weights" reading of the horizontal pathway over a
/// [length, channels] token sequence (length must be a multiple of L).
std::vector<double> conv_equivalent_horizontal(const std::vector<double>& tokens,
                                               std::int64_t length, std::int64_t channels,
                                               std::int64_t chunk_len, std::int64_t group_width,
                                               const std::vector<double>& w_h);

/// Dense (length*D) x (length*D) block-diagonal matrix with W_h blocks,
/// applied to channel group `group` of a [length, channels] sequence.
/// Returns the transformed [length, D] group.
std::vector<double> block_diagonal_fc_reference(const std::vector<double>& tokens,
                                                std::int64_t length, std::int64_t channels,
                                                std::int64_t chunk_len, std::int64_t group_width,
                                                std::int64_t group,
                                                const std::vector<double>& w_h);

/// Same-padded k x k convolution of an [H, W, C_in] map with kernel
/// [k][k][C_in][C_out].
std::vector<double> conv2d_reference(const std::vector<double>& x, std::int64_t height,
                                     std::int64_t width, std::int64_t in_channels,
                                     std::int64_t out_channels, std::int64_t kernel,
                                     const std::vector<double>& weights);

}  // namespace morph::oracle
