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

#include "morphmlp/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace morph::oracle {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("oracle: " + what);
}

// out = v * W for a row vector v of length n and an n x n matrix W.
std::vector<double> vec_mat(const std::vector<double>& v, const std::vector<double>& w,
                            std::int64_t n) {
  std::vector<double> out(static_cast<std::size_t>(n), 0.0);
  for (std::int64_t col = 0; col < n; ++col) {
    double acc = 0.0;
    for (std::int64_t row = 0; row < n; ++row) acc += v[row] * w[row * n + col];
    out[col] = acc;
  }
  return out;
}

// Token index (h, w) of the p-th token in a row-major (W fastest) or
// column-major (H fastest) scan.
void scan_position(bool column_major, std::int64_t p, std::int64_t height, std::int64_t width,
                   std::int64_t& h, std::int64_t& w) {
  if (column_major) {
    h = p % height;
    w = p / height;
  } else {
    h = p / width;
    w = p % width;
  }
}

std::vector<double> naive_axis_pathway(const std::vector<double>& x, std::int64_t height,
                                       std::int64_t width, std::int64_t channels,
                                       std::int64_t chunk_len, std::int64_t group_width,
                                       const std::vector<double>& weight, bool column_major) {
  const std::int64_t n = chunk_len * group_width;
  require(static_cast<std::int64_t>(weight.size()) == n * n, "pathway weight must be (L*D)^2");
  const std::int64_t tokens = height * width;
  const std::int64_t chunks = (tokens + chunk_len - 1) / chunk_len;
  std::vector<double> out(x.size(), 0.0);
  for (std::int64_t i = 0; i < chunks; ++i) {
    for (std::int64_t k = 0; k < channels / group_width; ++k) {
      std::vector<double> v(static_cast<std::size_t>(n), 0.0);
      for (std::int64_t j = 0; j < chunk_len; ++j) {
        const std::int64_t p = i * chunk_len + j;
        if (p >= tokens) continue;  // zero padding
        std::int64_t h, w;
        scan_position(column_major, p, height, width, h, w);
        for (std::int64_t d = 0; d < group_width; ++d)
          v[j * group_width + d] = x[(h * width + w) * channels + k * group_width + d];
      }
      const auto y = vec_mat(v, weight, n);
      for (std::int64_t j = 0; j < chunk_len; ++j) {
        const std::int64_t p = i * chunk_len + j;
        if (p >= tokens) continue;  // cropped
        std::int64_t h, w;
        scan_position(column_major, p, height, width, h, w);
        for (std::int64_t d = 0; d < group_width; ++d)
          out[(h * width + w) * channels + k * group_width + d] = y[j * group_width + d];
      }
    }
  }
  return out;
}

}  // namespace

std::vector<double> naive_horizontal(const std::vector<double>& x, std::int64_t height,
                                     std::int64_t width, std::int64_t channels,
                                     std::int64_t chunk_len, std::int64_t group_width,
                                     const std::vector<double>& w_h) {
  require(group_width > 0 && channels % group_width == 0, "group width must divide channels");
  require(static_cast<std::int64_t>(x.size()) == height * width * channels, "input size");
  return naive_axis_pathway(x, height, width, channels, chunk_len, group_width, w_h, false);
}

std::vector<double> naive_morphfc(const std::vector<double>& x, std::int64_t height,
                                  std::int64_t width, std::int64_t channels,
                                  const MorphFCWeights& weights) {
  require(static_cast<std::int64_t>(x.size()) == height * width * channels, "input size");
  require(weights.group_width > 0 && channels % weights.group_width == 0,
          "group width must divide channels");
  std::vector<std::vector<double>> paths;
  if (!weights.w_h.empty())
    paths.push_back(naive_axis_pathway(x, height, width, channels, weights.chunk_len,
                                       weights.group_width, weights.w_h, false));
  if (!weights.w_v.empty())
    paths.push_back(naive_axis_pathway(x, height, width, channels, weights.chunk_len,
                                       weights.group_width, weights.w_v, true));
  if (!weights.w_c.empty()) {
    require(static_cast<std::int64_t>(weights.w_c.size()) == channels * channels, "w_c size");
    std::vector<double> out(x.size(), 0.0);
    for (std::int64_t t = 0; t < height * width; ++t)
      for (std::int64_t co = 0; co < channels; ++co) {
        double acc = weights.b_c.empty() ? 0.0 : weights.b_c[co];
        for (std::int64_t ci = 0; ci < channels; ++ci)
          acc += x[t * channels + ci] * weights.w_c[ci * channels + co];
        out[t * channels + co] = acc;
      }
    paths.push_back(std::move(out));
  }
  require(!paths.empty(), "no pathway weights given");

  const auto count = static_cast<std::int64_t>(paths.size());
  std::vector<double> mix(static_cast<std::size_t>(channels * count), 1.0);
  if (!weights.gate.empty()) {
    require(static_cast<std::int64_t>(weights.gate.size()) == channels * count, "gate size");
    for (std::int64_t c = 0; c < channels; ++c) {
      double mx = weights.gate[c * count];
      for (std::int64_t p = 1; p < count; ++p) mx = std::max(mx, weights.gate[c * count + p]);
      double total = 0.0;
      for (std::int64_t p = 0; p < count; ++p) total += std::exp(weights.gate[c * count + p] - mx);
      for (std::int64_t p = 0; p < count; ++p)
        mix[c * count + p] = std::exp(weights.gate[c * count + p] - mx) / total;
    }
  }
  std::vector<double> out(x.size(), 0.0);
  for (std::size_t e = 0; e < out.size(); ++e) {
    const std::int64_t c = static_cast<std::int64_t>(e) % channels;
    for (std::int64_t p = 0; p < count; ++p) out[e] += mix[c * count + p] * paths[p][e];
  }
  return out;
}

std::vector<double> naive_morphfc_t(const std::vector<double>& x, std::int64_t height,
                                    std::int64_t width, std::int64_t frames,
                                    std::int64_t channels, const TemporalWeights& weights) {
  const std::int64_t d_t = weights.group_width;
  require(d_t > 0 && channels % d_t == 0, "temporal group width must divide channels");
  require(static_cast<std::int64_t>(x.size()) == height * width * frames * channels, "input size");
  const std::int64_t n = frames * d_t;
  require(static_cast<std::int64_t>(weights.w_t.size()) == n * n, "w_t must be (T*D)^2");
  std::vector<double> out(x.size(), 0.0);
  for (std::int64_t s = 0; s < height * width; ++s) {
    for (std::int64_t k = 0; k < channels / d_t; ++k) {
      std::vector<double> v(static_cast<std::size_t>(n));
      for (std::int64_t t = 0; t < frames; ++t)
        for (std::int64_t d = 0; d < d_t; ++d)
          v[t * d_t + d] = x[(s * frames + t) * channels + k * d_t + d];
      const auto y = vec_mat(v, weights.w_t, n);
      for (std::int64_t t = 0; t < frames; ++t)
        for (std::int64_t d = 0; d < d_t; ++d)
          out[(s * frames + t) * channels + k * d_t + d] = y[t * d_t + d];
    }
  }
  return out;
}

std::int64_t conv1d_output_length(std::int64_t length, const Conv1dSpec& spec) {
  require(spec.kernel_len > 0 && spec.stride > 0 && spec.padding >= 0, "conv1d spec");
  const std::int64_t span = length + 2 * spec.padding - spec.kernel_len;
  require(span >= 0, "kernel longer than padded input");
  return span / spec.stride + 1;
}

std::vector<double> grouped_conv1d_reference(const std::vector<double>& x, std::int64_t length,
                                             std::int64_t channels,
                                             const std::vector<double>& weights,
                                             const Conv1dSpec& spec) {
  require(static_cast<std::int64_t>(x.size()) == length * channels, "input size");
  require(spec.groups > 0 && channels % spec.groups == 0, "groups must divide channels");
  const std::int64_t d_in = channels / spec.groups;
  const std::int64_t out_len = conv1d_output_length(length, spec);
  const std::int64_t per_kernel = spec.groups * spec.kernel_len * d_in * spec.out_per_group;
  require(static_cast<std::int64_t>(weights.size()) ==
              (spec.shared_weights ? per_kernel : per_kernel * out_len),
          "weight buffer size");
  const std::int64_t out_channels = spec.groups * spec.out_per_group;
  std::vector<double> out(static_cast<std::size_t>(out_len * out_channels), 0.0);
  for (std::int64_t t = 0; t < out_len; ++t) {
    const double* w = weights.data() + (spec.shared_weights ? 0 : t * per_kernel);
    for (std::int64_t g = 0; g < spec.groups; ++g)
      for (std::int64_t o = 0; o < spec.out_per_group; ++o) {
        double acc = 0.0;
        for (std::int64_t j = 0; j < spec.kernel_len; ++j) {
          const std::int64_t src = t * spec.stride + j - spec.padding;
          if (src < 0 || src >= length) continue;
          for (std::int64_t i = 0; i < d_in; ++i)
            acc += w[((g * spec.kernel_len + j) * d_in + i) * spec.out_per_group + o] *
                   x[src * channels + g * d_in + i];
        }
        out[t * out_channels + g * spec.out_per_group + o] = acc;
      }
  }
  return out;
}

std::vector<double> conv_equivalent_horizontal(const std::vector<double>& tokens,
                                               std::int64_t length, std::int64_t channels,
                                               std::int64_t chunk_len, std::int64_t group_width,
                                               const std::vector<double>& w_h) {
  require(length % chunk_len == 0, "sequence length must be a multiple of the chunk length");
  const std::int64_t groups = channels / group_width;
  const std::int64_t n = chunk_len * group_width;
  Conv1dSpec spec;
  spec.kernel_len = chunk_len;
  spec.stride = chunk_len;
  spec.padding = 0;
  spec.groups = groups;
  spec.out_per_group = n;  // one window emits all L tokens of its group
  spec.shared_weights = false;
  const std::int64_t windows = conv1d_output_length(length, spec);

  // Kernel of window t, group g: w[g][j][i][o] = W_h[j*D + i][o].
  const std::int64_t per_kernel = groups * chunk_len * group_width * n;
  std::vector<double> weights(static_cast<std::size_t>(per_kernel * windows));
  for (std::int64_t t = 0; t < windows; ++t)
    for (std::int64_t g = 0; g < groups; ++g)
      for (std::int64_t j = 0; j < chunk_len; ++j)
        for (std::int64_t i = 0; i < group_width; ++i)
          for (std::int64_t o = 0; o < n; ++o)
            weights[t * per_kernel + ((g * chunk_len + j) * group_width + i) * n + o] =
                w_h[(j * group_width + i) * n + o];
  const auto conv = grouped_conv1d_reference(tokens, length, channels, weights, spec);

  // Unfold each window's (group, token, channel) outputs back to tokens.
  std::vector<double> out(tokens.size(), 0.0);
  for (std::int64_t t = 0; t < windows; ++t)
    for (std::int64_t g = 0; g < groups; ++g)
      for (std::int64_t j = 0; j < chunk_len; ++j)
        for (std::int64_t d = 0; d < group_width; ++d)
          out[(t * chunk_len + j) * channels + g * group_width + d] =
              conv[t * groups * n + g * n + j * group_width + d];
  return out;
}

std::vector<double> block_diagonal_fc_reference(const std::vector<double>& tokens,
                                                std::int64_t length, std::int64_t channels,
                                                std::int64_t chunk_len, std::int64_t group_width,
                                                std::int64_t group,
                                                const std::vector<double>& w_h) {
  require(length % chunk_len == 0, "sequence length must be a multiple of the chunk length");
  const std::int64_t n = chunk_len * group_width;
  const std::int64_t big = length * group_width;
  std::vector<double> dense(static_cast<std::size_t>(big * big), 0.0);
  for (std::int64_t b = 0; b < length / chunk_len; ++b)
    for (std::int64_t r = 0; r < n; ++r)
      for (std::int64_t c = 0; c < n; ++c) dense[(b * n + r) * big + b * n + c] = w_h[r * n + c];
  std::vector<double> v(static_cast<std::size_t>(big));
  for (std::int64_t t = 0; t < length; ++t)
    for (std::int64_t d = 0; d < group_width; ++d)
      v[t * group_width + d] = tokens[t * channels + group * group_width + d];
  return vec_mat(v, dense, big);
}

std::vector<double> conv2d_reference(const std::vector<double>& x, std::int64_t height,
                                     std::int64_t width, std::int64_t in_channels,
                                     std::int64_t out_channels, std::int64_t kernel,
                                     const std::vector<double>& weights) {
  require(static_cast<std::int64_t>(x.size()) == height * width * in_channels, "input size");
  require(static_cast<std::int64_t>(weights.size()) ==
              kernel * kernel * in_channels * out_channels,
          "kernel size");
  const std::int64_t pad = kernel / 2;
  std::vector<double> out(static_cast<std::size_t>(height * width * out_channels), 0.0);
  for (std::int64_t h = 0; h < height; ++h)
    for (std::int64_t w = 0; w < width; ++w) {
      double* dst = out.data() + (h * width + w) * out_channels;
      for (std::int64_t ky = 0; ky < kernel; ++ky) {
        const std::int64_t sy = h + ky - pad;
        if (sy < 0 || sy >= height) continue;
        for (std::int64_t kx = 0; kx < kernel; ++kx) {
          const std::int64_t sx = w + kx - pad;
          if (sx < 0 || sx >= width) continue;
          const double* src = x.data() + (sy * width + sx) * in_channels;
          const double* k = weights.data() + (ky * kernel + kx) * in_channels * out_channels;
          for (std::int64_t ci = 0; ci < in_channels; ++ci)
            for (std::int64_t co = 0; co < out_channels; ++co)
              dst[co] += src[ci] * k[ci * out_channels + co];
        }
      }
    }
  return out;
}

}  // namespace morph::oracle
