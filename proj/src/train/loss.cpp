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

#include "morphmlp/loss.hpp"

#include <stdexcept>
#include <string>
#include <vector>

#include "morphmlp/ops.hpp"

namespace morph {

namespace {

void check_labels(const Shape& shape, std::span<const std::int32_t> labels) {
  if (shape.size() != 2)
    throw ShapeError("cross_entropy: logits must be [N, K], got " + to_string(shape));
  if (static_cast<std::int64_t>(labels.size()) != shape[0])
    throw ShapeError("cross_entropy: " + std::to_string(labels.size()) + " labels for " +
                     std::to_string(shape[0]) + " rows");
  for (auto label : labels)
    if (label < 0 || label >= shape[1])
      throw std::out_of_range("cross_entropy: label " + std::to_string(label) +
                              " outside [0, " + std::to_string(shape[1]) + ")");
}

}  // namespace

template <typename T>
Tensor<T> cross_entropy(const Tensor<T>& logits, std::span<const std::int32_t> labels,
                        double smoothing) {
  check_labels(logits.shape(), labels);
  if (smoothing < 0.0 || smoothing >= 1.0)
    throw std::invalid_argument("cross_entropy: smoothing must lie in [0, 1)");
  const auto n = logits.dim(0), k = logits.dim(1);
  std::vector<T> target(static_cast<std::size_t>(n * k), static_cast<T>(smoothing / k));
  for (std::int64_t i = 0; i < n; ++i)
    target[static_cast<std::size_t>(i * k + labels[i])] += static_cast<T>(1.0 - smoothing);
  const Tensor<T> weights({n, k}, std::move(target));
  return scale(sum_all(mul(log_softmax_last(logits), weights)), static_cast<T>(-1.0 / n));
}

template <typename T>
double accuracy(const Tensor<T>& logits, std::span<const std::int32_t> labels) {
  check_labels(logits.shape(), labels);
  const auto n = logits.dim(0), k = logits.dim(1);
  if (n == 0) return 0.0;
  const auto values = logits.data();
  std::int64_t correct = 0;
  for (std::int64_t i = 0; i < n; ++i) {
    std::int64_t best = 0;
    for (std::int64_t j = 1; j < k; ++j)
      if (values[i * k + j] > values[i * k + best]) best = j;
    correct += best == labels[i];
  }
  return static_cast<double>(correct) / static_cast<double>(n);
}

template Tensor<float> cross_entropy(const Tensor<float>&, std::span<const std::int32_t>, double);
template Tensor<double> cross_entropy(const Tensor<double>&, std::span<const std::int32_t>, double);
template double accuracy(const Tensor<float>&, std::span<const std::int32_t>);
template double accuracy(const Tensor<double>&, std::span<const std::int32_t>);

}  // namespace morph
