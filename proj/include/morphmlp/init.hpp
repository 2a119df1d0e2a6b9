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

#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "morphmlp/tensor.hpp"

namespace morph {

template <typename T>
using ParamList = std::vector<std::pair<std::string, Tensor<T>>>;

// Weight initialization. A null generator leaves the buffer zero-filled,
// which is what the counting paths use for the large variants.
using Rng = std::mt19937_64;

/// Normal(0, std) truncated to [-2 std, 2 std] by resampling.
template <typename T>
void fill_trunc_normal(std::span<T> values, double std_dev, Rng* rng) {
  if (!rng) return;
  std::normal_distribution<double> dist(0.0, std_dev);
  for (auto& v : values) {
    double s = dist(*rng);
    while (s < -2.0 * std_dev || s > 2.0 * std_dev) s = dist(*rng);
    v = static_cast<T>(s);
  }
}

template <typename T>
Tensor<T> make_param(Shape shape, double std_dev, Rng* rng) {
  Tensor<T> t(std::move(shape), true);
  fill_trunc_normal<T>(t.mutable_data(), std_dev, rng);
  return t;
}

template <typename T>
Tensor<T> make_constant_param(Shape shape, T value) {
  return Tensor<T>::full(std::move(shape), value, true);
}

}  // namespace morph
