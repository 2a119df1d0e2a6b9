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
#include <span>

#include "morphmlp/tensor.hpp"

namespace morph {

/// Mean cross-entropy of logits [N, K] against integer labels, with the
/// target distribution (1 - smoothing) on the label plus smoothing / K
/// spread over every class.
template <typename T>
Tensor<T> cross_entropy(const Tensor<T>& logits, std::span<const std::int32_t> labels,
                        double smoothing = 0.0);

/// Fraction of rows whose argmax matches the label. Ties go to the lower index.
template <typename T>
double accuracy(const Tensor<T>& logits, std::span<const std::int32_t> labels);

}  // namespace morph
