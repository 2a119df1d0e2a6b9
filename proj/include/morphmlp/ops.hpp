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

// Differentiable operations. Every function records a backward rule when any
// input requires grad and grad mode is enabled.
//
// Broadcasting is limited to the trailing case: in add() and mul() the second
// operand may have the full shape of the first or any suffix of it (a
// per-channel vector over [..., C], for example).

#pragma once

#include <vector>

#include "morphmlp/tensor.hpp"

namespace morph {

template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b);

/// x[..., K] · weight[K, N] (+ bias[N]).
template <typename T>
Tensor<T> linear(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias = {});

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);
template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b);
template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b);
template <typename T>
Tensor<T> scale(const Tensor<T>& x, T factor);

/// Multiplies every slice x[i, ...] by the constant factors[i]. Used for
/// per-sample residual dropping.
template <typename T>
Tensor<T> scale_leading(const Tensor<T>& x, const std::vector<T>& factors);

template <typename T>
Tensor<T> sum_all(const Tensor<T>& x);
template <typename T>
Tensor<T> mean_all(const Tensor<T>& x);
/// Mean over the listed axes; the reduced axes are removed from the shape.
template <typename T>
Tensor<T> mean_over_axes(const Tensor<T>& x, std::vector<int> axes);

/// Normalizes over the last axis with population variance.
template <typename T>
Tensor<T> layer_norm(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta,
                     T eps = T(1e-5));

/// Exact GELU, x * Phi(x) with the erf form of the normal CDF.
template <typename T>
Tensor<T> gelu(const Tensor<T>& x);

template <typename T>
Tensor<T> softmax_last(const Tensor<T>& x);
template <typename T>
Tensor<T> log_softmax_last(const Tensor<T>& x);

template <typename T>
Tensor<T> reshape(const Tensor<T>& x, Shape shape);
template <typename T>
Tensor<T> permute(const Tensor<T>& x, const std::vector<int>& axes);
template <typename T>
Tensor<T> slice(const Tensor<T>& x, int axis, std::int64_t start, std::int64_t length);
template <typename T>
Tensor<T> concat(const std::vector<Tensor<T>>& parts, int axis);

/// out.flat[i] = index[i] >= 0 ? x.flat[index[i]] : 0. Indices may repeat;
/// the backward pass scatter-adds.
template <typename T>
Tensor<T> gather(const Tensor<T>& x, const std::vector<std::int64_t>& index, Shape out_shape);

}  // namespace morph
