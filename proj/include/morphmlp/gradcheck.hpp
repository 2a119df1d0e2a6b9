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

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "morphmlp/tensor.hpp"

namespace morph {

using NamedTensor = std::pair<std::string, Tensor<double>>;

struct GradCheckEntry {
  std::string name;
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  std::size_t checked = 0;
  bool passed = false;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double tolerance = 0.0;
  bool passed = false;

  double worst_rel_error() const;
};

struct GradCheckOptions {
  double step = 1e-5;
  double tolerance = 1e-5;
  // 0 checks every element; otherwise an evenly strided subset of this size.
  std::size_t max_elements_per_param = 0;
};

/// Compares the tape gradient of `loss_fn` against central differences for
/// every listed parameter.
///
/// The relative error of a parameter is max|analytic - numeric| divided by
/// max(max|analytic|, max|numeric|). When both gradients are below 1e-8 in
/// magnitude the absolute error is reported instead, so that exactly-zero
/// gradients are not judged on round-off.
///
/// `loss_fn` must be deterministic and return a scalar that depends on the
/// parameters through the tape. Throws std::runtime_error on non-finite
/// losses.
GradCheckReport finite_diff_check(const std::function<Tensor<double>()>& loss_fn,
                                  std::vector<NamedTensor> params,
                                  const GradCheckOptions& options = {});

}  // namespace morph
