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

#include "morphmlp/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace morph {

namespace {

constexpr double kTinyGradient = 1e-8;

double evaluate(const std::function<Tensor<double>()>& loss_fn) {
  NoGradGuard no_grad;
  const double v = loss_fn().item();
  if (!std::isfinite(v)) throw std::runtime_error("gradcheck: loss is not finite");
  return v;
}

}  // namespace

double GradCheckReport::worst_rel_error() const {
  double worst = 0.0;
  for (const auto& e : entries) worst = std::max(worst, e.max_rel_error);
  return worst;
}

GradCheckReport finite_diff_check(const std::function<Tensor<double>()>& loss_fn,
                                  std::vector<NamedTensor> params,
                                  const GradCheckOptions& options) {
  for (auto& [name, p] : params) {
    p.zero_grad();
    p.set_requires_grad(true);
  }
  {
    auto loss = loss_fn();
    if (!std::isfinite(loss.item())) throw std::runtime_error("gradcheck: loss is not finite");
    backward(loss);
  }

  GradCheckReport report;
  report.tolerance = options.tolerance;
  report.passed = true;
  for (auto& [name, p] : params) {
    const std::size_t n = static_cast<std::size_t>(p.numel());
    std::vector<double> analytic(n, 0.0);
    if (p.has_grad()) std::copy(p.grad().begin(), p.grad().end(), analytic.begin());

    std::size_t stride = 1;
    if (options.max_elements_per_param > 0 && n > options.max_elements_per_param)
      stride = (n + options.max_elements_per_param - 1) / options.max_elements_per_param;

    GradCheckEntry entry;
    entry.name = name;
    double scale = 0.0;
    auto values = p.mutable_data();
    for (std::size_t i = 0; i < n; i += stride) {
      const double saved = values[i];
      values[i] = saved + options.step;
      const double up = evaluate(loss_fn);
      values[i] = saved - options.step;
      const double down = evaluate(loss_fn);
      values[i] = saved;
      const double numeric = (up - down) / (2.0 * options.step);
      entry.max_abs_error = std::max(entry.max_abs_error, std::abs(numeric - analytic[i]));
      scale = std::max({scale, std::abs(numeric), std::abs(analytic[i])});
      ++entry.checked;
    }
    entry.max_rel_error = scale < kTinyGradient ? entry.max_abs_error : entry.max_abs_error / scale;
    entry.passed = entry.max_rel_error < options.tolerance;
    report.passed = report.passed && entry.passed;
    report.entries.push_back(std::move(entry));
  }
  return report;
}

}  // namespace morph
