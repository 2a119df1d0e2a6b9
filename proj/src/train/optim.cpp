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

#include "morphmlp/optim.hpp"

#include <cmath>
#include <numbers>

namespace morph {

bool applies_weight_decay(const std::string& name, const Shape& shape) {
  if (shape.size() < 2) return false;
  const std::string gate = "gate";
  return !(name.size() >= gate.size() && name.compare(name.size() - gate.size(), gate.size(), gate) == 0);
}

template <typename T>
AdamW<T>::AdamW(ParamList<T> params, AdamWOptions options) : options_(options) {
  for (auto& [name, p] : params) {
    const auto n = static_cast<std::size_t>(p.numel());
    slots_.push_back({name, p, std::vector<T>(n, T(0)), std::vector<T>(n, T(0)),
                      applies_weight_decay(name, p.shape())});
  }
}

template <typename T>
void AdamW<T>::step(double lr) {
  ++step_;
  const double b1 = options_.beta1, b2 = options_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(step_));
  for (auto& slot : slots_) {
    if (!slot.param.has_grad()) {
      // Keep the moments decaying as if the gradient were zero.
      for (std::size_t i = 0; i < slot.m.size(); ++i) {
        slot.m[i] = static_cast<T>(b1 * slot.m[i]);
        slot.v[i] = static_cast<T>(b2 * slot.v[i]);
      }
    }
    const auto grad = slot.param.has_grad() ? slot.param.grad() : std::span<const T>{};
    auto values = slot.param.mutable_data();
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (!grad.empty()) {
        const double g = grad[i];
        if (!std::isfinite(g))
          throw NonFiniteGradient("non-finite gradient in parameter " + slot.name);
        slot.m[i] = static_cast<T>(b1 * slot.m[i] + (1.0 - b1) * g);
        slot.v[i] = static_cast<T>(b2 * slot.v[i] + (1.0 - b2) * g * g);
      }
      const double m_hat = slot.m[i] / c1;
      const double v_hat = slot.v[i] / c2;
      double p = values[i];
      if (slot.decay) p -= lr * options_.weight_decay * p;
      p -= lr * m_hat / (std::sqrt(v_hat) + options_.eps);
      values[i] = static_cast<T>(p);
    }
  }
}

template <typename T>
void AdamW<T>::zero_grad() {
  for (auto& slot : slots_) slot.param.zero_grad();
}

void Schedule::validate() const {
  if (total_steps <= 0) throw std::invalid_argument("schedule: total_steps must be positive");
  if (warmup_steps < 0 || warmup_steps > total_steps)
    throw std::invalid_argument("schedule: warmup_steps must lie in [0, total_steps]");
  if (base_lr < 0.0 || floor_lr < 0.0 || floor_lr > base_lr)
    throw std::invalid_argument("schedule: need 0 <= floor_lr <= base_lr");
}

double cosine_lr(std::int64_t step, const Schedule& s) {
  if (step < 0) step = 0;
  if (step < s.warmup_steps)
    return s.base_lr * static_cast<double>(step + 1) / static_cast<double>(s.warmup_steps);
  if (step >= s.total_steps) return s.floor_lr;
  const double progress = static_cast<double>(step - s.warmup_steps) /
                          static_cast<double>(s.total_steps - s.warmup_steps);
  return s.floor_lr +
         (s.base_lr - s.floor_lr) * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

template class AdamW<float>;
template class AdamW<double>;

}  // namespace morph
