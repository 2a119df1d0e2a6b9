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
#include <stdexcept>
#include <string>
#include <vector>

#include "morphmlp/init.hpp"

namespace morph {

struct AdamWOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.05;
};

class NonFiniteGradient : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Decay applies to weight matrices only: rank-1 tensors (norm scales and
/// shifts, biases) and pathway gate logits are excluded.
bool applies_weight_decay(const std::string& name, const Shape& shape);

/// AdamW with bias correction and decoupled, multiplicative weight decay.
template <typename T>
class AdamW {
 public:
  AdamW(ParamList<T> params, AdamWOptions options = {});

  /// One update with learning rate `lr`. Parameters that received no
  /// gradient are treated as having a zero gradient.
  void step(double lr);
  void zero_grad();

  std::int64_t step_count() const { return step_; }
  const AdamWOptions& options() const { return options_; }
  std::size_t size() const { return slots_.size(); }
  std::span<const T> first_moment(std::size_t i) const { return slots_.at(i).m; }
  std::span<const T> second_moment(std::size_t i) const { return slots_.at(i).v; }
  bool decays(std::size_t i) const { return slots_.at(i).decay; }

 private:
  struct Slot {
    std::string name;
    Tensor<T> param;
    std::vector<T> m;
    std::vector<T> v;
    bool decay;
  };
  AdamWOptions options_;
  std::vector<Slot> slots_;
  std::int64_t step_ = 0;
};

struct Schedule {
  double base_lr = 1e-3;
  std::int64_t warmup_steps = 0;
  std::int64_t total_steps = 1;
  double floor_lr = 0.0;

  void validate() const;
};

/// Linear warm-up to base_lr ((step + 1) / warmup of it before warmup_steps),
/// then cosine decay reaching floor_lr at total_steps.
double cosine_lr(std::int64_t step, const Schedule& schedule);

}  // namespace morph
