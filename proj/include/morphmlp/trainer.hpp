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
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "morphmlp/dataset.hpp"
#include "morphmlp/model.hpp"
#include "morphmlp/optim.hpp"

namespace morph {

struct TrainOptions {
  std::int64_t steps = 100;
  std::int64_t batch_size = 32;
  Schedule schedule;  // total_steps is overridden by `steps`
  AdamWOptions adamw;
  double label_smoothing = 0.0;
  std::uint64_t seed = 0;  // batch order and drop-path draws
  std::int64_t log_every = 1;
};

struct MetricRecord {
  std::int64_t step = 0;
  double lr = 0.0;
  double loss = 0.0;
  double acc = 0.0;  // accuracy on the step's batch
};

/// "step=12 lr=0.001 loss=0.693147 acc=0.5", independent of the C locale.
std::string format_record(const MetricRecord& record);

class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(std::int64_t step, const std::string& what)
      : std::runtime_error(what), step_(step) {}
  std::int64_t step() const { return step_; }

 private:
  std::int64_t step_;
};

/// Runs `options.steps` AdamW steps on batches drawn from `data`. Identical
/// inputs give bit-identical results. Every `log_every` steps a record is
/// kept and, when `log` is set, written to it.
template <typename T>
std::vector<MetricRecord> train(Model<T>& model, const Dataset& data, const TrainOptions& options,
                                std::ostream* log = nullptr);

/// Top-1 accuracy in inference mode.
template <typename T>
double evaluate(const Model<T>& model, const Dataset& data, std::int64_t batch_size = 64);

}  // namespace morph
