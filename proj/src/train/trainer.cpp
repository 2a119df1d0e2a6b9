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

#include "morphmlp/trainer.hpp"

#include <charconv>
#include <cmath>
#include <numeric>

#include "morphmlp/loss.hpp"

namespace morph {

namespace {

void append_number(std::string& out, double value) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 9);
  out.append(buf, res.ptr);
}

}  // namespace

std::string format_record(const MetricRecord& r) {
  std::string out = "step=" + std::to_string(r.step) + " lr=";
  append_number(out, r.lr);
  out += " loss=";
  append_number(out, r.loss);
  out += " acc=";
  append_number(out, r.acc);
  return out;
}

template <typename T>
std::vector<MetricRecord> train(Model<T>& model, const Dataset& data, const TrainOptions& options,
                                std::ostream* log) {
  data.validate();
  if (data.num_classes > model.config().num_classes)
    throw std::invalid_argument("train: dataset has " + std::to_string(data.num_classes) +
                                " classes, model head has " +
                                std::to_string(model.config().num_classes));
  if (options.steps <= 0) throw std::invalid_argument("train: steps must be positive");
  Schedule schedule = options.schedule;
  schedule.total_steps = options.steps;
  schedule.validate();

  AdamW<T> optimizer(model.named_parameters(), options.adamw);
  BatchSampler sampler(data.size(), options.batch_size, options.seed);
  Rng drop_rng(options.seed ^ 0x9e3779b97f4a7c15ULL);
  const ForwardContext ctx{true, &drop_rng};
  std::vector<MetricRecord> records;

  for (std::int64_t step = 0; step < options.steps; ++step) {
    const auto indices = sampler.next();
    const auto labels = data.batch_labels(indices);
    const auto logits = model.forward(data.batch_inputs<T>(indices), ctx);
    auto loss = cross_entropy(logits, labels, options.label_smoothing);
    const double loss_value = loss.item();
    if (!std::isfinite(loss_value))
      throw TrainingDiverged(step, "training diverged: non-finite loss at step " +
                                       std::to_string(step));
    const double lr = cosine_lr(step, schedule);
    optimizer.zero_grad();
    backward(loss);
    try {
      optimizer.step(lr);
    } catch (const NonFiniteGradient& e) {
      throw TrainingDiverged(step, std::string(e.what()) + " at step " + std::to_string(step));
    }
    if (options.log_every > 0 &&
        (step % options.log_every == 0 || step + 1 == options.steps)) {
      MetricRecord record{step, lr, loss_value, accuracy(logits, labels)};
      if (log) *log << format_record(record) << '\n';
      records.push_back(record);
    }
  }
  return records;
}

template <typename T>
double evaluate(const Model<T>& model, const Dataset& data, std::int64_t batch_size) {
  data.validate();
  if (data.size() == 0) return 0.0;
  if (batch_size <= 0) throw std::invalid_argument("evaluate: batch size must be positive");
  NoGradGuard no_grad;
  double correct = 0.0;
  for (std::int64_t start = 0; start < data.size(); start += batch_size) {
    const auto count = std::min(batch_size, data.size() - start);
    std::vector<std::int64_t> indices(static_cast<std::size_t>(count));
    std::iota(indices.begin(), indices.end(), start);
    const auto logits = model.forward(data.batch_inputs<T>(indices));
    correct += accuracy(logits, data.batch_labels(indices)) * static_cast<double>(count);
  }
  return correct / static_cast<double>(data.size());
}

template std::vector<MetricRecord> train(Model<float>&, const Dataset&, const TrainOptions&,
                                         std::ostream*);
template std::vector<MetricRecord> train(Model<double>&, const Dataset&, const TrainOptions&,
                                         std::ostream*);
template double evaluate(const Model<float>&, const Dataset&, std::int64_t);
template double evaluate(const Model<double>&, const Dataset&, std::int64_t);

}  // namespace morph
