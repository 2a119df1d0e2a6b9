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

#include <iostream>

#include "CLI11.hpp"
#include "morphmlp/checkpoint.hpp"
#include "morphmlp/commands.hpp"
#include "morphmlp/config.hpp"

namespace {

using morph::CommandOptions;

void add_config(CLI::App* cmd, CommandOptions& o) {
  cmd->add_option("--config", o.config, "Run configuration file")->check(CLI::ExistingFile);
}

void add_seed(CLI::App* cmd, CommandOptions& o) {
  cmd->add_option("--seed", o.seed, "Random seed");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MorphMLP reference implementation: counting, verification and toy training"};
  app.require_subcommand(1);
  CommandOptions o;

  auto* count = app.add_subcommand("count", "Parameter and multiply-accumulate counts");
  add_config(count, o);
  count->add_option("--variant", o.variant, "Published variant")
      ->check(CLI::IsMember({"T", "S", "B", "L", "custom"}));
  count->add_option("--input", o.input, "Input size: 224, HxW or HxWxT");
  count->add_flag("--all-variants", o.all_variants,
                  "Compare the four published variants with the published figures");

  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference gradient checks");
  add_config(gradcheck, o);
  add_seed(gradcheck, o);
  gradcheck->add_option("--tol", o.tol, "Relative error tolerance (default 1e-5)");

  auto* oracle = app.add_subcommand("oracle-diff", "Compare MorphFC layers with scalar oracles");
  add_config(oracle, o);
  add_seed(oracle, o);
  oracle->add_option("--tol", o.tol, "Max abs difference tolerance (default 1e-12)");
  oracle->add_option("--trials", o.trials, "Random layers per layer type")
      ->check(CLI::PositiveNumber);

  auto* train = app.add_subcommand("train", "Train a model described by a config file");
  add_config(train, o);
  add_seed(train, o);
  train->add_option("--steps", o.steps, "Override the number of steps")
      ->check(CLI::PositiveNumber);
  train->add_option("--out", o.out, "Write a checkpoint here when training ends");

  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on the held-out set");
  add_config(eval, o);
  eval->add_option("--checkpoint", o.checkpoint, "Checkpoint file")->check(CLI::ExistingFile);

  auto* bench = app.add_subcommand("bench", "Time MorphFC against convolution references");
  add_config(bench, o);
  add_seed(bench, o);
  bench->add_option("--input", o.input, "Token grid HxW (default 14x14)");
  bench->add_option("--repeats", o.repeats, "Timed calls per layer")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? morph::kExitPass : morph::kExitUsage;
  }

  try {
    if (*count) return morph::cmd_count(o, std::cout);
    if (*gradcheck) return morph::cmd_gradcheck(o, std::cout);
    if (*oracle) return morph::cmd_oracle_diff(o, std::cout);
    if (*train) return morph::cmd_train(o, std::cout);
    if (*eval) return morph::cmd_eval(o, std::cout);
    if (*bench) return morph::cmd_bench(o, std::cout);
  } catch (const morph::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return morph::kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return morph::kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return morph::kExitCheckFailed;
  }
  return morph::kExitUsage;
}
