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

// Run configuration files.
//
// Grammar: one `key = value` per line, grouped under `[model]`, `[train]`
// and `[data]` section headers; lines starting with ';' are comments.
// Lists are comma separated. Unknown sections or keys are rejected so that
// a misspelt ablation setting cannot silently fall back to a default.
//
//   [model]
//   variant = custom        ; T, S, B, L or custom
//   input = 16x16           ; HxW or HxWxT
//   depths = 2
//   channels = 16
//   chunk_lens = 4

#pragma once

#include <filesystem>
#include <istream>
#include <stdexcept>
#include <string>

#include "morphmlp/dataset.hpp"
#include "morphmlp/model.hpp"
#include "morphmlp/trainer.hpp"

namespace morph {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DataConfig {
  std::string source = "synthetic";  // "synthetic" or "file"
  SynthOptions synth;                // input shape follows [model] input
  std::int64_t eval_size = 256;
  std::uint64_t eval_seed = 1;
  std::filesystem::path path;       // source = file
  std::filesystem::path eval_path;  // optional held-out file
};

struct RunConfig {
  ModelConfig model;
  TrainOptions train;
  DataConfig data;
  bool double_precision = false;  // [train] dtype = f64
};

RunConfig parse_config(std::istream& in, const std::string& origin = "<config>");
RunConfig load_config(const std::filesystem::path& path);

/// Builds the training and held-out datasets described by `config.data`.
Dataset make_train_set(const RunConfig& config);
Dataset make_eval_set(const RunConfig& config);

}  // namespace morph
