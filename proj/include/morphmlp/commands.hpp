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
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "morphmlp/gradcheck.hpp"
#include "morphmlp/model.hpp"

namespace morph {

inline constexpr int kExitPass = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitUsage = 2;

struct CommandOptions {
  std::optional<std::filesystem::path> config;
  std::string variant;
  std::optional<std::string> input;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  std::optional<std::int64_t> steps;
  std::optional<std::filesystem::path> out;
  std::optional<std::filesystem::path> checkpoint;
  std::int64_t trials = 50;
  std::int64_t repeats = 5;
  bool all_variants = false;
};

// Published model sizes, in millions of parameters and GMACs at 224 x 224.
struct PublishedRow {
  const char* variant;
  double params_m;
  double gflops;
};
inline constexpr PublishedRow kPublishedRows[] = {
    {"T", 23.0, 3.9}, {"S", 38.0, 7.0}, {"B", 58.0, 10.2}, {"L", 76.0, 12.5}};
inline constexpr double kParamTolerance = 0.07;
inline constexpr double kFlopTolerance = 0.10;

// ---- Oracle agreement ----------------------------------------------------

struct OracleTrial {
  std::string description;
  double max_abs_diff = 0.0;
};

struct OracleDiffReport {
  std::vector<OracleTrial> spatial;
  std::vector<OracleTrial> temporal;
  double max_spatial() const;
  double max_temporal() const;
  bool any_padded = false;
};

/// Optional constraints on the random layers; unset fields are drawn.
struct OracleShape {
  std::optional<std::int64_t> height, width, frames, channels, chunk_len, group_width;
  std::optional<Pathways> pathways;
  std::optional<bool> gate, channel_bias;
};

/// Compares MorphFC and MorphFC_t (f64) against the scalar oracles on
/// `trials` random layers each. The first spatial trial always needs padding.
OracleDiffReport run_oracle_diff(std::int64_t trials, std::uint64_t seed,
                                 const OracleShape& shape = {});

// ---- Gradient checks -----------------------------------------------------

/// One finite-difference report per layer type, plus the end-to-end model.
struct LayerGradCheck {
  std::string layer;
  GradCheckReport report;
};

/// Gradient check of the whole model in `config` on a random batch of two.
GradCheckReport gradcheck_model(const ModelConfig& config, std::uint64_t seed,
                                const GradCheckOptions& options);

/// Every layer type in isolation: each tensor op used by the network,
/// LayerNorm, Linear, Mlp, MorphFC (each pathway, with and without gate),
/// MorphFC_t, patch embedding, downsampling, image and video blocks.
std::vector<LayerGradCheck> gradcheck_layers(std::uint64_t seed, const GradCheckOptions& options);

/// The toy network the end-to-end check defaults to: 2 blocks, C=12, L=4 on
/// an 8x8 input.
ModelConfig gradcheck_toy_config();

// ---- Commands ------------------------------------------------------------
// Each writes a human-readable report to `out` and returns an exit code.

int cmd_count(const CommandOptions& options, std::ostream& out);
int cmd_gradcheck(const CommandOptions& options, std::ostream& out);
int cmd_oracle_diff(const CommandOptions& options, std::ostream& out);
int cmd_train(const CommandOptions& options, std::ostream& out);
int cmd_eval(const CommandOptions& options, std::ostream& out);
int cmd_bench(const CommandOptions& options, std::ostream& out);

}  // namespace morph
