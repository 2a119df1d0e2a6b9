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

#include "morphmlp/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <string>

#include "morphmlp/checkpoint.hpp"
#include "morphmlp/config.hpp"
#include "morphmlp/oracle.hpp"
#include "morphmlp/trainer.hpp"

namespace morph {

namespace {

std::string fixed(double value, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, value);
  return buf;
}

std::string sci(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3e", value);
  return buf;
}

std::string signed_pct(double fraction) {
  return (fraction >= 0 ? "+" : "") + fixed(100.0 * fraction, 2) + "%";
}

RunConfig require_config(const CommandOptions& o, const char* command) {
  if (!o.config) throw ConfigError(std::string(command) + ": --config is required");
  return load_config(*o.config);
}

void print_count_row(std::ostream& out, const ModelConfig& c, const InputShape& input) {
  auto sized = c;
  sized.input = input;
  const auto params = count_params(sized);
  const auto macs = count_flops(sized, input);
  out << c.variant << "  input=" << input.str() << "  params=" << params << " ("
      << fixed(params / 1e6, 2) << "M)  MACs=" << macs << " (" << fixed(macs / 1e9, 2) << "G)\n";
}

template <typename T>
int train_with(const RunConfig& config, const CommandOptions& o, std::ostream& out) {
  const auto train_set = make_train_set(config);
  const auto eval_set = make_eval_set(config);
  Model<T> model(config.model, config.train.seed);
  train(model, train_set, config.train, &out);
  out << "train_acc=" << fixed(evaluate(model, train_set), 4)
      << " eval_acc=" << fixed(evaluate(model, eval_set), 4) << '\n';
  if (o.out) {
    save_checkpoint(model.named_parameters(), *o.out);
    out << "checkpoint written to " << o.out->string() << '\n';
  }
  return kExitPass;
}

template <typename T>
int eval_with(const RunConfig& config, const std::filesystem::path& checkpoint, std::ostream& out) {
  Model<T> model(config.model, 0, false);
  auto params = model.named_parameters();
  load_checkpoint(params, checkpoint, true);
  const auto eval_set = make_eval_set(config);
  out << "eval_acc=" << fixed(evaluate(model, eval_set), 4) << " samples=" << eval_set.size()
      << '\n';
  return kExitPass;
}

// MorphFC assembled from convolution references: each chunked pathway is a
// non-shared, stride-L grouped convolution over the padded token scan.
std::vector<double> morphfc_via_conv(const std::vector<double>& x, std::int64_t h, std::int64_t w,
                                     std::int64_t c, std::int64_t l, std::int64_t d,
                                     const std::vector<double>& w_h,
                                     const std::vector<double>& w_v,
                                     const std::vector<double>& w_c) {
  const auto n = h * w, padded = (n + l - 1) / l * l;
  std::vector<double> scan(static_cast<std::size_t>(padded * c), 0.0), out(x.size(), 0.0);
  auto pathway = [&](bool vertical, const std::vector<double>& weight) {
    std::fill(scan.begin(), scan.end(), 0.0);
    for (std::int64_t i = 0; i < h; ++i)
      for (std::int64_t j = 0; j < w; ++j) {
        const auto pos = vertical ? j * h + i : i * w + j;
        std::copy_n(x.begin() + (i * w + j) * c, c, scan.begin() + pos * c);
      }
    const auto y = oracle::conv_equivalent_horizontal(scan, padded, c, l, d, weight);
    for (std::int64_t i = 0; i < h; ++i)
      for (std::int64_t j = 0; j < w; ++j) {
        const auto pos = vertical ? j * h + i : i * w + j;
        for (std::int64_t k = 0; k < c; ++k) out[(i * w + j) * c + k] += y[pos * c + k];
      }
  };
  pathway(false, w_h);
  pathway(true, w_v);
  for (std::int64_t t = 0; t < n; ++t)
    for (std::int64_t i = 0; i < c; ++i) {
      const double xi = x[t * c + i];
      for (std::int64_t k = 0; k < c; ++k) out[t * c + k] += xi * w_c[i * c + k];
    }
  return out;
}

template <typename Fn>
double seconds_per_call(Fn&& fn, std::int64_t repeats) {
  fn();  // warm-up
  const auto start = std::chrono::steady_clock::now();
  for (std::int64_t i = 0; i < repeats; ++i) fn();
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
  return elapsed.count() / static_cast<double>(repeats);
}

}  // namespace

int cmd_count(const CommandOptions& o, std::ostream& out) {
  if (o.all_variants) {
    const InputShape input = o.input ? InputShape::parse(*o.input) : InputShape{};
    out << "variant  params      pub.    dev       GMACs   pub.    dev      status\n";
    bool ok = true;
    for (const auto& row : kPublishedRows) {
      auto c = ModelConfig::published(row.variant);
      c.input = input;
      const double params = static_cast<double>(count_params(c)) / 1e6;
      const double gmacs = static_cast<double>(count_flops(c, input)) / 1e9;
      const double dp = (params - row.params_m) / row.params_m;
      const double df = (gmacs - row.gflops) / row.gflops;
      const bool pass = std::abs(dp) <= kParamTolerance && std::abs(df) <= kFlopTolerance;
      ok = ok && pass;
      out << row.variant << "        " << fixed(params, 2) << "M    " << fixed(row.params_m, 1)
          << "M  " << signed_pct(dp) << "    " << fixed(gmacs, 2) << "    " << fixed(row.gflops, 1)
          << "    " << signed_pct(df) << "   " << (pass ? "ok" : "OUT OF TOLERANCE") << '\n';
    }
    out << "tolerance: params +/-" << fixed(100 * kParamTolerance, 0) << "%, MACs +/-"
        << fixed(100 * kFlopTolerance, 0) << "% (one multiply-accumulate counted as one FLOP)\n";
    if (!input.is_video() && (input.height != 224 || input.width != 224))
      out << "note: the published figures are for 224x224 input\n";
    return ok ? kExitPass : kExitCheckFailed;
  }
  ModelConfig c;
  if (o.config) {
    c = load_config(*o.config).model;
  } else if (!o.variant.empty()) {
    c = ModelConfig::published(o.variant);
  } else {
    throw ConfigError("count: give --variant, --config or --all-variants");
  }
  if (!o.variant.empty() && o.config && c.variant != o.variant && o.variant != "custom")
    throw ConfigError("count: --variant " + o.variant + " conflicts with the config's variant " +
                      c.variant);
  const InputShape input = o.input ? InputShape::parse(*o.input) : c.input;
  print_count_row(out, c, input);
  return kExitPass;
}

int cmd_gradcheck(const CommandOptions& o, std::ostream& out) {
  GradCheckOptions options;
  options.tolerance = o.tol.value_or(1e-5);
  const auto seed = o.seed.value_or(0);
  bool ok = true;
  if (!o.config) {
    for (const auto& layer : gradcheck_layers(seed, options)) {
      out << (layer.report.passed ? "ok    " : "FAIL  ") << layer.layer
          << "  worst rel err " << sci(layer.report.worst_rel_error()) << '\n';
      ok = ok && layer.report.passed;
    }
  }
  const auto config = o.config ? load_config(*o.config).model : gradcheck_toy_config();
  const auto report = gradcheck_model(config, seed, options);
  for (const auto& e : report.entries)
    out << (e.passed ? "ok    " : "FAIL  ") << "model." << e.name << "  rel err "
        << sci(e.max_rel_error) << "  (" << e.checked << " elements)\n";
  ok = ok && report.passed;
  out << (ok ? "PASS" : "FAIL") << ": gradient check at tolerance " << sci(options.tolerance)
      << '\n';
  return ok ? kExitPass : kExitCheckFailed;
}

int cmd_oracle_diff(const CommandOptions& o, std::ostream& out) {
  OracleShape shape;
  if (o.config) {
    const auto c = load_config(*o.config).model;
    const auto& s = c.stages.front();
    const auto grid = c.stage_resolutions().front();
    shape.height = grid.first;
    shape.width = grid.second;
    shape.channels = s.channels;
    shape.chunk_len = s.chunk_len;
    shape.group_width = c.stage_group_width(0);
    shape.pathways = c.pathways;
    shape.gate = c.gate;
    shape.channel_bias = c.channel_bias;
    if (c.input.is_video()) shape.frames = c.embedded_frames();
  }
  const double tol = o.tol.value_or(1e-12);
  const auto report = run_oracle_diff(o.trials, o.seed.value_or(0), shape);
  auto summarize = [&](const char* name, const std::vector<OracleTrial>& trials, double worst) {
    const auto it = std::max_element(trials.begin(), trials.end(), [](const auto& a, const auto& b) {
      return a.max_abs_diff < b.max_abs_diff;
    });
    out << name << ": " << trials.size() << " trials, max abs diff " << sci(worst)
        << " (worst: " << it->description << ")\n";
  };
  summarize("MorphFC  ", report.spatial, report.max_spatial());
  summarize("MorphFC_t", report.temporal, report.max_temporal());
  const bool ok = report.max_spatial() < tol && report.max_temporal() < tol;
  out << (ok ? "PASS" : "FAIL") << ": tolerance " << sci(tol) << '\n';
  return ok ? kExitPass : kExitCheckFailed;
}

int cmd_train(const CommandOptions& o, std::ostream& out) {
  auto config = require_config(o, "train");
  if (o.steps) {
    config.train.steps = *o.steps;
    // A shortened run keeps its warm-up inside the run.
    auto& warmup = config.train.schedule.warmup_steps;
    warmup = std::min(warmup, config.train.steps);
  }
  if (o.seed) config.train.seed = *o.seed;
  return config.double_precision ? train_with<double>(config, o, out)
                                 : train_with<float>(config, o, out);
}

int cmd_eval(const CommandOptions& o, std::ostream& out) {
  const auto config = require_config(o, "eval");
  if (!o.checkpoint) throw ConfigError("eval: --checkpoint is required");
  return config.double_precision ? eval_with<double>(config, *o.checkpoint, out)
                                 : eval_with<float>(config, *o.checkpoint, out);
}

int cmd_bench(const CommandOptions& o, std::ostream& out) {
  std::int64_t h = 14, w = 14, c = 64, l = 7;
  if (o.config) {
    const auto cfg = load_config(*o.config).model;
    const auto grid = cfg.stage_resolutions().front();
    h = grid.first;
    w = grid.second;
    c = cfg.stages.front().channels;
    l = cfg.stages.front().chunk_len;
  }
  if (o.input) {
    const auto in = InputShape::parse(*o.input);
    h = in.height;
    w = in.width;
  }
  const auto d = derive_group_width(c, l);
  const auto repeats = std::max<std::int64_t>(1, o.repeats);
  Rng rng(o.seed.value_or(0));
  MorphFCOptions options;
  options.channels = c;
  options.chunk_len = l;
  options.group_width = d;
  MorphFC<double> layer(options, &rng);
  Tensor<double> x({1, h, w, c});
  std::normal_distribution<double> dist(0.0, 1.0);
  for (auto& v : x.mutable_data()) v = dist(rng);
  const std::vector<double> xs(x.data().begin(), x.data().end());
  const std::vector<double> w_h(layer.w_h().data().begin(), layer.w_h().data().end());
  const std::vector<double> w_v(layer.w_v().data().begin(), layer.w_v().data().end());
  const std::vector<double> w_c(layer.w_c().data().begin(), layer.w_c().data().end());
  std::vector<double> kernel(static_cast<std::size_t>(9 * c * c));
  for (auto& v : kernel) v = dist(rng);

  NoGradGuard no_grad;
  const double t_fast = seconds_per_call([&] { (void)layer.forward(x); }, repeats);
  const double t_conv = seconds_per_call(
      [&] { (void)morphfc_via_conv(xs, h, w, c, l, d, w_h, w_v, w_c); }, repeats);
  const double t_3x3 =
      seconds_per_call([&] { (void)oracle::conv2d_reference(xs, h, w, c, c, 3, kernel); }, repeats);

  out << "shape H=" << h << " W=" << w << " C=" << c << " L=" << l << " D=" << d
      << ", f64, 1 thread, " << repeats << " repeats\n";
  out << "layer                       ms/call    calls/s    relative\n";
  auto row = [&](const char* name, double t) {
    out << name << fixed(1e3 * t, 3) << "    " << fixed(1.0 / t, 1) << "    "
        << fixed(t / t_fast, 2) << "x\n";
  };
  row("MorphFC (tensor engine)     ", t_fast);
  row("MorphFC via grouped conv    ", t_conv);
  row("3x3 conv, C -> C            ", t_3x3);
  out << "informational only; timings depend on the host\n";
  return kExitPass;
}

}  // namespace morph
