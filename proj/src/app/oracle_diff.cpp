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

#include <algorithm>
#include <cmath>
#include <sstream>

#include "morphmlp/commands.hpp"
#include "morphmlp/morphfc.hpp"
#include "morphmlp/oracle.hpp"

namespace morph {

namespace {

using I = std::int64_t;

I uniform(Rng& rng, I lo, I hi) { return std::uniform_int_distribution<I>(lo, hi)(rng); }

std::vector<I> divisors(I n) {
  std::vector<I> out;
  for (I d = 1; d <= n; ++d)
    if (n % d == 0) out.push_back(d);
  return out;
}

std::vector<double> to_vector(const Tensor<double>& t) {
  if (!t.defined()) return {};
  return {t.data().begin(), t.data().end()};
}

void fill_normal(Tensor<double>& t, Rng& rng) {
  if (!t.defined()) return;
  std::normal_distribution<double> dist(0.0, 1.0);
  for (auto& v : t.mutable_data()) v = dist(rng);
}

double max_abs_diff(std::span<const double> a, const std::vector<double>& b) {
  if (a.size() != b.size()) return INFINITY;
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

Tensor<double> random_input(Shape shape, Rng& rng) {
  Tensor<double> x(std::move(shape));
  fill_normal(x, rng);
  return x;
}

I random_channels(Rng& rng) { return 4 * uniform(rng, 1, 3); }  // 4, 8 or 12

OracleTrial spatial_trial(Rng& rng, const OracleShape& s, bool force_padding) {
  const I c = s.channels.value_or(random_channels(rng));
  I h = s.height.value_or(uniform(rng, 2, 16));
  I w = s.width.value_or(uniform(rng, 2, 16));
  I l = s.chunk_len.value_or(uniform(rng, 1, 8));
  if (force_padding && !s.height && !s.width && !s.chunk_len) {
    h = 5;
    w = 5;
    l = 4;
  }
  I d = s.group_width.value_or(0);
  if (d == 0) {
    const auto options = divisors(c);
    d = options[static_cast<std::size_t>(uniform(rng, 0, static_cast<I>(options.size()) - 1))];
  }
  Pathways p;
  if (s.pathways) {
    p = *s.pathways;
  } else {
    do {
      p = {uniform(rng, 0, 3) > 0, uniform(rng, 0, 3) > 0, uniform(rng, 0, 3) > 0};
    } while (p.count() == 0);
  }
  MorphFCOptions o;
  o.channels = c;
  o.chunk_len = l;
  o.group_width = d;
  o.pathways = p;
  o.gate = s.gate.value_or(uniform(rng, 0, 1) == 1);
  o.channel_bias = s.channel_bias.value_or(uniform(rng, 0, 1) == 1);
  MorphFC<double> layer(o, &rng);
  fill_normal(layer.w_h(), rng);
  fill_normal(layer.w_v(), rng);
  fill_normal(layer.w_c(), rng);
  fill_normal(layer.b_c(), rng);
  fill_normal(layer.gate_logits(), rng);

  const auto x = random_input({h, w, c}, rng);
  oracle::MorphFCWeights weights{l, d, to_vector(layer.w_h()), to_vector(layer.w_v()),
                                 to_vector(layer.w_c()), to_vector(layer.b_c()),
                                 to_vector(layer.gate_logits())};
  const auto expected = oracle::naive_morphfc(to_vector(x), h, w, c, weights);
  const auto got = layer.forward(x);

  std::ostringstream desc;
  desc << "H=" << h << " W=" << w << " C=" << c << " L=" << l << " D=" << d
       << " paths=" << to_string(p) << (o.gate ? " gate" : "") << (o.channel_bias ? " bias" : "")
       << ((h * w) % l != 0 ? " padded" : "");
  return {desc.str(), max_abs_diff(got.data(), expected)};
}

OracleTrial temporal_trial(Rng& rng, const OracleShape& s) {
  const I c = s.channels.value_or(random_channels(rng));
  const I h = s.height.value_or(uniform(rng, 2, 8));
  const I w = s.width.value_or(uniform(rng, 2, 8));
  const I t = s.frames.value_or(uniform(rng, 1, 8));
  I d = s.group_width.value_or(0);
  if (d == 0) {
    const auto options = divisors(c);
    d = options[static_cast<std::size_t>(uniform(rng, 0, static_cast<I>(options.size()) - 1))];
  }
  TemporalFCOptions o;
  o.channels = c;
  o.frames = t;
  o.group_width = d;
  TemporalFC<double> layer(o, &rng);
  fill_normal(layer.w_t(), rng);
  const auto x = random_input({h, w, t, c}, rng);
  const auto expected =
      oracle::naive_morphfc_t(to_vector(x), h, w, t, c, {d, to_vector(layer.w_t())});
  const auto got = layer.forward(x);
  std::ostringstream desc;
  desc << "H=" << h << " W=" << w << " T=" << t << " C=" << c << " D=" << d;
  return {desc.str(), max_abs_diff(got.data(), expected)};
}

double worst(const std::vector<OracleTrial>& trials) {
  double m = 0.0;
  for (const auto& t : trials) m = std::max(m, std::isnan(t.max_abs_diff) ? INFINITY : t.max_abs_diff);
  return m;
}

}  // namespace

double OracleDiffReport::max_spatial() const { return worst(spatial); }
double OracleDiffReport::max_temporal() const { return worst(temporal); }

OracleDiffReport run_oracle_diff(std::int64_t trials, std::uint64_t seed, const OracleShape& shape) {
  if (trials <= 0) throw std::invalid_argument("oracle-diff: trials must be positive");
  Rng rng(seed);
  OracleDiffReport report;
  for (I i = 0; i < trials; ++i) {
    report.spatial.push_back(spatial_trial(rng, shape, i == 0));
    report.any_padded = report.any_padded ||
                        report.spatial.back().description.find("padded") != std::string::npos;
  }
  for (I i = 0; i < trials; ++i) report.temporal.push_back(temporal_trial(rng, shape));
  return report;
}

}  // namespace morph
