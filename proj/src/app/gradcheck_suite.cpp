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

#include <functional>

#include "morphmlp/blocks.hpp"
#include "morphmlp/commands.hpp"
#include "morphmlp/loss.hpp"
#include "morphmlp/ops.hpp"

namespace morph {

namespace {

using D = double;
using Fn = std::function<Tensor<D>()>;

Tensor<D> leaf(Shape shape, Rng& rng, double scale = 1.0) {
  Tensor<D> t(std::move(shape), true);
  std::normal_distribution<double> dist(0.0, scale);
  for (auto& v : t.mutable_data()) v = dist(rng);
  return t;
}

void randomize(ParamList<D>& params, Rng& rng, double scale = 0.5) {
  std::normal_distribution<double> dist(0.0, scale);
  for (auto& [name, p] : params)
    for (auto& v : p.mutable_data()) v = dist(rng);
}

// Reduces an output to a scalar through fixed random weights, so that every
// output element contributes with a distinct coefficient.
Tensor<D> project(const Tensor<D>& y, const Tensor<D>& r) { return sum_all(mul(y, r)); }

Tensor<D> probe_for(const Shape& shape, Rng& rng) {
  Tensor<D> r(shape);
  std::normal_distribution<double> dist(0.0, 1.0);
  for (auto& v : r.mutable_data()) v = dist(rng);
  return r;
}

class Suite {
 public:
  Suite(std::uint64_t seed, const GradCheckOptions& options) : rng_(seed), options_(options) {}

  Rng& rng() { return rng_; }

  // `forward` maps the inputs to an output tensor; the suite projects it.
  void check(const std::string& name, const std::function<Tensor<D>()>& forward,
             std::vector<NamedTensor> params) {
    Tensor<D> r;
    {
      NoGradGuard guard;
      r = probe_for(forward().shape(), rng_);
    }
    results_.push_back({name, finite_diff_check([&] { return project(forward(), r); },
                                                std::move(params), options_)});
  }

  void check_scalar(const std::string& name, const Fn& loss, std::vector<NamedTensor> params) {
    results_.push_back({name, finite_diff_check(loss, std::move(params), options_)});
  }

  std::vector<LayerGradCheck> take() { return std::move(results_); }

 private:
  Rng rng_;
  GradCheckOptions options_;
  std::vector<LayerGradCheck> results_;
};

void add_op_checks(Suite& s) {
  auto& g = s.rng();
  {
    auto a = leaf({3, 4}, g), b = leaf({4, 5}, g);
    s.check("op.matmul", [=] { return matmul(a, b); }, {{"a", a}, {"b", b}});
  }
  {
    auto x = leaf({2, 3, 4}, g), w = leaf({4, 5}, g), b = leaf({5}, g);
    s.check("op.linear", [=] { return linear(x, w, b); }, {{"x", x}, {"w", w}, {"b", b}});
  }
  {
    auto a = leaf({2, 3, 4}, g), b = leaf({3, 4}, g);
    s.check("op.add", [=] { return add(a, b); }, {{"a", a}, {"b", b}});
    s.check("op.sub", [=] { return sub(a, b); }, {{"a", a}, {"b", b}});
    s.check("op.mul", [=] { return mul(a, b); }, {{"a", a}, {"b", b}});
    s.check("op.scale", [=] { return scale(a, 1.7); }, {{"a", a}});
    s.check("op.scale_leading", [=] { return scale_leading(a, std::vector<D>{0.5, -2.0}); },
            {{"a", a}});
    s.check("op.mean_over_axes", [=] { return mean_over_axes(a, {1}); }, {{"a", a}});
    s.check("op.gelu", [=] { return gelu(a); }, {{"a", a}});
    s.check("op.softmax_last", [=] { return softmax_last(a); }, {{"a", a}});
    s.check("op.log_softmax_last", [=] { return log_softmax_last(a); }, {{"a", a}});
    s.check("op.reshape", [=] { return reshape(a, {6, 4}); }, {{"a", a}});
    s.check("op.permute", [=] { return permute(a, {2, 0, 1}); }, {{"a", a}});
    s.check("op.slice", [=] { return slice(a, 1, 1, 2); }, {{"a", a}});
    s.check("op.concat", [=] { return concat<D>({a, a}, 2); }, {{"a", a}});
    s.check("op.gather", [=] { return gather(a, {5, -1, 0, 23, 5, 7}, {2, 3}); }, {{"a", a}});
    s.check_scalar("op.sum_all", [=] { return sum_all(mul(a, a)); }, {{"a", a}});
    s.check_scalar("op.mean_all", [=] { return mean_all(mul(a, a)); }, {{"a", a}});
  }
  {
    auto x = leaf({3, 6}, g), gamma = leaf({6}, g), beta = leaf({6}, g);
    s.check("op.layer_norm", [=] { return layer_norm(x, gamma, beta); },
            {{"x", x}, {"gamma", gamma}, {"beta", beta}});
  }
  {
    auto logits = leaf({4, 3}, g);
    const std::vector<std::int32_t> labels{0, 2, 1, 2};
    s.check_scalar("loss.cross_entropy",
                   [=] { return cross_entropy(logits, labels, 0.1); }, {{"logits", logits}});
  }
}

template <typename Layer>
std::vector<NamedTensor> params_of(const Layer& layer, const Tensor<D>& x, Rng& rng) {
  ParamList<D> p;
  layer.collect_params("", p);
  randomize(p, rng);
  p.emplace_back("input", x);
  return p;
}

void add_layer_checks(Suite& s) {
  auto& g = s.rng();
  {
    LayerNorm<D> ln(6);
    auto x = leaf({2, 3, 6}, g);
    s.check("layer_norm", [=] { return ln.forward(x); }, params_of(ln, x, g));
  }
  {
    Linear<D> fc(5, 4, true, &g);
    auto x = leaf({3, 5}, g);
    s.check("linear", [=] { return fc.forward(x); }, params_of(fc, x, g));
  }
  {
    Mlp<D> mlp(4, 3, &g);
    auto x = leaf({2, 3, 4}, g);
    s.check("mlp", [=] { return mlp.forward(x); }, params_of(mlp, x, g));
  }
  struct Case {
    const char* name;
    std::int64_t h, w, c, l;
    const char* paths;
    bool gate, bias;
  };
  for (const auto& k : {Case{"morphfc.horizontal", 3, 4, 6, 4, "h", false, false},
                        Case{"morphfc.vertical", 4, 3, 6, 4, "v", false, false},
                        Case{"morphfc.channel", 3, 3, 6, 4, "c", false, true},
                        Case{"morphfc.sum", 4, 4, 8, 4, "hwc", false, true},
                        Case{"morphfc.gated", 4, 4, 8, 4, "hwc", true, true},
                        Case{"morphfc.padded", 5, 5, 4, 4, "hwc", true, false}}) {
    MorphFCOptions o;
    o.channels = k.c;
    o.chunk_len = k.l;
    o.pathways = parse_pathways(k.paths);
    o.gate = k.gate;
    o.channel_bias = k.bias;
    MorphFC<D> layer(o, &g);
    auto x = leaf({2, k.h, k.w, k.c}, g);
    s.check(k.name, [=] { return layer.forward(x); }, params_of(layer, x, g));
  }
  {
    TemporalFC<D> layer({6, 4, 0}, &g);
    auto x = leaf({2, 2, 3, 4, 6}, g);
    s.check("morphfc_t", [=] { return layer.forward(x); }, params_of(layer, x, g));
  }
  {
    PatchEmbed<D> embed(3, 5, 2, 0, &g);
    auto x = leaf({2, 4, 4, 3}, g);
    s.check("patch_embed.image", [=] { return embed.forward(x); }, params_of(embed, x, g));
  }
  {
    PatchEmbed<D> embed(2, 4, 2, 2, &g);
    auto x = leaf({1, 4, 2, 3, 2}, g);  // odd frame count: last frame repeated
    s.check("patch_embed.video", [=] { return embed.forward(x); }, params_of(embed, x, g));
  }
  {
    Downsample<D> down(3, 5, &g);
    auto x = leaf({2, 4, 4, 3}, g);
    s.check("downsample.image", [=] { return down.forward(x); }, params_of(down, x, g));
    auto v = leaf({1, 4, 2, 3, 3}, g);
    s.check("downsample.video", [=] { return down.forward(v); }, params_of(down, v, g));
  }
  {
    ImageBlockOptions o;
    o.morphfc.channels = 8;
    o.morphfc.chunk_len = 4;
    o.morphfc.gate = true;
    o.mlp_ratio = 2;
    ImageBlock<D> block(o, &g);
    auto x = leaf({2, 3, 4, 8}, g);
    s.check("image_block", [=] { return block.forward(x); }, params_of(block, x, g));
  }
  for (auto wiring : {VideoWiring::parallel, VideoWiring::ts_standard, VideoWiring::st_standard,
                      VideoWiring::ts_skip, VideoWiring::st_skip}) {
    VideoBlockOptions o;
    o.morphfc.channels = 6;
    o.morphfc.chunk_len = 2;
    o.temporal = {6, 3, 0};
    o.mlp_ratio = 2;
    o.wiring = wiring;
    VideoBlock<D> block(o, &g);
    auto x = leaf({1, 2, 2, 3, 6}, g);
    s.check("video_block." + to_string(wiring), [=] { return block.forward(x); },
            params_of(block, x, g));
  }
  {
    // Drop path in training mode; the generator is re-seeded on every call
    // so the sampled mask is the same across finite-difference evaluations.
    auto x = leaf({6, 2, 3}, g);
    s.check("drop_path", [=] {
      Rng mask_rng(17);
      return drop_path(x, 0.4, ForwardContext{true, &mask_rng});
    }, {{"input", x}});
  }
}

}  // namespace

ModelConfig gradcheck_toy_config() {
  ModelConfig c;
  c.variant = "custom";
  c.stages = {{2, 12, 4, 0}};
  c.num_classes = 3;
  c.input = {8, 8, 0};
  return c;
}

GradCheckReport gradcheck_model(const ModelConfig& config, std::uint64_t seed,
                                const GradCheckOptions& options) {
  Model<D> model(config, seed);
  Rng rng(seed + 1);
  auto params = model.named_parameters();
  randomize(params, rng, 0.3);
  Shape shape{2, config.input.height, config.input.width};
  if (config.input.is_video()) shape.push_back(config.input.frames);
  shape.push_back(config.in_channels);
  Tensor<D> x(shape);
  std::normal_distribution<double> dist(0.0, 1.0);
  for (auto& v : x.mutable_data()) v = dist(rng);
  std::vector<std::int32_t> labels;
  for (std::int64_t i = 0; i < 2; ++i)
    labels.push_back(static_cast<std::int32_t>(i % config.num_classes));
  return finite_diff_check([&] { return cross_entropy(model.forward(x), labels); },
                           std::move(params), options);
}

std::vector<LayerGradCheck> gradcheck_layers(std::uint64_t seed, const GradCheckOptions& options) {
  Suite suite(seed, options);
  add_op_checks(suite);
  add_layer_checks(suite);
  return suite.take();
}

}  // namespace morph
