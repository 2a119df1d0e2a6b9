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

#include <gtest/gtest.h>

#include "morphmlp/morphfc.hpp"
#include "morphmlp/ops.hpp"
#include "morphmlp/oracle.hpp"
#include "support.hpp"

namespace morph {
namespace {

using testing::Gen;
using testing::bitwise_equal;
using testing::max_abs_diff;
using testing::to_vector;
using TD = Tensor<double>;

void set_identity(TD& w) {
  auto v = w.mutable_data();
  std::fill(v.begin(), v.end(), 0.0);
  const auto n = w.dim(0);
  for (std::int64_t i = 0; i < n; ++i) v[i * n + i] = 1.0;
}

void randomize(TD& t, Gen& g) {
  if (!t.defined()) return;
  for (auto& v : t.mutable_data()) v = g.normal();
}

MorphFC<double> make_layer(std::int64_t c, std::int64_t l, std::int64_t d, Gen& g,
                           bool gate = false, bool bias = false) {
  MorphFCOptions o;
  o.channels = c;
  o.chunk_len = l;
  o.group_width = d;
  o.gate = gate;
  o.channel_bias = bias;
  MorphFC<double> layer(o, &g.rng());
  randomize(layer.w_h(), g);
  randomize(layer.w_v(), g);
  randomize(layer.w_c(), g);
  randomize(layer.b_c(), g);
  randomize(layer.gate_logits(), g);
  return layer;
}

oracle::MorphFCWeights oracle_weights(MorphFC<double>& layer, std::int64_t d) {
  auto vec = [](const TD& t) { return t.defined() ? to_vector(t) : std::vector<double>{}; };
  return {layer.options().chunk_len, d, vec(layer.w_h()), vec(layer.w_v()),
          vec(layer.w_c()), vec(layer.b_c()), vec(layer.gate_logits())};
}

TEST(ChunkPlanTest, PublishedStageExtents) {
  EXPECT_EQ(ChunkPlan::spatial(Direction::horizontal, 56, 56, 84, 14, 6).num_chunks, 224);
  const auto last = ChunkPlan::spatial(Direction::horizontal, 7, 7, 588, 49, 12);
  EXPECT_EQ(last.num_chunks, 1);
  EXPECT_EQ(last.pad_len, 0);
  const auto padded = ChunkPlan::spatial(Direction::vertical, 5, 5, 4, 4, 2);
  EXPECT_EQ(padded.num_chunks, 7);
  EXPECT_EQ(padded.pad_len, 3);
}

TEST(ChunkTest, SplitShapeIsChunksByGroupsByChunkSize) {
  Gen g(1);
  const auto plan = ChunkPlan::spatial(Direction::horizontal, 4, 6, 8, 3, 2);
  auto chunks = chunk_split(g.tensor({4, 6, 8}), plan);
  EXPECT_EQ(chunks.shape(), (Shape{8, 4, 6}));
  auto batched = chunk_split(g.tensor({2, 4, 6, 8}), plan);
  EXPECT_EQ(batched.shape(), (Shape{2, 8, 4, 6}));
}

TEST(ChunkTest, RoundTripLargeChunks) {
  Gen g(2);
  auto x = g.tensor({14, 14, 8});
  for (auto dir : {Direction::horizontal, Direction::vertical}) {
    const auto plan = ChunkPlan::spatial(dir, 14, 14, 8, 28, 4);
    EXPECT_TRUE(bitwise_equal(chunk_merge(chunk_split(x, plan), plan), x));
  }
}

TEST(ChunkTest, RoundTripPadded) {
  Gen g(3);
  auto x = g.tensor({5, 5, 4});
  for (auto dir : {Direction::horizontal, Direction::vertical}) {
    const auto plan = ChunkPlan::spatial(dir, 5, 5, 4, 4, 2);
    auto chunks = chunk_split(x, plan);
    EXPECT_EQ(chunks.dim(0), 7);
    EXPECT_TRUE(bitwise_equal(chunk_merge(chunks, plan), x));
  }
}

TEST(ChunkTest, RoundTripVerticalNonSquare) {
  Gen g(4);
  auto x = g.tensor({8, 4, 2});
  const auto plan = ChunkPlan::spatial(Direction::vertical, 8, 4, 2, 4, 1);
  EXPECT_TRUE(bitwise_equal(chunk_merge(chunk_split(x, plan), plan), x));
}

TEST(ChunkTest, RoundTripTemporal) {
  Gen g(5);
  auto x = g.tensor({2, 3, 3, 4, 6});
  const auto plan = ChunkPlan::temporal(3, 3, 4, 6, 3);
  EXPECT_TRUE(bitwise_equal(chunk_merge(chunk_split(x, plan), plan), x));
}

TEST(ChunkTest, RoundTripProperty) {
  Gen g(6);
  for (int trial = 0; trial < 30; ++trial) {
    const auto h = g.range(1, 9), w = g.range(1, 9), c = 4 * g.range(1, 3);
    const auto l = g.range(1, 10), d = g.divisor_of(c);
    const auto dir = g.coin() ? Direction::horizontal : Direction::vertical;
    auto x = g.tensor({h, w, c});
    const auto plan = ChunkPlan::spatial(dir, h, w, c, l, d);
    EXPECT_TRUE(bitwise_equal(chunk_merge(chunk_split(x, plan), plan), x));
  }
}

TEST(ChunkTest, ScanOrderAndTokenMajorLayout) {
  // 2x3 map, one channel: horizontal scans rows, vertical scans columns.
  TD x({2, 3, 1}, {0, 1, 2, 3, 4, 5});
  const auto h = chunk_split(x, ChunkPlan::spatial(Direction::horizontal, 2, 3, 1, 2, 1));
  EXPECT_EQ(to_vector(h), (std::vector<double>{0, 1, 2, 3, 4, 5}));
  const auto v = chunk_split(x, ChunkPlan::spatial(Direction::vertical, 2, 3, 1, 2, 1));
  EXPECT_EQ(to_vector(v), (std::vector<double>{0, 3, 1, 4, 2, 5}));
  // Two tokens with two channels in one group: element j*D + d.
  TD y({1, 2, 2}, {10, 11, 20, 21});
  const auto t = chunk_split(y, ChunkPlan::spatial(Direction::horizontal, 1, 2, 2, 2, 2));
  EXPECT_EQ(to_vector(t), (std::vector<double>{10, 11, 20, 21}));
}

TEST(GroupWidthTest, PublishedAndFallbackValues) {
  EXPECT_EQ(derive_group_width(112, 14), 8);
  EXPECT_EQ(derive_group_width(588, 49), 12);
  EXPECT_EQ(derive_group_width(100, 7), 10);
  EXPECT_EQ(derive_group_width(84, 56), 1);
  EXPECT_EQ(group_width_for(GroupRule::c_over_2l, 84, 14), 3);
  EXPECT_EQ(group_width_for(GroupRule::two_c_over_l, 84, 14), 12);
  EXPECT_EQ(parse_group_rule("C/2L"), GroupRule::c_over_2l);
  EXPECT_THROW(parse_group_rule("C/3L"), std::invalid_argument);
}

TEST(GroupWidthTest, AlwaysDividesChannels) {
  for (std::int64_t c = 1; c <= 64; ++c)
    for (std::int64_t l = 1; l <= 20; ++l) EXPECT_EQ(c % derive_group_width(c, l), 0);
}

TEST(MorphFCTest, IdentityPathwaysTripleInput) {
  Gen g(7);
  auto layer = make_layer(8, 4, 2, g, false, true);
  set_identity(layer.w_h());
  set_identity(layer.w_v());
  set_identity(layer.w_c());
  std::fill(layer.b_c().mutable_data().begin(), layer.b_c().mutable_data().end(), 0.0);
  auto x = g.tensor({5, 6, 8});
  auto y = layer.forward(x);
  for (std::size_t i = 0; i < y.data().size(); ++i) EXPECT_EQ(y.data()[i], 3.0 * x.data()[i]);
}

TEST(MorphFCTest, EqualGateLogitsWithIdentityWeightsReturnInput) {
  Gen g(8);
  auto layer = make_layer(8, 4, 2, g, true, false);
  set_identity(layer.w_h());
  set_identity(layer.w_v());
  set_identity(layer.w_c());
  std::fill(layer.gate_logits().mutable_data().begin(), layer.gate_logits().mutable_data().end(),
            0.7);
  auto x = g.tensor({4, 4, 8});
  EXPECT_LT(max_abs_diff(layer.forward(x).data(), x.data()), 1e-15);
}

TEST(MorphFCTest, GateIsConvexPerChannel) {
  Gen g(9);
  auto layer = make_layer(6, 3, 2, g, true);
  const auto w = layer.gate_weights();
  ASSERT_EQ(w.shape(), (Shape{6, 3}));
  for (int c = 0; c < 6; ++c) {
    double s = 0.0;
    for (int p = 0; p < 3; ++p) {
      EXPECT_GE(w.data()[c * 3 + p], 0.0);
      s += w.data()[c * 3 + p];
    }
    EXPECT_NEAR(s, 1.0, 1e-15);
  }
}

TEST(MorphFCTest, FreshGateStartsUniform) {
  Gen g(10);
  MorphFCOptions o;
  o.channels = 8;
  o.chunk_len = 4;
  o.group_width = 0;
  o.gate = true;
  MorphFC<double> layer(o, &g.rng());
  const auto weights = layer.gate_weights();
  for (double v : weights.data()) EXPECT_DOUBLE_EQ(v, 1.0 / 3.0);
}

TEST(MorphFCTest, ParameterCountClosedForm) {
  Gen g(11);
  MorphFCOptions o;
  o.channels = 8;
  o.chunk_len = 4;
  o.group_width = 2;
  o.channel_bias = true;
  MorphFC<double> layer(o, &g.rng());
  EXPECT_EQ(layer.param_count(), 200);
  ParamList<double> params;
  layer.collect_params("", params);
  std::int64_t total = 0;
  for (const auto& [name, p] : params) total += p.numel();
  EXPECT_EQ(total, 200);
}

TEST(MorphFCTest, HorizontalAndVerticalAreDistinctParameters) {
  Gen g(12);
  auto layer = make_layer(4, 2, 2, g);
  EXPECT_NE(layer.w_h().node().get(), layer.w_v().node().get());
  auto x = g.tensor({3, 3, 4});
  EXPECT_GT(max_abs_diff(layer.horizontal(x).data(), layer.vertical(x).data()), 1e-3);
}

TEST(MorphFCTest, WithoutGateOutputIsPlainSum) {
  Gen g(13);
  auto layer = make_layer(8, 4, 2, g, false, true);
  auto x = g.tensor({4, 5, 8});
  auto sum = add(add(layer.horizontal(x), layer.vertical(x)), layer.channel(x));
  EXPECT_LT(max_abs_diff(layer.forward(x).data(), sum.data()), 1e-15);
}

TEST(MorphFCTest, ParameterCountIndependentOfInputSize) {
  Gen g(14);
  MorphFCOptions o;
  o.channels = 64;
  o.chunk_len = 14;
  o.group_width = 0;
  MorphFC<double> layer(o, &g.rng());
  EXPECT_EQ(layer.param_count(), 2 * (14 * 4) * (14 * 4) + 64 * 64);
  EXPECT_NE(layer.macs(56, 56), layer.macs(112, 112));
  // The same layer runs at either resolution.
  EXPECT_EQ(layer.forward(g.tensor({8, 8, 64})).shape(), (Shape{8, 8, 64}));
  EXPECT_EQ(layer.forward(g.tensor({16, 16, 64})).shape(), (Shape{16, 16, 64}));
}

TEST(MorphFCTest, MatchesOracleOnSpecExample) {
  Gen g(15);
  auto layer = make_layer(4, 4, 2, g);
  auto x = g.tensor({8, 8, 4});
  const auto expected = oracle::naive_morphfc(to_vector(x), 8, 8, 4, oracle_weights(layer, 2));
  EXPECT_LT(max_abs_diff(layer.forward(x).data(), expected), 1e-12);
}

TEST(MorphFCTest, MatchesOracleOnRandomConfigs) {
  Gen g(16);
  for (int trial = 0; trial < 50; ++trial) {
    const auto h = g.range(2, 16), w = g.range(2, 16), c = 4 * g.range(1, 3);
    const auto l = g.range(1, 8), d = g.divisor_of(c);
    auto layer = make_layer(c, l, d, g, g.coin(), g.coin());
    auto x = g.tensor({h, w, c});
    const auto expected = oracle::naive_morphfc(to_vector(x), h, w, c, oracle_weights(layer, d));
    EXPECT_LT(max_abs_diff(layer.forward(x).data(), expected), 1e-12)
        << h << "x" << w << "x" << c << " L=" << l << " D=" << d;
  }
}

TEST(MorphFCTest, BatchedForwardMatchesPerSample) {
  Gen g(17);
  auto layer = make_layer(8, 4, 2, g, true, true);
  auto x = g.tensor({3, 5, 5, 8});
  auto y = layer.forward(x);
  for (std::int64_t b = 0; b < 3; ++b) {
    auto one = layer.forward(reshape(slice(x, 0, b, 1), {5, 5, 8}));
    EXPECT_TRUE(std::equal(one.data().begin(), one.data().end(), y.data().begin() + b * 200));
  }
}

TEST(MorphFCTest, RejectsWrongChannelCount) {
  Gen g(18);
  auto layer = make_layer(8, 4, 2, g);
  EXPECT_THROW(layer.forward(g.tensor({4, 4, 6})), ShapeError);
  MorphFCOptions bad;
  bad.channels = 8;
  bad.chunk_len = 4;
  bad.group_width = 3;
  EXPECT_THROW(MorphFC<double>(bad, &g.rng()), ShapeError);
}

// Locality: perturbing tokens outside a chunk leaves that chunk's pathway
// output bitwise unchanged.
void check_spatial_locality(Direction dir, std::uint64_t seed) {
  Gen g(seed);
  for (int trial = 0; trial < 20; ++trial) {
    const auto h = g.range(2, 8), w = g.range(2, 8), c = 4 * g.range(1, 2);
    const auto l = g.range(2, 6), d = g.divisor_of(c);
    auto layer = make_layer(c, l, d, g);
    auto x = g.tensor({h, w, c});
    const auto n = h * w;
    // Scan position of every token, and the chunk it falls in.
    auto scan_pos = [&](std::int64_t i, std::int64_t j) {
      return dir == Direction::horizontal ? i * w + j : j * h + i;
    };
    const auto target_chunk = g.range(0, (n - 1) / l);
    auto x2 = x.detach();
    auto values = x2.mutable_data();
    for (std::int64_t i = 0; i < h; ++i)
      for (std::int64_t j = 0; j < w; ++j)
        if (scan_pos(i, j) / l != target_chunk)
          for (std::int64_t k = 0; k < c; ++k) values[(i * w + j) * c + k] += g.normal();
    auto path = [&](const TD& in) {
      return dir == Direction::horizontal ? layer.horizontal(in) : layer.vertical(in);
    };
    const auto y1 = path(x), y2 = path(x2);
    bool changed_outside = false;
    for (std::int64_t i = 0; i < h; ++i)
      for (std::int64_t j = 0; j < w; ++j)
        for (std::int64_t k = 0; k < c; ++k) {
          const auto o = (i * w + j) * c + k;
          if (scan_pos(i, j) / l == target_chunk) {
            ASSERT_EQ(y1.data()[o], y2.data()[o]);
          } else {
            changed_outside = changed_outside || y1.data()[o] != y2.data()[o];
          }
        }
    if (n > l) {
      EXPECT_TRUE(changed_outside);
    }
  }
}

TEST(LocalityTest, Horizontal) { check_spatial_locality(Direction::horizontal, 19); }
TEST(LocalityTest, Vertical) { check_spatial_locality(Direction::vertical, 20); }

TEST(LocalityTest, Temporal) {
  Gen g(21);
  for (int trial = 0; trial < 20; ++trial) {
    const auto h = g.range(1, 4), w = g.range(1, 4), t = g.range(1, 5), c = std::int64_t{6};
    TemporalFC<double> layer({c, t, g.divisor_of(c)}, &g.rng());
    randomize(layer.w_t(), g);
    auto x = g.tensor({h, w, t, c});
    const auto si = g.range(0, h - 1), sj = g.range(0, w - 1);
    auto x2 = x.detach();
    auto v = x2.mutable_data();
    for (std::int64_t f = 0; f < t; ++f)
      for (std::int64_t k = 0; k < c; ++k) v[((si * w + sj) * t + f) * c + k] += 1.0 + g.normal();
    const auto y1 = layer.forward(x), y2 = layer.forward(x2);
    for (std::int64_t i = 0; i < h; ++i)
      for (std::int64_t j = 0; j < w; ++j)
        for (std::int64_t q = 0; q < t * c; ++q) {
          const auto o = (i * w + j) * t * c + q;
          if (i != si || j != sj) {
            ASSERT_EQ(y1.data()[o], y2.data()[o]);
          }
        }
  }
}

TEST(TemporalFCTest, IdentityWeightsReturnInput) {
  Gen g(22);
  TemporalFC<double> layer({6, 4, 3}, &g.rng());
  set_identity(layer.w_t());
  auto x = g.tensor({2, 3, 4, 6});
  EXPECT_TRUE(bitwise_equal(layer.forward(x), x));
}

TEST(TemporalFCTest, MatchesOracleOnSpecExample) {
  Gen g(23);
  TemporalFC<double> layer({6, 4, 3}, &g.rng());
  randomize(layer.w_t(), g);
  auto x = g.tensor({4, 4, 4, 6});
  const auto expected =
      oracle::naive_morphfc_t(to_vector(x), 4, 4, 4, 6, {3, to_vector(layer.w_t())});
  EXPECT_LT(max_abs_diff(layer.forward(x).data(), expected), 1e-12);
}

TEST(TemporalFCTest, MatchesOracleOnRandomConfigs) {
  Gen g(24);
  for (int trial = 0; trial < 50; ++trial) {
    const auto h = g.range(2, 6), w = g.range(2, 6), t = g.range(1, 8), c = 4 * g.range(1, 3);
    const auto d = g.divisor_of(c);
    TemporalFC<double> layer({c, t, d}, &g.rng());
    randomize(layer.w_t(), g);
    auto x = g.tensor({h, w, t, c});
    const auto expected =
        oracle::naive_morphfc_t(to_vector(x), h, w, t, c, {d, to_vector(layer.w_t())});
    EXPECT_LT(max_abs_diff(layer.forward(x).data(), expected), 1e-12);
  }
}

TEST(TemporalFCTest, SingleFrameIsPerPositionGroupMixing) {
  Gen g(25);
  TemporalFC<double> layer({6, 1, 2}, &g.rng());
  randomize(layer.w_t(), g);
  auto x = g.tensor({3, 3, 1, 6});
  auto y = layer.forward(x);
  const auto w = to_vector(layer.w_t());
  for (std::int64_t p = 0; p < 9; ++p)
    for (std::int64_t grp = 0; grp < 3; ++grp)
      for (std::int64_t o = 0; o < 2; ++o) {
        double s = 0.0;
        for (std::int64_t i = 0; i < 2; ++i) s += x.data()[p * 6 + grp * 2 + i] * w[i * 2 + o];
        EXPECT_NEAR(y.data()[p * 6 + grp * 2 + o], s, 1e-14);
      }
}

TEST(TemporalFCTest, DefaultGroupWidthFollowsFrameCount) {
  Gen g(26);
  TemporalFC<double> layer({12, 4, 0}, &g.rng());
  EXPECT_EQ(layer.w_t().shape(), (Shape{12, 12}));  // D_t = 12 / 4 = 3
  EXPECT_EQ(layer.param_count(), 144);
}

}  // namespace
}  // namespace morph
