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

#include <cmath>
#include <numeric>
#include <set>

#include "morphmlp/commands.hpp"
#include "morphmlp/model.hpp"
#include "morphmlp/ops.hpp"
#include "support.hpp"

namespace morph {
namespace {

using testing::Gen;
using testing::bitwise_equal;

ModelConfig toy(std::int64_t classes = 10) {
  ModelConfig c;
  c.stages = {{2, 16, 4, 0}};
  c.num_classes = classes;
  c.input = {8, 8, 0};
  return c;
}

std::vector<std::int64_t> depths(const ModelConfig& c) {
  std::vector<std::int64_t> out;
  for (const auto& s : c.stages) out.push_back(s.depth);
  return out;
}

std::vector<std::int64_t> channels(const ModelConfig& c) {
  std::vector<std::int64_t> out;
  for (const auto& s : c.stages) out.push_back(s.channels);
  return out;
}

TEST(PresetTest, PublishedSettings) {
  const auto t = ModelConfig::published("T");
  EXPECT_EQ(depths(t), (std::vector<std::int64_t>{3, 4, 7, 3}));
  EXPECT_EQ(channels(t), (std::vector<std::int64_t>{84, 168, 336, 588}));
  const auto b = ModelConfig::published("B");
  EXPECT_EQ(depths(b), (std::vector<std::int64_t>{4, 6, 15, 4}));
  EXPECT_EQ(channels(b), (std::vector<std::int64_t>{112, 224, 392, 784}));
  EXPECT_EQ(depths(ModelConfig::published("S")), (std::vector<std::int64_t>{3, 4, 9, 3}));
  EXPECT_EQ(depths(ModelConfig::published("L")), (std::vector<std::int64_t>{4, 8, 18, 6}));
  EXPECT_DOUBLE_EQ(ModelConfig::published("L").stoch_depth_max, 0.4);
  for (const char* v : {"T", "S", "B", "L"})
    for (const auto& s : ModelConfig::published(v).stages)
      EXPECT_TRUE(s.chunk_len == 14 || s.chunk_len == 28 || s.chunk_len == 49);
  EXPECT_THROW(ModelConfig::published("XL"), std::invalid_argument);
}

TEST(PresetTest, GroupWidthIsIntegralAtEveryStage) {
  const std::vector<std::int64_t> tiny{6, 6, 12, 12}, rest{8, 8, 14, 16};
  for (const char* v : {"T", "S", "B", "L"}) {
    const auto c = ModelConfig::published(v);
    for (std::size_t j = 0; j < 4; ++j) {
      const auto& s = c.stages[j];
      EXPECT_EQ(s.channels % s.chunk_len, 0) << v << " stage " << j;
      EXPECT_EQ(c.stage_group_width(j), (std::string(v) == "T" ? tiny : rest)[j]);
    }
  }
}

TEST(PresetTest, ParamsAndFlopsWithinTolerance) {
  for (const auto& row : kPublishedRows) {
    const auto c = ModelConfig::published(row.variant);
    const double params = static_cast<double>(count_params(c)) / 1e6;
    const double gmacs = static_cast<double>(count_flops(c, c.input)) / 1e9;
    EXPECT_LE(std::abs(params - row.params_m) / row.params_m, kParamTolerance) << row.variant;
    EXPECT_LE(std::abs(gmacs - row.gflops) / row.gflops, kFlopTolerance) << row.variant;
  }
}

TEST(ValidateTest, RejectsBadConfigs) {
  auto c = ModelConfig::published("T");
  c.stages.pop_back();
  EXPECT_THROW(c.validate(), std::invalid_argument);
  auto d = toy();
  d.stages.clear();
  EXPECT_THROW(d.validate(), std::invalid_argument);
  auto e = toy();
  e.stages.assign(5, e.stages.front());
  EXPECT_THROW(e.validate(), std::invalid_argument);
  auto f = toy();
  f.num_classes = 0;
  EXPECT_THROW(f.validate(), std::invalid_argument);
}

TEST(DropPathScheduleTest, LinearRampToMaximum) {
  for (const char* v : {"T", "S", "B", "L"}) {
    const auto c = ModelConfig::published(v);
    const auto rates = c.drop_path_rates();
    ASSERT_EQ(static_cast<std::int64_t>(rates.size()), c.total_depth());
    EXPECT_EQ(rates.front(), 0.0);
    EXPECT_DOUBLE_EQ(rates.back(), c.stoch_depth_max);
    for (std::size_t i = 1; i < rates.size(); ++i) EXPECT_GE(rates[i], rates[i - 1]);
  }
}

TEST(InputShapeTest, Parse) {
  EXPECT_EQ(InputShape::parse("224").width, 224);
  const auto v = InputShape::parse("112x96x16");
  EXPECT_EQ(v.height, 112);
  EXPECT_EQ(v.width, 96);
  EXPECT_EQ(v.frames, 16);
  EXPECT_EQ(v.str(), "112x96x16");
  EXPECT_THROW(InputShape::parse("12x"), std::invalid_argument);
}

TEST(ModelTest, ToyBuildsAndRuns) {
  Model<double> m(toy(), 1);
  Gen g(2);
  const auto logits = m.forward(g.tensor({3, 8, 8, 3}));
  EXPECT_EQ(logits.shape(), (Shape{3, 10}));
}

TEST(ModelTest, ToyCountsMatchHandCount) {
  // embed 48*16+16; per block 2 LN (32 each), W_h, W_v (16x16), W_c (16x16),
  // MLP 16*64+64+64*16+16; final LN 32; head 16*10+10.
  EXPECT_EQ(count_params(toy()), 784 + 2 * (32 + 3 * 256 + 32 + 2128) + 32 + 170);
  // 4 tokens: embed 4*48*16; per block three pathways of 4*16*16 plus the
  // MLP 4*2*16*64; head 16*10.
  EXPECT_EQ(count_flops(toy(), toy().input), 3072 + 2 * (3 * 1024 + 8192) + 160);
  Model<float> m(toy(), 0, false);
  EXPECT_EQ(count_params(m), count_params(toy()));
}

TEST(ModelTest, ParameterNamesAreUnique) {
  Model<float> m(ModelConfig::published("T"), 0, false);
  auto params = m.named_parameters();
  std::set<std::string> names;
  for (const auto& [name, p] : params) EXPECT_TRUE(names.insert(name).second) << name;
  EXPECT_TRUE(names.count("stages.3.blocks.2.morphfc.w_h"));
  EXPECT_TRUE(names.count("stages.0.downsample.proj.weight"));
  EXPECT_FALSE(names.count("stages.3.downsample.proj.weight"));
}

TEST(ModelTest, EvalIsDeterministicAndBatchOrderIndependent) {
  auto c = toy();
  c.stoch_depth_max = 0.3;
  Model<double> m(c, 3);
  Gen g(4);
  auto x = g.tensor({4, 8, 8, 3});
  const auto y = m.forward(x);
  EXPECT_TRUE(bitwise_equal(y, m.forward(x)));
  // Reverse the batch; each sample's logits must be unchanged.
  auto reversed = gather(x, [] {
    std::vector<std::int64_t> idx(4 * 192);
    for (std::int64_t b = 0; b < 4; ++b)
      std::iota(idx.begin() + b * 192, idx.begin() + (b + 1) * 192, (3 - b) * 192);
    return idx;
  }(), x.shape());
  const auto yr = m.forward(reversed);
  for (std::int64_t b = 0; b < 4; ++b)
    for (std::int64_t k = 0; k < 10; ++k)
      EXPECT_EQ(y.data()[b * 10 + k], yr.data()[(3 - b) * 10 + k]);
}

TEST(ModelTest, SameSeedSameWeights) {
  Model<float> a(toy(), 9), b(toy(), 9), c(toy(), 10);
  const auto pa = a.named_parameters(), pb = b.named_parameters(), pc = c.named_parameters();
  bool any_diff = false;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    EXPECT_TRUE(bitwise_equal(pa[i].second, pb[i].second));
    any_diff = any_diff || !bitwise_equal(pa[i].second, pc[i].second);
  }
  EXPECT_TRUE(any_diff);
}

TEST(ModelTest, MultiStageVideoModelRuns) {
  ModelConfig c;
  c.stages = {{1, 8, 4, 0}, {1, 16, 2, 0}};
  c.num_classes = 5;
  c.input = {16, 16, 4};
  Model<double> m(c, 1);
  Gen g(5);
  EXPECT_EQ(m.forward(g.tensor({2, 16, 16, 4, 3})).shape(), (Shape{2, 5}));
  EXPECT_EQ(c.embedded_frames(), 2);
  EXPECT_EQ(c.stage_resolutions(), (std::vector<std::pair<std::int64_t, std::int64_t>>{{4, 4}, {2, 2}}));
}

TEST(ModelTest, VideoModelAddsOnlyTemporalParameters) {
  auto image = ModelConfig::published("S");
  auto video = image;
  video.input = {224, 224, 16};
  // One norm_t (2C) and one W_t ((8 D_t)^2 = C^2 with D_t = C / 8) per block,
  // plus the second frame of each tubelet in the embedding.
  std::int64_t extra = 4 * 4 * 3 * video.stages.front().channels;
  for (const auto& s : video.stages) extra += s.depth * (2 * s.channels + s.channels * s.channels);
  EXPECT_EQ(count_params(video) - count_params(image), extra);
}

TEST(ModelTest, GradcheckOnToyConfig) {
  GradCheckOptions options;
  const auto report = gradcheck_model(gradcheck_toy_config(), 1, options);
  EXPECT_TRUE(report.passed) << report.worst_rel_error();
}

}  // namespace
}  // namespace morph
