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

#include <filesystem>
#include <sstream>

#include "morphmlp/config.hpp"

namespace morph {
namespace {

const std::filesystem::path kConfigDir = MORPHMLP_CONFIG_DIR;

RunConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in, "test");
}

TEST(ConfigTest, ParsesAllSections) {
  const auto c = parse(
      "[model]\nvariant = custom\ninput = 32x16\nnum_classes = 7\ndepths = 1,2\n"
      "channels = 8,16\nchunk_lens = 4,2\ngate = true\npathways = hc\n"
      "[train]\nsteps = 12\nbatch_size = 4\nlr = 0.01\nwarmup = 3\nseed = 9\ndtype = f64\n"
      "[data]\nkind = chunk_parity\ntrain_size = 40\nclasses = 3\nnoise = 0.25\n");
  EXPECT_EQ(c.model.input.height, 32);
  EXPECT_EQ(c.model.input.width, 16);
  EXPECT_EQ(c.model.num_classes, 7);
  ASSERT_EQ(c.model.stages.size(), 2u);
  EXPECT_EQ(c.model.stages[1].depth, 2);
  EXPECT_EQ(c.model.stages[1].channels, 16);
  EXPECT_EQ(c.model.stages[1].chunk_len, 2);
  EXPECT_TRUE(c.model.gate);
  EXPECT_TRUE(c.model.pathways.horizontal);
  EXPECT_FALSE(c.model.pathways.vertical);
  EXPECT_TRUE(c.model.pathways.channel);
  EXPECT_EQ(c.train.steps, 12);
  EXPECT_EQ(c.train.batch_size, 4);
  EXPECT_DOUBLE_EQ(c.train.schedule.base_lr, 0.01);
  EXPECT_EQ(c.train.schedule.warmup_steps, 3);
  EXPECT_EQ(c.train.seed, 9u);
  EXPECT_TRUE(c.double_precision);
  EXPECT_EQ(c.data.synth.size, 40);
  EXPECT_EQ(c.data.synth.num_classes, 3);
  EXPECT_DOUBLE_EQ(c.data.synth.noise, 0.25);
}

TEST(ConfigTest, SingleElementListsBroadcast) {
  const auto c = parse("[model]\ndepths = 1,1,2\nchannels = 8\nchunk_lens = 2\ninput = 16\n");
  ASSERT_EQ(c.model.stages.size(), 3u);
  for (const auto& s : c.model.stages) {
    EXPECT_EQ(s.channels, 8);
    EXPECT_EQ(s.chunk_len, 2);
  }
}

TEST(ConfigTest, PublishedVariantWithOverrides) {
  const auto c = parse("[model]\nvariant = T\ngroup_rule = C/2L\n");
  const auto t = ModelConfig::published("T");
  ASSERT_EQ(c.model.stages.size(), t.stages.size());
  EXPECT_EQ(c.model.group_rule, GroupRule::c_over_2l);
  EXPECT_EQ(c.model.stages[0].channels, t.stages[0].channels);
}

TEST(ConfigTest, RejectsUnknownNames) {
  EXPECT_THROW(parse("[model]\nchunk_len = 4\n"), ConfigError);
  EXPECT_THROW(parse("[optimizer]\nlr = 1\n"), ConfigError);
  EXPECT_THROW(parse("lr = 1\n"), ConfigError);
}

TEST(ConfigTest, RejectsBadValues) {
  EXPECT_THROW(parse("[model]\nvariant = XL\n"), ConfigError);
  EXPECT_THROW(parse("[model]\ndepths = 1,x\n"), ConfigError);
  EXPECT_THROW(parse("[model]\ndepths = 1,1\nchannels = 8,16,32\nchunk_lens = 2\ninput = 16\n"),
               ConfigError);
  EXPECT_THROW(parse("[model]\nwiring = diagonal\n"), ConfigError);
  EXPECT_THROW(parse("[model]\ngate = maybe\n"), ConfigError);
  EXPECT_THROW(parse("[train]\ndtype = f16\n"), ConfigError);
  EXPECT_THROW(parse("[data]\nkind = imagenet\n"), ConfigError);
}

TEST(ConfigTest, ReportsMissingFile) {
  EXPECT_THROW(load_config(kConfigDir / "does_not_exist.cfg"), ConfigError);
}

TEST(ConfigTest, EveryShippedConfigLoadsAndValidates) {
  int count = 0;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(kConfigDir)) {
    if (entry.path().extension() != ".cfg") continue;
    SCOPED_TRACE(entry.path().string());
    const auto c = load_config(entry.path());
    EXPECT_NO_THROW(c.model.validate());
    ++count;
  }
  EXPECT_GE(count, 20);
}

TEST(ConfigTest, WiringConfigsSelectTheirWiring) {
  for (auto w : {VideoWiring::parallel, VideoWiring::ts_standard, VideoWiring::st_standard,
                 VideoWiring::ts_skip, VideoWiring::st_skip}) {
    const auto c = load_config(kConfigDir / "wiring" / (to_string(w) + ".cfg"));
    EXPECT_EQ(c.model.wiring, w);
    EXPECT_TRUE(c.model.input.is_video());
  }
  EXPECT_EQ(ModelConfig{}.wiring, VideoWiring::ts_skip);
}

TEST(ConfigTest, ToyVideoAblationsDifferOnlyWhereIntended) {
  const auto base = load_config(kConfigDir / "toy_video.cfg");
  const auto off = load_config(kConfigDir / "toy_video_no_temporal.cfg");
  const auto shuffled = load_config(kConfigDir / "toy_video_shuffled.cfg");
  EXPECT_TRUE(base.model.temporal_enabled);
  EXPECT_FALSE(off.model.temporal_enabled);
  EXPECT_FALSE(base.data.synth.shuffle_frames);
  EXPECT_TRUE(shuffled.data.synth.shuffle_frames);
  EXPECT_EQ(off.train.steps, base.train.steps);
  EXPECT_EQ(off.data.synth.size, base.data.synth.size);
}

TEST(ConfigTest, DatasetsFollowModelInput) {
  const auto c = load_config(kConfigDir / "toy_video.cfg");
  auto small = c;
  small.data.synth.size = 4;
  small.data.eval_size = 3;
  const auto train = make_train_set(small);
  const auto eval = make_eval_set(small);
  EXPECT_EQ(train.sample_shape, (Shape{8, 16, 8, 3}));
  EXPECT_EQ(train.size(), 4);
  EXPECT_EQ(eval.size(), 3);
  EXPECT_NE(train.inputs, std::vector<float>(eval.inputs.begin(), eval.inputs.begin() + train.inputs.size()));
}

}  // namespace
}  // namespace morph
