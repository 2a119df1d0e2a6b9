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
#include <fstream>

#include "morphmlp/checkpoint.hpp"
#include "morphmlp/model.hpp"
#include "support.hpp"

namespace morph {
namespace {

using testing::Gen;

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("morphmlp_" + name);
}

ModelConfig small(bool video) {
  ModelConfig c;
  c.stages = {{1, 8, 4, 0}, {1, 16, 2, 0}};
  c.num_classes = 5;
  c.input = video ? InputShape{16, 16, 4} : InputShape{16, 16, 0};
  return c;
}

template <typename T>
Tensor<T> batch(const ModelConfig& c, std::uint64_t seed) {
  Shape shape{2, c.input.height, c.input.width};
  if (c.input.is_video()) shape.push_back(c.input.frames);
  shape.push_back(3);
  return Gen(seed).tensor<T>(shape);
}

TEST(CheckpointTest, RoundTripGivesIdenticalOutputs) {
  for (bool video : {false, true}) {
    const auto c = small(video);
    Model<float> a(c, 1), b(c, 2);
    const auto path = temp_path("roundtrip.ckpt");
    save_checkpoint(a.named_parameters(), path);
    auto params = b.named_parameters();
    const auto report = load_checkpoint(params, path);
    EXPECT_EQ(report.loaded.size(), params.size());
    const auto x = batch<float>(c, 3);
    EXPECT_TRUE(testing::bitwise_equal(a.forward(x), b.forward(x)));
    std::filesystem::remove(path);
  }
}

TEST(CheckpointTest, ManifestListsEveryParameter) {
  Model<double> m(small(false), 1);
  const auto path = temp_path("manifest.ckpt");
  save_checkpoint(m.named_parameters(), path);
  const auto manifest = read_checkpoint_manifest(path);
  const auto params = m.named_parameters();
  ASSERT_EQ(manifest.size(), params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    EXPECT_EQ(manifest[i].name, params[i].first);
    EXPECT_EQ(manifest[i].shape, params[i].second.shape());
    EXPECT_EQ(manifest[i].dtype, DType::f64);
  }
  std::filesystem::remove(path);
}

TEST(CheckpointTest, StrictMismatchLeavesModelUntouched) {
  auto other = small(false);
  other.stages[1].channels = 24;
  Model<float> source(other, 1), target(small(false), 2);
  const auto path = temp_path("mismatch.ckpt");
  save_checkpoint(source.named_parameters(), path);
  const auto x = batch<float>(small(false), 4);
  const auto before = target.forward(x);
  auto params = target.named_parameters();
  EXPECT_THROW(load_checkpoint(params, path), CheckpointError);
  EXPECT_TRUE(testing::bitwise_equal(before, target.forward(x)));
  std::filesystem::remove(path);
}

TEST(CheckpointTest, NonStrictImageIntoVideoReportsDifferences) {
  Model<float> image(small(false), 1), video(small(true), 2);
  const auto path = temp_path("inflate.ckpt");
  save_checkpoint(image.named_parameters(), path);
  auto params = video.named_parameters();
  const auto report = load_checkpoint(params, path, false);
  EXPECT_FALSE(report.loaded.empty());
  // Temporal layers and their norms exist only in the video model; the
  // tubelet embedding has a different input width.
  EXPECT_FALSE(report.missing.empty());
  EXPECT_FALSE(report.mismatched.empty());
  for (const auto& name : report.missing) {
    EXPECT_TRUE(name.find(".temporal.") != std::string::npos ||
                name.find(".norm_t.") != std::string::npos)
        << name;
  }
  EXPECT_THROW(load_checkpoint(params, path, true), CheckpointError);
  std::filesystem::remove(path);
}

TEST(CheckpointTest, ConvertsBetweenPrecisions) {
  Model<double> wide(small(false), 1);
  Model<float> narrow(small(false), 2);
  const auto path = temp_path("dtype.ckpt");
  save_checkpoint(wide.named_parameters(), path);
  auto params = narrow.named_parameters();
  load_checkpoint(params, path);
  const auto src = wide.named_parameters();
  for (std::size_t i = 0; i < params.size(); ++i)
    for (std::int64_t j = 0; j < params[i].second.numel(); ++j)
      EXPECT_EQ(params[i].second.data()[j], static_cast<float>(src[i].second.data()[j]));
  std::filesystem::remove(path);
}

TEST(CheckpointTest, RejectsCorruptFiles) {
  const auto path = temp_path("corrupt.ckpt");
  {
    std::ofstream os(path, std::ios::binary);
    os << "MORPHNET0garbage";
  }
  EXPECT_THROW(read_checkpoint_manifest(path), CheckpointError);
  Model<float> m(small(false), 1);
  save_checkpoint(m.named_parameters(), path);
  std::filesystem::resize_file(path, std::filesystem::file_size(path) - 4);
  auto params = m.named_parameters();
  EXPECT_THROW(load_checkpoint(params, path), CheckpointError);
  std::filesystem::remove(path);
  EXPECT_THROW(read_checkpoint_manifest(path), CheckpointError);
}

}  // namespace
}  // namespace morph
