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
#include "morphmlp/oracle.hpp"
#include "support.hpp"

namespace morph {
namespace {

using testing::Gen;
using testing::max_abs_diff;
using testing::to_vector;

std::vector<double> identity(std::int64_t n) {
  std::vector<double> w(static_cast<std::size_t>(n * n), 0.0);
  for (std::int64_t i = 0; i < n; ++i) w[i * n + i] = 1.0;
  return w;
}

MorphFC<double> horizontal_only(std::int64_t c, std::int64_t l, std::int64_t d, Gen& g) {
  MorphFCOptions o;
  o.channels = c;
  o.chunk_len = l;
  o.group_width = d;
  o.pathways = parse_pathways("h");
  MorphFC<double> layer(o, &g.rng());
  for (auto& v : layer.w_h().mutable_data()) v = g.normal();
  return layer;
}

TEST(NaiveMorphFCTest, IdentityWeightsTripleInput) {
  Gen g(1);
  const auto x = g.values(6 * 6 * 4);
  oracle::MorphFCWeights w{3, 2, identity(6), identity(6), identity(4), {}, {}};
  const auto y = oracle::naive_morphfc(x, 6, 6, 4, w);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_DOUBLE_EQ(y[i], 3.0 * x[i]);
}

TEST(NaiveMorphFCTest, PaddedCaseAgreesWithFastPath) {
  Gen g(2);
  MorphFCOptions o;
  o.channels = 2;
  o.chunk_len = 4;
  o.group_width = 2;
  MorphFC<double> layer(o, &g.rng());
  for (auto* t : {&layer.w_h(), &layer.w_v(), &layer.w_c()})
    for (auto& v : t->mutable_data()) v = g.normal();
  auto x = g.tensor({5, 5, 2});
  oracle::MorphFCWeights w{4, 2, to_vector(layer.w_h()), to_vector(layer.w_v()),
                           to_vector(layer.w_c()), {}, {}};
  EXPECT_LT(max_abs_diff(layer.forward(x).data(), oracle::naive_morphfc(to_vector(x), 5, 5, 2, w)),
            1e-12);
}

TEST(NaiveMorphFCTest, SixBySixAgreesWithFastPath) {
  Gen g(3);
  MorphFCOptions o;
  o.channels = 4;
  o.chunk_len = 3;
  o.group_width = 2;
  MorphFC<double> layer(o, &g.rng());
  auto x = g.tensor({6, 6, 4});
  oracle::MorphFCWeights w{3, 2, to_vector(layer.w_h()), to_vector(layer.w_v()),
                           to_vector(layer.w_c()), {}, {}};
  EXPECT_LT(max_abs_diff(layer.forward(x).data(), oracle::naive_morphfc(to_vector(x), 6, 6, 4, w)),
            1e-12);
}

TEST(NaiveMorphFCTTest, IdentityReturnsInput) {
  Gen g(4);
  const auto x = g.values(3 * 3 * 4 * 4);
  EXPECT_EQ(oracle::naive_morphfc_t(x, 3, 3, 4, 4, {2, identity(8)}), x);
}

TEST(Conv1dTest, DefinitionExample) {
  // One channel, kernel 3, stride 1, zero padding 1.
  const std::vector<double> x{1.0, 2.0, 3.0}, w{0.5, -1.0, 2.0};
  oracle::Conv1dSpec spec{3, 1, 1, 1, 1, true};
  ASSERT_EQ(oracle::conv1d_output_length(3, spec), 3);
  const auto y = oracle::grouped_conv1d_reference(x, 3, 1, w, spec);
  const double xp[5] = {0.0, 1.0, 2.0, 3.0, 0.0};
  for (int t = 0; t < 3; ++t)
    EXPECT_DOUBLE_EQ(y[t], w[0] * xp[t] + w[1] * xp[t + 1] + w[2] * xp[t + 2]);
}

TEST(Conv1dTest, OutputLength) {
  EXPECT_EQ(oracle::conv1d_output_length(24, {4, 4, 0, 1, 1, true}), 6);
  EXPECT_EQ(oracle::conv1d_output_length(10, {3, 2, 1, 1, 1, true}), 5);
}

TEST(ConvEquivalenceTest, NonSharedStrideLConvEqualsHorizontalPathway) {
  Gen g(5);
  for (int trial = 0; trial < 10; ++trial) {
    const auto c = 4 * g.range(1, 3), l = g.range(1, 6), d = g.divisor_of(c);
    const auto h = g.range(1, 4), w = l * g.range(1, 4);  // H*W a multiple of L
    auto layer = horizontal_only(c, l, d, g);
    auto x = g.tensor({h, w, c});
    const auto conv = oracle::conv_equivalent_horizontal(to_vector(x), h * w, c, l, d,
                                                         to_vector(layer.w_h()));
    EXPECT_LT(max_abs_diff(layer.horizontal(x).data(), conv), 1e-12);
  }
}

TEST(ConvEquivalenceTest, SharedWeightConvDiffersFromMorphFC) {
  Gen g(6);
  const std::int64_t c = 4, l = 4, d = 2, n = 16;
  auto layer = horizontal_only(c, l, d, g);
  auto x = g.tensor({1, n, c});
  // An ordinary grouped convolution: kernel L, stride 1, "same" padding,
  // one kernel shared by all positions.
  oracle::Conv1dSpec spec{l, 1, 0, c / d, d, true};
  std::vector<double> padded(static_cast<std::size_t>((n + l - 1) * c), 0.0);
  const auto xs = to_vector(x);
  std::copy(xs.begin(), xs.end(), padded.begin() + (l / 2) * c);
  const auto kernel = g.values(static_cast<std::size_t>((c / d) * l * d * d));
  const auto y = oracle::grouped_conv1d_reference(padded, n + l - 1, c, kernel, spec);
  ASSERT_EQ(y.size(), xs.size());
  EXPECT_GT(max_abs_diff(layer.horizontal(x).data(), y), 1e-3);
}

TEST(BlockDiagonalTest, HorizontalPathwayIsBlockDiagonalFC) {
  Gen g(7);
  const std::int64_t c = 8, l = 3, d = 2, h = 3, w = 4;
  auto layer = horizontal_only(c, l, d, g);
  auto x = g.tensor({h, w, c});
  const auto out = layer.horizontal(x);
  for (std::int64_t group = 0; group < c / d; ++group) {
    const auto ref = oracle::block_diagonal_fc_reference(to_vector(x), h * w, c, l, d, group,
                                                         to_vector(layer.w_h()));
    std::vector<double> got;
    for (std::int64_t t = 0; t < h * w; ++t)
      for (std::int64_t k = 0; k < d; ++k) got.push_back(out.data()[t * c + group * d + k]);
    EXPECT_LT(max_abs_diff(got, ref), 1e-12) << "group " << group;
  }
}

TEST(Conv2dTest, DeltaKernelIsIdentity) {
  Gen g(8);
  const std::int64_t h = 4, w = 5, c = 3;
  std::vector<double> kernel(static_cast<std::size_t>(9 * c * c), 0.0);
  for (std::int64_t k = 0; k < c; ++k) kernel[((1 * 3 + 1) * c + k) * c + k] = 1.0;
  const auto x = g.values(static_cast<std::size_t>(h * w * c));
  EXPECT_EQ(oracle::conv2d_reference(x, h, w, c, c, 3, kernel), x);
}

TEST(Conv2dTest, ShiftKernelUsesZeroPadding) {
  // The kernel tap at (0, 1) reads the row above; the top row sees padding.
  const std::int64_t h = 3, w = 2;
  std::vector<double> x{1, 2, 3, 4, 5, 6}, kernel(9, 0.0);
  kernel[0 * 3 + 1] = 1.0;
  const auto y = oracle::conv2d_reference(x, h, w, 1, 1, 3, kernel);
  EXPECT_EQ(y, (std::vector<double>{0, 0, 1, 2, 3, 4}));
}

}  // namespace
}  // namespace morph
