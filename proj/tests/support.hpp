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

// Hand-rolled random generators shared by the property tests.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "morphmlp/init.hpp"
#include "morphmlp/tensor.hpp"

namespace morph::testing {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  std::int64_t range(std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng_);
  }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(rng_); }
  bool coin() { return range(0, 1) == 1; }

  template <typename T = double>
  Tensor<T> tensor(Shape shape, bool requires_grad = false, double scale = 1.0) {
    Tensor<T> t(std::move(shape), requires_grad);
    for (auto& v : t.mutable_data()) v = static_cast<T>(scale * normal());
    return t;
  }

  std::vector<double> values(std::size_t n) {
    std::vector<double> v(n);
    for (auto& x : v) x = normal();
    return v;
  }

  Shape shape(int rank, std::int64_t lo, std::int64_t hi) {
    Shape s(static_cast<std::size_t>(rank));
    for (auto& e : s) e = range(lo, hi);
    return s;
  }

  std::int64_t divisor_of(std::int64_t n) {
    std::vector<std::int64_t> ds;
    for (std::int64_t d = 1; d <= n; ++d)
      if (n % d == 0) ds.push_back(d);
    return ds[static_cast<std::size_t>(range(0, static_cast<std::int64_t>(ds.size()) - 1))];
  }

  Rng& rng() { return rng_; }

 private:
  Rng rng_;
};

template <typename T>
std::vector<T> to_vector(const Tensor<T>& t) {
  return {t.data().begin(), t.data().end()};
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) return INFINITY;
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

template <typename T>
bool bitwise_equal(const Tensor<T>& a, const Tensor<T>& b) {
  return a.shape() == b.shape() && std::equal(a.data().begin(), a.data().end(), b.data().begin());
}

}  // namespace morph::testing
