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

#include "morphmlp/ops.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace morph {

namespace {

template <typename T>
using NodePtr = std::shared_ptr<detail::Node<T>>;

template <typename T>
bool any_requires_grad(std::initializer_list<const Tensor<T>*> inputs) {
  if (!grad_enabled()) return false;
  for (const auto* t : inputs)
    if (t->defined() && t->requires_grad()) return true;
  return false;
}

// Builds the result node; the backward closure is attached only when some
// input participates in the tape.
template <typename T>
Tensor<T> make_result(const char* op, Shape shape, std::vector<T> values,
                      std::initializer_list<const Tensor<T>*> inputs,
                      std::function<void(detail::Node<T>&)> rule) {
  auto node = std::make_shared<detail::Node<T>>();
  node->op = op;
  node->shape = std::move(shape);
  node->data = std::make_shared<std::vector<T>>(std::move(values));
  if (any_requires_grad<T>(inputs)) {
    node->requires_grad = true;
    for (const auto* t : inputs)
      if (t->defined()) node->inputs.push_back(t->node());
    node->backward = std::move(rule);
  }
  return Tensor<T>::from_node(std::move(node));
}

template <typename T>
bool wants_grad(const NodePtr<T>& n) {
  return n->requires_grad;
}

int normalize_axis(int axis, int rank, const Shape& shape) {
  const int a = axis < 0 ? axis + rank : axis;
  if (a < 0 || a >= rank)
    throw ShapeError("axis " + std::to_string(axis) + " out of range for " + to_string(shape));
  return a;
}

// Returns the size of the repeated prefix when `b` broadcasts onto `a`.
std::int64_t trailing_repeat(const Shape& a, const Shape& b, const char* op) {
  bool ok = b.size() <= a.size();
  for (std::size_t i = 0; ok && i < b.size(); ++i) ok = b[b.size() - 1 - i] == a[a.size() - 1 - i];
  if (ok) return numel(a) / numel(b);
  throw ShapeError(std::string(op) + ": shape " + to_string(b) + " does not match or trail " +
                   to_string(a));
}

}  // namespace

template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0))
    throw ShapeError("matmul: incompatible shapes " + to_string(a.shape()) + " and " +
                     to_string(b.shape()));
  const std::int64_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  std::vector<T> out(static_cast<std::size_t>(m * n), T(0));
  const T* pa = a.data().data();
  const T* pb = b.data().data();
  for (std::int64_t i = 0; i < m; ++i) {
    T* row = out.data() + i * n;
    for (std::int64_t p = 0; p < k; ++p) {
      const T av = pa[i * k + p];
      const T* brow = pb + p * n;
      for (std::int64_t j = 0; j < n; ++j) row[j] += av * brow[j];
    }
  }
  auto an = a.node(), bn = b.node();
  return make_result<T>("matmul", {m, n}, std::move(out), {&a, &b},
                        [an, bn, m, k, n](detail::Node<T>& self) {
                          const T* g = self.grad.data();
                          const T* pa = an->data->data();
                          const T* pb = bn->data->data();
                          if (wants_grad(an)) {
                            T* ga = an->ensure_grad().data();
                            for (std::int64_t i = 0; i < m; ++i)
                              for (std::int64_t p = 0; p < k; ++p) {
                                T acc = 0;
                                const T* grow = g + i * n;
                                const T* brow = pb + p * n;
                                for (std::int64_t j = 0; j < n; ++j) acc += grow[j] * brow[j];
                                ga[i * k + p] += acc;
                              }
                          }
                          if (wants_grad(bn)) {
                            T* gb = bn->ensure_grad().data();
                            for (std::int64_t i = 0; i < m; ++i)
                              for (std::int64_t p = 0; p < k; ++p) {
                                const T av = pa[i * k + p];
                                const T* grow = g + i * n;
                                T* gbrow = gb + p * n;
                                for (std::int64_t j = 0; j < n; ++j) gbrow[j] += av * grow[j];
                              }
                          }
                        });
}

template <typename T>
Tensor<T> linear(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias) {
  if (weight.rank() != 2 || x.rank() < 1 || x.dim(-1) != weight.dim(0))
    throw ShapeError("linear: input " + to_string(x.shape()) + " does not match weight " +
                     to_string(weight.shape()));
  const std::int64_t k = weight.dim(0);
  Shape out_shape = x.shape();
  out_shape.back() = weight.dim(1);
  auto y = matmul(reshape(x, {x.numel() / k, k}), weight);
  y = reshape(y, out_shape);
  return bias.defined() ? add(y, bias) : y;
}

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  const std::int64_t reps = trailing_repeat(a.shape(), b.shape(), "add");
  const std::int64_t inner = b.numel();
  std::vector<T> out(a.data().begin(), a.data().end());
  const T* pb = b.data().data();
  for (std::int64_t r = 0; r < reps; ++r)
    for (std::int64_t i = 0; i < inner; ++i) out[r * inner + i] += pb[i];
  auto an = a.node(), bn = b.node();
  return make_result<T>("add", a.shape(), std::move(out), {&a, &b},
                        [an, bn, reps, inner](detail::Node<T>& self) {
                          const T* g = self.grad.data();
                          if (wants_grad(an)) {
                            auto& ga = an->ensure_grad();
                            for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[i];
                          }
                          if (wants_grad(bn)) {
                            auto& gb = bn->ensure_grad();
                            for (std::int64_t r = 0; r < reps; ++r)
                              for (std::int64_t i = 0; i < inner; ++i) gb[i] += g[r * inner + i];
                          }
                        });
}

template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
  return add(a, scale(b, T(-1)));
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  const std::int64_t reps = trailing_repeat(a.shape(), b.shape(), "mul");
  const std::int64_t inner = b.numel();
  std::vector<T> out(a.data().begin(), a.data().end());
  const T* pb = b.data().data();
  for (std::int64_t r = 0; r < reps; ++r)
    for (std::int64_t i = 0; i < inner; ++i) out[r * inner + i] *= pb[i];
  auto an = a.node(), bn = b.node();
  return make_result<T>("mul", a.shape(), std::move(out), {&a, &b},
                        [an, bn, reps, inner](detail::Node<T>& self) {
                          const T* g = self.grad.data();
                          const T* pa = an->data->data();
                          const T* pb = bn->data->data();
                          if (wants_grad(an)) {
                            auto& ga = an->ensure_grad();
                            for (std::int64_t r = 0; r < reps; ++r)
                              for (std::int64_t i = 0; i < inner; ++i)
                                ga[r * inner + i] += g[r * inner + i] * pb[i];
                          }
                          if (wants_grad(bn)) {
                            auto& gb = bn->ensure_grad();
                            for (std::int64_t r = 0; r < reps; ++r)
                              for (std::int64_t i = 0; i < inner; ++i)
                                gb[i] += g[r * inner + i] * pa[r * inner + i];
                          }
                        });
}

template <typename T>
Tensor<T> scale(const Tensor<T>& x, T factor) {
  std::vector<T> out(x.data().begin(), x.data().end());
  for (auto& v : out) v *= factor;
  auto xn = x.node();
  return make_result<T>("scale", x.shape(), std::move(out), {&x},
                        [xn, factor](detail::Node<T>& self) {
                          auto& gx = xn->ensure_grad();
                          for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += factor * self.grad[i];
                        });
}

template <typename T>
Tensor<T> scale_leading(const Tensor<T>& x, const std::vector<T>& factors) {
  if (x.rank() < 1 || static_cast<std::int64_t>(factors.size()) != x.dim(0))
    throw ShapeError("scale_leading: " + std::to_string(factors.size()) +
                     " factors for shape " + to_string(x.shape()));
  const std::int64_t inner = x.numel() / x.dim(0);
  std::vector<T> out(x.data().begin(), x.data().end());
  for (std::size_t r = 0; r < factors.size(); ++r)
    for (std::int64_t i = 0; i < inner; ++i) out[r * inner + i] *= factors[r];
  auto xn = x.node();
  return make_result<T>("scale_leading", x.shape(), std::move(out), {&x},
                        [xn, factors, inner](detail::Node<T>& self) {
                          auto& gx = xn->ensure_grad();
                          for (std::size_t r = 0; r < factors.size(); ++r)
                            for (std::int64_t i = 0; i < inner; ++i)
                              gx[r * inner + i] += factors[r] * self.grad[r * inner + i];
                        });
}

template <typename T>
Tensor<T> sum_all(const Tensor<T>& x) {
  T total = 0;
  for (auto v : x.data()) total += v;
  auto xn = x.node();
  return make_result<T>("sum_all", {}, {total}, {&x}, [xn](detail::Node<T>& self) {
    auto& gx = xn->ensure_grad();
    for (auto& v : gx) v += self.grad[0];
  });
}

template <typename T>
Tensor<T> mean_all(const Tensor<T>& x) {
  return scale(sum_all(x), T(1) / static_cast<T>(x.numel()));
}

template <typename T>
Tensor<T> mean_over_axes(const Tensor<T>& x, std::vector<int> axes) {
  const int rank = x.rank();
  std::vector<bool> reduced(rank, false);
  for (int& a : axes) {
    a = normalize_axis(a, rank, x.shape());
    if (reduced[a]) throw ShapeError("mean_over_axes: repeated axis");
    reduced[a] = true;
  }
  Shape out_shape;
  std::int64_t count = 1;
  for (int i = 0; i < rank; ++i) {
    if (reduced[i])
      count *= x.shape()[i];
    else
      out_shape.push_back(x.shape()[i]);
  }
  // Flat output offset for every input element.
  const Shape out_strides = strides_of(out_shape);
  std::vector<std::int64_t> target(static_cast<std::size_t>(x.numel()));
  {
    std::vector<std::int64_t> idx(rank, 0);
    for (std::int64_t flat = 0; flat < x.numel(); ++flat) {
      std::int64_t off = 0;
      for (int i = 0, o = 0; i < rank; ++i)
        if (!reduced[i]) off += idx[i] * out_strides[o++];
      target[flat] = off;
      for (int i = rank - 1; i >= 0; --i) {
        if (++idx[i] < x.shape()[i]) break;
        idx[i] = 0;
      }
    }
  }
  std::vector<T> out(static_cast<std::size_t>(numel(out_shape)), T(0));
  const T inv = T(1) / static_cast<T>(count);
  const auto in = x.data();
  for (std::size_t i = 0; i < target.size(); ++i) out[target[i]] += in[i];
  for (auto& v : out) v *= inv;
  auto xn = x.node();
  return make_result<T>("mean_over_axes", out_shape, std::move(out), {&x},
                        [xn, target = std::move(target), inv](detail::Node<T>& self) {
                          auto& gx = xn->ensure_grad();
                          for (std::size_t i = 0; i < target.size(); ++i)
                            gx[i] += inv * self.grad[target[i]];
                        });
}

template <typename T>
Tensor<T> layer_norm(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta, T eps) {
  if (x.rank() < 1 || gamma.rank() != 1 || beta.rank() != 1 || gamma.dim(0) != x.dim(-1) ||
      beta.dim(0) != x.dim(-1))
    throw ShapeError("layer_norm: input " + to_string(x.shape()) + " with gamma " +
                     to_string(gamma.shape()) + " and beta " + to_string(beta.shape()));
  const std::int64_t c = x.dim(-1);
  const std::int64_t rows = x.numel() / c;
  std::vector<T> out(static_cast<std::size_t>(x.numel()));
  std::vector<T> xhat(out.size());
  std::vector<T> rstd(static_cast<std::size_t>(rows));
  const T* px = x.data().data();
  const T* pg = gamma.data().data();
  const T* pb = beta.data().data();
  for (std::int64_t r = 0; r < rows; ++r) {
    const T* row = px + r * c;
    T mean = 0;
    for (std::int64_t i = 0; i < c; ++i) mean += row[i];
    mean /= static_cast<T>(c);
    T var = 0;
    for (std::int64_t i = 0; i < c; ++i) var += (row[i] - mean) * (row[i] - mean);
    var /= static_cast<T>(c);
    const T rs = T(1) / std::sqrt(var + eps);
    rstd[r] = rs;
    for (std::int64_t i = 0; i < c; ++i) {
      const T h = (row[i] - mean) * rs;
      xhat[r * c + i] = h;
      out[r * c + i] = pg[i] * h + pb[i];
    }
  }
  auto xn = x.node(), gn = gamma.node(), bn = beta.node();
  return make_result<T>(
      "layer_norm", x.shape(), std::move(out), {&x, &gamma, &beta},
      [xn, gn, bn, c, rows, xhat = std::move(xhat), rstd = std::move(rstd)](detail::Node<T>& self) {
        const T* g = self.grad.data();
        const T* pg = gn->data->data();
        if (wants_grad(gn) || wants_grad(bn)) {
          auto* gg = wants_grad(gn) ? gn->ensure_grad().data() : nullptr;
          auto* gb = wants_grad(bn) ? bn->ensure_grad().data() : nullptr;
          for (std::int64_t r = 0; r < rows; ++r)
            for (std::int64_t i = 0; i < c; ++i) {
              if (gg) gg[i] += g[r * c + i] * xhat[r * c + i];
              if (gb) gb[i] += g[r * c + i];
            }
        }
        if (wants_grad(xn)) {
          T* gx = xn->ensure_grad().data();
          for (std::int64_t r = 0; r < rows; ++r) {
            T mean_d = 0, mean_dh = 0;
            for (std::int64_t i = 0; i < c; ++i) {
              const T d = g[r * c + i] * pg[i];
              mean_d += d;
              mean_dh += d * xhat[r * c + i];
            }
            mean_d /= static_cast<T>(c);
            mean_dh /= static_cast<T>(c);
            for (std::int64_t i = 0; i < c; ++i) {
              const T d = g[r * c + i] * pg[i];
              gx[r * c + i] += rstd[r] * (d - mean_d - xhat[r * c + i] * mean_dh);
            }
          }
        }
      });
}

template <typename T>
Tensor<T> gelu(const Tensor<T>& x) {
  const T inv_sqrt2 = T(1) / std::numbers::sqrt2_v<T>;
  std::vector<T> out(x.data().begin(), x.data().end());
  for (auto& v : out) v = v * T(0.5) * (T(1) + std::erf(v * inv_sqrt2));
  auto xn = x.node();
  return make_result<T>("gelu", x.shape(), std::move(out), {&x},
                        [xn, inv_sqrt2](detail::Node<T>& self) {
                          const T inv_sqrt_2pi = inv_sqrt2 * std::numbers::inv_sqrtpi_v<T>;
                          auto& gx = xn->ensure_grad();
                          const auto& in = *xn->data;
                          for (std::size_t i = 0; i < gx.size(); ++i) {
                            const T v = in[i];
                            const T cdf = T(0.5) * (T(1) + std::erf(v * inv_sqrt2));
                            const T pdf = inv_sqrt_2pi * std::exp(T(-0.5) * v * v);
                            gx[i] += self.grad[i] * (cdf + v * pdf);
                          }
                        });
}

template <typename T>
Tensor<T> softmax_last(const Tensor<T>& x) {
  const std::int64_t c = x.dim(-1);
  const std::int64_t rows = x.numel() / c;
  std::vector<T> out(x.data().begin(), x.data().end());
  for (std::int64_t r = 0; r < rows; ++r) {
    T* row = out.data() + r * c;
    const T mx = *std::max_element(row, row + c);
    T total = 0;
    for (std::int64_t i = 0; i < c; ++i) total += (row[i] = std::exp(row[i] - mx));
    for (std::int64_t i = 0; i < c; ++i) row[i] /= total;
  }
  auto probs = std::make_shared<std::vector<T>>(out);
  auto xn = x.node();
  return make_result<T>("softmax", x.shape(), std::move(out), {&x},
                        [xn, probs, c, rows](detail::Node<T>& self) {
                          auto& gx = xn->ensure_grad();
                          const auto& p = *probs;
                          for (std::int64_t r = 0; r < rows; ++r) {
                            T dot = 0;
                            for (std::int64_t i = 0; i < c; ++i)
                              dot += self.grad[r * c + i] * p[r * c + i];
                            for (std::int64_t i = 0; i < c; ++i)
                              gx[r * c + i] += p[r * c + i] * (self.grad[r * c + i] - dot);
                          }
                        });
}

template <typename T>
Tensor<T> log_softmax_last(const Tensor<T>& x) {
  const std::int64_t c = x.dim(-1);
  const std::int64_t rows = x.numel() / c;
  std::vector<T> out(x.data().begin(), x.data().end());
  for (std::int64_t r = 0; r < rows; ++r) {
    T* row = out.data() + r * c;
    const T mx = *std::max_element(row, row + c);
    T total = 0;
    for (std::int64_t i = 0; i < c; ++i) total += std::exp(row[i] - mx);
    const T lse = mx + std::log(total);
    for (std::int64_t i = 0; i < c; ++i) row[i] -= lse;
  }
  auto logp = std::make_shared<std::vector<T>>(out);
  auto xn = x.node();
  return make_result<T>("log_softmax", x.shape(), std::move(out), {&x},
                        [xn, logp, c, rows](detail::Node<T>& self) {
                          auto& gx = xn->ensure_grad();
                          const auto& lp = *logp;
                          for (std::int64_t r = 0; r < rows; ++r) {
                            T total = 0;
                            for (std::int64_t i = 0; i < c; ++i) total += self.grad[r * c + i];
                            for (std::int64_t i = 0; i < c; ++i)
                              gx[r * c + i] += self.grad[r * c + i] - std::exp(lp[r * c + i]) * total;
                          }
                        });
}

template <typename T>
Tensor<T> reshape(const Tensor<T>& x, Shape shape) {
  for (auto e : shape)
    if (e <= 0) throw ShapeError("reshape: non-positive extent in " + to_string(shape));
  if (numel(shape) != x.numel())
    throw ShapeError("reshape: cannot view " + to_string(x.shape()) + " as " + to_string(shape));
  auto node = std::make_shared<detail::Node<T>>();
  node->op = "reshape";
  node->shape = std::move(shape);
  node->data = x.node()->data;  // row-major layout is unchanged
  if (grad_enabled() && x.requires_grad()) {
    node->requires_grad = true;
    node->inputs.push_back(x.node());
    auto xn = x.node();
    node->backward = [xn](detail::Node<T>& self) {
      auto& gx = xn->ensure_grad();
      for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += self.grad[i];
    };
  }
  return Tensor<T>::from_node(std::move(node));
}

template <typename T>
Tensor<T> permute(const Tensor<T>& x, const std::vector<int>& axes) {
  const int rank = x.rank();
  if (static_cast<int>(axes.size()) != rank)
    throw ShapeError("permute: " + std::to_string(axes.size()) + " axes for " + to_string(x.shape()));
  std::vector<bool> used(rank, false);
  for (int a : axes) {
    if (a < 0 || a >= rank || used[a])
      throw ShapeError("permute: invalid axis permutation for " + to_string(x.shape()));
    used[a] = true;
  }
  Shape out_shape(rank);
  const Shape in_strides = strides_of(x.shape());
  Shape src_strides(rank);
  for (int i = 0; i < rank; ++i) {
    out_shape[i] = x.shape()[axes[i]];
    src_strides[i] = in_strides[axes[i]];
  }
  std::vector<std::int64_t> index(static_cast<std::size_t>(x.numel()));
  std::vector<std::int64_t> idx(rank, 0);
  std::int64_t src = 0;
  for (std::size_t flat = 0; flat < index.size(); ++flat) {
    index[flat] = src;
    for (int i = rank - 1; i >= 0; --i) {
      src += src_strides[i];
      if (++idx[i] < out_shape[i]) break;
      src -= src_strides[i] * out_shape[i];
      idx[i] = 0;
    }
  }
  return gather(x, index, std::move(out_shape));
}

template <typename T>
Tensor<T> slice(const Tensor<T>& x, int axis, std::int64_t start, std::int64_t length) {
  const int a = normalize_axis(axis, x.rank(), x.shape());
  const std::int64_t extent = x.shape()[a];
  if (start < 0 || length <= 0 || start + length > extent)
    throw ShapeError("slice: range [" + std::to_string(start) + ", " +
                     std::to_string(start + length) + ") outside axis of extent " +
                     std::to_string(extent));
  std::int64_t outer = 1, inner = 1;
  for (int i = 0; i < a; ++i) outer *= x.shape()[i];
  for (int i = a + 1; i < x.rank(); ++i) inner *= x.shape()[i];
  Shape out_shape = x.shape();
  out_shape[a] = length;
  std::vector<std::int64_t> index;
  index.reserve(static_cast<std::size_t>(outer * length * inner));
  for (std::int64_t o = 0; o < outer; ++o)
    for (std::int64_t s = 0; s < length; ++s)
      for (std::int64_t i = 0; i < inner; ++i) index.push_back((o * extent + start + s) * inner + i);
  return gather(x, index, std::move(out_shape));
}

template <typename T>
Tensor<T> concat(const std::vector<Tensor<T>>& parts, int axis) {
  if (parts.empty()) throw ShapeError("concat: no inputs");
  const Shape& first = parts.front().shape();
  const int rank = static_cast<int>(first.size());
  const int a = normalize_axis(axis, rank, first);
  Shape out_shape = first;
  out_shape[a] = 0;
  for (const auto& p : parts) {
    bool ok = p.rank() == rank;
    for (int i = 0; ok && i < rank; ++i)
      if (i != a && p.shape()[i] != first[i]) ok = false;
    if (!ok)
      throw ShapeError("concat: shape " + to_string(p.shape()) + " incompatible with " +
                       to_string(first) + " along axis " + std::to_string(a));
    out_shape[a] += p.shape()[a];
  }
  std::int64_t outer = 1, inner = 1;
  for (int i = 0; i < a; ++i) outer *= first[i];
  for (int i = a + 1; i < rank; ++i) inner *= first[i];

  std::vector<T> out;
  out.reserve(static_cast<std::size_t>(numel(out_shape)));
  for (std::int64_t o = 0; o < outer; ++o)
    for (const auto& p : parts) {
      const std::int64_t block = p.shape()[a] * inner;
      const T* src = p.data().data() + o * block;
      out.insert(out.end(), src, src + block);
    }

  auto node = std::make_shared<detail::Node<T>>();
  node->op = "concat";
  node->shape = out_shape;
  node->data = std::make_shared<std::vector<T>>(std::move(out));
  bool needs = false;
  for (const auto& p : parts) needs = needs || p.requires_grad();
  if (grad_enabled() && needs) {
    node->requires_grad = true;
    std::vector<NodePtr<T>> ins;
    std::vector<std::int64_t> blocks;
    for (const auto& p : parts) {
      ins.push_back(p.node());
      blocks.push_back(p.shape()[a] * inner);
    }
    node->inputs = ins;
    node->backward = [ins, blocks, outer](detail::Node<T>& self) {
      std::int64_t row = 0;
      for (auto b : blocks) row += b;
      std::int64_t offset = 0;
      for (std::size_t k = 0; k < ins.size(); ++k) {
        if (ins[k]->requires_grad) {
          auto& g = ins[k]->ensure_grad();
          for (std::int64_t o = 0; o < outer; ++o)
            for (std::int64_t i = 0; i < blocks[k]; ++i)
              g[o * blocks[k] + i] += self.grad[o * row + offset + i];
        }
        offset += blocks[k];
      }
    };
  }
  return Tensor<T>::from_node(std::move(node));
}

template <typename T>
Tensor<T> gather(const Tensor<T>& x, const std::vector<std::int64_t>& index, Shape out_shape) {
  if (static_cast<std::int64_t>(index.size()) != numel(out_shape))
    throw ShapeError("gather: " + std::to_string(index.size()) + " indices for output " +
                     to_string(out_shape));
  const std::int64_t n = x.numel();
  std::vector<T> out(index.size());
  const T* px = x.data().data();
  for (std::size_t i = 0; i < index.size(); ++i) {
    const auto src = index[i];
    if (src >= n) throw ShapeError("gather: index out of range for " + to_string(x.shape()));
    out[i] = src >= 0 ? px[src] : T(0);
  }
  auto xn = x.node();
  return make_result<T>("gather", std::move(out_shape), std::move(out), {&x},
                        [xn, index](detail::Node<T>& self) {
                          auto& gx = xn->ensure_grad();
                          for (std::size_t i = 0; i < index.size(); ++i)
                            if (index[i] >= 0) gx[index[i]] += self.grad[i];
                        });
}

#define MORPH_INSTANTIATE_OPS(T)                                                             \
  template Tensor<T> matmul(const Tensor<T>&, const Tensor<T>&);                             \
  template Tensor<T> linear(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);           \
  template Tensor<T> add(const Tensor<T>&, const Tensor<T>&);                                \
  template Tensor<T> sub(const Tensor<T>&, const Tensor<T>&);                                \
  template Tensor<T> mul(const Tensor<T>&, const Tensor<T>&);                                \
  template Tensor<T> scale(const Tensor<T>&, T);                                             \
  template Tensor<T> scale_leading(const Tensor<T>&, const std::vector<T>&);                 \
  template Tensor<T> sum_all(const Tensor<T>&);                                              \
  template Tensor<T> mean_all(const Tensor<T>&);                                             \
  template Tensor<T> mean_over_axes(const Tensor<T>&, std::vector<int>);                     \
  template Tensor<T> layer_norm(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, T);    \
  template Tensor<T> gelu(const Tensor<T>&);                                                 \
  template Tensor<T> softmax_last(const Tensor<T>&);                                         \
  template Tensor<T> log_softmax_last(const Tensor<T>&);                                     \
  template Tensor<T> reshape(const Tensor<T>&, Shape);                                       \
  template Tensor<T> permute(const Tensor<T>&, const std::vector<int>&);                     \
  template Tensor<T> slice(const Tensor<T>&, int, std::int64_t, std::int64_t);               \
  template Tensor<T> concat(const std::vector<Tensor<T>>&, int);                             \
  template Tensor<T> gather(const Tensor<T>&, const std::vector<std::int64_t>&, Shape);

MORPH_INSTANTIATE_OPS(float)
MORPH_INSTANTIATE_OPS(double)

}  // namespace morph
