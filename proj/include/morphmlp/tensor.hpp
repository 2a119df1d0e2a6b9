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

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace morph {

using Shape = std::vector<std::int64_t>;

enum class DType : std::uint8_t { f32 = 0, f64 = 1 };

template <typename T>
constexpr DType dtype_of();
template <>
constexpr DType dtype_of<float>() {
  return DType::f32;
}
template <>
constexpr DType dtype_of<double>() {
  return DType::f64;
}

std::string dtype_name(DType dtype);
std::size_t dtype_size(DType dtype);

/// Thrown for any extent, rank or axis violation. The message names the
/// offending shapes.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown for misuse of the gradient tape (non-scalar loss, detached loss,
/// backward over an already consumed graph).
class GradError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

std::int64_t numel(const Shape& shape);
std::string to_string(const Shape& shape);
Shape strides_of(const Shape& shape);

// Gradient recording is on by default; NoGradGuard disables it for the
// current thread within its scope.
bool grad_enabled();
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

namespace detail {

std::uint64_t next_node_id();

template <typename T>
struct Node {
  std::uint64_t id = next_node_id();
  const char* op = "leaf";
  Shape shape;
  std::shared_ptr<std::vector<T>> data;
  std::vector<T> grad;  // empty until a gradient reaches this node
  bool requires_grad = false;
  bool consumed = false;
  std::vector<std::shared_ptr<Node>> inputs;
  // Reads this node's grad and accumulates into the inputs' grads.
  std::function<void(Node&)> backward;

  bool is_leaf() const { return inputs.empty(); }
  std::vector<T>& ensure_grad() {
    if (grad.empty()) grad.assign(data->size(), T(0));
    return grad;
  }
};

}  // namespace detail

/// Dense row-major tensor handle. Copies share the underlying node, so a
/// parameter tensor held by a layer and by an optimizer is the same object.
template <typename T>
class Tensor {
 public:
  using value_type = T;
  using NodePtr = std::shared_ptr<detail::Node<T>>;

  Tensor() = default;
  explicit Tensor(Shape shape, bool requires_grad = false);
  Tensor(Shape shape, std::vector<T> values, bool requires_grad = false);

  static Tensor full(Shape shape, T value, bool requires_grad = false);
  static Tensor scalar(T value, bool requires_grad = false);
  static Tensor from_node(NodePtr node) {
    Tensor t;
    t.node_ = std::move(node);
    return t;
  }

  bool defined() const { return static_cast<bool>(node_); }
  const Shape& shape() const { return node_->shape; }
  int rank() const { return static_cast<int>(node_->shape.size()); }
  std::int64_t dim(int axis) const;
  std::int64_t numel() const { return static_cast<std::int64_t>(node_->data->size()); }
  constexpr DType dtype() const { return dtype_of<T>(); }

  std::span<const T> data() const { return *node_->data; }
  std::span<T> mutable_data() { return *node_->data; }
  T item() const;
  T at(std::initializer_list<std::int64_t> index) const;

  bool requires_grad() const { return node_->requires_grad; }
  void set_requires_grad(bool value);
  bool has_grad() const { return !node_->grad.empty(); }
  std::span<const T> grad() const { return node_->grad; }
  std::span<T> mutable_grad() { return node_->ensure_grad(); }
  void zero_grad() { node_->grad.clear(); }

  /// New leaf holding a copy of the data, disconnected from any tape.
  Tensor detach() const;

  std::uint64_t node_id() const { return node_->id; }
  const char* op_name() const { return node_->op; }
  const NodePtr& node() const { return node_; }

 private:
  NodePtr node_;
};

/// Ordered record of the differentiable operations that produced a loss.
/// Entries are in execution order; backward walks them in reverse.
template <typename T>
struct Tape {
  std::vector<std::shared_ptr<detail::Node<T>>> nodes;
};

template <typename T>
Tape<T> collect_tape(const Tensor<T>& loss);

/// Populates grad() of every requires_grad leaf reachable from `loss`.
/// The graph is released afterwards; a second call on it throws GradError.
template <typename T>
void backward(const Tensor<T>& loss);

}  // namespace morph
