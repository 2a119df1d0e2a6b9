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

#include "morphmlp/tensor.hpp"

#include <algorithm>
#include <atomic>
#include <unordered_set>

namespace morph {

std::string dtype_name(DType dtype) { return dtype == DType::f32 ? "f32" : "f64"; }

std::size_t dtype_size(DType dtype) { return dtype == DType::f32 ? 4 : 8; }

std::int64_t numel(const Shape& shape) {
  std::int64_t n = 1;
  for (auto e : shape) n *= e;
  return n;
}

std::string to_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

Shape strides_of(const Shape& shape) {
  Shape strides(shape.size(), 1);
  for (int i = static_cast<int>(shape.size()) - 2; i >= 0; --i)
    strides[i] = strides[i + 1] * shape[i + 1];
  return strides;
}

namespace {
thread_local bool tls_grad_enabled = true;
std::atomic<std::uint64_t> node_counter{0};
}  // namespace

bool grad_enabled() { return tls_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(tls_grad_enabled) { tls_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { tls_grad_enabled = previous_; }

namespace detail {
std::uint64_t next_node_id() { return node_counter.fetch_add(1, std::memory_order_relaxed); }
}  // namespace detail

template <typename T>
Tensor<T>::Tensor(Shape shape, bool requires_grad)
    : Tensor(shape, std::vector<T>(static_cast<std::size_t>(morph::numel(shape)), T(0)),
             requires_grad) {}

template <typename T>
Tensor<T>::Tensor(Shape shape, std::vector<T> values, bool requires_grad) {
  for (auto e : shape)
    if (e <= 0) throw ShapeError("tensor extents must be positive, got " + to_string(shape));
  if (static_cast<std::int64_t>(values.size()) != morph::numel(shape))
    throw ShapeError("tensor of shape " + to_string(shape) + " needs " +
                     std::to_string(morph::numel(shape)) + " values, got " +
                     std::to_string(values.size()));
  node_ = std::make_shared<detail::Node<T>>();
  node_->shape = std::move(shape);
  node_->data = std::make_shared<std::vector<T>>(std::move(values));
  node_->requires_grad = requires_grad;
}

template <typename T>
Tensor<T> Tensor<T>::full(Shape shape, T value, bool requires_grad) {
  auto n = static_cast<std::size_t>(morph::numel(shape));
  return Tensor(std::move(shape), std::vector<T>(n, value), requires_grad);
}

template <typename T>
Tensor<T> Tensor<T>::scalar(T value, bool requires_grad) {
  return Tensor(Shape{}, std::vector<T>{value}, requires_grad);
}

template <typename T>
std::int64_t Tensor<T>::dim(int axis) const {
  const int r = rank();
  const int a = axis < 0 ? axis + r : axis;
  if (a < 0 || a >= r)
    throw ShapeError("axis " + std::to_string(axis) + " out of range for " + to_string(shape()));
  return node_->shape[a];
}

template <typename T>
T Tensor<T>::item() const {
  if (numel() != 1) throw ShapeError("item() on tensor of shape " + to_string(shape()));
  return (*node_->data)[0];
}

template <typename T>
T Tensor<T>::at(std::initializer_list<std::int64_t> index) const {
  if (static_cast<int>(index.size()) != rank())
    throw ShapeError("index rank mismatch for " + to_string(shape()));
  const auto strides = strides_of(shape());
  std::int64_t off = 0;
  int i = 0;
  for (auto v : index) {
    if (v < 0 || v >= node_->shape[i]) throw ShapeError("index out of range");
    off += v * strides[i++];
  }
  return (*node_->data)[off];
}

template <typename T>
void Tensor<T>::set_requires_grad(bool value) {
  if (!node_->is_leaf()) throw GradError("requires_grad can only be set on leaf tensors");
  node_->requires_grad = value;
}

template <typename T>
Tensor<T> Tensor<T>::detach() const {
  return Tensor(shape(), *node_->data, false);
}

template <typename T>
Tape<T> collect_tape(const Tensor<T>& loss) {
  Tape<T> tape;
  std::unordered_set<const detail::Node<T>*> seen;
  std::vector<std::shared_ptr<detail::Node<T>>> stack{loss.node()};
  while (!stack.empty()) {
    auto node = std::move(stack.back());
    stack.pop_back();
    if (!node->requires_grad || !seen.insert(node.get()).second) continue;
    for (const auto& in : node->inputs) stack.push_back(in);
    tape.nodes.push_back(std::move(node));
  }
  // Node ids are issued at construction, so ascending id is execution order.
  std::sort(tape.nodes.begin(), tape.nodes.end(),
            [](const auto& a, const auto& b) { return a->id < b->id; });
  return tape;
}

template <typename T>
void backward(const Tensor<T>& loss) {
  if (!loss.defined()) throw GradError("backward on an undefined tensor");
  if (loss.numel() != 1)
    throw GradError("backward needs a scalar loss, got shape " + to_string(loss.shape()));
  if (!loss.requires_grad()) throw GradError("backward on a tensor detached from the tape");
  auto tape = collect_tape(loss);
  for (const auto& node : tape.nodes)
    if (node->consumed)
      throw GradError("backward over a graph that was already consumed; rebuild the forward pass");

  loss.node()->ensure_grad()[0] += T(1);
  for (auto it = tape.nodes.rbegin(); it != tape.nodes.rend(); ++it) {
    auto& node = **it;
    if (node.is_leaf()) continue;
    if (!node.grad.empty() && node.backward) node.backward(node);
    node.backward = nullptr;
    node.inputs.clear();
    node.grad.clear();
    node.grad.shrink_to_fit();
    node.consumed = true;
  }
}

template class Tensor<float>;
template class Tensor<double>;
template Tape<float> collect_tape(const Tensor<float>&);
template Tape<double> collect_tape(const Tensor<double>&);
template void backward(const Tensor<float>&);
template void backward(const Tensor<double>&);

}  // namespace morph
