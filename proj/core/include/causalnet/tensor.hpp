/*
 * Copyright 2026 The CausalNet Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef CAUSALNET_TENSOR_HPP
#define CAUSALNET_TENSOR_HPP

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace causalnet {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape) noexcept;
std::string shape_string(const Shape& shape);

class Tape;

// Dense row-major float64 array. Values are immutable once constructed, so
// copies are cheap and share storage. A tensor produced by an operation whose
// inputs live on a Tape is itself recorded on that tape.
class Tensor {
 public:
  Tensor();  // rank-0 scalar holding 0
  Tensor(Shape shape, std::vector<double> values);

  static Tensor scalar(double value);
  static Tensor zeros(Shape shape);
  static Tensor ones(Shape shape);
  static Tensor full(Shape shape, double value);
  static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return data_->size(); }
  std::size_t dim(std::size_t axis) const;

  std::span<const double> values() const noexcept { return {data_->data(), data_->size()}; }
  double operator[](std::size_t i) const { return (*data_)[i]; }
  // Element (row, col) of a rank-2 tensor.
  double at(std::size_t row, std::size_t col) const;
  // The single value of a one-element tensor.
  double item() const;

  bool on_tape() const noexcept { return tape_ != nullptr; }
  Tape* tape() const noexcept { return tape_; }
  std::size_t node() const noexcept { return node_; }

  // Same values, no tape link.
  Tensor detach() const;

  const std::shared_ptr<const std::vector<double>>& storage() const noexcept { return data_; }

 private:
  friend class Tape;

  Shape shape_;
  std::shared_ptr<const std::vector<double>> data_;
  Tape* tape_ = nullptr;
  std::size_t node_ = 0;
};

// Gradient rule of one recorded operation. `upstream` is dL/d(output);
// `parents` holds one accumulation buffer per operand (empty for operands
// that are constants). Rules must add into the buffers, never overwrite.
using BackwardFn =
    std::function<void(std::span<const double> upstream, std::span<const std::span<double>> parents)>;

class Gradients {
 public:
  // Gradient with the shape of `t`; zeros when `t` does not influence the loss.
  Tensor of(const Tensor& t) const;
  bool reached(const Tensor& t) const;

 private:
  friend class Tape;
  const Tape* tape_ = nullptr;
  std::vector<std::vector<double>> grads_;
};

// Records operations in execution order (which is a topological order) and
// runs reverse-mode differentiation over them. One tape per forward pass;
// confined to a single thread.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Leaf node whose gradient is retained by backward().
  Tensor variable(const Tensor& value);

  // Reverse sweep from a one-element loss. Each node is visited once.
  Gradients backward(const Tensor& loss);

  std::size_t node_count() const noexcept { return nodes_.size(); }

  // Records `values` as the result of an operation over `operands`. If no
  // operand is on a tape the result is returned as a plain constant.
  static Tensor record(Shape shape, std::vector<double> values,
                       std::initializer_list<const Tensor*> operands, BackwardFn rule);
  static Tensor record(Shape shape, std::shared_ptr<const std::vector<double>> values,
                       std::initializer_list<const Tensor*> operands, BackwardFn rule);

 private:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  struct Node {
    Shape shape;
    std::vector<std::size_t> parents;
    BackwardFn rule;
  };

  std::vector<Node> nodes_;
};

// Differentiable primitives. Binary elementwise operations broadcast over
// size-1 (or missing leading) axes; shape errors name the operator and shapes.
namespace ad {

Tensor add(const Tensor& a, const Tensor& b);
Tensor subtract(const Tensor& a, const Tensor& b);
Tensor multiply(const Tensor& a, const Tensor& b);  // Hadamard
Tensor scale(const Tensor& a, double factor);
Tensor add_scalar(const Tensor& a, double offset);

// (..., n, k) x (..., k, m). Rank 2 or 3 operands; a rank-2 operand is
// shared across the batch axis of a rank-3 one.
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);  // swaps the last two axes
Tensor concat(const Tensor& a, const Tensor& b);  // along the last axis
Tensor broadcast_to(const Tensor& a, const Shape& shape);
Tensor reshape(const Tensor& a, Shape shape);

Tensor sum(const Tensor& a);       // rank-0 result
Tensor mean(const Tensor& a);      // rank-0 result
Tensor sum_last(const Tensor& a);  // keeps the last axis with size 1

Tensor sigmoid(const Tensor& a);
Tensor tanh(const Tensor& a);
Tensor relu(const Tensor& a);  // derivative at exactly 0 is 0
Tensor abs(const Tensor& a);   // derivative at exactly 0 is 0
Tensor reciprocal(const Tensor& a);

// x * weight + bias, with bias broadcast over leading axes.
Tensor affine(const Tensor& x, const Tensor& weight, const Tensor& bias);

}  // namespace ad
}  // namespace causalnet

#endif  // CAUSALNET_TENSOR_HPP
