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

#include "causalnet/tensor.hpp"

#include <cassert>
#include <cmath>
#include <sstream>

#include "causalnet/error.hpp"

namespace causalnet {

std::size_t shape_size(const Shape& shape) noexcept {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ')';
  return os.str();
}

Tensor::Tensor() : data_(std::make_shared<const std::vector<double>>(1, 0.0)) {}

Tensor::Tensor(Shape shape, std::vector<double> values) : shape_(std::move(shape)) {
  if (shape_size(shape_) != values.size()) {
    throw_error(ErrorKind::Shape, "tensor: shape " + shape_string(shape_) + " holds " +
                                      std::to_string(shape_size(shape_)) + " values, got " +
                                      std::to_string(values.size()));
  }
  data_ = std::make_shared<const std::vector<double>>(std::move(values));
}

Tensor Tensor::scalar(double value) { return Tensor({}, {value}); }

Tensor Tensor::zeros(Shape shape) { return full(std::move(shape), 0.0); }

Tensor Tensor::ones(Shape shape) { return full(std::move(shape), 1.0); }

Tensor Tensor::full(Shape shape, double value) {
  std::vector<double> v(shape_size(shape), value);
  return Tensor(std::move(shape), std::move(v));
}

Tensor Tensor::matrix(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r ? rows.begin()->size() : 0;
  std::vector<double> v;
  v.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw_error(ErrorKind::Shape, "tensor: ragged matrix literal");
    v.insert(v.end(), row.begin(), row.end());
  }
  return Tensor({r, c}, std::move(v));
}

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= shape_.size()) {
    throw_error(ErrorKind::Shape, "tensor: axis " + std::to_string(axis) + " out of range for " +
                                      shape_string(shape_));
  }
  return shape_[axis];
}

double Tensor::at(std::size_t row, std::size_t col) const {
  if (rank() != 2) throw_error(ErrorKind::Shape, "tensor: at() needs rank 2, got " + shape_string(shape_));
  return (*data_)[row * shape_[1] + col];
}

double Tensor::item() const {
  if (size() != 1) throw_error(ErrorKind::Shape, "tensor: item() on " + shape_string(shape_));
  return (*data_)[0];
}

Tensor Tensor::detach() const {
  Tensor t;
  t.shape_ = shape_;
  t.data_ = data_;
  return t;
}

Tensor Tape::variable(const Tensor& value) {
  Tensor t = value.detach();
  t.tape_ = this;
  t.node_ = nodes_.size();
  nodes_.push_back(Node{value.shape(), {}, {}});
  return t;
}

Tensor Tape::record(Shape shape, std::vector<double> values,
                    std::initializer_list<const Tensor*> operands, BackwardFn rule) {
  return record(std::move(shape), std::make_shared<const std::vector<double>>(std::move(values)), operands,
                std::move(rule));
}

Tensor Tape::record(Shape shape, std::shared_ptr<const std::vector<double>> values,
                    std::initializer_list<const Tensor*> operands, BackwardFn rule) {
  if (shape_size(shape) != values->size()) {
    throw_error(ErrorKind::Shape, "tape: shape " + shape_string(shape) + " does not match " +
                                      std::to_string(values->size()) + " values");
  }
#ifndef NDEBUG
  bool finite_inputs = true;
  for (const Tensor* op : operands) {
    for (double v : op->values()) finite_inputs = finite_inputs && std::isfinite(v);
  }
  if (finite_inputs) {
    for (double v : *values) assert(std::isfinite(v) && "non-finite forward value");
  }
#endif
  Tape* tape = nullptr;
  for (const Tensor* op : operands) {
    if (!op->tape_) continue;
    if (tape && tape != op->tape_) {
      throw_error(ErrorKind::Shape, "tape: operands recorded on different tapes");
    }
    tape = op->tape_;
  }
  Tensor out;
  out.shape_ = std::move(shape);
  out.data_ = std::move(values);
  if (!tape) return out;

  Node node;
  node.shape = out.shape_;
  node.parents.reserve(operands.size());
  for (const Tensor* op : operands) node.parents.push_back(op->tape_ ? op->node_ : kNone);
  node.rule = std::move(rule);
  out.tape_ = tape;
  out.node_ = tape->nodes_.size();
  tape->nodes_.push_back(std::move(node));
  return out;
}

Gradients Tape::backward(const Tensor& loss) {
  if (loss.tape_ != this) throw_error(ErrorKind::Shape, "backward: loss is not recorded on this tape");
  if (loss.size() != 1) {
    throw_error(ErrorKind::Shape, "backward: loss must be a scalar, got shape " + shape_string(loss.shape()));
  }
  Gradients out;
  out.tape_ = this;
  auto& grads = out.grads_;
  grads.resize(nodes_.size());
  grads[loss.node_].assign(1, 1.0);

  std::vector<std::span<double>> buffers;
  for (std::size_t i = loss.node_ + 1; i-- > 0;) {
    Node& node = nodes_[i];
    if (grads[i].empty() || !node.rule) continue;
    buffers.clear();
    for (std::size_t p : node.parents) {
      if (p == kNone) {
        buffers.emplace_back();
        continue;
      }
      if (grads[p].empty()) grads[p].assign(shape_size(nodes_[p].shape), 0.0);
      buffers.emplace_back(grads[p]);
    }
    node.rule(grads[i], buffers);
    // Interior gradients are no longer needed once propagated.
    if (i != loss.node_) std::vector<double>().swap(grads[i]);
  }
  return out;
}

Tensor Gradients::of(const Tensor& t) const {
  if (t.tape() != tape_) throw_error(ErrorKind::Shape, "gradients: tensor is not on the differentiated tape");
  const auto& g = grads_[t.node()];
  if (g.empty()) return Tensor::zeros(t.shape());
  return Tensor(t.shape(), g);
}

bool Gradients::reached(const Tensor& t) const {
  return t.tape() == tape_ && t.node() < grads_.size() && !grads_[t.node()].empty();
}

}  // namespace causalnet
