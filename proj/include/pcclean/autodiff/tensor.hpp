// Copyright 2026 The pcclean Authors
// SPDX-License-Identifier: Apache-2.0
//
// Reverse-mode differentiation: tensors and the tape that records the
// operations applied to them.

#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pcclean/errors.hpp"

namespace pcclean::ad {

using Shape = std::vector<std::size_t>;

[[nodiscard]] inline std::size_t numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

[[nodiscard]] inline std::string shape_string(const Shape& shape) {
  std::string s = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(shape[i]);
  }
  return s + ")";
}

namespace detail {

struct Node {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;  // empty until first needed
  bool requires_grad = false;

  std::vector<double>& ensure_grad() {
    if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
    return grad;
  }
};

}  // namespace detail

/// Shared handle to an n-dimensional double array. Copies alias the same
/// storage; use clone() for a deep copy.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false) {
    const std::size_t n = numel(shape);
    return Tensor(std::move(shape), std::vector<double>(n, 0.0), requires_grad);
  }

  static Tensor scalar(double v, bool requires_grad = false) { return Tensor({}, {v}, requires_grad); }

  Tensor(Shape shape, std::vector<double> values, bool requires_grad = false)
      : node_(std::make_shared<detail::Node>()) {
    if (numel(shape) != values.size()) {
      throw InvalidArgument("Tensor: shape " + shape_string(shape) + " needs " + std::to_string(numel(shape)) +
                            " values, got " + std::to_string(values.size()));
    }
    node_->shape = std::move(shape);
    node_->value = std::move(values);
    node_->requires_grad = requires_grad;
  }

  [[nodiscard]] bool defined() const { return node_ != nullptr; }
  [[nodiscard]] const Shape& shape() const { return node_->shape; }
  [[nodiscard]] std::size_t dim(std::size_t i) const { return node_->shape.at(i); }
  [[nodiscard]] std::size_t rank() const { return node_->shape.size(); }
  [[nodiscard]] std::size_t size() const { return node_->value.size(); }
  [[nodiscard]] bool requires_grad() const { return node_->requires_grad; }

  [[nodiscard]] std::span<const double> values() const { return node_->value; }
  [[nodiscard]] std::span<double> mutable_values() const { return node_->value; }
  [[nodiscard]] const std::vector<double>& value_vector() const { return node_->value; }

  /// Accumulated gradient; all zeros if backward never reached this tensor.
  [[nodiscard]] std::span<const double> grad() const { return node_->ensure_grad(); }
  [[nodiscard]] std::span<double> mutable_grad() const { return node_->ensure_grad(); }

  void zero_grad() const {
    if (!node_->grad.empty()) std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
  }

  [[nodiscard]] double item() const {
    if (size() != 1) throw InvalidArgument("Tensor::item: tensor has " + std::to_string(size()) + " elements");
    return node_->value[0];
  }

  [[nodiscard]] Tensor clone() const {
    Tensor t(node_->shape, node_->value, node_->requires_grad);
    return t;
  }

  [[nodiscard]] detail::Node& node() const { return *node_; }
  [[nodiscard]] const std::shared_ptr<detail::Node>& node_ptr() const { return node_; }

 private:
  std::shared_ptr<detail::Node> node_;
};

/// Ordered record of executed operations. Each record owns its output node
/// and a closure propagating the output gradient to the op's inputs; records
/// are appended after their inputs exist, so reverse order is topological.
///
/// A tape constructed with recording = false makes every op a pure forward
/// computation (inference mode).
class Tape {
 public:
  explicit Tape(bool recording = true) : recording_(recording) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;
  Tape(Tape&&) = default;
  Tape& operator=(Tape&&) = default;

  [[nodiscard]] bool recording() const { return recording_; }
  [[nodiscard]] std::size_t size() const { return records_.size(); }

  /// True when an op over these inputs must be recorded.
  template <typename... Ts>
  [[nodiscard]] bool tracks(const Ts&... inputs) const {
    return recording_ && (inputs.requires_grad() || ...);
  }

  void record(const Tensor& output, std::function<void()> backward) {
    records_.push_back({output.node_ptr(), std::move(backward)});
  }

  /// Populates d(loss)/dt for every requires_grad tensor reachable from the
  /// recorded ops. Leaf gradients accumulate across calls; intermediate
  /// gradients are recomputed each call.
  void backward(const Tensor& loss) {
    if (loss.size() != 1) {
      throw InvalidArgument("backward: loss must be scalar, got shape " + shape_string(loss.shape()));
    }
    for (auto& r : records_) {
      auto& g = r.output->ensure_grad();
      std::fill(g.begin(), g.end(), 0.0);
    }
    if (!loss.requires_grad()) return;
    loss.node().ensure_grad()[0] += 1.0;
    for (auto it = records_.rbegin(); it != records_.rend(); ++it) it->backward();
  }

  void clear() { records_.clear(); }

 private:
  struct Record {
    std::shared_ptr<detail::Node> output;
    std::function<void()> backward;
  };
  std::vector<Record> records_;
  bool recording_;
};

}  // namespace pcclean::ad
