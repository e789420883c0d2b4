// Copyright 2026 The latentatlas Authors
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

// Minimal reverse-mode automatic differentiation over dense double matrices.
//
// Backward rules are themselves written with differentiable ops, so
// grad(..., create_graph = true) returns gradients that can be differentiated
// again. The trainer relies on this for the R1 and path-length penalties,
// which are functions of first-order gradients.
//
// Spatial tensors are stored as channels x pixels matrices; pixel index is
// y * width + x.

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace latentatlas::ag {

using Matrix = Eigen::MatrixXd;

class Var;

struct Node {
  Matrix value;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  // Maps the gradient of this node to one gradient per parent. An empty Var
  // means "no contribution".
  std::function<std::vector<Var>(const Var&)> backward;
};

class Var {
 public:
  Var() = default;
  explicit Var(Matrix value, bool requires_grad = false);

  const Matrix& value() const { return node_->value; }
  Eigen::Index rows() const { return node_->value.rows(); }
  Eigen::Index cols() const { return node_->value.cols(); }
  double scalar() const { return node_->value(0, 0); }
  bool requires_grad() const { return node_ && node_->requires_grad; }
  bool defined() const { return static_cast<bool>(node_); }

  const std::shared_ptr<Node>& node() const { return node_; }

 private:
  friend Var make_op(Matrix value, std::vector<Var> inputs,
                     std::function<std::vector<Var>(const Var&)> backward);
  std::shared_ptr<Node> node_;
};

inline Var parameter(Matrix value) { return Var(std::move(value), true); }
inline Var constant(Matrix value) { return Var(std::move(value), false); }

/// Builds a graph node. Parents and the backward closure are only kept when
/// grad mode is enabled and at least one input requires grad.
Var make_op(Matrix value, std::vector<Var> inputs,
            std::function<std::vector<Var>(const Var&)> backward);

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

/// Gradients of the 1x1 `output` with respect to each of `inputs`. Inputs not
/// reachable from `output` get a zero matrix. With `create_graph` the result
/// is itself differentiable.
std::vector<Var> grad(const Var& output, std::span<const Var> inputs,
                      bool create_graph = false);

// Elementwise / linear algebra.
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, double factor);
Var add_scalar(const Var& a, double offset);
Var mul_const(const Var& a, const Matrix& factor);
/// a * s where s is 1x1.
Var mul_scalar(const Var& a, const Var& s);
Var matmul(const Var& a, const Var& b);
Var transpose(const Var& a);

// Reductions and broadcasts.
Var sum_all(const Var& a);
Var row_sum(const Var& a);
Var broadcast_cols(const Var& column, Eigen::Index cols);
Var broadcast_scalar(const Var& s, Eigen::Index rows, Eigen::Index cols);
Var reshape(const Var& a, Eigen::Index rows, Eigen::Index cols);
Var slice_rows(const Var& a, Eigen::Index start, Eigen::Index count);
Var pad_rows(const Var& a, Eigen::Index start, Eigen::Index total);

// Nonlinearities.
Var leaky_relu(const Var& a, double slope);
Var softplus(const Var& a);
Var sigmoid(const Var& a);
Var pow(const Var& a, double exponent);
Var clamp_min(const Var& a, double lo);

// Spatial ops on channels x (height*width) tensors, 3x3 kernels, zero padding.
Var im2col3x3(const Var& a, int height, int width);
Var col2im3x3(const Var& cols, int channels, int height, int width);
Var upsample2x(const Var& a, int height, int width);
/// Adjoint of upsample2x: sums each 2x2 block.
Var sum_pool2x(const Var& a, int height, int width);

inline Var operator+(const Var& a, const Var& b) { return add(a, b); }
inline Var operator-(const Var& a, const Var& b) { return sub(a, b); }
inline Var operator*(const Var& a, double f) { return scale(a, f); }

}  // namespace latentatlas::ag
