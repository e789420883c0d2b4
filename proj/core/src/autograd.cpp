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

#include "latentatlas/autograd.hpp"

#include <cassert>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace latentatlas::ag {
namespace {

thread_local bool g_grad_enabled = true;

using Backward = std::function<std::vector<Var>(const Var&)>;

void check_same_shape(const Var& a, const Var& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch");
  }
}

// For each of the 9 kernel taps and each output pixel, the source pixel index
// or -1 when the tap falls into the zero padding.
std::vector<int> tap_sources(int height, int width) {
  const int pixels = height * width;
  std::vector<int> src(static_cast<std::size_t>(9 * pixels), -1);
  for (int ky = 0; ky < 3; ++ky) {
    for (int kx = 0; kx < 3; ++kx) {
      const int tap = ky * 3 + kx;
      for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
          const int sy = y + ky - 1;
          const int sx = x + kx - 1;
          if (sy >= 0 && sy < height && sx >= 0 && sx < width) {
            src[tap * pixels + y * width + x] = sy * width + sx;
          }
        }
      }
    }
  }
  return src;
}

Matrix stable_softplus(const Matrix& x) {
  return x.unaryExpr([](double v) {
    return std::max(v, 0.0) + std::log1p(std::exp(-std::abs(v)));
  });
}

Matrix stable_sigmoid(const Matrix& x) {
  return x.unaryExpr([](double v) {
    if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
    const double e = std::exp(v);
    return e / (1.0 + e);
  });
}

}  // namespace

Var::Var(Matrix value, bool requires_grad) : node_(std::make_shared<Node>()) {
  node_->value = std::move(value);
  node_->requires_grad = requires_grad;
}

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) {
  g_grad_enabled = false;
}
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

Var make_op(Matrix value, std::vector<Var> inputs, Backward backward) {
  Var out;
  out.node_ = std::make_shared<Node>();
  out.node_->value = std::move(value);
  if (!g_grad_enabled) return out;
  bool any = false;
  for (const Var& in : inputs) any = any || in.requires_grad();
  if (!any) return out;
  out.node_->requires_grad = true;
  out.node_->parents.reserve(inputs.size());
  for (const Var& in : inputs) out.node_->parents.push_back(in.node());
  out.node_->backward = std::move(backward);
  return out;
}

std::vector<Var> grad(const Var& output, std::span<const Var> inputs,
                      bool create_graph) {
  if (output.rows() != 1 || output.cols() != 1) {
    throw std::invalid_argument("grad: output must be 1x1");
  }
  // Reverse topological order by iterative post-order DFS.
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  if (output.requires_grad()) {
    std::vector<std::pair<Node*, std::size_t>> stack;
    stack.emplace_back(output.node().get(), 0);
    visited.insert(output.node().get());
    while (!stack.empty()) {
      auto& [node, next] = stack.back();
      if (next < node->parents.size()) {
        Node* parent = node->parents[next++].get();
        if (parent->requires_grad && visited.insert(parent).second) {
          stack.emplace_back(parent, 0);
        }
      } else {
        order.push_back(node);
        stack.pop_back();
      }
    }
  }

  std::unordered_map<Node*, Var> grads;
  {
    std::optional<NoGradGuard> guard;
    if (!create_graph) guard.emplace();
    if (output.requires_grad()) {
      grads[output.node().get()] = constant(Matrix::Ones(1, 1));
    }
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      Node* node = *it;
      auto found = grads.find(node);
      if (found == grads.end() || !node->backward) continue;
      const Var g = found->second;
      std::vector<Var> parent_grads = node->backward(g);
      assert(parent_grads.size() == node->parents.size());
      for (std::size_t i = 0; i < parent_grads.size(); ++i) {
        Node* parent = node->parents[i].get();
        if (!parent_grads[i].defined() || !parent->requires_grad) continue;
        auto [slot, inserted] = grads.try_emplace(parent, parent_grads[i]);
        if (!inserted) slot->second = add(slot->second, parent_grads[i]);
      }
    }
  }

  std::vector<Var> result;
  result.reserve(inputs.size());
  for (const Var& in : inputs) {
    auto found = in.defined() ? grads.find(in.node().get()) : grads.end();
    if (found != grads.end()) {
      result.push_back(found->second);
    } else {
      result.push_back(constant(Matrix::Zero(in.rows(), in.cols())));
    }
  }
  return result;
}

Var add(const Var& a, const Var& b) {
  check_same_shape(a, b, "add");
  return make_op(a.value() + b.value(), {a, b},
                 [](const Var& g) { return std::vector<Var>{g, g}; });
}

Var sub(const Var& a, const Var& b) {
  check_same_shape(a, b, "sub");
  return make_op(a.value() - b.value(), {a, b}, [](const Var& g) {
    return std::vector<Var>{g, scale(g, -1.0)};
  });
}

Var mul(const Var& a, const Var& b) {
  check_same_shape(a, b, "mul");
  return make_op(a.value().cwiseProduct(b.value()), {a, b},
                 [a, b](const Var& g) {
                   return std::vector<Var>{mul(g, b), mul(g, a)};
                 });
}

Var scale(const Var& a, double factor) {
  return make_op(a.value() * factor, {a}, [factor](const Var& g) {
    return std::vector<Var>{scale(g, factor)};
  });
}

Var add_scalar(const Var& a, double offset) {
  return make_op(a.value().array() + offset, {a},
                 [](const Var& g) { return std::vector<Var>{g}; });
}

Var mul_const(const Var& a, const Matrix& factor) {
  if (a.rows() != factor.rows() || a.cols() != factor.cols()) {
    throw std::invalid_argument("mul_const: shape mismatch");
  }
  return make_op(a.value().cwiseProduct(factor), {a}, [factor](const Var& g) {
    return std::vector<Var>{mul_const(g, factor)};
  });
}

Var mul_scalar(const Var& a, const Var& s) {
  if (s.rows() != 1 || s.cols() != 1) {
    throw std::invalid_argument("mul_scalar: s must be 1x1");
  }
  return make_op(a.value() * s.scalar(), {a, s}, [a, s](const Var& g) {
    return std::vector<Var>{mul_scalar(g, s), sum_all(mul(g, a))};
  });
}

Var matmul(const Var& a, const Var& b) {
  if (a.cols() != b.rows()) {
    throw std::invalid_argument("matmul: inner dimension mismatch");
  }
  return make_op(a.value() * b.value(), {a, b}, [a, b](const Var& g) {
    return std::vector<Var>{matmul(g, transpose(b)), matmul(transpose(a), g)};
  });
}

Var transpose(const Var& a) {
  return make_op(a.value().transpose(), {a}, [](const Var& g) {
    return std::vector<Var>{transpose(g)};
  });
}

Var sum_all(const Var& a) {
  Matrix v(1, 1);
  v(0, 0) = a.value().sum();
  const Eigen::Index r = a.rows(), c = a.cols();
  return make_op(std::move(v), {a}, [r, c](const Var& g) {
    return std::vector<Var>{broadcast_scalar(g, r, c)};
  });
}

Var broadcast_scalar(const Var& s, Eigen::Index rows, Eigen::Index cols) {
  return make_op(Matrix::Constant(rows, cols, s.scalar()), {s},
                 [](const Var& g) { return std::vector<Var>{sum_all(g)}; });
}

Var row_sum(const Var& a) {
  const Eigen::Index c = a.cols();
  return make_op(a.value().rowwise().sum(), {a}, [c](const Var& g) {
    return std::vector<Var>{broadcast_cols(g, c)};
  });
}

Var broadcast_cols(const Var& column, Eigen::Index cols) {
  if (column.cols() != 1) {
    throw std::invalid_argument("broadcast_cols: expected a column");
  }
  return make_op(column.value().replicate(1, cols), {column},
                 [](const Var& g) { return std::vector<Var>{row_sum(g)}; });
}

Var reshape(const Var& a, Eigen::Index rows, Eigen::Index cols) {
  if (rows * cols != a.value().size()) {
    throw std::invalid_argument("reshape: size mismatch");
  }
  Matrix v = Eigen::Map<const Matrix>(a.value().data(), rows, cols);
  const Eigen::Index r = a.rows(), c = a.cols();
  return make_op(std::move(v), {a}, [r, c](const Var& g) {
    return std::vector<Var>{reshape(g, r, c)};
  });
}

Var slice_rows(const Var& a, Eigen::Index start, Eigen::Index count) {
  if (start < 0 || start + count > a.rows()) {
    throw std::invalid_argument("slice_rows: out of range");
  }
  const Eigen::Index total = a.rows();
  return make_op(a.value().middleRows(start, count), {a},
                 [start, total](const Var& g) {
                   return std::vector<Var>{pad_rows(g, start, total)};
                 });
}

Var pad_rows(const Var& a, Eigen::Index start, Eigen::Index total) {
  if (start < 0 || start + a.rows() > total) {
    throw std::invalid_argument("pad_rows: out of range");
  }
  Matrix v = Matrix::Zero(total, a.cols());
  v.middleRows(start, a.rows()) = a.value();
  const Eigen::Index count = a.rows();
  return make_op(std::move(v), {a}, [start, count](const Var& g) {
    return std::vector<Var>{slice_rows(g, start, count)};
  });
}

Var leaky_relu(const Var& a, double slope) {
  Matrix mask = a.value().unaryExpr(
      [slope](double v) { return v > 0.0 ? 1.0 : slope; });
  Matrix v = a.value().cwiseProduct(mask);
  return make_op(std::move(v), {a}, [mask](const Var& g) {
    return std::vector<Var>{mul_const(g, mask)};
  });
}

Var sigmoid(const Var& a) {
  return make_op(stable_sigmoid(a.value()), {a}, [a](const Var& g) {
    const Var s = sigmoid(a);
    const Var one_minus = add_scalar(scale(s, -1.0), 1.0);
    return std::vector<Var>{mul(g, mul(s, one_minus))};
  });
}

Var softplus(const Var& a) {
  return make_op(stable_softplus(a.value()), {a}, [a](const Var& g) {
    return std::vector<Var>{mul(g, sigmoid(a))};
  });
}

Var pow(const Var& a, double exponent) {
  Matrix v = a.value().array().pow(exponent).matrix();
  return make_op(std::move(v), {a}, [a, exponent](const Var& g) {
    if (exponent == 0.0) return std::vector<Var>{Var()};
    return std::vector<Var>{mul(g, scale(pow(a, exponent - 1.0), exponent))};
  });
}

Var clamp_min(const Var& a, double lo) {
  Matrix mask =
      a.value().unaryExpr([lo](double v) { return v > lo ? 1.0 : 0.0; });
  Matrix v = a.value().cwiseMax(lo);
  return make_op(std::move(v), {a}, [mask](const Var& g) {
    return std::vector<Var>{mul_const(g, mask)};
  });
}

Var im2col3x3(const Var& a, int height, int width) {
  const int pixels = height * width;
  if (a.cols() != pixels) throw std::invalid_argument("im2col3x3: bad size");
  const int channels = static_cast<int>(a.rows());
  const std::vector<int> src = tap_sources(height, width);
  Matrix out = Matrix::Zero(9 * channels, pixels);
  const Matrix& in = a.value();
  for (int c = 0; c < channels; ++c) {
    for (int tap = 0; tap < 9; ++tap) {
      for (int p = 0; p < pixels; ++p) {
        const int s = src[tap * pixels + p];
        if (s >= 0) out(c * 9 + tap, p) = in(c, s);
      }
    }
  }
  return make_op(std::move(out), {a}, [channels, height, width](const Var& g) {
    return std::vector<Var>{col2im3x3(g, channels, height, width)};
  });
}

Var col2im3x3(const Var& cols, int channels, int height, int width) {
  const int pixels = height * width;
  if (cols.rows() != 9 * channels || cols.cols() != pixels) {
    throw std::invalid_argument("col2im3x3: bad size");
  }
  const std::vector<int> src = tap_sources(height, width);
  Matrix out = Matrix::Zero(channels, pixels);
  const Matrix& in = cols.value();
  for (int c = 0; c < channels; ++c) {
    for (int tap = 0; tap < 9; ++tap) {
      for (int p = 0; p < pixels; ++p) {
        const int s = src[tap * pixels + p];
        if (s >= 0) out(c, s) += in(c * 9 + tap, p);
      }
    }
  }
  return make_op(std::move(out), {cols}, [height, width](const Var& g) {
    return std::vector<Var>{im2col3x3(g, height, width)};
  });
}

Var upsample2x(const Var& a, int height, int width) {
  if (a.cols() != height * width) {
    throw std::invalid_argument("upsample2x: bad size");
  }
  const int out_w = 2 * width;
  Matrix out(a.rows(), 4 * height * width);
  for (int y = 0; y < 2 * height; ++y) {
    for (int x = 0; x < out_w; ++x) {
      out.col(y * out_w + x) = a.value().col((y / 2) * width + x / 2);
    }
  }
  return make_op(std::move(out), {a}, [height, width](const Var& g) {
    return std::vector<Var>{sum_pool2x(g, 2 * height, 2 * width)};
  });
}

Var sum_pool2x(const Var& a, int height, int width) {
  if (a.cols() != height * width || height % 2 != 0 || width % 2 != 0) {
    throw std::invalid_argument("sum_pool2x: bad size");
  }
  const int out_h = height / 2, out_w = width / 2;
  Matrix out = Matrix::Zero(a.rows(), out_h * out_w);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      out.col((y / 2) * out_w + x / 2) += a.value().col(y * width + x);
    }
  }
  return make_op(std::move(out), {a}, [out_h, out_w](const Var& g) {
    return std::vector<Var>{upsample2x(g, out_h, out_w)};
  });
}

}  // namespace latentatlas::ag
