// Copyright 2026 The lxlab Authors.
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
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "lxlab/numerics/param.hpp"
#include "lxlab/numerics/tensor.hpp"

namespace lxlab {

class Tape;

// Handle to a value recorded on a Tape.
struct Var {
  Tape* tape = nullptr;
  std::uint32_t id = 0;

  const Tensor& value() const;
  Shape shape() const { return value().shape(); }
};

// Reverse-mode autodiff tape. Each op appends its output node together with
// a backward closure; nodes are topologically ordered by construction, so
// backward() is a single reverse sweep. Parameter leaves accumulate their
// gradient into Param::grad.
class Tape {
 public:
  using Backward = std::function<void(Tape&, std::uint32_t self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor t);
  Var variable(Tensor t);
  Var param(Param& p);

  // Appends an op output. The backward closure is dropped when no input
  // requires a gradient. Non-finite outputs raise NumericError naming `op`.
  Var record(const char* op, Tensor value, std::initializer_list<Var> inputs, Backward fn);

  const Tensor& value(Var v) const { return nodes_.at(v.id).value; }
  const Tensor& value(std::uint32_t id) const { return nodes_[id].value; }
  bool requires_grad(Var v) const { return nodes_.at(v.id).requires_grad; }
  bool requires_grad(std::uint32_t id) const { return nodes_[id].requires_grad; }

  // Gradient of the last backward() root with respect to v; zeros if v
  // did not influence the root.
  Tensor grad(Var v) const;
  // Mutable gradient buffer of a node, allocated on first use. For use by
  // backward closures.
  Tensor& grad_buffer(std::uint32_t id);
  const Tensor& upstream(std::uint32_t id) const { return nodes_[id].grad; }

  void backward(Var root);
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    Backward backward;
    Param* param = nullptr;
  };
  std::vector<Node> nodes_;
  std::unordered_map<const Param*, std::uint32_t> param_nodes_;
};

namespace ops {

Var matmul(Var a, Var b);
Var add(Var a, Var b);
// Elementwise product of equally shaped tensors.
Var mul(Var a, Var b);
// x viewed as rows x n, bias of n entries added to every row.
Var add_bias(Var x, Var bias);
Var linear(Var x, Var weight, Var bias);
Var scale(Var x, double factor);
Var gelu(Var x);
// Softmax along `axis`, stabilized by max subtraction.
Var softmax(Var x, std::size_t axis);
// Per-row normalization over the last axis followed by gamma * xhat + beta.
Var layernorm(Var x, Var gamma, Var beta, double eps);
// Row gather; out row r is table row idx[r].
Var gather_rows(Var table, std::span<const int> idx);
Var concat_rows(Var a, Var b);
Var concat_cols(Var a, Var b);
Var sum(Var x);
Var mean(Var x);
// Mean negative log-softmax over rows whose target differs from
// ignore_index. Throws ValidationError if every row is ignored.
Var cross_entropy(Var logits, std::span<const int> targets, int ignore_index);
// out[p, c] = sum_ij h[p, i] * u[i, c, j] * t[p, j]; u has shape {n, C, n}.
Var bilinear(Var h, Var t, Var u);

}  // namespace ops

namespace kernels {

double gelu(double x);
double gelu_grad(double x);
// Softmax of a tensor along an axis, without recording.
Tensor softmax(const Tensor& x, std::size_t axis);

}  // namespace kernels

constexpr int kIgnoreIndex = -100;

}  // namespace lxlab
