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

#include "lxlab/numerics/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lxlab/errors.hpp"

namespace lxlab {

const Tensor& Var::value() const { return tape->value(*this); }

Var Tape::constant(Tensor t) {
  nodes_.push_back(Node{std::move(t), {}, false, {}, nullptr});
  return Var{this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Var Tape::variable(Tensor t) {
  nodes_.push_back(Node{std::move(t), {}, true, {}, nullptr});
  return Var{this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Var Tape::param(Param& p) {
  if (auto it = param_nodes_.find(&p); it != param_nodes_.end()) return Var{this, it->second};
  nodes_.push_back(Node{p.value, {}, true, {}, &p});
  const auto id = static_cast<std::uint32_t>(nodes_.size() - 1);
  param_nodes_[&p] = id;
  return Var{this, id};
}

Var Tape::record(const char* op, Tensor value, std::initializer_list<Var> inputs, Backward fn) {
  if (!value.all_finite()) {
    throw NumericError(std::string("non-finite value produced by ") + op);
  }
  bool needs = false;
  for (const Var& in : inputs) {
    if (in.tape != this) throw Error(std::string(op) + ": input recorded on another tape");
    needs = needs || nodes_[in.id].requires_grad;
  }
  nodes_.push_back(Node{std::move(value), {}, needs, needs ? std::move(fn) : Backward{}, nullptr});
  return Var{this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Tensor Tape::grad(Var v) const {
  const Node& n = nodes_.at(v.id);
  if (n.grad.empty()) return Tensor(n.value.shape());
  return n.grad;
}

Tensor& Tape::grad_buffer(std::uint32_t id) {
  Node& n = nodes_[id];
  if (n.grad.empty()) n.grad = Tensor(n.value.shape());
  return n.grad;
}

void Tape::backward(Var root) {
  if (value(root).size() != 1) throw DimensionError("backward() root must be a scalar");
  for (auto& n : nodes_) n.grad = Tensor();
  grad_buffer(root.id).fill(1.0);
  for (std::uint32_t id = root.id + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (!n.requires_grad || n.grad.empty()) continue;
    if (n.backward) n.backward(*this, id);
    if (n.param) {
      auto dst = n.param->grad.data();
      auto src = nodes_[id].grad.data();
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
    }
  }
}

namespace kernels {

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x / std::sqrt(2.0))); }

double gelu_grad(double x) {
  const double cdf = 0.5 * (1.0 + std::erf(x / std::sqrt(2.0)));
  const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
  return cdf + x * pdf;
}

namespace {

struct AxisLayout {
  std::size_t outer, n, inner;
};

AxisLayout axis_layout(const Shape& shape, std::size_t axis) {
  if (axis >= shape.size()) throw DimensionError("softmax axis out of range");
  AxisLayout l{1, shape[axis], 1};
  for (std::size_t i = 0; i < axis; ++i) l.outer *= shape[i];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) l.inner *= shape[i];
  return l;
}

}  // namespace

Tensor softmax(const Tensor& x, std::size_t axis) {
  const auto l = axis_layout(x.shape(), axis);
  Tensor y(x.shape());
  for (std::size_t o = 0; o < l.outer; ++o) {
    for (std::size_t in = 0; in < l.inner; ++in) {
      const std::size_t base = o * l.n * l.inner + in;
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < l.n; ++k) mx = std::max(mx, x[base + k * l.inner]);
      double z = 0.0;
      for (std::size_t k = 0; k < l.n; ++k) {
        const double e = std::exp(x[base + k * l.inner] - mx);
        y[base + k * l.inner] = e;
        z += e;
      }
      for (std::size_t k = 0; k < l.n; ++k) y[base + k * l.inner] /= z;
    }
  }
  return y;
}

}  // namespace kernels

namespace ops {

namespace {

Tape& tape_of(Var a) {
  if (!a.tape) throw Error("operation on an unbound Var");
  return *a.tape;
}

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_to_string(a.shape()) +
                         " vs " + shape_to_string(b.shape()));
  }
}

// C[m x n] += A[m x k] * B[k x n]
void gemm_nn(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
             std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c + i * n;
    const double* arow = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = arow[p];
      if (av == 0.0) continue;
      const double* brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

// C[m x k] += A[m x n] * B[k x n]^T
void gemm_nt(const double* a, const double* b, double* c, std::size_t m, std::size_t n,
             std::size_t k) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double* brow = b + p * n;
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += arow[j] * brow[j];
      c[i * k + p] += s;
    }
  }
}

// C[k x n] += A[m x k]^T * B[m x n]
void gemm_tn(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
             std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    const double* brow = b + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = arow[p];
      if (av == 0.0) continue;
      double* crow = c + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

}  // namespace

Var matmul(Var a, Var b) {
  Tape& t = tape_of(a);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (bv.rank() != 2 || av.cols() != bv.dim(0)) {
    throw DimensionError("matmul: inner dimensions disagree, " + shape_to_string(av.shape()) +
                         " x " + shape_to_string(bv.shape()));
  }
  const std::size_t m = av.rows(), k = av.cols(), n = bv.dim(1);
  Shape out_shape = av.shape();
  out_shape.back() = n;
  Tensor c(out_shape);
  gemm_nn(av.data().data(), bv.data().data(), c.data().data(), m, k, n);
  return t.record("matmul", std::move(c), {a, b}, [a, b, m, k, n](Tape& tp, std::uint32_t self) {
    const Tensor& g = tp.upstream(self);
    if (tp.requires_grad(a)) {
      gemm_nt(g.data().data(), tp.value(b).data().data(), tp.grad_buffer(a.id).data().data(), m,
              n, k);
    }
    if (tp.requires_grad(b)) {
      gemm_tn(tp.value(a).data().data(), g.data().data(), tp.grad_buffer(b.id).data().data(), m,
              k, n);
    }
  });
}

Var add(Var a, Var b) {
  Tape& t = tape_of(a);
  require_same_shape("add", a.value(), b.value());
  Tensor c = a.value();
  const auto bv = b.value().data();
  for (std::size_t i = 0; i < c.size(); ++i) c[i] += bv[i];
  return t.record("add", std::move(c), {a, b}, [a, b](Tape& tp, std::uint32_t self) {
    const Tensor& g = tp.upstream(self);
    for (Var v : {a, b}) {
      if (!tp.requires_grad(v)) continue;
      auto dst = tp.grad_buffer(v.id).data();
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += g[i];
    }
  });
}

Var mul(Var a, Var b) {
  Tape& t = tape_of(a);
  require_same_shape("mul", a.value(), b.value());
  Tensor c = a.value();
  const auto bv = b.value().data();
  for (std::size_t i = 0; i < c.size(); ++i) c[i] *= bv[i];
  return t.record("mul", std::move(c), {a, b}, [a, b](Tape& tp, std::uint32_t self) {
    const Tensor& g = tp.upstream(self);
    if (tp.requires_grad(a)) {
      auto dst = tp.grad_buffer(a.id).data();
      const auto other = tp.value(b).data();
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += g[i] * other[i];
    }
    if (tp.requires_grad(b)) {
      auto dst = tp.grad_buffer(b.id).data();
      const auto other = tp.value(a).data();
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += g[i] * other[i];
    }
  });
}

Var add_bias(Var x, Var bias) {
  Tape& t = tape_of(x);
  const Tensor& xv = x.value();
  const Tensor& bv = bias.value();
  if (bv.size() != xv.cols()) {
    throw DimensionError("add_bias: bias of " + std::to_string(bv.size()) +
                         " entries for rows of " + std::to_string(xv.cols()));
  }
  Tensor y = xv;
  const std::size_t rows = y.rows(), n = y.cols();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < n; ++j) y[r * n + j] += bv[j];
  }
  return t.record("add_bias", std::move(y), {x, bias}, [x, bias, rows, n](Tape& tp, std::uint32_t self) {
    const Tensor& g = tp.upstream(self);
    if (tp.requires_grad(x)) {
      auto dst = tp.grad_buffer(x.id).data();
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += g[i];
    }
    if (tp.requires_grad(bias)) {
      auto dst = tp.grad_buffer(bias.id).data();
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t j = 0; j < n; ++j) dst[j] += g[r * n + j];
      }
    }
  });
}

Var linear(Var x, Var weight, Var bias) { return add_bias(matmul(x, weight), bias); }

Var scale(Var x, double factor) {
  Tape& t = tape_of(x);
  Tensor y = x.value();
  for (auto& v : y.data()) v *= factor;
  return t.record("scale", std::move(y), {x}, [x, factor](Tape& tp, std::uint32_t self) {
    const Tensor& g = tp.upstream(self);
    auto dst = tp.grad_buffer(x.id).data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += factor * g[i];
  });
}

Var gelu(Var x) {
  Tape& t = tape_of(x);
  Tensor y = x.value();
  for (auto& v : y.data()) v = kernels::gelu(v);
  return t.record("gelu", std::move(y), {x}, [x](Tape& tp, std::uint32_t self) {
    const Tensor& g = tp.upstream(self);
    const Tensor& xv = tp.value(x);
    auto dst = tp.grad_buffer(x.id).data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += g[i] * kernels::gelu_grad(xv[i]);
  });
}

Var softmax(Var x, std::size_t axis) {
  Tape& t = tape_of(x);
  Tensor y = kernels::softmax(x.value(), axis);
  const Shape shape = x.value().shape();
  std::size_t outer = 1, inner = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= shape[i];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) inner *= shape[i];
  const std::size_t n = shape[axis];
  return t.record("softmax", std::move(y), {x}, [x, outer, inner, n](Tape& tp, std::uint32_t self) {
    const Tensor& g = tp.upstream(self);
    const Tensor& yv = tp.value(self);
    auto dst = tp.grad_buffer(x.id).data();
    for (std::size_t o = 0; o < outer; ++o) {
      for (std::size_t in = 0; in < inner; ++in) {
        const std::size_t base = o * n * inner + in;
        double dot = 0.0;
        for (std::size_t k = 0; k < n; ++k) dot += yv[base + k * inner] * g[base + k * inner];
        for (std::size_t k = 0; k < n; ++k) {
          const std::size_t i = base + k * inner;
          dst[i] += yv[i] * (g[i] - dot);
        }
      }
    }
  });
}

Var layernorm(Var x, Var gamma, Var beta, double eps) {
  Tape& t = tape_of(x);
  const Tensor& xv = x.value();
  const std::size_t d = xv.cols(), rows = xv.rows();
  if (d < 2) throw DimensionError("layernorm needs at least 2 features per row");
  if (gamma.value().size() != d || beta.value().size() != d) {
    throw DimensionError("layernorm: gamma/beta size does not match feature dimension");
  }
  // Normalized activations and inverse std are kept for the backward pass.
  Tensor xhat(xv.shape());
  std::vector<double> inv_std(rows);
  Tensor y(xv.shape());
  const Tensor& gv = gamma.value();
  const Tensor& bv = beta.value();
  for (std::size_t r = 0; r < rows; ++r) {
    const auto row = xv.row(r);
    double mu = 0.0;
    for (double v : row) mu += v;
    mu /= static_cast<double>(d);
    double var = 0.0;
    for (double v : row) var += (v - mu) * (v - mu);
    var /= static_cast<double>(d);
    const double is = 1.0 / std::sqrt(var + eps);
    inv_std[r] = is;
    for (std::size_t j = 0; j < d; ++j) {
      const double h = (row[j] - mu) * is;
      xhat.at(r, j) = h;
      y.at(r, j) = gv[j] * h + bv[j];
    }
  }
  return t.record(
      "layernorm", std::move(y), {x, gamma, beta},
      [x, gamma, beta, d, rows, xhat = std::move(xhat), inv_std = std::move(inv_std)](
          Tape& tp, std::uint32_t self) {
        const Tensor& g = tp.upstream(self);
        const Tensor& gv = tp.value(gamma);
        if (tp.requires_grad(gamma)) {
          auto dst = tp.grad_buffer(gamma.id).data();
          for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t j = 0; j < d; ++j) dst[j] += g.at(r, j) * xhat.at(r, j);
          }
        }
        if (tp.requires_grad(beta)) {
          auto dst = tp.grad_buffer(beta.id).data();
          for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t j = 0; j < d; ++j) dst[j] += g.at(r, j);
          }
        }
        if (tp.requires_grad(x)) {
          Tensor& dx = tp.grad_buffer(x.id);
          std::vector<double> dh(d);
          for (std::size_t r = 0; r < rows; ++r) {
            double mean_dh = 0.0, mean_dh_h = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
              dh[j] = g.at(r, j) * gv[j];
              mean_dh += dh[j];
              mean_dh_h += dh[j] * xhat.at(r, j);
            }
            mean_dh /= static_cast<double>(d);
            mean_dh_h /= static_cast<double>(d);
            for (std::size_t j = 0; j < d; ++j) {
              dx.at(r, j) += inv_std[r] * (dh[j] - mean_dh - xhat.at(r, j) * mean_dh_h);
            }
          }
        }
      });
}

Var gather_rows(Var table, std::span<const int> idx) {
  Tape& t = tape_of(table);
  const Tensor& tv = table.value();
  const std::size_t n = tv.cols(), nrows = tv.rows();
  if (idx.empty()) throw DimensionError("gather_rows: empty index list");
  Tensor y({idx.size(), n});
  for (std::size_t r = 0; r < idx.size(); ++r) {
    if (idx[r] < 0 || static_cast<std::size_t>(idx[r]) >= nrows) {
      throw DimensionError("gather_rows: index " + std::to_string(idx[r]) + " outside table of " +
                           std::to_string(nrows) + " rows");
    }
    const auto src = tv.row(static_cast<std::size_t>(idx[r]));
    std::copy(src.begin(), src.end(), y.row(r).begin());
  }
  std::vector<int> ids(idx.begin(), idx.end());
  return t.record("gather_rows", std::move(y), {table},
                  [table, n, ids = std::move(ids)](Tape& tp, std::uint32_t self) {
                    const Tensor& g = tp.upstream(self);
                    Tensor& dst = tp.grad_buffer(table.id);
                    for (std::size_t r = 0; r < ids.size(); ++r) {
                      auto drow = dst.row(static_cast<std::size_t>(ids[r]));
                      const auto grow = g.row(r);
                      for (std::size_t j = 0; j < n; ++j) drow[j] += grow[j];
                    }
                  });
}

Var concat_rows(Var a, Var b) {
  Tape& t = tape_of(a);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.cols() != bv.cols()) throw DimensionError("concat_rows: column counts differ");
  const std::size_t ra = av.rows(), rb = bv.rows(), n = av.cols();
  std::vector<double> data(av.data().begin(), av.data().end());
  data.insert(data.end(), bv.data().begin(), bv.data().end());
  Tensor y({ra + rb, n}, std::move(data));
  return t.record("concat_rows", std::move(y), {a, b}, [a, b, ra, n](Tape& tp, std::uint32_t self) {
    const Tensor& g = tp.upstream(self);
    if (tp.requires_grad(a)) {
      auto dst = tp.grad_buffer(a.id).data();
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += g[i];
    }
    if (tp.requires_grad(b)) {
      auto dst = tp.grad_buffer(b.id).data();
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += g[ra * n + i];
    }
  });
}

Var concat_cols(Var a, Var b) {
  Tape& t = tape_of(a);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.rows() != bv.rows()) throw DimensionError("concat_cols: row counts differ");
  const std::size_t rows = av.rows(), na = av.cols(), nb = bv.cols();
  Tensor y({rows, na + nb});
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy(av.row(r).begin(), av.row(r).end(), y.row(r).begin());
    std::copy(bv.row(r).begin(), bv.row(r).end(), y.row(r).begin() + static_cast<std::ptrdiff_t>(na));
  }
  return t.record("concat_cols", std::move(y), {a, b}, [a, b, rows, na, nb](Tape& tp, std::uint32_t self) {
    const Tensor& g = tp.upstream(self);
    if (tp.requires_grad(a)) {
      Tensor& dst = tp.grad_buffer(a.id);
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t j = 0; j < na; ++j) dst.at(r, j) += g.at(r, j);
      }
    }
    if (tp.requires_grad(b)) {
      Tensor& dst = tp.grad_buffer(b.id);
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t j = 0; j < nb; ++j) dst.at(r, j) += g.at(r, na + j);
      }
    }
  });
}

Var sum(Var x) {
  Tape& t = tape_of(x);
  double s = 0.0;
  for (double v : x.value().data()) s += v;
  return t.record("sum", Tensor::scalar(s), {x}, [x](Tape& tp, std::uint32_t self) {
    const double g = tp.upstream(self)[0];
    for (auto& v : tp.grad_buffer(x.id).data()) v += g;
  });
}

Var mean(Var x) { return scale(sum(x), 1.0 / static_cast<double>(x.value().size())); }

Var cross_entropy(Var logits, std::span<const int> targets, int ignore_index) {
  Tape& t = tape_of(logits);
  const Tensor& lv = logits.value();
  const std::size_t n = lv.rows(), c = lv.cols();
  if (targets.size() != n) {
    throw DimensionError("cross_entropy: " + std::to_string(targets.size()) + " targets for " +
                         std::to_string(n) + " rows");
  }
  Tensor probs(lv.shape());
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t r = 0; r < n; ++r) {
    const int tgt = targets[r];
    if (tgt == ignore_index) continue;
    if (tgt < 0 || static_cast<std::size_t>(tgt) >= c) {
      throw DimensionError("cross_entropy: target " + std::to_string(tgt) + " outside [0, " +
                           std::to_string(c) + ")");
    }
    const auto row = lv.row(r);
    const double mx = *std::max_element(row.begin(), row.end());
    double z = 0.0;
    for (double v : row) z += std::exp(v - mx);
    const double lse = mx + std::log(z);
    for (std::size_t j = 0; j < c; ++j) probs.at(r, j) = std::exp(row[j] - lse);
    total += lse - row[static_cast<std::size_t>(tgt)];
    ++count;
  }
  if (count == 0) throw ValidationError("cross_entropy: mean undefined, every row is ignored");
  const double inv = 1.0 / static_cast<double>(count);
  std::vector<int> tg(targets.begin(), targets.end());
  return t.record("cross_entropy", Tensor::scalar(total * inv), {logits},
                  [logits, c, inv, ignore_index, tg = std::move(tg), probs = std::move(probs)](
                      Tape& tp, std::uint32_t self) {
                    const double g = tp.upstream(self)[0] * inv;
                    Tensor& dst = tp.grad_buffer(logits.id);
                    for (std::size_t r = 0; r < tg.size(); ++r) {
                      if (tg[r] == ignore_index) continue;
                      for (std::size_t j = 0; j < c; ++j) dst.at(r, j) += g * probs.at(r, j);
                      dst.at(r, static_cast<std::size_t>(tg[r])) -= g;
                    }
                  });
}

Var bilinear(Var h, Var t_, Var u) {
  Tape& t = tape_of(h);
  const Tensor& hv = h.value();
  const Tensor& tv = t_.value();
  const Tensor& uv = u.value();
  const std::size_t p = hv.rows(), n = hv.cols();
  if (tv.rows() != p || tv.cols() != n || uv.rank() != 3 || uv.dim(0) != n || uv.dim(2) != n) {
    throw DimensionError("bilinear: expected h, t of [P x n] and u of [n x C x n], got " +
                         shape_to_string(hv.shape()) + ", " + shape_to_string(tv.shape()) + ", " +
                         shape_to_string(uv.shape()));
  }
  const std::size_t classes = uv.dim(1);
  auto u_at = [n, classes](const Tensor& uu, std::size_t i, std::size_t c, std::size_t j) {
    return uu[(i * classes + c) * n + j];
  };
  Tensor y({p, classes});
  for (std::size_t r = 0; r < p; ++r) {
    for (std::size_t c = 0; c < classes; ++c) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double hi = hv.at(r, i);
        if (hi == 0.0) continue;
        double inner = 0.0;
        for (std::size_t j = 0; j < n; ++j) inner += u_at(uv, i, c, j) * tv.at(r, j);
        s += hi * inner;
      }
      y.at(r, c) = s;
    }
  }
  return t.record("bilinear", std::move(y), {h, t_, u},
                  [h, t_, u, p, n, classes, u_at](Tape& tp, std::uint32_t self) {
                    const Tensor& g = tp.upstream(self);
                    const Tensor& hv = tp.value(h);
                    const Tensor& tv = tp.value(t_);
                    const Tensor& uv = tp.value(u);
                    const bool dh = tp.requires_grad(h), dt = tp.requires_grad(t_),
                               du = tp.requires_grad(u);
                    for (std::size_t r = 0; r < p; ++r) {
                      for (std::size_t c = 0; c < classes; ++c) {
                        const double gc = g.at(r, c);
                        if (gc == 0.0) continue;
                        for (std::size_t i = 0; i < n; ++i) {
                          for (std::size_t j = 0; j < n; ++j) {
                            const double uij = u_at(uv, i, c, j);
                            if (dh) tp.grad_buffer(h.id).at(r, i) += gc * uij * tv.at(r, j);
                            if (dt) tp.grad_buffer(t_.id).at(r, j) += gc * hv.at(r, i) * uij;
                            if (du) {
                              tp.grad_buffer(u.id)[(i * classes + c) * n + j] +=
                                  gc * hv.at(r, i) * tv.at(r, j);
                            }
                          }
                        }
                      }
                    }
                  });
}

}  // namespace ops

}  // namespace lxlab
