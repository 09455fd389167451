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

#include <cmath>
#include <memory>
#include <limits>

#include "lxlab/errors.hpp"
#include "lxlab/model.hpp"

namespace lxlab {

Var spatial_attention(Var q, Var k, Var v, Var bias1d, Var biasx, Var biasy, const AttentionLayout& layout) {
  Tape& tape = *q.tape;
  const std::size_t B = layout.batch, S = layout.seq_len, H = layout.heads;
  const Tensor& qv = q.value();
  const std::size_t d = qv.cols();
  if (qv.rows() != B * S || k.value().shape() != qv.shape() || v.value().shape() != qv.shape()) {
    throw DimensionError("spatial_attention: q/k/v must be [" + std::to_string(B * S) + " x hidden], got " +
                         shape_to_string(qv.shape()));
  }
  if (H == 0 || d % H != 0) throw DimensionError("spatial_attention: hidden not divisible by heads");
  for (Var t : {bias1d, biasx, biasy}) {
    if (t.value().rows() != H) throw DimensionError("spatial_attention: bias table must have one row per head");
  }
  if (layout.rel1d.size() != B * S * S || layout.key_mask.size() != B * S) {
    throw DimensionError("spatial_attention: layout does not match batch");
  }
  const std::size_t dh = d / H;
  const double inv = 1.0 / std::sqrt(static_cast<double>(dh));
  const Tensor &kv = k.value(), &vv = v.value();
  const Tensor &b1 = bias1d.value(), &bx = biasx.value(), &by = biasy.value();

  auto saved = std::make_shared<const AttentionLayout>(layout);
  auto probs = std::make_shared<std::vector<double>>(B * H * S * S, 0.0);
  Tensor out({B * S, d});
  std::vector<double> logits(S);
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t h = 0; h < H; ++h) {
      for (std::size_t i = 0; i < S; ++i) {
        const double* qi = qv.data().data() + (b * S + i) * d + h * dh;
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < S; ++j) {
          if (!layout.key_mask[b * S + j]) continue;
          const double* kj = kv.data().data() + (b * S + j) * d + h * dh;
          double dot = 0.0;
          for (std::size_t c = 0; c < dh; ++c) dot += qi[c] * kj[c];
          const std::size_t o = (b * S + i) * S + j;
          logits[j] = dot * inv + b1.at(h, layout.rel1d[o]) + bx.at(h, layout.relx[o]) + by.at(h, layout.rely[o]);
          mx = std::max(mx, logits[j]);
        }
        double* p = probs->data() + ((b * H + h) * S + i) * S;
        double z = 0.0;
        for (std::size_t j = 0; j < S; ++j) {
          if (!layout.key_mask[b * S + j]) continue;
          p[j] = std::exp(logits[j] - mx);
          z += p[j];
        }
        if (z == 0.0) continue;
        double* oi = out.data().data() + (b * S + i) * d + h * dh;
        for (std::size_t j = 0; j < S; ++j) {
          if (p[j] == 0.0) continue;
          p[j] /= z;
          const double* vj = vv.data().data() + (b * S + j) * d + h * dh;
          for (std::size_t c = 0; c < dh; ++c) oi[c] += p[j] * vj[c];
        }
      }
    }
  }

  return tape.record(
      "spatial_attention", std::move(out), {q, k, v, bias1d, biasx, biasy},
      [=](Tape& tp, std::uint32_t self) {
        const AttentionLayout& layout = *saved;
        const Tensor& g = tp.upstream(self);
        const Tensor &qv = tp.value(q), &kv = tp.value(k), &vv = tp.value(v);
        const bool gq = tp.requires_grad(q), gk = tp.requires_grad(k), gv = tp.requires_grad(v);
        const bool g1 = tp.requires_grad(bias1d), gx = tp.requires_grad(biasx), gy = tp.requires_grad(biasy);
        double* dq = gq ? tp.grad_buffer(q.id).data().data() : nullptr;
        double* dk = gk ? tp.grad_buffer(k.id).data().data() : nullptr;
        double* dv = gv ? tp.grad_buffer(v.id).data().data() : nullptr;
        Tensor* d1 = g1 ? &tp.grad_buffer(bias1d.id) : nullptr;
        Tensor* dx = gx ? &tp.grad_buffer(biasx.id) : nullptr;
        Tensor* dy = gy ? &tp.grad_buffer(biasy.id) : nullptr;
        std::vector<double> dp(S);
        for (std::size_t b = 0; b < B; ++b) {
          for (std::size_t h = 0; h < H; ++h) {
            for (std::size_t i = 0; i < S; ++i) {
              const double* p = probs->data() + ((b * H + h) * S + i) * S;
              const double* gi = g.data().data() + (b * S + i) * d + h * dh;
              double acc = 0.0;
              for (std::size_t j = 0; j < S; ++j) {
                dp[j] = 0.0;
                if (p[j] == 0.0) continue;
                const double* vj = vv.data().data() + (b * S + j) * d + h * dh;
                for (std::size_t c = 0; c < dh; ++c) dp[j] += gi[c] * vj[c];
                acc += p[j] * dp[j];
                if (dv) {
                  double* dvj = dv + (b * S + j) * d + h * dh;
                  for (std::size_t c = 0; c < dh; ++c) dvj[c] += p[j] * gi[c];
                }
              }
              const double* qi = qv.data().data() + (b * S + i) * d + h * dh;
              for (std::size_t j = 0; j < S; ++j) {
                if (p[j] == 0.0) continue;
                const double ds = p[j] * (dp[j] - acc);
                const std::size_t o = (b * S + i) * S + j;
                if (d1) d1->at(h, layout.rel1d[o]) += ds;
                if (dx) dx->at(h, layout.relx[o]) += ds;
                if (dy) dy->at(h, layout.rely[o]) += ds;
                const double* kj = kv.data().data() + (b * S + j) * d + h * dh;
                if (dq) {
                  double* dqi = dq + (b * S + i) * d + h * dh;
                  for (std::size_t c = 0; c < dh; ++c) dqi[c] += ds * inv * kj[c];
                }
                if (dk) {
                  double* dkj = dk + (b * S + j) * d + h * dh;
                  for (std::size_t c = 0; c < dh; ++c) dkj[c] += ds * inv * qi[c];
                }
              }
            }
          }
        }
      });
}

}  // namespace lxlab
