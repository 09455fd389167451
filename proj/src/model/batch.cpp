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

#include <algorithm>

#include "lxlab/errors.hpp"
#include "lxlab/model.hpp"

namespace lxlab {

Box patch_box(const ModelConfig& config, int row, int col) {
  return Box{col * kCoordMax / config.grid_w, row * kCoordMax / config.grid_h,
             (col + 1) * kCoordMax / config.grid_w, (row + 1) * kCoordMax / config.grid_h};
}

std::vector<double> raster_patches(const GrayImage& raster, const ModelConfig& config) {
  const int w = config.raster_width(), h = config.raster_height(), p = config.patch_size;
  std::vector<double> out(static_cast<std::size_t>(config.visual_tokens()) * config.patch_dim(), 1.0);
  if (raster.empty()) return out;
  const GrayImage page = (raster.width == w && raster.height == h) ? raster : resize_area(raster, w, h);
  std::size_t k = 0;
  for (int r = 0; r < config.grid_h; ++r) {
    for (int c = 0; c < config.grid_w; ++c) {
      for (int y = 0; y < p; ++y) {
        for (int x = 0; x < p; ++x) out[k++] = page.at(c * p + x, r * p + y) / 255.0;
      }
    }
  }
  return out;
}

EncodedBatch build_batch(const std::vector<SampleInput>& samples, const ModelConfig& config,
                         const SpecialIds& specials) {
  if (samples.empty()) throw ValidationError("build_batch: empty batch");
  EncodedBatch b;
  b.batch = static_cast<int>(samples.size());
  b.visual = config.visual_tokens();
  int longest = 0;
  for (const auto& s : samples) {
    if (s.token_ids.size() != s.boxes.size()) throw ValidationError("build_batch: token/box count mismatch");
    if (static_cast<int>(s.token_ids.size()) > config.max_text_len) {
      throw ValidationError("build_batch: " + std::to_string(s.token_ids.size()) + " text tokens exceed max_text_len " +
                            std::to_string(config.max_text_len));
    }
    longest = std::max(longest, static_cast<int>(s.token_ids.size()));
  }
  b.seq_len = 1 + b.visual + longest + 1;
  const std::size_t n = static_cast<std::size_t>(b.batch) * b.seq_len;
  b.token_ids.assign(n, specials.pad);
  b.boxes.assign(n, Box{});
  b.segment_ids.assign(n, 1);
  b.positions.resize(n);
  b.mask.assign(n, 0);
  b.is_visual.assign(n, 0);
  b.patches = Tensor({static_cast<std::size_t>(b.batch * b.visual), static_cast<std::size_t>(config.patch_dim())});
  const Box full{0, 0, kCoordMax, kCoordMax};
  for (int s = 0; s < b.batch; ++s) {
    const auto& in = samples[s];
    const int len = static_cast<int>(in.token_ids.size());
    b.text_len.push_back(len);
    for (int pos = 0; pos < b.seq_len; ++pos) b.positions[b.index(s, pos)] = pos;
    b.token_ids[b.bos_index(s)] = specials.bos;
    b.boxes[b.bos_index(s)] = full;
    b.mask[b.bos_index(s)] = 1;
    for (int v = 0; v < b.visual; ++v) {
      const int i = b.index(s, 1 + v);
      b.is_visual[i] = 1;
      b.segment_ids[i] = 0;
      b.mask[i] = 1;
      b.boxes[i] = patch_box(config, v / config.grid_w, v % config.grid_w);
    }
    for (int t = 0; t < len; ++t) {
      const int i = b.text_index(s, t);
      b.token_ids[i] = in.token_ids[t];
      b.boxes[i] = in.boxes[t];
      b.mask[i] = 1;
    }
    const int eos = b.text_index(s, len);
    b.token_ids[eos] = specials.eos;
    b.boxes[eos] = full;
    b.mask[eos] = 1;
    const auto pix = raster_patches(in.raster, config);
    std::copy(pix.begin(), pix.end(),
              b.patches.data().begin() + static_cast<std::ptrdiff_t>(s) * b.visual * config.patch_dim());
  }
  return b;
}

AttentionLayout make_attention_layout(const EncodedBatch& batch, const ModelConfig& config) {
  AttentionLayout l;
  l.batch = batch.batch;
  l.seq_len = batch.seq_len;
  l.heads = config.heads;
  const std::size_t S = static_cast<std::size_t>(batch.seq_len);
  l.rel1d.resize(batch.batch * S * S);
  l.relx.resize(l.rel1d.size());
  l.rely.resize(l.rel1d.size());
  l.key_mask = batch.mask;
  for (int b = 0; b < batch.batch; ++b) {
    for (std::size_t i = 0; i < S; ++i) {
      const int qi = batch.index(b, static_cast<int>(i));
      const Box& bq = batch.boxes[qi];
      const int qx = (bq.x0 + bq.x1) / 2, qy = (bq.y0 + bq.y1) / 2;
      for (std::size_t j = 0; j < S; ++j) {
        const int kj = batch.index(b, static_cast<int>(j));
        const Box& bk = batch.boxes[kj];
        const std::size_t o = (b * S + i) * S + j;
        l.rel1d[o] = relative_bucket(batch.positions[kj] - batch.positions[qi], config.rel1d_buckets, config.rel1d_width);
        l.relx[o] = relative_bucket((bk.x0 + bk.x1) / 2 - qx, config.rel2d_buckets, config.rel2d_width);
        l.rely[o] = relative_bucket((bk.y0 + bk.y1) / 2 - qy, config.rel2d_buckets, config.rel2d_width);
      }
    }
  }
  return l;
}

}  // namespace lxlab
