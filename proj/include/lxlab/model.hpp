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
#include <string>
#include <vector>

#include "json.hpp"
#include "lxlab/docmodel.hpp"
#include "lxlab/image.hpp"
#include "lxlab/numerics/autodiff.hpp"
#include "lxlab/numerics/param.hpp"
#include "lxlab/numerics/rng.hpp"
#include "lxlab/tokenizer.hpp"

namespace lxlab {

enum class Preset { kTiny, kBase, kLarge };

std::string preset_name(Preset p);
Preset parse_preset(std::string_view name);

struct ModelConfig {
  int layers = 2;
  int heads = 2;
  int hidden = 32;
  int ffn_dim = 128;
  int vocab_size = 512;
  int max_text_len = 128;
  int grid_h = 2;
  int grid_w = 2;
  int patch_size = 32;
  int coord_bins = kCoordMax + 1;
  // Clipped-linear relative position buckets: 1D sequence distance and
  // x/y box-center distance in normalized units.
  int rel1d_buckets = 32;
  int rel1d_width = 1;
  int rel2d_buckets = 16;
  int rel2d_width = 32;
  double ln_eps = 1e-12;
  double init_scale = 0.02;
  std::uint64_t seed = 0;

  // TINY is 2 layers / 2 heads / d = 32 on a 2x2 patch grid. BASE and LARGE
  // mirror the 12/12/768 and 24/16/1024 encoder shapes on a 7x7 grid.
  static ModelConfig preset(Preset p, int vocab_size);

  int visual_tokens() const { return grid_h * grid_w; }
  int head_dim() const { return hidden / heads; }
  int patch_dim() const { return patch_size * patch_size; }
  int raster_width() const { return grid_w * patch_size; }
  int raster_height() const { return grid_h * patch_size; }
  // BOS + visual tokens + text + EOS.
  int max_seq_len() const { return 1 + visual_tokens() + max_text_len + 1; }

  void validate() const;
  nlohmann::json to_json() const;
  static ModelConfig from_json(const nlohmann::json& j);
  bool operator==(const ModelConfig&) const = default;
};

// clamp(floor(delta / width), -count, count) + count, in [0, 2 * count].
int relative_bucket(int delta, int count, int width);

// One document's model input before batching.
struct SampleInput {
  std::vector<int> token_ids;
  std::vector<Box> boxes;
  GrayImage raster;  // empty means a blank page
};

// Sequence layout per sample: [BOS] visual patches, text tokens, [EOS],
// then padding up to seq_len. All per-position vectors are [batch x seq_len].
struct EncodedBatch {
  int batch = 0;
  int seq_len = 0;
  int visual = 0;
  std::vector<int> token_ids;  // visual positions carry the pad id
  std::vector<Box> boxes;
  std::vector<int> segment_ids;  // 0 visual, 1 text
  std::vector<int> positions;
  std::vector<std::uint8_t> mask;  // 1 for real positions
  std::vector<std::uint8_t> is_visual;
  std::vector<int> text_len;
  Tensor patches;  // [batch * visual x patch_dim], pixels scaled to [0, 1]

  int index(int b, int pos) const { return b * seq_len + pos; }
  int bos_index(int b) const { return index(b, 0); }
  int text_index(int b, int i) const { return index(b, 1 + visual + i); }
};

// Page-region box of visual patch (row, col) on the normalized grid.
Box patch_box(const ModelConfig& config, int row, int col);
// Resizes the raster to the model's page size and cuts it into patches.
std::vector<double> raster_patches(const GrayImage& raster, const ModelConfig& config);

EncodedBatch build_batch(const std::vector<SampleInput>& samples, const ModelConfig& config, const SpecialIds& specials);

// Relative-position bucket ids per (query, key) pair and the key mask.
struct AttentionLayout {
  int batch = 0;
  int seq_len = 0;
  int heads = 0;
  std::vector<int> rel1d;  // [batch x seq_len x seq_len]
  std::vector<int> relx;
  std::vector<int> rely;
  std::vector<std::uint8_t> key_mask;  // [batch x seq_len]
};

AttentionLayout make_attention_layout(const EncodedBatch& batch, const ModelConfig& config);

// Multi-head attention whose logits add learned per-head biases for the
// 1D, x and y relative buckets:
//   logits = q k^T / sqrt(d_h) + b1d[rel1d] + bx[relx] + by[rely]
// Masked keys get exactly zero weight. q, k, v and the output are
// [batch * seq_len x hidden], heads occupying consecutive column blocks.
// Bias tables are [heads x buckets].
Var spatial_attention(Var q, Var k, Var v, Var bias1d, Var biasx, Var biasy, const AttentionLayout& layout);

// The multimodal encoder. Parameters live in a ParamStore under the
// "embeddings." and "encoder." prefixes.
class Encoder {
 public:
  explicit Encoder(ModelConfig config);

  const ModelConfig& config() const { return config_; }
  void init_params(ParamStore& store, Rng& rng) const;

  // Text and visual embeddings placed in sequence order, plus 1D position,
  // segment and the six-way layout embedding (x0, y0, x1, y1, w, h).
  Var embed(Tape& tape, ParamStore& store, const EncodedBatch& batch) const;
  // Post-layernorm transformer stack over embed(). Throws NumericError
  // naming the layer on non-finite activations.
  Var encode(Tape& tape, ParamStore& store, const EncodedBatch& batch) const;

 private:
  ModelConfig config_;
};

}  // namespace lxlab
