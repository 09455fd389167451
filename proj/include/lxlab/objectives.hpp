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

#include <vector>

#include "lxlab/docmodel.hpp"
#include "lxlab/model.hpp"
#include "lxlab/numerics/autodiff.hpp"
#include "lxlab/numerics/param.hpp"
#include "lxlab/numerics/rng.hpp"
#include "lxlab/tokenizer.hpp"

namespace lxlab {

struct ObjectiveConfig {
  double mvlm_prob = 0.15;
  // Of the selected tokens: replaced by MASK, by a random id, else kept.
  double mvlm_mask_frac = 0.8;
  double mvlm_random_frac = 0.1;
  double tia_line_prob = 0.15;
  double tim_swap_prob = 0.5;

  void validate() const;
};

struct MvlmResult {
  std::vector<int> tokens;
  std::vector<int> targets;  // original id at selected positions, else kIgnoreIndex
};

// Masked visual-language modeling corruption of a text token sequence.
// Special ids are never selected; replacement ids are drawn from the
// non-special range [kNumSpecials, vocab_size).
MvlmResult apply_mvlm(const std::vector<int>& tokens, int vocab_size, const SpecialIds& specials, Rng& rng,
                      const ObjectiveConfig& config = {});

struct TiaResult {
  GrayImage raster;
  std::vector<int> labels;  // per token: 1 if its line is covered, 0 otherwise
  std::vector<int> covered_lines;
  bool skipped = false;  // no raster: labels are all kIgnoreIndex
};

// Pixel rectangle [x0, x1) x [y0, y1) of a normalized box on a raster.
Box box_to_raster(const Box& box, int width, int height);

// Text-image alignment: covers randomly chosen lines on the raster by
// zeroing the pixels of their word boxes and labels every token.
TiaResult apply_tia(const Document& doc, const std::vector<SubwordToken>& tokens, Rng& rng,
                    const ObjectiveConfig& config = {});

struct TimResult {
  std::vector<int> labels;  // 1 kept its own raster, 0 swapped
  std::vector<int> source;  // index of the sample whose raster it now holds
};

// Text-image matching: each sample is swapped with probability
// tim_swap_prob. Swapped samples exchange rasters along a derangement of
// the swapped subset; a lone swapped sample takes a random other sample's
// raster. A batch of one never swaps.
TimResult apply_tim(std::vector<GrayImage>& rasters, Rng& rng, const ObjectiveConfig& config = {});

struct PretrainSample {
  const Document* doc = nullptr;
  std::vector<SubwordToken> tokens;
};

struct PretrainBatch {
  EncodedBatch batch;
  std::vector<int> mvlm_targets;  // [batch x seq_len]
  std::vector<int> tia_targets;   // [batch x seq_len]
  std::vector<int> tim_targets;   // [batch]
  std::vector<std::vector<int>> covered_lines;
  std::vector<int> original_tokens;  // [batch x seq_len], before corruption
};

// Applies TIA covering, then TIM swapping of the covered rasters, then
// MVLM masking, and assembles the model batch. Token sequences longer than
// the model's max_text_len are truncated.
PretrainBatch make_pretrain_batch(const std::vector<PretrainSample>& samples, const ModelConfig& model,
                                  const SpecialIds& specials, Rng& rng, const ObjectiveConfig& config = {});

void init_pretrain_heads(ParamStore& store, const ModelConfig& model, Rng& rng);

struct LossReport {
  Var mvlm;
  Var tia;
  Var tim;
  Var total;
  int masked = 0;
  int tia_positions = 0;

  double mvlm_value() const { return mvlm.value().item(); }
  double tia_value() const { return tia.value().item(); }
  double tim_value() const { return tim.value().item(); }
  double total_value() const { return total.value().item(); }
};

// MVLM: vocabulary projection at masked text positions. TIA: two-class
// head at non-ignored text positions. TIM: two-class head at BOS. An
// objective without any target contributes an exact zero.
LossReport pretrain_loss(Tape& tape, ParamStore& store, Var hidden, const PretrainBatch& batch);

}  // namespace lxlab
