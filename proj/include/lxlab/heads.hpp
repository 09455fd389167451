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

#include <utility>
#include <vector>

#include "lxlab/docmodel.hpp"
#include "lxlab/model.hpp"
#include "lxlab/numerics/autodiff.hpp"
#include "lxlab/numerics/param.hpp"
#include "lxlab/tokenizer.hpp"

namespace lxlab {

// Batch rows holding the text tokens of sample b, in order.
std::vector<int> text_rows(const EncodedBatch& batch, int b);

// First token index of every word, -1 for words without tokens.
std::vector<int> first_tokens(const std::vector<SubwordToken>& tokens, std::size_t word_count);

// --- SER -------------------------------------------------------------------

void init_ser_head(ParamStore& store, const ModelConfig& model, Rng& rng);
// [rows x 7] BIO logits for the listed hidden rows.
Var ser_logits(Tape& tape, ParamStore& store, Var hidden, const std::vector<int>& rows);
// Token argmax, first-subword word tags, then BIO decoding into word spans.
std::vector<EntitySpan> ser_predict(const Tensor& token_logits, const std::vector<SubwordToken>& tokens,
                                    std::size_t word_count);

// --- RE --------------------------------------------------------------------

inline constexpr int kNoRelation = 0;
inline constexpr int kKeyValueClass = 1;

void init_re_head(ParamStore& store, const ModelConfig& model, Rng& rng);

// All ordered pairs (h, t) of entity indices with h != t.
std::vector<std::pair<int, int>> re_candidates(int entity_count);

struct ReEntity {
  int entity_id = 0;
  int row = 0;  // hidden row of the entity's first token
  EntityLabel label = EntityLabel::kOther;
};

// Entities whose first word has a token in sample b of the batch.
std::vector<ReEntity> re_entities(const Document& doc, const std::vector<SubwordToken>& tokens,
                                  const EncodedBatch& batch, int b);

// [pairs x 2] logits: h^T U_c t + V_c [h; t] + b_c, where h and t are the
// head and tail FFN projections of [hidden(first token); type embedding].
Var re_logits(Tape& tape, ParamStore& store, Var hidden, const std::vector<ReEntity>& entities,
              const std::vector<std::pair<int, int>>& pairs);

// Class targets of the candidate pairs against the gold links.
std::vector<int> re_targets(const Document& doc, const std::vector<ReEntity>& entities,
                            const std::vector<std::pair<int, int>>& pairs);

// Pairs whose argmax class is KEY_VALUE.
std::vector<RelationLink> re_predict(const Tensor& logits, const std::vector<ReEntity>& entities,
                                     const std::vector<std::pair<int, int>>& pairs);

}  // namespace lxlab
