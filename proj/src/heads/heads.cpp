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
#include "lxlab/heads.hpp"

#include <algorithm>
#include <set>

#include "lxlab/errors.hpp"

namespace lxlab {

std::vector<int> text_rows(const EncodedBatch& batch, int b) {
  std::vector<int> rows;
  for (int t = 0; t < batch.text_len.at(b); ++t) rows.push_back(batch.text_index(b, t));
  return rows;
}

std::vector<int> first_tokens(const std::vector<SubwordToken>& tokens, std::size_t word_count) {
  std::vector<int> first(word_count, -1);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const int w = tokens[i].word_index;
    if (w >= 0 && static_cast<std::size_t>(w) < word_count && first[w] < 0) first[w] = static_cast<int>(i);
  }
  return first;
}

void init_ser_head(ParamStore& store, const ModelConfig& model, Rng& rng) {
  store.add_uniform("ser.weight", {static_cast<std::size_t>(model.hidden), kNumBioLabels}, model.init_scale, rng);
  store.add("ser.bias", Tensor({kNumBioLabels}));
}

Var ser_logits(Tape& tape, ParamStore& store, Var hidden, const std::vector<int>& rows) {
  return ops::linear(ops::gather_rows(hidden, rows), tape.param(store.get("ser.weight")),
                     tape.param(store.get("ser.bias")));
}

std::vector<EntitySpan> ser_predict(const Tensor& token_logits, const std::vector<SubwordToken>& tokens,
                                    std::size_t word_count) {
  const std::size_t n = std::min(token_logits.rows(), tokens.size());
  if (n > 0 && token_logits.cols() != kNumBioLabels) throw DimensionError("ser_predict: expected 7 logits per token");
  std::vector<int> tags(n), words(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = token_logits.row(i);
    tags[i] = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
    words[i] = tokens[i].word_index;
  }
  return bio_decode(word_tags_from_tokens(tags, words, word_count));
}

void init_re_head(ParamStore& store, const ModelConfig& model, Rng& rng) {
  const auto d = static_cast<std::size_t>(model.hidden), h = d / 2;
  const double s = model.init_scale;
  store.add_uniform("re.type_emb", {kNumEntityLabels, d}, s, rng);
  // Projections and the classifier use Glorot-uniform bounds.
  for (const char* side : {"re.head", "re.tail"}) {
    const std::string p = side;
    store.add_uniform(p + ".ffn1.weight", {2 * d, d}, std::sqrt(6.0 / (3 * d)), rng);
    store.add(p + ".ffn1.bias", Tensor({d}));
    store.add_uniform(p + ".ffn2.weight", {d, h}, std::sqrt(6.0 / (d + h)), rng);
    store.add(p + ".ffn2.bias", Tensor({h}));
  }
  store.add_uniform("re.bilinear", {h, 2, h}, std::sqrt(3.0 / h), rng);
  store.add_uniform("re.linear.weight", {2 * h, 2}, std::sqrt(6.0 / (2 * h + 2)), rng);
  store.add("re.linear.bias", Tensor({2}));
}

std::vector<std::pair<int, int>> re_candidates(int n) {
  std::vector<std::pair<int, int>> pairs;
  for (int h = 0; h < n; ++h) {
    for (int t = 0; t < n; ++t) {
      if (h != t) pairs.emplace_back(h, t);
    }
  }
  return pairs;
}

std::vector<ReEntity> re_entities(const Document& doc, const std::vector<SubwordToken>& tokens,
                                  const EncodedBatch& batch, int b) {
  const auto first = first_tokens(tokens, doc.words.size());
  std::vector<ReEntity> out;
  for (const auto& e : doc.entities) {
    const int tok = first.at(e.first_word);
    if (tok < 0 || tok >= batch.text_len.at(b)) continue;
    out.push_back(ReEntity{e.id, batch.text_index(b, tok), e.label});
  }
  return out;
}

namespace {

Var project(Tape& tape, ParamStore& store, const std::string& side, Var x) {
  Var h = ops::gelu(ops::linear(x, tape.param(store.get(side + ".ffn1.weight")),
                                tape.param(store.get(side + ".ffn1.bias"))));
  return ops::linear(h, tape.param(store.get(side + ".ffn2.weight")), tape.param(store.get(side + ".ffn2.bias")));
}

}  // namespace

Var re_logits(Tape& tape, ParamStore& store, Var hidden, const std::vector<ReEntity>& entities,
              const std::vector<std::pair<int, int>>& pairs) {
  if (pairs.empty()) throw ValidationError("re_logits: no candidate pairs");
  std::vector<int> rows, labels, heads, tails;
  for (const auto& e : entities) {
    rows.push_back(e.row);
    labels.push_back(static_cast<int>(e.label));
  }
  for (const auto& [h, t] : pairs) {
    heads.push_back(h);
    tails.push_back(t);
  }
  Var repr = ops::concat_cols(ops::gather_rows(hidden, rows),
                              ops::gather_rows(tape.param(store.get("re.type_emb")), labels));
  Var hp = ops::gather_rows(project(tape, store, "re.head", repr), heads);
  Var tp = ops::gather_rows(project(tape, store, "re.tail", repr), tails);
  Var bil = ops::bilinear(hp, tp, tape.param(store.get("re.bilinear")));
  Var lin = ops::linear(ops::concat_cols(hp, tp), tape.param(store.get("re.linear.weight")),
                        tape.param(store.get("re.linear.bias")));
  return ops::add(bil, lin);
}

std::vector<int> re_targets(const Document& doc, const std::vector<ReEntity>& entities,
                            const std::vector<std::pair<int, int>>& pairs) {
  std::set<std::pair<int, int>> gold;
  for (const auto& l : doc.links) gold.emplace(l.head, l.tail);
  std::vector<int> targets;
  for (const auto& [h, t] : pairs) {
    targets.push_back(gold.count({entities[h].entity_id, entities[t].entity_id}) ? kKeyValueClass : kNoRelation);
  }
  return targets;
}

std::vector<RelationLink> re_predict(const Tensor& logits, const std::vector<ReEntity>& entities,
                                     const std::vector<std::pair<int, int>>& pairs) {
  std::vector<RelationLink> links;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    if (logits.at(p, kKeyValueClass) > logits.at(p, kNoRelation)) {
      links.push_back(RelationLink{entities[pairs[p].first].entity_id, entities[pairs[p].second].entity_id,
                                   RelationLabel::kKeyValue});
    }
  }
  return links;
}

}  // namespace lxlab
