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

#include "lxlab/objectives.hpp"

#include <algorithm>
#include <set>

#include "lxlab/errors.hpp"
#include "lxlab/log.hpp"

namespace lxlab {
namespace {

void check_prob(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(std::string("objectives: ") + name + " must lie in [0, 1]");
}

}  // namespace

void ObjectiveConfig::validate() const {
  check_prob(mvlm_prob, "mvlm_prob");
  check_prob(mvlm_mask_frac, "mvlm_mask_frac");
  check_prob(mvlm_random_frac, "mvlm_random_frac");
  check_prob(mvlm_mask_frac + mvlm_random_frac, "mvlm_mask_frac + mvlm_random_frac");
  check_prob(tia_line_prob, "tia_line_prob");
  check_prob(tim_swap_prob, "tim_swap_prob");
}

MvlmResult apply_mvlm(const std::vector<int>& tokens, int vocab_size, const SpecialIds& specials, Rng& rng,
                      const ObjectiveConfig& config) {
  if (vocab_size <= kNumSpecials) throw ValidationError("apply_mvlm: vocabulary has no regular pieces");
  MvlmResult r{tokens, std::vector<int>(tokens.size(), kIgnoreIndex)};
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i] < kNumSpecials) continue;
    if (!rng.bernoulli(config.mvlm_prob)) continue;
    r.targets[i] = tokens[i];
    const double u = rng.uniform();
    if (u < config.mvlm_mask_frac) {
      r.tokens[i] = specials.mask;
    } else if (u < config.mvlm_mask_frac + config.mvlm_random_frac) {
      r.tokens[i] = kNumSpecials + static_cast<int>(rng.below(static_cast<std::uint64_t>(vocab_size - kNumSpecials)));
    }
  }
  return r;
}

Box box_to_raster(const Box& box, int width, int height) {
  auto lo = [](int v, int n) { return static_cast<int>(static_cast<long long>(v) * n / kCoordMax); };
  auto hi = [](int v, int n) {
    return static_cast<int>((static_cast<long long>(v) * n + kCoordMax - 1) / kCoordMax);
  };
  return Box{std::clamp(lo(box.x0, width), 0, width), std::clamp(lo(box.y0, height), 0, height),
             std::clamp(hi(box.x1, width), 0, width), std::clamp(hi(box.y1, height), 0, height)};
}

TiaResult apply_tia(const Document& doc, const std::vector<SubwordToken>& tokens, Rng& rng,
                    const ObjectiveConfig& config) {
  TiaResult r;
  if (!doc.raster || doc.raster->empty()) {
    r.skipped = true;
    r.labels.assign(tokens.size(), kIgnoreIndex);
    return r;
  }
  r.raster = *doc.raster;
  std::set<int> lines;
  for (const auto& w : doc.words) lines.insert(w.line_id);
  std::set<int> covered;
  for (int line : lines) {
    if (rng.bernoulli(config.tia_line_prob)) covered.insert(line);
  }
  r.covered_lines.assign(covered.begin(), covered.end());
  for (const auto& w : doc.words) {
    if (!covered.count(w.line_id)) continue;
    const Box px = box_to_raster(w.box, r.raster.width, r.raster.height);
    for (int y = px.y0; y < px.y1; ++y) {
      for (int x = px.x0; x < px.x1; ++x) r.raster.at(x, y) = 0;
    }
  }
  r.labels.reserve(tokens.size());
  for (const auto& t : tokens) r.labels.push_back(covered.count(doc.words.at(t.word_index).line_id) ? 1 : 0);
  return r;
}

TimResult apply_tim(std::vector<GrayImage>& rasters, Rng& rng, const ObjectiveConfig& config) {
  const std::size_t n = rasters.size();
  TimResult r{std::vector<int>(n, 1), std::vector<int>(n)};
  for (std::size_t i = 0; i < n; ++i) r.source[i] = static_cast<int>(i);
  if (n < 2) return r;
  std::vector<int> swapped;
  for (std::size_t i = 0; i < n; ++i) {
    if (rng.bernoulli(config.tim_swap_prob)) swapped.push_back(static_cast<int>(i));
  }
  if (swapped.empty()) return r;
  if (swapped.size() == 1) {
    const int i = swapped[0];
    int other = static_cast<int>(rng.below(n - 1));
    if (other >= i) ++other;
    r.source[i] = other;
  } else {
    std::vector<int> perm = swapped;
    for (bool fixed = true; fixed;) {
      rng.shuffle(perm);
      fixed = false;
      for (std::size_t k = 0; k < perm.size(); ++k) fixed = fixed || perm[k] == swapped[k];
    }
    for (std::size_t k = 0; k < swapped.size(); ++k) r.source[swapped[k]] = perm[k];
  }
  const std::vector<GrayImage> original = rasters;
  for (int i : swapped) {
    rasters[i] = original[r.source[i]];
    r.labels[i] = 0;
  }
  return r;
}

PretrainBatch make_pretrain_batch(const std::vector<PretrainSample>& samples, const ModelConfig& model,
                                  const SpecialIds& specials, Rng& rng, const ObjectiveConfig& config) {
  config.validate();
  if (samples.empty()) throw ValidationError("make_pretrain_batch: empty batch");
  const std::size_t B = samples.size();
  std::vector<std::vector<SubwordToken>> tokens(B);
  std::vector<TiaResult> tia(B);
  std::vector<GrayImage> rasters(B);
  PretrainBatch out;
  for (std::size_t b = 0; b < B; ++b) {
    if (!samples[b].doc) throw ValidationError("make_pretrain_batch: sample without document");
    tokens[b] = samples[b].tokens;
    if (static_cast<int>(tokens[b].size()) > model.max_text_len) tokens[b].resize(model.max_text_len);
    tia[b] = apply_tia(*samples[b].doc, tokens[b], rng, config);
    rasters[b] = tia[b].raster;
    out.covered_lines.push_back(tia[b].covered_lines);
  }
  const TimResult tim = apply_tim(rasters, rng, config);
  out.tim_targets = tim.labels;

  std::vector<SampleInput> inputs(B);
  std::vector<MvlmResult> mvlm(B);
  for (std::size_t b = 0; b < B; ++b) {
    std::vector<int> ids;
    for (const auto& t : tokens[b]) {
      ids.push_back(t.piece_id);
      inputs[b].boxes.push_back(t.box);
    }
    mvlm[b] = apply_mvlm(ids, model.vocab_size, specials, rng, config);
    inputs[b].token_ids = mvlm[b].tokens;
    inputs[b].raster = std::move(rasters[b]);
  }
  out.batch = build_batch(inputs, model, specials);
  const std::size_t n = B * out.batch.seq_len;
  out.mvlm_targets.assign(n, kIgnoreIndex);
  out.tia_targets.assign(n, kIgnoreIndex);
  out.original_tokens = out.batch.token_ids;
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t t = 0; t < tokens[b].size(); ++t) {
      const int i = out.batch.text_index(static_cast<int>(b), static_cast<int>(t));
      out.original_tokens[i] = tokens[b][t].piece_id;
      out.mvlm_targets[i] = mvlm[b].targets[t];
      if (mvlm[b].targets[t] != kIgnoreIndex) continue;
      out.tia_targets[i] = tim.labels[b] == 0 ? 1 : tia[b].labels[t];
    }
  }
  return out;
}

void init_pretrain_heads(ParamStore& store, const ModelConfig& model, Rng& rng) {
  const auto d = static_cast<std::size_t>(model.hidden);
  const double s = model.init_scale;
  store.add_uniform("pretrain.mvlm.weight", {d, static_cast<std::size_t>(model.vocab_size)}, s, rng);
  store.add("pretrain.mvlm.bias", Tensor({static_cast<std::size_t>(model.vocab_size)}));
  store.add_uniform("pretrain.tia.weight", {d, 2}, s, rng);
  store.add("pretrain.tia.bias", Tensor({2}));
  store.add_uniform("pretrain.tim.weight", {d, 2}, s, rng);
  store.add("pretrain.tim.bias", Tensor({2}));
}

namespace {

// Cross-entropy of a linear head over the selected rows, or an exact zero
// when nothing is selected.
Var head_loss(Tape& tape, ParamStore& store, Var hidden, const std::string& head, const std::vector<int>& rows,
              const std::vector<int>& targets) {
  if (rows.empty()) return tape.constant(Tensor::scalar(0.0));
  Var x = ops::gather_rows(hidden, rows);
  Var logits = ops::linear(x, tape.param(store.get(head + ".weight")), tape.param(store.get(head + ".bias")));
  return ops::cross_entropy(logits, targets, kIgnoreIndex);
}

}  // namespace

LossReport pretrain_loss(Tape& tape, ParamStore& store, Var hidden, const PretrainBatch& pb) {
  const EncodedBatch& eb = pb.batch;
  if (hidden.value().rows() != static_cast<std::size_t>(eb.batch * eb.seq_len)) {
    throw DimensionError("pretrain_loss: hidden rows do not match the batch");
  }
  std::vector<int> mvlm_rows, mvlm_t, tia_rows, tia_t, tim_rows;
  for (int i = 0; i < eb.batch * eb.seq_len; ++i) {
    if (pb.mvlm_targets[i] != kIgnoreIndex) {
      mvlm_rows.push_back(i);
      mvlm_t.push_back(pb.mvlm_targets[i]);
    }
    if (pb.tia_targets[i] != kIgnoreIndex) {
      tia_rows.push_back(i);
      tia_t.push_back(pb.tia_targets[i]);
    }
  }
  for (int b = 0; b < eb.batch; ++b) tim_rows.push_back(eb.bos_index(b));
  LossReport r;
  r.masked = static_cast<int>(mvlm_rows.size());
  r.tia_positions = static_cast<int>(tia_rows.size());
  if (mvlm_rows.empty()) log::warn("pretrain_loss: batch has no masked positions; MVLM contributes 0");
  r.mvlm = head_loss(tape, store, hidden, "pretrain.mvlm", mvlm_rows, mvlm_t);
  r.tia = head_loss(tape, store, hidden, "pretrain.tia", tia_rows, tia_t);
  r.tim = head_loss(tape, store, hidden, "pretrain.tim", tim_rows, pb.tim_targets);
  r.total = ops::add(ops::add(r.mvlm, r.tia), r.tim);
  return r;
}

}  // namespace lxlab
