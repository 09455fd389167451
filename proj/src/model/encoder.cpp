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

#include <string>

#include "lxlab/errors.hpp"
#include "lxlab/model.hpp"

namespace lxlab {
namespace {

const char* const kLayoutTables[] = {"x0", "y0", "x1", "y1", "w", "h"};

std::string layer_prefix(int l) { return "encoder.layer" + std::to_string(l) + "."; }

void add_linear(ParamStore& store, const std::string& name, int in, int out, double scale, Rng& rng) {
  store.add_uniform(name + ".weight", {static_cast<std::size_t>(in), static_cast<std::size_t>(out)}, scale, rng);
  store.add(name + ".bias", Tensor({static_cast<std::size_t>(out)}));
}

void add_layernorm(ParamStore& store, const std::string& name, int dim) {
  store.add(name + ".gamma", Tensor({static_cast<std::size_t>(dim)}, 1.0));
  store.add(name + ".beta", Tensor({static_cast<std::size_t>(dim)}));
}

Var apply_linear(Tape& tape, ParamStore& store, const std::string& name, Var x) {
  return ops::linear(x, tape.param(store.get(name + ".weight")), tape.param(store.get(name + ".bias")));
}

Var apply_layernorm(Tape& tape, ParamStore& store, const std::string& name, Var x, double eps) {
  return ops::layernorm(x, tape.param(store.get(name + ".gamma")), tape.param(store.get(name + ".beta")), eps);
}

}  // namespace

Encoder::Encoder(ModelConfig config) : config_(std::move(config)) { config_.validate(); }

void Encoder::init_params(ParamStore& store, Rng& rng) const {
  const auto d = static_cast<std::size_t>(config_.hidden);
  const double s = config_.init_scale;
  store.add_uniform("embeddings.word", {static_cast<std::size_t>(config_.vocab_size), d}, s, rng);
  add_linear(store, "embeddings.visual", config_.patch_dim(), config_.hidden, s, rng);
  store.add_uniform("embeddings.position", {static_cast<std::size_t>(config_.max_seq_len()), d}, s, rng);
  store.add_uniform("embeddings.segment", {2, d}, s, rng);
  for (const char* t : kLayoutTables) {
    store.add_uniform(std::string("embeddings.") + t, {static_cast<std::size_t>(config_.coord_bins), d}, s, rng);
  }
  const auto H = static_cast<std::size_t>(config_.heads);
  store.add_uniform("encoder.rel1d", {H, static_cast<std::size_t>(2 * config_.rel1d_buckets + 1)}, s, rng);
  store.add_uniform("encoder.relx", {H, static_cast<std::size_t>(2 * config_.rel2d_buckets + 1)}, s, rng);
  store.add_uniform("encoder.rely", {H, static_cast<std::size_t>(2 * config_.rel2d_buckets + 1)}, s, rng);
  for (int l = 0; l < config_.layers; ++l) {
    const std::string p = layer_prefix(l);
    for (const char* m : {"query", "key", "value", "output"}) add_linear(store, p + m, config_.hidden, config_.hidden, s, rng);
    add_layernorm(store, p + "attn_ln", config_.hidden);
    add_linear(store, p + "ffn_in", config_.hidden, config_.ffn_dim, s, rng);
    add_linear(store, p + "ffn_out", config_.ffn_dim, config_.hidden, s, rng);
    add_layernorm(store, p + "ffn_ln", config_.hidden);
  }
}

Var Encoder::embed(Tape& tape, ParamStore& store, const EncodedBatch& batch) const {
  const int n = batch.batch * batch.seq_len;
  if (batch.seq_len > config_.max_seq_len()) {
    throw ValidationError("embed: sequence length " + std::to_string(batch.seq_len) + " exceeds " +
                          std::to_string(config_.max_seq_len()));
  }
  if (batch.visual != config_.visual_tokens()) throw ValidationError("embed: visual token count mismatch");
  std::vector<int> text_ids, order(n);
  std::vector<int> coords[6];
  int visual_seen = 0;
  for (int i = 0; i < n; ++i) {
    const Box& b = batch.boxes[i];
    const int vals[6] = {b.x0, b.y0, b.x1, b.y1, b.x1 - b.x0, b.y1 - b.y0};
    for (int c = 0; c < 6; ++c) {
      if (vals[c] < 0 || vals[c] > kCoordMax) {
        throw RangeError("embed: layout value " + std::to_string(vals[c]) + " (" + kLayoutTables[c] +
                         ") at position " + std::to_string(i) + " outside [0, 1000]");
      }
      coords[c].push_back(vals[c]);
    }
    if (batch.is_visual[i]) {
      order[i] = -1 - visual_seen++;
    } else {
      order[i] = static_cast<int>(text_ids.size());
      text_ids.push_back(batch.token_ids[i]);
    }
  }
  Var tokens = ops::gather_rows(tape.param(store.get("embeddings.word")), text_ids);
  if (visual_seen > 0) {
    Var visual = apply_linear(tape, store, "embeddings.visual", tape.constant(batch.patches));
    const int text_rows = static_cast<int>(text_ids.size());
    for (int& o : order) {
      if (o < 0) o = text_rows + (-1 - o);
    }
    tokens = ops::concat_rows(tokens, visual);
  }
  Var x = ops::gather_rows(tokens, order);
  x = ops::add(x, ops::gather_rows(tape.param(store.get("embeddings.position")), batch.positions));
  x = ops::add(x, ops::gather_rows(tape.param(store.get("embeddings.segment")), batch.segment_ids));
  for (int c = 0; c < 6; ++c) {
    x = ops::add(x, ops::gather_rows(tape.param(store.get(std::string("embeddings.") + kLayoutTables[c])), coords[c]));
  }
  return x;
}

Var Encoder::encode(Tape& tape, ParamStore& store, const EncodedBatch& batch) const {
  Var x = embed(tape, store, batch);
  if (config_.layers == 0) return x;
  const AttentionLayout layout = make_attention_layout(batch, config_);
  Var rel1d = tape.param(store.get("encoder.rel1d"));
  Var relx = tape.param(store.get("encoder.relx"));
  Var rely = tape.param(store.get("encoder.rely"));
  for (int l = 0; l < config_.layers; ++l) {
    const std::string p = layer_prefix(l);
    try {
      Var q = apply_linear(tape, store, p + "query", x);
      Var k = apply_linear(tape, store, p + "key", x);
      Var v = apply_linear(tape, store, p + "value", x);
      Var ctx = spatial_attention(q, k, v, rel1d, relx, rely, layout);
      x = apply_layernorm(tape, store, p + "attn_ln", ops::add(x, apply_linear(tape, store, p + "output", ctx)),
                          config_.ln_eps);
      Var h = ops::gelu(apply_linear(tape, store, p + "ffn_in", x));
      x = apply_layernorm(tape, store, p + "ffn_ln", ops::add(x, apply_linear(tape, store, p + "ffn_out", h)),
                          config_.ln_eps);
    } catch (const NumericError& e) {
      throw NumericError("encoder layer " + std::to_string(l) + ": " + e.what());
    }
  }
  return x;
}

}  // namespace lxlab
