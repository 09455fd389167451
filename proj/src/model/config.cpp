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
#include <cctype>

#include "lxlab/errors.hpp"
#include "lxlab/model.hpp"

namespace lxlab {

std::string preset_name(Preset p) {
  switch (p) {
    case Preset::kTiny: return "tiny";
    case Preset::kBase: return "base";
    case Preset::kLarge: return "large";
  }
  return "tiny";
}

Preset parse_preset(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "tiny") return Preset::kTiny;
  if (lower == "base") return Preset::kBase;
  if (lower == "large") return Preset::kLarge;
  throw ConfigError("unknown model preset '" + std::string(name) + "'");
}

ModelConfig ModelConfig::preset(Preset p, int vocab_size) {
  ModelConfig c;
  c.vocab_size = vocab_size;
  switch (p) {
    case Preset::kTiny:
      break;
    case Preset::kBase:
      c.layers = 12;
      c.heads = 12;
      c.hidden = 768;
      c.ffn_dim = 3072;
      c.grid_h = c.grid_w = 7;
      c.max_text_len = 512 - 49 - 2;
      break;
    case Preset::kLarge:
      c.layers = 24;
      c.heads = 16;
      c.hidden = 1024;
      c.ffn_dim = 4096;
      c.grid_h = c.grid_w = 7;
      c.max_text_len = 512 - 49 - 2;
      break;
  }
  return c;
}

void ModelConfig::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError("model config: " + m); };
  if (layers < 0) fail("layers must be >= 0");
  if (heads <= 0 || hidden <= 0 || hidden % heads != 0) fail("hidden size must be divisible by heads");
  if (ffn_dim <= 0) fail("ffn_dim must be positive");
  if (vocab_size <= 5) fail("vocab_size must exceed the special tokens");
  if (max_text_len <= 0) fail("max_text_len must be positive");
  if (grid_h <= 0 || grid_w <= 0 || patch_size <= 0) fail("visual grid must be positive");
  if (coord_bins != kCoordMax + 1) fail("coord_bins must be 1001");
  if (rel1d_buckets <= 0 || rel1d_width <= 0 || rel2d_buckets <= 0 || rel2d_width <= 0) {
    fail("relative bucket parameters must be positive");
  }
  if (max_seq_len() > 512) fail("sequence length above 512");
}

nlohmann::json ModelConfig::to_json() const {
  return nlohmann::json{{"layers", layers},           {"heads", heads},
                        {"hidden", hidden},           {"ffn_dim", ffn_dim},
                        {"vocab_size", vocab_size},   {"max_text_len", max_text_len},
                        {"grid_h", grid_h},           {"grid_w", grid_w},
                        {"patch_size", patch_size},   {"coord_bins", coord_bins},
                        {"rel1d_buckets", rel1d_buckets}, {"rel1d_width", rel1d_width},
                        {"rel2d_buckets", rel2d_buckets}, {"rel2d_width", rel2d_width},
                        {"ln_eps", ln_eps},           {"init_scale", init_scale},
                        {"seed", seed}};
}

ModelConfig ModelConfig::from_json(const nlohmann::json& j) {
  ModelConfig c;
  try {
    c.layers = j.at("layers");
    c.heads = j.at("heads");
    c.hidden = j.at("hidden");
    c.ffn_dim = j.at("ffn_dim");
    c.vocab_size = j.at("vocab_size");
    c.max_text_len = j.at("max_text_len");
    c.grid_h = j.at("grid_h");
    c.grid_w = j.at("grid_w");
    c.patch_size = j.at("patch_size");
    c.coord_bins = j.at("coord_bins");
    c.rel1d_buckets = j.at("rel1d_buckets");
    c.rel1d_width = j.at("rel1d_width");
    c.rel2d_buckets = j.at("rel2d_buckets");
    c.rel2d_width = j.at("rel2d_width");
    c.ln_eps = j.at("ln_eps");
    c.init_scale = j.at("init_scale");
    c.seed = j.at("seed");
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("model config: ") + e.what());
  }
  return c;
}

int relative_bucket(int delta, int count, int width) {
  int q = delta / width;
  if (delta % width != 0 && delta < 0) --q;
  return std::clamp(q, -count, count) + count;
}

}  // namespace lxlab
