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

#include "lxlab/synth.hpp"

#include <fstream>

#include "json.hpp"
#include "lxlab/errors.hpp"
#include "lxlab/utf8.hpp"

namespace lxlab {
namespace {

constexpr int kMargin = 60;
constexpr int kCharW = 16;
constexpr int kCharH = 24;
constexpr int kGap = 12;

struct Layout {
  const SynthOptions& opt;
  Document& doc;
  int line = 0;
  int y = kMargin;
  int x = kMargin;

  int char_width(char32_t c) const { return c >= 0x2E80 ? 2 * kCharW : kCharW; }

  int word_width(const std::string& w) const {
    int total = 0;
    for (char32_t c : utf8::decode(w)) total += char_width(c);
    return total;
  }

  bool fits(const std::string& w) const { return x + word_width(w) <= opt.page_w - kMargin; }

  int place(const std::string& w) {
    const int width = word_width(w);
    Word word;
    word.text = w;
    word.box_px = Box{x, y, x + width, y + kCharH};
    word.box = normalize_box(word.box_px, opt.page_w, opt.page_h);
    word.line_id = line;
    doc.words.push_back(std::move(word));
    x += width + kGap;
    return static_cast<int>(doc.words.size()) - 1;
  }

  void newline(Rng& rng) {
    ++line;
    y += kCharH + 20 + static_cast<int>(rng.below(16));
    x = kMargin;
  }

  bool room() const { return y + kCharH <= opt.page_h - kMargin; }
};

std::vector<std::string> split_words(const std::string& text, bool unspaced) {
  if (unspaced) return {text};
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == ' ') {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

void add_entity(Document& doc, int first, int last, EntityLabel label, bool unspaced) {
  EntitySpan e;
  e.id = static_cast<int>(doc.entities.size());
  e.first_word = first;
  e.last_word = last;
  e.label = label;
  e.box_px = doc.words[first].box_px;
  for (int w = first; w <= last; ++w) {
    if (w > first && !unspaced) e.text += ' ';
    e.text += doc.words[w].text;
    e.box_px = merge(e.box_px, doc.words[w].box_px);
  }
  doc.entities.push_back(std::move(e));
}

const std::string& pick(const std::vector<std::string>& v, Rng& rng) {
  if (v.empty()) throw ValidationError("synth: empty lexicon list");
  return v[rng.below(v.size())];
}

// Filler words until the line is full or `count` words are placed.
void filler_line(Layout& lay, const LangLexicon& lex, int count, bool unspaced, Rng& rng) {
  const int first = static_cast<int>(lay.doc.words.size());
  for (int i = 0; i < count; ++i) {
    const std::string& w = pick(lex.fillers, rng);
    if (!lay.fits(w)) break;
    lay.place(w);
  }
  if (static_cast<int>(lay.doc.words.size()) > first) {
    add_entity(lay.doc, first, static_cast<int>(lay.doc.words.size()) - 1, EntityLabel::kOther, unspaced);
  }
  lay.newline(rng);
}

void draw_glyph(GrayImage& img, char32_t c, int x0, int y0, int w, int h) {
  const std::uint64_t bits = mix_seed(static_cast<std::uint64_t>(c), 0x9e37);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int gx = x * 3 / std::max(1, w), gy = y * 5 / std::max(1, h);
      if ((bits >> (gy * 3 + gx)) & 1u) {
        const int px = x0 + x, py = y0 + y;
        if (px >= 0 && py >= 0 && px < img.width && py < img.height) img.at(px, py) = 0;
      }
    }
  }
}

GrayImage render(const Document& doc, const SynthOptions& opt) {
  const int s = opt.raster_divisor;
  GrayImage img(opt.page_w / s, opt.page_h / s, 255);
  for (const auto& w : doc.words) {
    int x = w.box_px.x0;
    for (char32_t c : utf8::decode(w.text)) {
      const int cw = c >= 0x2E80 ? 2 * kCharW : kCharW;
      draw_glyph(img, c, x / s, w.box_px.y0 / s, std::max(1, cw / s - 1), std::max(1, kCharH / s - 1));
      x += cw;
    }
  }
  return img;
}

// FNV-1a; std::hash is not stable across standard libraries.
std::uint64_t stable_hash(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) h = (h ^ c) * 1099511628211ull;
  return h;
}

}  // namespace

bool is_unspaced(const std::string& lang) { return lang == "zh" || lang == "ja"; }

std::filesystem::path default_lexicon_path() { return std::filesystem::path(LXLAB_DATA_DIR) / "synth_lexicon.json"; }

Lexicon load_lexicon(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open lexicon " + path.string());
  Lexicon lex;
  try {
    const auto j = nlohmann::json::parse(in);
    for (const auto& [lang, v] : j.items()) {
      lex[lang] = LangLexicon{v.at("headers"), v.at("keys"), v.at("values"), v.at("fillers")};
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("lexicon " + path.string() + ": " + e.what());
  }
  return lex;
}

std::size_t document_chars(const Document& doc) {
  std::size_t n = 0;
  for (const auto& w : doc.words) n += utf8::length(w.text);
  return n;
}

Document synth_document(const LangLexicon& lex, const std::string& lang, const std::string& id, Rng& rng,
                        const SynthOptions& opt) {
  const bool unspaced = is_unspaced(lang);
  Document doc;
  doc.id = id;
  doc.lang = lang;
  doc.page_w = opt.page_w;
  doc.page_h = opt.page_h;
  doc.image_fname = id + ".pgm";
  Layout lay{opt, doc};
  lay.x += static_cast<int>(rng.below(120));

  auto place_phrase = [&](const std::string& text) {
    const int first = static_cast<int>(doc.words.size());
    for (const auto& w : split_words(text, unspaced)) lay.place(w);
    return std::pair{first, static_cast<int>(doc.words.size()) - 1};
  };

  const auto [h0, h1] = place_phrase(pick(lex.headers, rng));
  add_entity(doc, h0, h1, EntityLabel::kHeader, unspaced);
  lay.newline(rng);
  if (rng.bernoulli(0.5)) filler_line(lay, lex, 3 + static_cast<int>(rng.below(4)), unspaced, rng);

  std::vector<std::string> keys = lex.keys;
  rng.shuffle(keys);
  const int pairs = opt.min_pairs + static_cast<int>(rng.below(opt.max_pairs - opt.min_pairs + 1));
  const int value_x = kMargin + 220 + static_cast<int>(rng.below(80));
  for (int p = 0; p < pairs && p < static_cast<int>(keys.size()); ++p) {
    const auto [k0, k1] = place_phrase(keys[p]);
    add_entity(doc, k0, k1, EntityLabel::kQuestion, unspaced);
    const int key_id = doc.entities.back().id;
    lay.x = std::max(lay.x, value_x);
    const auto [v0, v1] = place_phrase(pick(lex.values, rng));
    add_entity(doc, v0, v1, EntityLabel::kAnswer, unspaced);
    doc.links.push_back(RelationLink{key_id, doc.entities.back().id, RelationLabel::kKeyValue});
    lay.newline(rng);
  }
  filler_line(lay, lex, 2 + static_cast<int>(rng.below(4)), unspaced, rng);
  while (document_chars(doc) < static_cast<std::size_t>(opt.min_chars)) {
    if (!lay.room()) throw ValidationError("synth: page too small for " + std::to_string(opt.min_chars) + " characters");
    filler_line(lay, lex, 64, unspaced, rng);
  }
  doc.raster = render(doc, opt);
  doc.validate();
  return doc;
}

std::vector<Dataset> synth_datasets(const Lexicon& lexicon, const std::vector<std::string>& langs, int docs,
                                    std::uint64_t seed, const SynthOptions& options) {
  std::vector<Dataset> out;
  for (std::size_t l = 0; l < langs.size(); ++l) {
    const auto it = lexicon.find(langs[l]);
    if (it == lexicon.end()) throw ValidationError("synth: no lexicon for language '" + langs[l] + "'");
    Dataset ds;
    ds.lang = langs[l];
    for (int d = 0; d < docs; ++d) {
      Rng rng(mix_seed(seed, stable_hash(langs[l]), static_cast<std::uint64_t>(d)));
      ds.documents.push_back(synth_document(it->second, langs[l], langs[l] + "_" + std::to_string(d), rng, options));
    }
    out.push_back(std::move(ds));
  }
  return out;
}

}  // namespace lxlab
