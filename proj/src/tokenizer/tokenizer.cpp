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

#include "lxlab/tokenizer.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <limits>
#include <sstream>

#include "lxlab/errors.hpp"
#include "lxlab/utf8.hpp"

namespace lxlab {

namespace {

constexpr std::array<const char*, kNumSpecials> kSpecialNames = {"<pad>", "<unk>", "<s>", "</s>", "<mask>"};
constexpr double kUnkPenalty = 10.0;

}  // namespace

void UnigramVocab::add(const std::string& piece, double score) {
  if (index_.count(piece)) throw ParseError("duplicate vocabulary piece '" + piece + "'");
  index_[piece] = static_cast<int>(pieces_.size());
  pieces_.push_back(piece);
  scores_.push_back(score);
}

UnigramVocab UnigramVocab::from_pieces(const std::vector<std::pair<std::string, double>>& pieces) {
  UnigramVocab v;
  for (const char* name : kSpecialNames) v.add(name, 0.0);
  double min_score = 0.0;
  for (const auto& [piece, score] : pieces) {
    if (piece.empty()) throw ParseError("empty vocabulary piece");
    if (!(score <= 0.0)) throw ParseError("piece '" + piece + "' has positive log-probability");
    const auto is_special = std::find(kSpecialNames.begin(), kSpecialNames.end(), piece) != kSpecialNames.end();
    if (is_special) continue;
    v.add(piece, score);
    min_score = std::min(min_score, score);
    v.max_piece_chars_ = std::max(v.max_piece_chars_, static_cast<int>(utf8::length(piece)));
  }
  if (v.size() == kNumSpecials) throw ParseError("vocabulary has no pieces");
  v.unk_score_ = min_score - kUnkPenalty;
  return v;
}

UnigramVocab UnigramVocab::parse(std::string_view tsv) {
  std::vector<std::pair<std::string, double>> pieces;
  std::vector<std::string> seen_specials;
  std::istringstream in{std::string(tsv)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.rfind('\t');
    if (tab == std::string::npos) throw ParseError("vocab line " + std::to_string(line_no) + ": expected piece<TAB>logprob");
    const std::string piece = line.substr(0, tab);
    double score = 0.0;
    try {
      std::size_t used = 0;
      score = std::stod(line.substr(tab + 1), &used);
      if (used != line.size() - tab - 1) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ParseError("vocab line " + std::to_string(line_no) + ": bad log-probability");
    }
    if (std::find(kSpecialNames.begin(), kSpecialNames.end(), piece) != kSpecialNames.end()) {
      if (std::find(seen_specials.begin(), seen_specials.end(), piece) != seen_specials.end()) {
        throw ParseError("duplicate vocabulary piece '" + piece + "'");
      }
      seen_specials.push_back(piece);
    }
    if (!(score <= 0.0)) throw ParseError("vocab line " + std::to_string(line_no) + ": positive log-probability");
    pieces.emplace_back(piece, score);
  }
  return from_pieces(pieces);
}

UnigramVocab UnigramVocab::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open vocabulary " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::optional<int> UnigramVocab::id(std::string_view piece) const {
  auto it = index_.find(std::string(piece));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<Segment> segment(std::u32string_view text, const UnigramVocab& vocab) {
  const int n = static_cast<int>(text.size());
  struct Best {
    double score = -std::numeric_limits<double>::infinity();
    int count = 0;
    int piece = -1;
    int end = 0;
    std::string surface;
  };
  // best[i] describes the optimal segmentation of the suffix text[i..n).
  std::vector<Best> best(n + 1);
  best[n].score = 0.0;
  const int max_len = vocab.max_piece_chars();

  auto better = [](const Best& cand, const Best& cur) {
    if (cand.score != cur.score) return cand.score > cur.score;
    if (cand.count != cur.count) return cand.count < cur.count;
    return cand.surface < cur.surface;
  };

  for (int i = n - 1; i >= 0; --i) {
    bool has_single = false;
    std::string surface;
    for (int len = 1; len <= max_len && i + len <= n; ++len) {
      surface += utf8::encode(text[i + len - 1]);
      const auto id = vocab.id(surface);
      if (!id || vocab.is_special(*id)) continue;
      if (len == 1) has_single = true;
      Best cand{vocab.score(*id) + best[i + len].score, best[i + len].count + 1, *id, i + len, surface};
      if (better(cand, best[i])) best[i] = std::move(cand);
    }
    if (!has_single) {
      Best cand{vocab.unk_score() + best[i + 1].score, best[i + 1].count + 1, vocab.specials().unk, i + 1,
                utf8::encode(text[i])};
      if (better(cand, best[i])) best[i] = std::move(cand);
    }
  }
  std::vector<Segment> out;
  for (int i = 0; i < n; i = best[i].end) out.push_back(Segment{best[i].piece, i, best[i].end});
  return out;
}

std::vector<Segment> segment(std::string_view utf8_text, const UnigramVocab& vocab) {
  return segment(utf8::decode(utf8_text), vocab);
}

std::vector<std::string> segment_surfaces(std::string_view utf8_text, const UnigramVocab& vocab) {
  const auto cps = utf8::decode(utf8_text);
  std::vector<std::string> out;
  for (const auto& s : segment(cps, vocab)) {
    out.push_back(utf8::encode(std::u32string_view(cps).substr(s.begin, s.end - s.begin)));
  }
  return out;
}

double segmentation_score(const std::vector<Segment>& segments, const UnigramVocab& vocab) {
  // Right fold, matching the order in which segment() accumulates.
  double s = 0.0;
  for (auto it = segments.rbegin(); it != segments.rend(); ++it) {
    s = (it->piece_id == vocab.specials().unk ? vocab.unk_score() : vocab.score(it->piece_id)) + s;
  }
  return s;
}

std::vector<Box> char_boxes(const Word& word) {
  const int k = static_cast<int>(utf8::length(word.text));
  std::vector<Box> out;
  if (k == 0) return out;
  const int step = word.box.width() / k;
  for (int i = 0; i < k; ++i) {
    const int x0 = word.box.x0 + i * step;
    const int x1 = i == k - 1 ? word.box.x1 : x0 + step;
    out.push_back(Box{x0, word.box.y0, x1, word.box.y1});
  }
  return out;
}

std::vector<SubwordToken> tokenize_document(const Document& doc, const UnigramVocab& vocab) {
  std::vector<SubwordToken> tokens;
  for (std::size_t w = 0; w < doc.words.size(); ++w) {
    const Word& word = doc.words[w];
    if (word.text.empty()) continue;
    const auto chars = char_boxes(word);
    for (const auto& seg : segment(word.text, vocab)) {
      Box box = chars[seg.begin];
      for (int c = seg.begin + 1; c < seg.end; ++c) box = merge(box, chars[c]);
      tokens.push_back(SubwordToken{seg.piece_id, seg.begin, seg.end, box, static_cast<int>(w)});
    }
  }
  return tokens;
}

}  // namespace lxlab
