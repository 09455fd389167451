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

#include <filesystem>
#include <fstream>
#include <functional>

#include "doctest.h"
#include "lxlab/errors.hpp"
#include "lxlab/numerics/rng.hpp"
#include "lxlab/tokenizer.hpp"
#include "lxlab/utf8.hpp"

using namespace lxlab;

namespace {

struct Candidate {
  double score;
  std::vector<std::string> pieces;
};

// Exhaustive enumeration of every segmentation; the winner is the highest
// score, then the fewest pieces, then the lexicographically smallest piece
// sequence.
Candidate brute_force(const std::string& text, const std::vector<std::pair<std::string, double>>& pieces,
                      double unk_score) {
  const auto chars = utf8::split_chars(text);
  const int n = static_cast<int>(chars.size());
  std::optional<Candidate> best;
  std::vector<std::pair<std::string, double>> path;
  std::function<void(int)> rec = [&](int i) {
    if (i == n) {
      double s = 0.0;
      for (auto it = path.rbegin(); it != path.rend(); ++it) s = it->second + s;
      Candidate c{s, {}};
      for (const auto& p : path) c.pieces.push_back(p.first);
      if (!best || c.score > best->score ||
          (c.score == best->score &&
           (c.pieces.size() < best->pieces.size() ||
            (c.pieces.size() == best->pieces.size() && c.pieces < best->pieces)))) {
        best = c;
      }
      return;
    }
    bool single = false;
    std::string surface;
    for (int j = i; j < n; ++j) {
      surface += chars[j];
      for (const auto& [p, s] : pieces) {
        if (p == surface) {
          if (j == i) single = true;
          path.emplace_back(p, s);
          rec(j + 1);
          path.pop_back();
        }
      }
    }
    if (!single) {
      path.emplace_back(chars[i], unk_score);
      rec(i + 1);
      path.pop_back();
    }
  };
  rec(0);
  return *best;
}

Word word_at(std::string text, Box box) {
  Word w;
  w.text = std::move(text);
  w.box = w.box_px = box;
  return w;
}

}  // namespace

TEST_CASE("load_vocab examples") {
  const auto v = UnigramVocab::parse("a\t-1.0\nb\t-2.0\nab\t-2.5\n");
  CHECK(v.size() == 3 + kNumSpecials);
  CHECK(*v.id("ab") == kNumSpecials + 2);
  CHECK(v.specials().mask == 4);
  CHECK_THROWS_AS(UnigramVocab::parse("a\t-1.0\na\t-2.0\n"), ParseError);
  CHECK_THROWS_AS(UnigramVocab::parse(""), ParseError);
  CHECK_THROWS_AS(UnigramVocab::parse("a\t0.5\n"), ParseError);
  CHECK_THROWS_AS(UnigramVocab::parse("a -1\n"), ParseError);
  // Special lines keep their fixed ids.
  const auto s = UnigramVocab::parse("<unk>\t0\n<mask>\t0\nx\t-1\n");
  CHECK(s.size() == 1 + kNumSpecials);
  CHECK(*s.id("<mask>") == 4);
}

TEST_CASE("shipped vocabulary fixture loads") {
  const auto v = UnigramVocab::load(std::filesystem::path(LXLAB_DATA_DIR) / "vocab.tsv");
  CHECK(v.size() <= 512);
  CHECK(v.size() > 100);
}

TEST_CASE("segment examples") {
  const auto v = UnigramVocab::from_pieces({{"a", -2.3}, {"b", -2.3}, {"ab", -3.0}});
  CHECK(segment_surfaces("ab", v) == std::vector<std::string>{"ab"});
  CHECK(segment_surfaces("ba", v) == std::vector<std::string>{"b", "a"});
  const auto ax = segment("ax", v);
  REQUIRE(ax.size() == 2);
  CHECK(ax[0].piece_id == *v.id("a"));
  CHECK(ax[1].piece_id == v.specials().unk);
  CHECK(segmentation_score(segment("ab", v), v) == -3.0);
}

TEST_CASE("viterbi matches brute force on all short strings") {
  const std::vector<std::pair<std::string, double>> pieces = {
      {"a", -1.5}, {"b", -2.0}, {"ab", -3.0}, {"ba", -3.5}, {"aab", -3.25}};
  const auto vocab = UnigramVocab::from_pieces(pieces);
  std::size_t checked = 0;
  for (int len = 1; len <= 12; ++len) {
    for (int mask = 0; mask < (1 << len); ++mask) {
      std::string text;
      for (int i = 0; i < len; ++i) text.push_back((mask >> i) & 1 ? 'b' : 'a');
      const auto oracle = brute_force(text, pieces, vocab.unk_score());
      const auto segs = segment(text, vocab);
      CHECK(segmentation_score(segs, vocab) == oracle.score);
      CHECK(segment_surfaces(text, vocab) == oracle.pieces);
      ++checked;
    }
  }
  CHECK(checked == 8190);
}

TEST_CASE("viterbi with unknown characters and ties") {
  // Equal scores everywhere: fewer pieces win, then lexicographic order.
  const std::vector<std::pair<std::string, double>> pieces = {
      {"a", -1.0}, {"b", -1.0}, {"ab", -2.0}, {"ca", -2.0}, {"bc", -2.0}};
  const auto vocab = UnigramVocab::from_pieces(pieces);
  for (int len = 1; len <= 7; ++len) {
    int total = 1;
    for (int i = 0; i < len; ++i) total *= 3;
    for (int code = 0; code < total; ++code) {
      std::string text;
      for (int i = 0, c = code; i < len; ++i, c /= 3) text.push_back("abc"[c % 3]);
      const auto oracle = brute_force(text, pieces, vocab.unk_score());
      CHECK(segment_surfaces(text, vocab) == oracle.pieces);
      // Surfaces reconstruct the text exactly.
      std::string joined;
      for (const auto& s : segment_surfaces(text, vocab)) joined += s;
      CHECK(joined == text);
    }
  }
}

TEST_CASE("char_boxes examples") {
  CHECK(char_boxes(word_at("ab", {0, 0, 100, 10})) == std::vector<Box>{{0, 0, 50, 10}, {50, 0, 100, 10}});
  CHECK(char_boxes(word_at("x", {3, 4, 9, 12})) == std::vector<Box>{{3, 4, 9, 12}});
  CHECK(char_boxes(word_at("abc", {0, 0, 99, 10})) ==
        std::vector<Box>{{0, 0, 33, 10}, {33, 0, 66, 10}, {66, 0, 99, 10}});
  CHECK(char_boxes(word_at("名字", {0, 0, 10, 10})).size() == 2);
}

TEST_CASE("tokenize_document merges character boxes") {
  const auto vocab = UnigramVocab::from_pieces({{"a", -2.0}, {"b", -2.0}, {"ab", -1.0}, {"c", -3.0}});
  Document doc;
  doc.words.push_back(word_at("ab", {10, 10, 30, 20}));
  doc.words.push_back(word_at("abc", {100, 0, 160, 30}));
  const auto toks = tokenize_document(doc, vocab);
  REQUIRE(toks.size() == 3);
  CHECK(toks[0].box == Box{10, 10, 30, 20});
  CHECK(toks[0].word_index == 0);
  CHECK(toks[1].box == Box{100, 0, 140, 30});
  CHECK(toks[2].box == Box{140, 0, 160, 30});
  CHECK(toks[2].char_begin == 2);
}

TEST_CASE("token boxes are minimal covers of their character slices") {
  const auto vocab = UnigramVocab::load(std::filesystem::path(LXLAB_DATA_DIR) / "vocab.tsv");
  const std::vector<std::string> alphabet = {"a", "e", "n", "o", "r", "s", "t", "名", "字", "の", ":", "x", "é"};
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    Document doc;
    const int n = 1 + static_cast<int>(rng.below(8));
    for (int w = 0; w < n; ++w) {
      std::string text;
      const int len = 1 + static_cast<int>(rng.below(9));
      for (int c = 0; c < len; ++c) text += alphabet[rng.below(alphabet.size())];
      const int x0 = static_cast<int>(rng.below(800)), y0 = static_cast<int>(rng.below(900));
      doc.words.push_back(word_at(text, {x0, y0, x0 + static_cast<int>(rng.below(200)), y0 + 20}));
    }
    const auto toks = tokenize_document(doc, vocab);
    std::vector<std::string> rebuilt(doc.words.size());
    for (const auto& t : toks) {
      const Word& w = doc.words[t.word_index];
      const auto slices = char_boxes(w);
      Box cover = slices[t.char_begin];
      for (int c = t.char_begin; c < t.char_end; ++c) {
        CHECK(t.box.contains(slices[c]));
        cover = merge(cover, slices[c]);
      }
      CHECK(t.box == cover);
      CHECK(w.box.contains(t.box));
      const auto chars = utf8::split_chars(w.text);
      for (int c = t.char_begin; c < t.char_end; ++c) rebuilt[t.word_index] += chars[c];
    }
    for (std::size_t w = 0; w < doc.words.size(); ++w) CHECK(rebuilt[w] == doc.words[w].text);
  }
}
