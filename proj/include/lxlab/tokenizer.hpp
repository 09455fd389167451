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

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lxlab/docmodel.hpp"

namespace lxlab {

struct SpecialIds {
  int pad = 0;
  int unk = 1;
  int bos = 2;
  int eos = 3;
  int mask = 4;
};

inline constexpr int kNumSpecials = 5;

// Unigram language model vocabulary: piece -> log-probability. Special
// tokens occupy ids 0..4; loaded pieces follow in file order.
class UnigramVocab {
 public:
  // TSV of `piece<TAB>logprob`. Lines naming a special token
  // (<pad> <unk> <s> </s> <mask>) are accepted and map to its fixed id.
  static UnigramVocab load(const std::filesystem::path& path);
  static UnigramVocab parse(std::string_view tsv);
  static UnigramVocab from_pieces(const std::vector<std::pair<std::string, double>>& pieces);

  int size() const { return static_cast<int>(pieces_.size()); }
  std::optional<int> id(std::string_view piece) const;
  const std::string& piece(int id) const { return pieces_.at(id); }
  double score(int id) const { return scores_.at(id); }
  bool is_special(int id) const { return id >= 0 && id < kNumSpecials; }
  const SpecialIds& specials() const { return specials_; }
  int max_piece_chars() const { return max_piece_chars_; }
  // Score charged for one UNK character: lowest piece score minus 10.
  double unk_score() const { return unk_score_; }

 private:
  void add(const std::string& piece, double score);

  std::vector<std::string> pieces_;
  std::vector<double> scores_;
  std::unordered_map<std::string, int> index_;
  SpecialIds specials_;
  int max_piece_chars_ = 1;
  double unk_score_ = -10.0;
};

// A piece spanning code points [begin, end) of the segmented text.
struct Segment {
  int piece_id = 0;
  int begin = 0;
  int end = 0;

  bool operator==(const Segment&) const = default;
};

// Viterbi segmentation maximizing the summed piece log-probabilities.
// Characters without a single-character piece may be emitted as UNK, one
// character each. Ties prefer fewer pieces, then the lexicographically
// smallest first piece.
std::vector<Segment> segment(std::u32string_view text, const UnigramVocab& vocab);
std::vector<Segment> segment(std::string_view utf8_text, const UnigramVocab& vocab);

// Surface strings of a segmentation, UNK expanded to its source character.
std::vector<std::string> segment_surfaces(std::string_view utf8_text, const UnigramVocab& vocab);
double segmentation_score(const std::vector<Segment>& segments, const UnigramVocab& vocab);

// Splits a word box into one equal-width slice per character, the last
// slice absorbing the integer remainder.
std::vector<Box> char_boxes(const Word& word);

struct SubwordToken {
  int piece_id = 0;
  int char_begin = 0;  // code point offsets within the word
  int char_end = 0;
  Box box;
  int word_index = 0;

  bool operator==(const SubwordToken&) const = default;
};

// Segments every word and gives each piece the minimal box covering its
// character slices. Reading order is preserved.
std::vector<SubwordToken> tokenize_document(const Document& doc, const UnigramVocab& vocab);

}  // namespace lxlab
