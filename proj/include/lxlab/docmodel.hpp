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

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lxlab/image.hpp"

namespace lxlab {

// Page coordinates are normalized onto a 0..1000 integer grid.
inline constexpr int kCoordMax = 1000;

struct Box {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;

  int width() const { return x1 - x0; }
  int height() const { return y1 - y0; }
  bool contains(const Box& o) const { return x0 <= o.x0 && y0 <= o.y0 && o.x1 <= x1 && o.y1 <= y1; }
  bool operator==(const Box&) const = default;
};

// Smallest box covering both.
Box merge(const Box& a, const Box& b);

enum class EntityLabel { kHeader = 0, kQuestion = 1, kAnswer = 2, kOther = 3 };
inline constexpr int kNumEntityLabels = 4;

std::string_view label_name(EntityLabel label);
// Accepts the lowercase dataset spelling ("header", ...) and upper case.
EntityLabel parse_label(std::string_view name);

enum class RelationLabel { kKeyValue };

struct Word {
  std::string text;
  Box box;     // normalized
  Box box_px;  // as read from the page
  int line_id = 0;

  bool operator==(const Word&) const = default;
};

struct EntitySpan {
  int id = 0;
  int first_word = 0;  // inclusive
  int last_word = 0;   // inclusive
  EntityLabel label = EntityLabel::kOther;
  std::string text;
  Box box_px;

  bool same_span(const EntitySpan& o) const {
    return first_word == o.first_word && last_word == o.last_word && label == o.label;
  }
  bool operator==(const EntitySpan&) const = default;
};

struct RelationLink {
  int head = 0;
  int tail = 0;
  RelationLabel label = RelationLabel::kKeyValue;

  bool operator==(const RelationLink&) const = default;
};

struct Document {
  std::string id;
  std::string lang;
  int page_w = 0;
  int page_h = 0;
  std::string image_fname;
  std::vector<Word> words;
  std::optional<GrayImage> raster;
  std::vector<EntitySpan> entities;
  std::vector<RelationLink> links;

  const EntitySpan* find_entity(int entity_id) const;
  // Checks word boxes, entity ranges/overlap and link endpoints; throws
  // ValidationError naming the document.
  void validate() const;

  bool operator==(const Document&) const = default;
};

struct Dataset {
  std::string lang;
  std::vector<Document> documents;

  bool operator==(const Dataset&) const = default;
};

// Maps a page-pixel box onto the 0..1000 grid:
// x -> clamp(floor(1000 * x / page_w), 0, 1000), y likewise.
Box normalize_box(const Box& box_px, int page_w, int page_h);

// Assigns line ids by clustering words whose vertical centers differ by
// less than half the median word height. Lines are numbered top to bottom.
void derive_lines(std::vector<Word>& words);

// Dataset JSON I/O. Rasters referenced by img.fname are loaded when the
// file is a PGM next to the dataset file.
Dataset parse_dataset(const std::filesystem::path& path);
Dataset parse_dataset_text(std::string_view json_text, const std::filesystem::path& base_dir = {});
void write_dataset(const Dataset& dataset, const std::filesystem::path& path);
std::string dataset_to_text(const Dataset& dataset);

// Per-label entity counts as stored in the dataset.
std::array<std::size_t, kNumEntityLabels> entity_counts(const Dataset& dataset);

// --- BIO tagging -----------------------------------------------------------
// Label ids: 0 = O, then B/I pairs for HEADER, QUESTION, ANSWER.
inline constexpr int kBioOutside = 0;
inline constexpr int kNumBioLabels = 7;

int bio_begin(EntityLabel label);
int bio_inside(EntityLabel label);
std::string bio_name(int tag);

// One tag per token; token_word[i] is the source word of token i (-1 for
// tokens outside any word). OTHER entities and unassigned words become O.
std::vector<int> bio_encode(const Document& doc, std::span<const int> token_word);

// Groups maximal B/I runs into spans over tag positions. A dangling I-X
// (after O or a different type) opens a new span.
std::vector<EntitySpan> bio_decode(std::span<const int> tags);

// Word-level tags from token tags using each word's first token. Words
// with no token get O.
std::vector<int> word_tags_from_tokens(std::span<const int> token_tags, std::span<const int> token_word,
                                       std::size_t word_count);

}  // namespace lxlab
