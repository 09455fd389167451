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

#include <fstream>
#include <filesystem>

#include "doctest.h"
#include "lxlab/docmodel.hpp"
#include "lxlab/errors.hpp"
#include "lxlab/numerics/rng.hpp"

using namespace lxlab;

namespace {

const char* kMinimal = R"({"lang": "en", "documents": [
  {"id": "doc0", "img": {"fname": "doc0.jpg", "width": 1000, "height": 2000},
   "document": [
     {"id": 0, "text": "Name:", "box": [10, 20, 110, 60], "label": "question",
      "words": [{"text": "Name:", "box": [10, 20, 110, 60]}], "linking": []}
   ]}
]})";

const char* kLinked = R"({"lang": "zh", "documents": [
  {"id": "zh_0", "img": {"fname": "zh_0.jpg", "width": 500, "height": 500},
   "document": [
     {"id": 0, "text": "姓名:", "box": [10, 10, 60, 30], "label": "question",
      "words": [{"text": "姓名:", "box": [10, 10, 60, 30]}], "linking": [[0, 1]]},
     {"id": 1, "text": "张三", "box": [100, 10, 160, 30], "label": "answer",
      "words": [{"text": "张三", "box": [100, 10, 160, 30]}], "linking": [[0, 1]]}
   ]}
]})";

// Random document whose entities partition the words.
Document random_document(Rng& rng, int index) {
  Document doc;
  doc.id = "rand" + std::to_string(index);
  doc.lang = "en";
  doc.page_w = 1000;
  doc.page_h = 1000;
  const int n_words = 1 + static_cast<int>(rng.below(20));
  for (int w = 0; w < n_words; ++w) {
    Word word;
    word.text = "w" + std::to_string(w);
    const int x0 = static_cast<int>(rng.below(900)), y0 = static_cast<int>(rng.below(900));
    word.box_px = word.box = Box{x0, y0, x0 + 1 + static_cast<int>(rng.below(99)), y0 + 10};
    word.line_id = w / 3;
    doc.words.push_back(word);
  }
  int w = 0, id = 0;
  while (w < n_words) {
    const int len = 1 + static_cast<int>(rng.below(3));
    EntitySpan e;
    e.id = id++;
    e.first_word = w;
    e.last_word = std::min(n_words - 1, w + len - 1);
    e.label = static_cast<EntityLabel>(rng.below(4));
    doc.entities.push_back(e);
    w = e.last_word + 1;
  }
  return doc;
}

std::vector<EntitySpan> labeled_entities(const Document& doc) {
  std::vector<EntitySpan> out;
  for (const auto& e : doc.entities) {
    if (e.label != EntityLabel::kOther) out.push_back(e);
  }
  return out;
}

}  // namespace

TEST_CASE("normalize_box examples") {
  CHECK(normalize_box({50, 100, 150, 300}, 1000, 2000) == Box{50, 50, 150, 150});
  CHECK(normalize_box({0, 0, 640, 480}, 640, 480) == Box{0, 0, 1000, 1000});
  CHECK(normalize_box({0, 0, 0, 0}, 640, 480) == Box{0, 0, 0, 0});
  CHECK(normalize_box({-5, 0, 700, 480}, 640, 480) == Box{0, 0, 1000, 1000});
  CHECK_THROWS_AS(normalize_box({10, 0, 5, 5}, 100, 100), ValidationError);
  CHECK_THROWS_AS(normalize_box({0, 0, 5, 5}, 0, 100), ValidationError);
}

TEST_CASE("normalize_box is monotone and idempotent on a full-range page") {
  Rng rng(1);
  for (int i = 0; i < 500; ++i) {
    const int w = 1 + static_cast<int>(rng.below(3000)), h = 1 + static_cast<int>(rng.below(3000));
    int a = static_cast<int>(rng.below(w + 1)), b = static_cast<int>(rng.below(w + 1));
    if (a > b) std::swap(a, b);
    const Box lo = normalize_box({a, 0, a, 0}, w, h);
    const Box hi = normalize_box({b, 0, b, 0}, w, h);
    CHECK(lo.x0 <= hi.x0);
    const Box n = normalize_box({a, a % (h + 1), b, h}, w, h);
    CHECK(normalize_box(n, kCoordMax, kCoordMax) == n);
  }
}

TEST_CASE("parse minimal and linked fixtures") {
  const Dataset ds = parse_dataset_text(kMinimal);
  REQUIRE(ds.documents.size() == 1);
  const Document& d = ds.documents[0];
  CHECK(d.entities.size() == 1);
  CHECK(d.links.empty());
  CHECK(d.words[0].box == Box{10, 10, 110, 30});
  CHECK(d.entities[0].label == EntityLabel::kQuestion);

  const Dataset zh = parse_dataset_text(kLinked);
  REQUIRE(zh.documents[0].links.size() == 1);
  CHECK(zh.documents[0].links[0] == RelationLink{0, 1});
}

TEST_CASE("schema violations name the field and the document") {
  std::string bad = kMinimal;
  bad.replace(bad.find("\"label\": \"question\""), 19, "\"label\": \"banana\"");
  CHECK_THROWS_AS(parse_dataset_text(bad), ParseError);

  std::string missing = kMinimal;
  missing.replace(missing.find("\"width\": 1000, "), 15, "");
  try {
    parse_dataset_text(missing);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("doc0") != std::string::npos);
    CHECK(msg.find("width") != std::string::npos);
  }

  std::string dangling = kLinked;
  dangling.replace(dangling.find("[[0, 1]]"), 8, "[[0, 7]]");
  CHECK_THROWS_AS(parse_dataset_text(dangling), ParseError);
}

TEST_CASE("missing line ids are derived from vertical centers") {
  const Dataset ds = parse_dataset_text(kLinked);
  CHECK(ds.documents[0].words[0].line_id == ds.documents[0].words[1].line_id);

  std::vector<Word> words(3);
  words[0].box = {0, 100, 10, 120};
  words[1].box = {50, 104, 60, 124};
  words[2].box = {0, 200, 10, 220};
  derive_lines(words);
  CHECK(words[0].line_id == 0);
  CHECK(words[1].line_id == 0);
  CHECK(words[2].line_id == 1);
}

TEST_CASE("write and parse round-trip") {
  Rng rng(2);
  Dataset ds;
  ds.lang = "en";
  for (int i = 0; i < 20; ++i) {
    Document d = random_document(rng, i);
    for (auto& w : d.words) w.box = normalize_box(w.box_px, d.page_w, d.page_h);
    d.links.push_back(RelationLink{0, static_cast<int>(d.entities.size()) - 1});
    if (d.entities.size() == 1) d.links.clear();
    d.image_fname = d.id + ".jpg";
    ds.documents.push_back(d);
  }
  const std::string text = dataset_to_text(ds);
  const Dataset parsed = parse_dataset_text(text);
  CHECK(parsed == ds);
  CHECK(dataset_to_text(parsed) == text);

  const std::string canonical = dataset_to_text(parse_dataset_text(kLinked));
  CHECK(dataset_to_text(parse_dataset_text(canonical)) == canonical);
}

TEST_CASE("bio decode examples") {
  const int seq[] = {3, 4, 0, 5};
  const auto spans = bio_decode(seq);
  REQUIRE(spans.size() == 2);
  CHECK(spans[0].first_word == 0);
  CHECK(spans[0].last_word == 1);
  CHECK(spans[0].label == EntityLabel::kQuestion);
  CHECK(spans[1].first_word == 3);
  CHECK(spans[1].last_word == 3);
  CHECK(spans[1].label == EntityLabel::kAnswer);

  const int outside[] = {0, 0, 0};
  CHECK(bio_decode(outside).empty());

  // Dangling I- and a type switch both open new spans.
  const int dangling[] = {0, 4, 4, 6, 1};
  const auto d = bio_decode(dangling);
  REQUIRE(d.size() == 3);
  CHECK(d[0].first_word == 1);
  CHECK(d[0].last_word == 2);
  CHECK(d[1].label == EntityLabel::kAnswer);
  CHECK(d[2].label == EntityLabel::kHeader);
  CHECK(bio_name(3) == "B-QUESTION");
}

TEST_CASE("bio decode inverts encode on random documents") {
  Rng rng(3);
  for (int trial = 0; trial < 300; ++trial) {
    const Document doc = random_document(rng, trial);
    // Random subword alignment: every word gets 1-3 tokens.
    std::vector<int> token_word;
    for (int w = 0; w < static_cast<int>(doc.words.size()); ++w) {
      const int n = 1 + static_cast<int>(rng.below(3));
      for (int k = 0; k < n; ++k) token_word.push_back(w);
    }
    const auto tags = bio_encode(doc, token_word);
    const auto word_tags = word_tags_from_tokens(tags, token_word, doc.words.size());
    const auto decoded = bio_decode(word_tags);
    const auto expected = labeled_entities(doc);
    REQUIRE(decoded.size() == expected.size());
    for (std::size_t i = 0; i < decoded.size(); ++i) CHECK(decoded[i].same_span(expected[i]));
  }
}

TEST_CASE("entity counts per label") {
  const Dataset ds = parse_dataset_text(kLinked);
  const auto counts = entity_counts(ds);
  CHECK(counts[static_cast<int>(EntityLabel::kQuestion)] == 1);
  CHECK(counts[static_cast<int>(EntityLabel::kAnswer)] == 1);
  CHECK(counts[static_cast<int>(EntityLabel::kHeader)] == 0);
}

TEST_CASE("rasters referenced as PGM are loaded") {
  const auto dir = std::filesystem::temp_directory_path() / "lxlab_docmodel_test";
  std::filesystem::create_directories(dir);
  GrayImage img(8, 4, 200);
  img.at(1, 1) = 0;
  write_pgm(img, dir / "doc0.pgm");
  std::string text = kMinimal;
  text.replace(text.find("doc0.jpg"), 8, "doc0.pgm");
  {
    std::ofstream out(dir / "ds.json");
    out << text;
  }
  const Dataset ds = parse_dataset(dir / "ds.json");
  REQUIRE(ds.documents[0].raster.has_value());
  CHECK(*ds.documents[0].raster == img);
  std::filesystem::remove_all(dir);
}
