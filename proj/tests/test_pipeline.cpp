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
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "lxlab/errors.hpp"
#include "lxlab/pipeline.hpp"
#include "lxlab/synth.hpp"
#include "lxlab/utf8.hpp"

using namespace lxlab;
namespace fs = std::filesystem;

namespace {

const std::vector<LangProfile>& profiles() {
  static const auto p = load_profiles(default_profile_dir());
  return p;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

fs::path temp_dir(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("lxlab_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

// Words of the seed text as runs, cut to exactly `chars` characters.
CorpusRecord record_of_length(std::size_t chars, const std::string& seed_text) {
  CorpusRecord r;
  r.id = "len" + std::to_string(chars);
  r.page_w = 1000;
  r.page_h = 1000;
  std::vector<std::u32string> words(1);
  for (char32_t c : utf8::decode(seed_text)) {
    if (c == U' ' || c == U'\n') {
      if (!words.back().empty()) words.emplace_back();
    } else {
      words.back().push_back(c);
    }
  }
  if (words.back().empty()) words.pop_back();
  std::size_t total = 0;
  for (std::size_t i = 0; total < chars; ++i) {
    std::u32string w = words[i % words.size()];
    if (total + w.size() > chars) w.resize(chars - total);
    total += w.size();
    r.runs.push_back(TextRun{utf8::encode(w), Box{0, 0, 10, 10}, static_cast<int>(i / 8)});
  }
  return r;
}

}  // namespace

TEST_CASE("sampling_probs examples") {
  SamplingSpec s{{{"A", 75}, {"B", 25}}, 0.7, 0};
  const auto p = sampling_probs(s);
  const long double a = std::pow(0.75L, 0.7L), b = std::pow(0.25L, 0.7L);
  CHECK(std::abs(p.at("A") - static_cast<double>(a / (a + b))) <= 1e-12);
  CHECK(std::abs(p.at("B") - static_cast<double>(b / (a + b))) <= 1e-12);
  CHECK(p.at("A") == doctest::Approx(0.6833).epsilon(1e-4));
  s.alpha = 1.0;
  CHECK(sampling_probs(s).at("A") == 0.75);
  CHECK(sampling_probs(s).at("B") == 0.25);
  s.alpha = 0.0;
  s.counts["C"] = 0;
  const auto u = sampling_probs(s);
  CHECK(u.size() == 2u);
  CHECK(u.at("A") == 0.5);
  CHECK(u.at("B") == 0.5);
  CHECK_THROWS_AS(sampling_probs(SamplingSpec{{{"A", 0}}, 0.7, 0}), ValidationError);
}

TEST_CASE("sampling_probs properties") {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    SamplingSpec s;
    s.alpha = rng.uniform(0.05, 0.95);
    const int k = 2 + static_cast<int>(rng.below(7));
    for (int l = 0; l < k; ++l) s.counts["l" + std::to_string(l)] = 1 + rng.below(100000);
    const auto p = sampling_probs(s);
    double sum = 0.0;
    for (const auto& [l, v] : p) sum += v;
    CHECK(std::abs(sum - 1.0) <= 1e-12);
    for (const auto& [la, na] : s.counts) {
      for (const auto& [lb, nb] : s.counts) {
        if (na <= nb) continue;
        CHECK(p.at(la) >= p.at(lb));
        CHECK(p.at(la) / p.at(lb) < static_cast<double>(na) / static_cast<double>(nb));
      }
    }
  }
}

TEST_CASE("sample stream frequencies, round robin and determinism") {
  SamplingSpec s{{{"A", 75}, {"B", 25}}, 0.7, 42};
  SampleStream st(s), again(s);
  int a = 0;
  std::map<std::string, std::size_t> next_index;
  for (int i = 0; i < 10000; ++i) {
    const auto d = st.next(3);
    const auto e = again.next(3);
    REQUIRE(d.lang == e.lang);
    REQUIRE(d.indices == e.indices);
    a += d.lang == "A";
    const std::size_t n = s.counts.at(d.lang);
    for (std::size_t idx : d.indices) {
      CHECK(idx == next_index[d.lang] % n);
      ++next_index[d.lang];
    }
  }
  CHECK(std::abs(a / 10000.0 - 0.6833) <= 0.023);

  SampleStream single(SamplingSpec{{{"en", 4}}, 0.7, 1});
  for (int i = 0; i < 5; ++i) {
    const auto d = single.next(2);
    CHECK(d.lang == "en");
    CHECK(d.epoch == static_cast<std::size_t>(2 * i / 4));
  }
}

TEST_CASE("language detection") {
  for (const auto& p : profiles()) {
    const auto text = read_file(default_profile_dir() / (p.lang + ".txt"));
    const auto r = detect_language(text, profiles());
    CHECK(r.lang == p.lang);
    CHECK(r.score >= 0.99);
  }
  CHECK(detect_language("1234 5678", profiles()).score < 0.5);
  CHECK(detect_language("ab", profiles()).score == 0.0);
  const std::string t = "please complete this form with the information below";
  const auto base = detect_language(t, profiles());
  CHECK(detect_language("  please   complete\tthis form\n\nwith the information below ", profiles()).score ==
        base.score);
  CHECK(detect_language("PLEASE Complete THIS form with the INFORMATION below", profiles()).score == base.score);
  CHECK(detect_language(t, profiles()).lang == base.lang);
  CHECK(normalize_for_langid("ÉCOLE ÀÇ Ł") == U"école àç ł");
}

TEST_CASE("synthetic corpus pages are identified") {
  const auto lex = load_lexicon(default_lexicon_path());
  SynthOptions opt;
  opt.min_chars = 240;
  for (const auto& [lang, l] : lex) {
    for (int i = 0; i < 5; ++i) {
      Rng rng(mix_seed(11, i));
      const auto doc = synth_document(l, lang, "c", rng, opt);
      const auto r = filter_record(document_to_record(doc, ""), profiles());
      INFO(lang);
      CHECK(r.lang.lang == lang);
      CHECK(r.reason == FilterReason::kKept);
    }
  }
}

TEST_CASE("filter boundaries") {
  CHECK(filter_decision(199, 0.9) == FilterReason::kTooShort);
  CHECK(filter_decision(200, 0.9) == FilterReason::kKept);
  CHECK(filter_decision(5000, 0.5) == FilterReason::kLowLangScore);
  CHECK(filter_decision(5000, std::nextafter(0.5, 1.0)) == FilterReason::kKept);
  const auto en = read_file(default_profile_dir() / "en.txt");
  const auto r199 = record_of_length(199, en), r200 = record_of_length(200, en);
  CHECK(record_chars(r199) == 199u);
  CHECK(filter_record(r199, profiles()).reason == FilterReason::kTooShort);
  CHECK(record_chars(r200) == 200u);
  const auto f = filter_record(r200, profiles());
  CHECK(f.lang.score > 0.5);
  CHECK(f.reason == FilterReason::kKept);
  // Multi-byte characters count once.
  const auto zh = record_of_length(200, read_file(default_profile_dir() / "zh.txt"));
  CHECK(record_chars(zh) == 200u);
}

TEST_CASE("record json round trip") {
  CorpusRecord r;
  r.id = "x";
  r.lang_hint = "fr";
  r.runs = {TextRun{"bonjour", Box{1, 2, 30, 40}, 0}, TextRun{"été", Box{40, 2, 60, 40}, 0}};
  r.page_w = 100;
  r.page_h = 200;
  r.raster = "x.pgm";
  CHECK(parse_record(record_to_json(r).dump()) == r);
  CHECK_THROWS_AS(parse_record(R"({"id":"y","text_runs":[{"text":"a","box":[1,2]}],"page":{"w":1,"h":1}})"),
                  ParseError);
  CHECK_THROWS_AS(parse_record("{not json"), ParseError);
}

TEST_CASE("corpus build shards and stats") {
  const auto dir = temp_dir("corpus");
  const auto lex = load_lexicon(default_lexicon_path());
  SynthOptions opt;
  opt.min_chars = 240;
  std::ofstream out(dir / "corpus.jsonl");
  int n = 0;
  for (const std::string lang : {"en", "zh", "de"}) {
    for (int i = 0; i < 3; ++i) {
      Rng rng(mix_seed(5, n++));
      auto doc = synth_document(lex.at(lang), lang, lang + std::to_string(i), rng, opt);
      write_pgm(*doc.raster, dir / (doc.id + ".pgm"));
      out << record_to_json(document_to_record(doc, doc.id + ".pgm")).dump() << '\n';
    }
  }
  out << record_to_json(record_of_length(120, read_file(default_profile_dir() / "en.txt"))).dump() << '\n';
  CorpusRecord digits;
  digits.id = "digits";
  digits.page_w = digits.page_h = 100;
  for (int i = 0; i < 30; ++i) digits.runs.push_back(TextRun{"12345678", Box{0, 0, 5, 5}, 0});
  out << record_to_json(digits).dump() << '\n';
  out.close();

  const auto stats = build_corpus(dir / "corpus.jsonl", dir / "shards", profiles());
  const auto t = stats.totals();
  CHECK(t.total() == 11u);
  CHECK(t.kept == 9u);
  CHECK(t.too_short == 1u);
  CHECK(t.low_lang_score == 1u);
  CHECK(stats.by_lang.at("zh").kept == 3u);
  const auto reread = CorpusStats::from_json(nlohmann::json::parse(read_file(dir / "shards" / "stats.json")));
  CHECK(reread.totals().kept == 9u);
  const auto docs = load_shard(dir / "shards" / "de.jsonl");
  REQUIRE(docs.size() == 3u);
  CHECK(docs[0].id == "de0");
  CHECK(docs[0].raster.has_value());
  CHECK(docs[0].words.size() > 10u);
  fs::remove_all(dir);
}
