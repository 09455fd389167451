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

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "lxlab/docmodel.hpp"
#include "lxlab/numerics/rng.hpp"

namespace lxlab {

// --- Language identification ------------------------------------------------

// Lowercased text with whitespace runs collapsed to one space and trimmed.
std::u32string normalize_for_langid(std::string_view utf8_text);

using TrigramVector = std::map<std::u32string, double>;

// Relative character-trigram frequencies of the normalized text; empty for
// fewer than three characters.
TrigramVector trigram_vector(std::string_view utf8_text);

struct LangProfile {
  std::string lang;
  TrigramVector freq;  // sums to 1
};

LangProfile build_profile(const std::string& lang, std::string_view seed_text);
// One profile per <lang>.txt file in the directory, sorted by language.
std::vector<LangProfile> load_profiles(const std::filesystem::path& dir);
std::filesystem::path default_profile_dir();

double cosine(const TrigramVector& a, const TrigramVector& b);

struct LangScore {
  std::string lang;  // empty when nothing scores above zero
  double score = 0.0;
};

// Best cosine similarity over the profiles; ties go to the earlier profile.
LangScore detect_language(std::string_view utf8_text, const std::vector<LangProfile>& profiles);

// --- Filtering ---------------------------------------------------------------

enum class FilterReason { kKept, kTooShort, kLowLangScore };
std::string reason_name(FilterReason reason);

struct FilterConfig {
  std::size_t min_chars = 200;
  double min_lang_score = 0.5;  // kept only when strictly higher
};

// Pure keep/discard rule; length is checked first.
FilterReason filter_decision(std::size_t chars, double lang_score, const FilterConfig& config = {});

struct TextRun {
  std::string text;
  Box box;  // page pixels
  int line = 0;

  bool operator==(const TextRun&) const = default;
};

struct CorpusRecord {
  std::string id;
  std::optional<std::string> lang_hint;
  std::vector<TextRun> runs;
  int page_w = 0;
  int page_h = 0;
  std::string raster;  // PGM path, relative to the corpus file

  bool operator==(const CorpusRecord&) const = default;
};

CorpusRecord parse_record(std::string_view json_line);
nlohmann::ordered_json record_to_json(const CorpusRecord& record);
std::size_t record_chars(const CorpusRecord& record);
std::string record_text(const CorpusRecord& record);

// Words from runs with normalized boxes; the raster is loaded from
// base_dir when present.
Document record_to_document(const CorpusRecord& record, const std::string& lang,
                            const std::filesystem::path& base_dir);
CorpusRecord document_to_record(const Document& doc, const std::string& raster_path);

struct FilterResult {
  FilterReason reason = FilterReason::kKept;
  LangScore lang;
  std::size_t chars = 0;
};

FilterResult filter_record(const CorpusRecord& record, const std::vector<LangProfile>& profiles,
                           const FilterConfig& config = {});

struct LangCounts {
  std::size_t kept = 0;
  std::size_t too_short = 0;
  std::size_t low_lang_score = 0;

  std::size_t discarded() const { return too_short + low_lang_score; }
  std::size_t total() const { return kept + discarded(); }
};

struct CorpusStats {
  std::map<std::string, LangCounts> by_lang;  // detected language, "und" if none

  LangCounts totals() const;
  nlohmann::ordered_json to_json() const;
  static CorpusStats from_json(const nlohmann::json& j);
};

// Filters a corpus JSONL file into <out_dir>/<lang>.jsonl shards and
// <out_dir>/stats.json. Shard lines keep input order and carry raster
// paths rewritten relative to out_dir.
CorpusStats build_corpus(const std::filesystem::path& input, const std::filesystem::path& out_dir,
                         const std::vector<LangProfile>& profiles, const FilterConfig& config = {});

// Documents of one shard file.
std::vector<Document> load_shard(const std::filesystem::path& shard);

// --- Sampling ----------------------------------------------------------------

struct SamplingSpec {
  std::map<std::string, std::size_t> counts;
  double alpha = 0.7;
  std::uint64_t seed = 0;
};

// p_l = (n_l/n)^alpha / sum_k (n_k/n)^alpha over languages with n_l > 0.
std::map<std::string, double> sampling_probs(const SamplingSpec& spec);

struct StreamDraw {
  std::string lang;
  std::vector<std::size_t> indices;  // documents within the language shard
  std::size_t epoch = 0;             // wraparounds of that shard so far
};

// Batches whose language is drawn i.i.d. from sampling_probs; documents
// are taken round-robin within the language.
class SampleStream {
 public:
  explicit SampleStream(SamplingSpec spec);
  StreamDraw next(std::size_t batch_size);
  const std::map<std::string, double>& probs() const { return probs_; }

 private:
  SamplingSpec spec_;
  std::map<std::string, double> probs_;
  std::vector<std::string> langs_;
  std::vector<double> weights_;
  std::map<std::string, std::size_t> cursor_;
  Rng rng_;
};

}  // namespace lxlab
