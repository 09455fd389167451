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

#include "lxlab/errors.hpp"
#include "lxlab/log.hpp"
#include "lxlab/pipeline.hpp"
#include "lxlab/utf8.hpp"

namespace lxlab {

std::string reason_name(FilterReason reason) {
  switch (reason) {
    case FilterReason::kKept: return "KEPT";
    case FilterReason::kTooShort: return "TOO_SHORT";
    case FilterReason::kLowLangScore: return "LOW_LANG_SCORE";
  }
  return "";
}

FilterReason filter_decision(std::size_t chars, double lang_score, const FilterConfig& config) {
  if (chars < config.min_chars) return FilterReason::kTooShort;
  if (!(lang_score > config.min_lang_score)) return FilterReason::kLowLangScore;
  return FilterReason::kKept;
}

CorpusRecord parse_record(std::string_view json_line) {
  CorpusRecord r;
  try {
    const auto j = nlohmann::json::parse(json_line);
    r.id = j.at("id").get<std::string>();
    if (j.contains("lang") && !j["lang"].is_null()) r.lang_hint = j["lang"].get<std::string>();
    for (const auto& run : j.at("text_runs")) {
      TextRun t;
      t.text = run.at("text").get<std::string>();
      const auto& b = run.at("box");
      if (!b.is_array() || b.size() != 4) throw ParseError("record " + r.id + ": box must hold 4 integers");
      t.box = Box{b[0].get<int>(), b[1].get<int>(), b[2].get<int>(), b[3].get<int>()};
      t.line = run.value("line", 0);
      r.runs.push_back(std::move(t));
    }
    const auto& page = j.at("page");
    r.page_w = page.at("w").get<int>();
    r.page_h = page.at("h").get<int>();
    r.raster = page.value("raster", std::string());
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("corpus record" + (r.id.empty() ? std::string() : " " + r.id) + ": " + e.what());
  }
  if (r.page_w <= 0 || r.page_h <= 0) throw ParseError("record " + r.id + ": page size must be positive");
  return r;
}

nlohmann::ordered_json record_to_json(const CorpusRecord& r) {
  nlohmann::ordered_json j;
  j["id"] = r.id;
  if (r.lang_hint) j["lang"] = *r.lang_hint;
  j["text_runs"] = nlohmann::ordered_json::array();
  for (const auto& t : r.runs) {
    j["text_runs"].push_back({{"text", t.text}, {"box", {t.box.x0, t.box.y0, t.box.x1, t.box.y1}}, {"line", t.line}});
  }
  j["page"] = {{"w", r.page_w}, {"h", r.page_h}, {"raster", r.raster}};
  return j;
}

std::size_t record_chars(const CorpusRecord& r) {
  std::size_t n = 0;
  for (const auto& t : r.runs) n += utf8::length(t.text);
  return n;
}

std::string record_text(const CorpusRecord& r) {
  std::string out;
  for (const auto& t : r.runs) {
    if (!out.empty()) out += ' ';
    out += t.text;
  }
  return out;
}

Document record_to_document(const CorpusRecord& r, const std::string& lang, const std::filesystem::path& base_dir) {
  Document doc;
  doc.id = r.id;
  doc.lang = lang;
  doc.page_w = r.page_w;
  doc.page_h = r.page_h;
  doc.image_fname = r.raster;
  for (const auto& t : r.runs) {
    if (t.text.empty()) continue;
    Word w;
    w.text = t.text;
    w.box_px = t.box;
    w.box = normalize_box(t.box, r.page_w, r.page_h);
    w.line_id = t.line;
    doc.words.push_back(std::move(w));
  }
  if (!r.raster.empty()) {
    const auto path = base_dir / r.raster;
    if (std::filesystem::exists(path)) doc.raster = read_pgm(path);
  }
  return doc;
}

CorpusRecord document_to_record(const Document& doc, const std::string& raster_path) {
  CorpusRecord r;
  r.id = doc.id;
  if (!doc.lang.empty()) r.lang_hint = doc.lang;
  for (const auto& w : doc.words) r.runs.push_back(TextRun{w.text, w.box_px, w.line_id});
  r.page_w = doc.page_w;
  r.page_h = doc.page_h;
  r.raster = raster_path;
  return r;
}

FilterResult filter_record(const CorpusRecord& record, const std::vector<LangProfile>& profiles,
                           const FilterConfig& config) {
  FilterResult f;
  f.chars = record_chars(record);
  f.lang = detect_language(record_text(record), profiles);
  f.reason = filter_decision(f.chars, f.lang.score, config);
  return f;
}

LangCounts CorpusStats::totals() const {
  LangCounts t;
  for (const auto& [lang, c] : by_lang) {
    t.kept += c.kept;
    t.too_short += c.too_short;
    t.low_lang_score += c.low_lang_score;
  }
  return t;
}

nlohmann::ordered_json CorpusStats::to_json() const {
  nlohmann::ordered_json j;
  auto counts = [](const LangCounts& c) {
    return nlohmann::ordered_json{{"kept", c.kept},
                                  {"discarded", {{"TOO_SHORT", c.too_short}, {"LOW_LANG_SCORE", c.low_lang_score}}},
                                  {"total", c.total()}};
  };
  j["languages"] = nlohmann::ordered_json::object();
  for (const auto& [lang, c] : by_lang) j["languages"][lang] = counts(c);
  j["totals"] = counts(totals());
  return j;
}

CorpusStats CorpusStats::from_json(const nlohmann::json& j) {
  CorpusStats s;
  try {
    for (const auto& [lang, c] : j.at("languages").items()) {
      LangCounts lc;
      lc.kept = c.at("kept");
      lc.too_short = c.at("discarded").at("TOO_SHORT");
      lc.low_lang_score = c.at("discarded").at("LOW_LANG_SCORE");
      s.by_lang[lang] = lc;
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("corpus stats: ") + e.what());
  }
  return s;
}

CorpusStats build_corpus(const std::filesystem::path& input, const std::filesystem::path& out_dir,
                         const std::vector<LangProfile>& profiles, const FilterConfig& config) {
  std::ifstream in(input);
  if (!in) throw ValidationError("cannot open corpus " + input.string());
  std::filesystem::create_directories(out_dir);
  const auto in_dir = std::filesystem::absolute(input).parent_path();
  const auto abs_out = std::filesystem::absolute(out_dir);
  CorpusStats stats;
  std::map<std::string, std::ofstream> shards;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    CorpusRecord rec;
    try {
      rec = parse_record(line);
    } catch (const ParseError& e) {
      throw ParseError(input.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    const FilterResult f = filter_record(rec, profiles, config);
    const std::string lang = f.lang.lang.empty() ? "und" : f.lang.lang;
    LangCounts& c = stats.by_lang[lang];
    switch (f.reason) {
      case FilterReason::kTooShort: ++c.too_short; break;
      case FilterReason::kLowLangScore: ++c.low_lang_score; break;
      case FilterReason::kKept: ++c.kept; break;
    }
    log::debug("{} {} lang={} score={:.4f} chars={}", rec.id, reason_name(f.reason), lang, f.lang.score, f.chars);
    if (f.reason != FilterReason::kKept) continue;
    if (!rec.raster.empty()) {
      rec.raster = std::filesystem::relative(in_dir / rec.raster, abs_out).generic_string();
    }
    auto it = shards.find(lang);
    if (it == shards.end()) {
      it = shards.emplace(lang, std::ofstream(out_dir / (lang + ".jsonl"), std::ios::binary)).first;
      if (!it->second) throw Error("cannot write shard for " + lang);
    }
    it->second << record_to_json(rec).dump() << '\n';
  }
  std::ofstream st(out_dir / "stats.json", std::ios::binary);
  st << stats.to_json().dump(2) << '\n';
  if (!st) throw Error("cannot write " + (out_dir / "stats.json").string());
  return stats;
}

std::vector<Document> load_shard(const std::filesystem::path& shard) {
  std::ifstream in(shard);
  if (!in) throw ValidationError("cannot open shard " + shard.string());
  const std::string lang = shard.stem().string();
  const auto dir = shard.parent_path();
  std::vector<Document> docs;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    docs.push_back(record_to_document(parse_record(line), lang, dir));
  }
  return docs;
}

}  // namespace lxlab
