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

#include "lxlab/docmodel.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "lxlab/errors.hpp"

namespace lxlab {

using nlohmann::ordered_json;

Box merge(const Box& a, const Box& b) {
  return Box{std::min(a.x0, b.x0), std::min(a.y0, b.y0), std::max(a.x1, b.x1), std::max(a.y1, b.y1)};
}

std::string_view label_name(EntityLabel label) {
  switch (label) {
    case EntityLabel::kHeader: return "header";
    case EntityLabel::kQuestion: return "question";
    case EntityLabel::kAnswer: return "answer";
    case EntityLabel::kOther: return "other";
  }
  return "other";
}

EntityLabel parse_label(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "header") return EntityLabel::kHeader;
  if (lower == "question") return EntityLabel::kQuestion;
  if (lower == "answer") return EntityLabel::kAnswer;
  if (lower == "other") return EntityLabel::kOther;
  throw ParseError("unknown entity label '" + std::string(name) + "'");
}

const EntitySpan* Document::find_entity(int entity_id) const {
  for (const auto& e : entities) {
    if (e.id == entity_id) return &e;
  }
  return nullptr;
}

void Document::validate() const {
  auto fail = [this](const std::string& what) { throw ValidationError("document '" + id + "': " + what); };
  for (std::size_t i = 0; i < words.size(); ++i) {
    const Box& b = words[i].box;
    if (b.x0 > b.x1 || b.y0 > b.y1) fail("word " + std::to_string(i) + " has an inverted box");
    if (b.x0 < 0 || b.y0 < 0 || b.x1 > kCoordMax || b.y1 > kCoordMax) {
      fail("word " + std::to_string(i) + " box outside [0, 1000]");
    }
    if (words[i].line_id < 0) fail("word " + std::to_string(i) + " has a negative line id");
  }
  std::vector<int> owner(words.size(), -1);
  std::set<int> ids;
  for (const auto& e : entities) {
    if (!ids.insert(e.id).second) fail("duplicate entity id " + std::to_string(e.id));
    if (e.first_word < 0 || e.first_word > e.last_word ||
        e.last_word >= static_cast<int>(words.size())) {
      fail("entity " + std::to_string(e.id) + " word range out of bounds");
    }
    for (int w = e.first_word; w <= e.last_word; ++w) {
      if (owner[w] != -1) fail("entities " + std::to_string(owner[w]) + " and " + std::to_string(e.id) + " overlap");
      owner[w] = e.id;
    }
  }
  for (const auto& l : links) {
    if (l.head == l.tail) fail("self link on entity " + std::to_string(l.head));
    if (!ids.count(l.head) || !ids.count(l.tail)) {
      fail("link " + std::to_string(l.head) + "->" + std::to_string(l.tail) + " references a missing entity");
    }
  }
}

Box normalize_box(const Box& box_px, int page_w, int page_h) {
  if (page_w <= 0 || page_h <= 0) throw ValidationError("page dimensions must be positive");
  if (box_px.x0 > box_px.x1 || box_px.y0 > box_px.y1) {
    throw ValidationError("inverted box (" + std::to_string(box_px.x0) + "," + std::to_string(box_px.y0) + "," +
                          std::to_string(box_px.x1) + "," + std::to_string(box_px.y1) + ")");
  }
  auto scale = [](int v, int extent) {
    const long long scaled = static_cast<long long>(kCoordMax) * v;
    // floor division that also rounds negative coordinates down
    long long q = scaled / extent;
    if (scaled % extent != 0 && scaled < 0) --q;
    return static_cast<int>(std::clamp<long long>(q, 0, kCoordMax));
  };
  return Box{scale(box_px.x0, page_w), scale(box_px.y0, page_h), scale(box_px.x1, page_w),
             scale(box_px.y1, page_h)};
}

void derive_lines(std::vector<Word>& words) {
  if (words.empty()) return;
  std::vector<int> heights;
  for (const auto& w : words) heights.push_back(w.box.height());
  std::nth_element(heights.begin(), heights.begin() + static_cast<std::ptrdiff_t>(heights.size() / 2), heights.end());
  const double half_median = heights[heights.size() / 2] / 2.0;

  std::vector<std::size_t> order(words.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  auto center = [&](std::size_t i) { return (words[i].box.y0 + words[i].box.y1) / 2.0; };
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return center(a) < center(b); });
  int line = 0;
  double anchor = center(order[0]);
  for (std::size_t k = 0; k < order.size(); ++k) {
    const double c = center(order[k]);
    if (k > 0 && !(c - anchor < half_median)) {
      ++line;
      anchor = c;
    }
    words[order[k]].line_id = line;
  }
}

namespace {

Box parse_box(const ordered_json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 4) throw ParseError(where + ": field 'box' must be an array of 4 integers");
  std::array<int, 4> v{};
  for (std::size_t i = 0; i < 4; ++i) {
    if (!j[i].is_number()) throw ParseError(where + ": field 'box' must be an array of 4 integers");
    v[i] = static_cast<int>(std::lround(j[i].get<double>()));
  }
  return Box{v[0], v[1], v[2], v[3]};
}

ordered_json box_json(const Box& b) { return ordered_json::array({b.x0, b.y0, b.x1, b.y1}); }

template <typename T>
T field(const ordered_json& j, const char* name, const std::string& where) {
  if (!j.is_object() || !j.contains(name)) throw ParseError(where + ": missing field '" + name + "'");
  try {
    return j.at(name).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ParseError(where + ": field '" + name + "' has the wrong type");
  }
}

Document parse_document(const ordered_json& jd, const std::string& lang, const std::filesystem::path& base_dir) {
  Document doc;
  doc.id = field<std::string>(jd, "id", "document");
  const std::string where = "document '" + doc.id + "'";
  doc.lang = lang;
  if (!jd.contains("img")) throw ParseError(where + ": missing field 'img'");
  const auto& img = jd["img"];
  doc.image_fname = field<std::string>(img, "fname", where + " img");
  doc.page_w = field<int>(img, "width", where + " img");
  doc.page_h = field<int>(img, "height", where + " img");
  if (doc.page_w <= 0 || doc.page_h <= 0) throw ParseError(where + ": field 'img' has non-positive size");
  if (!jd.contains("document") || !jd["document"].is_array()) {
    throw ParseError(where + ": missing field 'document'");
  }
  bool all_lines = true;
  std::set<std::pair<int, int>> seen_links;
  for (const auto& je : jd["document"]) {
    EntitySpan e;
    e.id = field<int>(je, "id", where + " entity");
    const std::string ewhere = where + " entity " + std::to_string(e.id);
    e.text = je.contains("text") ? field<std::string>(je, "text", ewhere) : std::string();
    e.box_px = je.contains("box") ? parse_box(je["box"], ewhere) : Box{};
    e.label = parse_label(field<std::string>(je, "label", ewhere));
    e.first_word = static_cast<int>(doc.words.size());
    if (!je.contains("words") || !je["words"].is_array()) throw ParseError(ewhere + ": missing field 'words'");
    auto add_word = [&](const std::string& text, const Box& px, const ordered_json* jw) {
      Word w;
      w.text = text;
      w.box_px = px;
      try {
        w.box = normalize_box(px, doc.page_w, doc.page_h);
      } catch (const ValidationError& err) {
        throw ParseError(ewhere + ": field 'box': " + err.what());
      }
      if (jw && jw->contains("line")) {
        w.line_id = field<int>(*jw, "line", ewhere);
      } else {
        all_lines = false;
      }
      doc.words.push_back(std::move(w));
    };
    for (const auto& jw : je["words"]) {
      add_word(field<std::string>(jw, "text", ewhere + " word"), parse_box(jw.value("box", ordered_json()), ewhere + " word"),
               &jw);
    }
    if (je["words"].empty()) {
      // Entities without word entries stand in as a single word.
      add_word(e.text, e.box_px, nullptr);
    }
    e.last_word = static_cast<int>(doc.words.size()) - 1;
    if (je.contains("linking")) {
      for (const auto& pair : je["linking"]) {
        if (!pair.is_array() || pair.size() != 2) throw ParseError(ewhere + ": field 'linking' entries must be pairs");
        const auto link = std::make_pair(pair[0].get<int>(), pair[1].get<int>());
        if (seen_links.insert(link).second) doc.links.push_back(RelationLink{link.first, link.second});
      }
    }
    doc.entities.push_back(std::move(e));
  }
  if (!all_lines) derive_lines(doc.words);

  const auto raster_path = base_dir / doc.image_fname;
  if (!doc.image_fname.empty() && raster_path.extension() == ".pgm" && std::filesystem::exists(raster_path)) {
    doc.raster = read_pgm(raster_path);
  }
  try {
    doc.validate();
  } catch (const ValidationError& err) {
    throw ParseError(err.what());
  }
  return doc;
}

}  // namespace

Dataset parse_dataset_text(std::string_view json_text, const std::filesystem::path& base_dir) {
  ordered_json root;
  try {
    root = ordered_json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("dataset is not valid JSON: ") + e.what());
  }
  Dataset ds;
  ds.lang = field<std::string>(root, "lang", "dataset");
  if (!root.contains("documents") || !root["documents"].is_array()) {
    throw ParseError("dataset: missing field 'documents'");
  }
  for (const auto& jd : root["documents"]) ds.documents.push_back(parse_document(jd, ds.lang, base_dir));
  return ds;
}

Dataset parse_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open dataset " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_dataset_text(buf.str(), path.parent_path());
}

std::string dataset_to_text(const Dataset& dataset) {
  ordered_json root;
  root["lang"] = dataset.lang;
  root["documents"] = ordered_json::array();
  for (const auto& doc : dataset.documents) {
    doc.validate();
    ordered_json jd;
    jd["id"] = doc.id;
    jd["img"] = {{"fname", doc.image_fname}, {"width", doc.page_w}, {"height", doc.page_h}};
    jd["document"] = ordered_json::array();
    int next_word = 0;
    for (const auto& e : doc.entities) {
      if (e.first_word != next_word) {
        throw ValidationError("document '" + doc.id +
                              "': entities must cover the words contiguously in order to be written");
      }
      next_word = e.last_word + 1;
      ordered_json je;
      je["id"] = e.id;
      je["text"] = e.text;
      je["box"] = box_json(e.box_px);
      je["label"] = std::string(label_name(e.label));
      je["words"] = ordered_json::array();
      for (int w = e.first_word; w <= e.last_word; ++w) {
        const Word& word = doc.words[w];
        je["words"].push_back({{"text", word.text}, {"box", box_json(word.box_px)}, {"line", word.line_id}});
      }
      je["linking"] = ordered_json::array();
      for (const auto& l : doc.links) {
        if (l.head == e.id || l.tail == e.id) je["linking"].push_back({l.head, l.tail});
      }
      jd["document"].push_back(std::move(je));
    }
    if (next_word != static_cast<int>(doc.words.size())) {
      throw ValidationError("document '" + doc.id + "': words outside every entity cannot be written");
    }
    root["documents"].push_back(std::move(jd));
  }
  return root.dump(1) + "\n";
}

void write_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  const std::string text = dataset_to_text(dataset);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write dataset " + path.string());
  out << text;
}

std::array<std::size_t, kNumEntityLabels> entity_counts(const Dataset& dataset) {
  std::array<std::size_t, kNumEntityLabels> counts{};
  for (const auto& doc : dataset.documents) {
    for (const auto& e : doc.entities) ++counts[static_cast<int>(e.label)];
  }
  return counts;
}

int bio_begin(EntityLabel label) {
  if (label == EntityLabel::kOther) return kBioOutside;
  return 1 + 2 * static_cast<int>(label);
}

int bio_inside(EntityLabel label) {
  if (label == EntityLabel::kOther) return kBioOutside;
  return 2 + 2 * static_cast<int>(label);
}

std::string bio_name(int tag) {
  if (tag == kBioOutside) return "O";
  const auto label = static_cast<EntityLabel>((tag - 1) / 2);
  std::string name(label_name(label));
  std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return ((tag - 1) % 2 == 0 ? "B-" : "I-") + name;
}

std::vector<int> bio_encode(const Document& doc, std::span<const int> token_word) {
  std::vector<int> word_entity(doc.words.size(), -1);
  for (std::size_t k = 0; k < doc.entities.size(); ++k) {
    const auto& e = doc.entities[k];
    for (int w = e.first_word; w <= e.last_word; ++w) word_entity[w] = static_cast<int>(k);
  }
  std::vector<int> tags(token_word.size(), kBioOutside);
  std::vector<bool> opened(doc.entities.size(), false);
  for (std::size_t i = 0; i < token_word.size(); ++i) {
    const int w = token_word[i];
    if (w < 0 || w >= static_cast<int>(doc.words.size())) continue;
    const int k = word_entity[w];
    if (k < 0) continue;
    const EntityLabel label = doc.entities[k].label;
    if (label == EntityLabel::kOther) continue;
    tags[i] = opened[k] ? bio_inside(label) : bio_begin(label);
    opened[k] = true;
  }
  return tags;
}

std::vector<EntitySpan> bio_decode(std::span<const int> tags) {
  std::vector<EntitySpan> spans;
  bool open = false;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    const int tag = tags[i];
    if (tag <= kBioOutside || tag >= kNumBioLabels) {
      open = false;
      continue;
    }
    const auto label = static_cast<EntityLabel>((tag - 1) / 2);
    const bool begin = (tag - 1) % 2 == 0;
    if (begin || !open || spans.back().label != label) {
      EntitySpan s;
      s.id = static_cast<int>(spans.size());
      s.first_word = s.last_word = static_cast<int>(i);
      s.label = label;
      spans.push_back(s);
      open = true;
    } else {
      spans.back().last_word = static_cast<int>(i);
    }
  }
  return spans;
}

std::vector<int> word_tags_from_tokens(std::span<const int> token_tags, std::span<const int> token_word,
                                       std::size_t word_count) {
  std::vector<int> tags(word_count, kBioOutside);
  std::vector<bool> seen(word_count, false);
  for (std::size_t i = 0; i < token_tags.size() && i < token_word.size(); ++i) {
    const int w = token_word[i];
    if (w < 0 || static_cast<std::size_t>(w) >= word_count || seen[w]) continue;
    seen[w] = true;
    tags[w] = token_tags[i];
  }
  return tags;
}

}  // namespace lxlab
