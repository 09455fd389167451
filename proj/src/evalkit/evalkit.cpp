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

#include "lxlab/evalkit.hpp"

#include <algorithm>
#include <set>
#include <tuple>

#include <fmt/format.h>

#include "lxlab/errors.hpp"
#include "lxlab/log.hpp"

namespace lxlab {
namespace {

template <typename Key>
void count(const std::set<Key>& gold, const std::set<Key>& pred, std::size_t& tp, std::size_t& fp, std::size_t& fn) {
  for (const auto& k : pred) {
    if (gold.count(k)) {
      ++tp;
    } else {
      ++fp;
    }
  }
  for (const auto& k : gold) fn += pred.count(k) ? 0 : 1;
}

using SpanKey = std::tuple<int, int, int>;

std::set<SpanKey> span_keys(const std::vector<EntitySpan>& spans) {
  std::set<SpanKey> keys;
  for (const auto& s : spans) {
    if (s.label != EntityLabel::kOther) keys.emplace(s.first_word, s.last_word, static_cast<int>(s.label));
  }
  return keys;
}

using SpanPair = std::tuple<int, int, int, int>;

std::set<SpanPair> link_spans(const Document& doc) {
  std::set<SpanPair> keys;
  for (const auto& l : doc.links) {
    const EntitySpan* h = doc.find_entity(l.head);
    const EntitySpan* t = doc.find_entity(l.tail);
    if (!h || !t) throw ValidationError("document " + doc.id + ": link to unknown entity");
    keys.emplace(h->first_word, h->last_word, t->first_word, t->last_word);
  }
  return keys;
}

}  // namespace

Prf prf_from_counts(std::size_t tp, std::size_t fp, std::size_t fn) {
  Prf r;
  r.tp = tp;
  r.fp = fp;
  r.fn = fn;
  r.precision = tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  r.recall = tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  r.f1 = r.precision + r.recall > 0 ? 2.0 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  return r;
}

Prf entity_f1(std::span<const std::vector<EntitySpan>> gold, std::span<const std::vector<EntitySpan>> pred) {
  if (gold.size() != pred.size()) throw ValidationError("entity_f1: document counts differ");
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t d = 0; d < gold.size(); ++d) count(span_keys(gold[d]), span_keys(pred[d]), tp, fp, fn);
  return prf_from_counts(tp, fp, fn);
}

Prf relation_f1(std::span<const std::vector<RelationLink>> gold, std::span<const std::vector<RelationLink>> pred) {
  if (gold.size() != pred.size()) throw ValidationError("relation_f1: document counts differ");
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t d = 0; d < gold.size(); ++d) {
    std::set<std::pair<int, int>> g, p;
    for (const auto& l : gold[d]) g.emplace(l.head, l.tail);
    for (const auto& l : pred[d]) p.emplace(l.head, l.tail);
    count(g, p, tp, fp, fn);
  }
  return prf_from_counts(tp, fp, fn);
}

DocumentScores score_documents(const std::vector<Document>& gold, const std::vector<Document>& pred) {
  std::map<std::string, const Document*> by_id;
  for (const auto& d : pred) {
    if (!by_id.emplace(d.id, &d).second) throw ValidationError("predictions repeat document " + d.id);
  }
  std::size_t etp = 0, efp = 0, efn = 0, rtp = 0, rfp = 0, rfn = 0;
  for (const auto& g : gold) {
    const auto it = by_id.find(g.id);
    static const Document empty;
    const Document& p = it == by_id.end() ? empty : *it->second;
    if (it == by_id.end()) log::warn("no prediction for document {}", g.id);
    count(span_keys(g.entities), span_keys(p.entities), etp, efp, efn);
    count(link_spans(g), link_spans(p), rtp, rfp, rfn);
  }
  return {prf_from_counts(etp, efp, efn), prf_from_counts(rtp, rfp, rfn)};
}

const std::vector<std::string>& report_languages() {
  static const std::vector<std::string> langs = {"en", "zh", "ja", "es", "fr", "it", "de", "pt"};
  return langs;
}

std::string report_column_name(const std::string& lang) {
  if (lang == "en") return "FUNSD-EN";
  std::string up = lang;
  std::transform(up.begin(), up.end(), up.begin(), [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return up;
}

std::string task_name(ReportTask task) { return task == ReportTask::kSer ? "SER" : "RE"; }

std::optional<Prf> MetricReport::cell(ReportTask task, const std::string& lang) const {
  const auto t = cells.find(task);
  if (t == cells.end()) return std::nullopt;
  const auto c = t->second.find(lang);
  if (c == t->second.end()) return std::nullopt;
  return c->second;
}

MetricReport build_report(const std::string& regime, const std::vector<std::string>& columns,
                          const std::map<ReportTask, std::map<std::string, Prf>>& results) {
  if (columns.empty()) throw ValidationError("build_report: no language columns");
  MetricReport r;
  r.regime = regime;
  r.columns = columns;
  r.cells = results;
  for (const auto& [task, cells] : results) {
    double sum = 0.0;
    int present = 0;
    for (const auto& lang : columns) {
      const auto c = cells.find(lang);
      if (c == cells.end()) continue;
      sum += c->second.f1;
      ++present;
    }
    if (present < static_cast<int>(columns.size())) {
      log::warn("{} {}: {} of {} language cells missing; Avg covers present cells", regime, task_name(task),
                columns.size() - present, columns.size());
    }
    if (present > 0) r.average[task] = sum / present;
  }
  return r;
}

namespace {

std::vector<std::vector<std::string>> table_rows(const MetricReport& r) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header = {r.regime.empty() ? "Task" : r.regime};
  for (const auto& c : r.columns) header.push_back(report_column_name(c));
  header.push_back("Avg");
  rows.push_back(header);
  for (const auto& [task, cells] : r.cells) {
    std::vector<std::string> row = {task_name(task)};
    for (const auto& c : r.columns) {
      const auto cell = r.cell(task, c);
      row.push_back(cell ? fmt::format("{:.4f}", cell->f1) : kGapMarker);
    }
    const auto avg = r.average.find(task);
    row.push_back(avg == r.average.end() ? kGapMarker : fmt::format("{:.4f}", avg->second));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

std::string render_text(const MetricReport& report) {
  const auto rows = table_rows(report);
  std::vector<std::size_t> width(rows[0].size(), 0);
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::string out;
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      out += c == 0 ? fmt::format("{:<{}}", row[c], width[c]) : fmt::format("  {:>{}}", row[c], width[c]);
    }
    out += '\n';
  }
  return out;
}

std::string render_csv(const MetricReport& report) {
  std::string out;
  for (const auto& row : table_rows(report)) {
    for (std::size_t c = 0; c < row.size(); ++c) out += (c ? "," : "") + row[c];
    out += '\n';
  }
  return out;
}

}  // namespace lxlab
