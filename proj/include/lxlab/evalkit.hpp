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

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lxlab/docmodel.hpp"

namespace lxlab {

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
};

// Micro P/R/F1 from counts; a ratio with a zero denominator is 0.
Prf prf_from_counts(std::size_t tp, std::size_t fp, std::size_t fn);

// Exact (first_word, last_word, label) matching over HEADER, QUESTION and
// ANSWER spans, micro-averaged; gold[i] and pred[i] describe document i.
Prf entity_f1(std::span<const std::vector<EntitySpan>> gold, std::span<const std::vector<EntitySpan>> pred);

// Directed (head, tail) entity-id matching, micro-averaged.
Prf relation_f1(std::span<const std::vector<RelationLink>> gold, std::span<const std::vector<RelationLink>> pred);

struct DocumentScores {
  Prf ser;
  Prf re;
};

// Scores predicted documents against gold ones matched by id. Relations
// are compared through the word spans of their endpoints, so entity ids
// may differ between the two files. Gold documents without a prediction
// count as all misses.
DocumentScores score_documents(const std::vector<Document>& gold, const std::vector<Document>& pred);

// Language columns of the regime tables, in order.
const std::vector<std::string>& report_languages();
std::string report_column_name(const std::string& lang);

enum class ReportTask { kSer, kRe };
std::string task_name(ReportTask task);

struct MetricReport {
  std::string regime;
  std::vector<std::string> columns;  // language codes
  std::map<ReportTask, std::map<std::string, Prf>> cells;
  std::map<ReportTask, double> average;  // unweighted over present cells

  std::optional<Prf> cell(ReportTask task, const std::string& lang) const;
};

// Lays out results by task and language. A missing cell is reported as a
// gap and left out of the average.
MetricReport build_report(const std::string& regime, const std::vector<std::string>& columns,
                          const std::map<ReportTask, std::map<std::string, Prf>>& results);

// F1 table with one row per task: aligned text and CSV.
std::string render_text(const MetricReport& report);
std::string render_csv(const MetricReport& report);

inline constexpr const char* kGapMarker = "-";

}  // namespace lxlab
