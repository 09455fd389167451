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
#include <string>
#include <vector>

#include "json.hpp"
#include "lxlab/evalkit.hpp"
#include "lxlab/model.hpp"
#include "lxlab/numerics/optim.hpp"
#include "lxlab/numerics/param.hpp"
#include "lxlab/objectives.hpp"
#include "lxlab/tokenizer.hpp"

namespace lxlab {

enum class Regime { kLangSpecific, kZeroShot, kMultitask };
enum class Task { kPretrain, kSer, kRe };

std::string regime_name(Regime r);
Regime parse_regime(std::string_view name);
std::string task_name(Task t);
Task parse_task(std::string_view name);

struct TrainConfig {
  Preset preset = Preset::kTiny;
  double lr = 1e-3;
  double warmup_frac = 0.1;
  int steps = 100;
  int batch_size = 4;
  double grad_clip = 1.0;
  std::uint64_t seed = 0;
  Regime regime = Regime::kLangSpecific;
  std::vector<std::string> train_langs = {"en"};
  std::vector<std::string> eval_langs = {"en"};
  Task task = Task::kSer;
  // Language sampling exponent for pre-training.
  double alpha = 0.7;
  // Fine-tuning evaluates every `eval_every` steps; 0 means once per epoch.
  int eval_every = 0;
  ObjectiveConfig objectives;

  // Checks ranges and the regime's language contract.
  void validate() const;
  // Flat object; objective rates use "objectives.<name>" keys.
  nlohmann::ordered_json to_json() const;
  // Starts from defaults and applies the keys present in j.
  static TrainConfig from_json(const nlohmann::json& j);
};

// Piecewise-linear schedule: 0 at step 0, peak at the end of warmup, 0 at
// total_steps.
double learning_rate(int step, int total_steps, double warmup_frac, double peak);

struct Checkpoint {
  ModelConfig model;
  Task task = Task::kPretrain;
  std::int64_t step = 0;
  nlohmann::ordered_json train_config;
  ParamStore params;
  Adam optimizer;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

// "LXLM", u32 version, u64 header length, JSON header, then the tensors
// as little-endian f64 in header order (parameters, then Adam moments).
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Copies every tensor of src whose name starts with one of the prefixes
// into dst. A tensor missing from dst or with a different shape raises
// CheckpointError naming it.
void copy_params(const ParamStore& src, ParamStore& dst, const std::vector<std::string>& prefixes);

struct LossPoint {
  int step = 0;
  double lr = 0.0;
  double grad_norm = 0.0;
  double total = 0.0;
  double mvlm = 0.0;
  double tia = 0.0;
  double tim = 0.0;
};

struct MetricPoint {
  int step = 0;
  std::string lang;
  Prf prf;
};

std::string loss_csv(const std::vector<LossPoint>& curve);
std::string metric_csv(const std::vector<MetricPoint>& curve);

// Fresh parameters for a task: encoder plus the task's heads.
Checkpoint init_checkpoint(const ModelConfig& model, Task task, std::uint64_t seed);

ModelConfig model_for(const TrainConfig& config, const UnigramVocab& vocab);

using LangDocs = std::map<std::string, std::vector<Document>>;

struct PretrainResult {
  Checkpoint checkpoint;
  std::vector<LossPoint> curve;
};

// Optional controls shared by the training loops. `resume` continues a
// previous run of the same configuration from its recorded step; a
// non-negative `stop_at` ends the run early at that step without changing
// the schedule.
struct RunControl {
  const Checkpoint* resume = nullptr;
  int stop_at = -1;
};

// MVLM + TIA + TIM over language-sampled batches from every language of
// the corpus.
PretrainResult pretrain(const TrainConfig& config, const LangDocs& corpus, const UnigramVocab& vocab,
                        const RunControl& control = {});

struct FinetuneResult {
  Checkpoint checkpoint;
  std::vector<LossPoint> curve;
  std::vector<MetricPoint> metrics;
  std::map<std::string, Prf> final_metrics;  // per eval language
};

// SER or RE fine-tuning. The encoder starts from `init` when given (a
// pre-training or fine-tuning checkpoint), else from a fresh seed.
// Training languages without documents are skipped with a warning.
FinetuneResult finetune(const TrainConfig& config, const Checkpoint* init, const LangDocs& train, const LangDocs& eval,
                        const UnigramVocab& vocab, const RunControl& control = {});

// Predictions for one document. SER replaces entities with predicted
// spans (uncovered words become single-word OTHER entities) and drops
// links; RE keeps the gold entities and predicts links between them.
Document predict_document(const Checkpoint& ckpt, const Document& doc, const UnigramVocab& vocab);

// Scores a fine-tuned checkpoint on documents of one language.
Prf evaluate(const Checkpoint& ckpt, const std::vector<Document>& docs, const UnigramVocab& vocab);

struct RegimeResult {
  MetricReport report;
  std::map<Task, FinetuneResult> runs;
};

// Fine-tunes SER and RE under the regime and reports F1 per eval language.
RegimeResult run_regime(const TrainConfig& config, const Checkpoint* init, const LangDocs& train,
                        const LangDocs& eval, const UnigramVocab& vocab);

}  // namespace lxlab
