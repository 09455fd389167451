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
#include <iterator>

#include "doctest.h"
#include "lxlab/errors.hpp"
#include "lxlab/log.hpp"
#include "lxlab/synth.hpp"
#include "lxlab/train.hpp"

using namespace lxlab;
namespace fs = std::filesystem;

namespace {

const UnigramVocab& vocab() {
  static const UnigramVocab v = UnigramVocab::load(fs::path(LXLAB_DATA_DIR) / "vocab.tsv");
  return v;
}

const Lexicon& lexicon() {
  static const Lexicon lex = load_lexicon(default_lexicon_path());
  return lex;
}

LangDocs synth_docs(const std::vector<std::string>& langs, int docs, std::uint64_t seed) {
  LangDocs out;
  for (auto& ds : synth_datasets(lexicon(), langs, docs, seed)) out[ds.lang] = std::move(ds.documents);
  return out;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "lxlab_test_train";
  fs::create_directories(dir);
  return dir / name;
}

std::string read_bytes(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

void write_bytes(const fs::path& p, const std::string& bytes) {
  std::ofstream f(p, std::ios::binary);
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

bool same_params(const ParamStore& a, const ParamStore& b) {
  if (a.size() != b.size()) return false;
  const auto pa = a.all();
  const auto pb = b.all();
  for (std::size_t i = 0; i < pa.size(); ++i) {
    if (pa[i]->name != pb[i]->name || !(pa[i]->value == pb[i]->value)) return false;
  }
  return true;
}

bool same_moments(const Adam& a, const Adam& b) {
  if (a.step_count() != b.step_count() || a.moments().size() != b.moments().size()) return false;
  for (const auto& [name, m] : a.moments()) {
    auto it = b.moments().find(name);
    if (it == b.moments().end() || !(it->second.m == m.m) || !(it->second.v == m.v)) return false;
  }
  return true;
}

TrainConfig pretrain_config(int steps) {
  TrainConfig c;
  c.task = Task::kPretrain;
  c.steps = steps;
  c.seed = 5;
  c.batch_size = 3;
  return c;
}

TrainConfig finetune_config(Task task, int steps) {
  TrainConfig c;
  c.task = task;
  c.steps = steps;
  c.seed = 5;
  c.batch_size = 4;
  return c;
}

}  // namespace

TEST_CASE("learning rate schedule is piecewise linear") {
  const double peak = 1e-3;
  CHECK(learning_rate(0, 100, 0.1, peak) == 0.0);
  CHECK(learning_rate(10, 100, 0.1, peak) == peak);
  CHECK(learning_rate(100, 100, 0.1, peak) == 0.0);
  CHECK(learning_rate(5, 100, 0.1, peak) == doctest::Approx(peak / 2).epsilon(1e-15));
  CHECK(learning_rate(55, 100, 0.1, peak) == doctest::Approx(peak / 2).epsilon(1e-15));
  // Linear between the breakpoints.
  for (int s = 0; s < 100; ++s) {
    const double expected = s < 10 ? peak * s / 10.0 : peak * (100 - s) / 90.0;
    CHECK(learning_rate(s, 100, 0.1, peak) == doctest::Approx(expected).epsilon(1e-14));
  }
  CHECK(learning_rate(3, 0, 0.1, peak) == 0.0);
}

TEST_CASE("gradient clipping bounds the global norm") {
  Rng rng(2);
  for (double scale : {0.01, 1.0, 100.0}) {
    ParamStore store;
    store.add("a", Tensor({3, 4}));
    store.add("b", Tensor({5}));
    for (Param* p : store.all()) {
      for (auto& g : p->grad.data()) g = scale * rng.uniform(-1, 1);
    }
    const double before = global_grad_norm(store);
    const ParamStore copy = store;
    CHECK(clip_grad_norm(store, 1.0) == before);
    const double after = global_grad_norm(store);
    CHECK(after <= before + 1e-15);
    CHECK(after <= 1.0 + 1e-12);
    if (before <= 1.0) {
      for (std::size_t i = 0; i < store.size(); ++i) CHECK(store.all()[i]->grad == copy.all()[i]->grad);
    }
  }
}

TEST_CASE("train config enforces regime language contracts") {
  TrainConfig c = finetune_config(Task::kSer, 10);
  c.regime = Regime::kZeroShot;
  c.train_langs = {"en", "zh"};
  c.eval_langs = {"en", "zh"};
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.train_langs = {"en"};
  CHECK_NOTHROW(c.validate());

  c.regime = Regime::kMultitask;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.train_langs = report_languages();
  CHECK_NOTHROW(c.validate());

  c.regime = Regime::kLangSpecific;
  c.train_langs = {"zh"};
  c.eval_langs = {"en"};
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.eval_langs = {"zh"};
  CHECK_NOTHROW(c.validate());

  c.train_langs = {"xx"};
  CHECK_THROWS_AS(c.validate(), ConfigError);

  TrainConfig bad = finetune_config(Task::kSer, 10);
  bad.warmup_frac = 1.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = finetune_config(Task::kSer, 10);
  bad.batch_size = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  // A pre-training config cannot drive fine-tuning.
  const auto docs = synth_docs({"en"}, 2, 1);
  CHECK_THROWS_AS(finetune(pretrain_config(1), nullptr, docs, docs, vocab()), ConfigError);
  TrainConfig zs = finetune_config(Task::kSer, 1);
  zs.regime = Regime::kZeroShot;
  zs.train_langs = {"en", "zh"};
  CHECK_THROWS_AS(finetune(zs, nullptr, docs, docs, vocab()), ConfigError);
}

TEST_CASE("train config JSON round trip") {
  TrainConfig c = finetune_config(Task::kRe, 42);
  c.regime = Regime::kZeroShot;
  c.eval_langs = {"en", "zh", "de"};
  c.lr = 3e-4;
  c.objectives.tim_swap_prob = 0.25;
  const TrainConfig back = TrainConfig::from_json(nlohmann::json::parse(c.to_json().dump()));
  CHECK(back.to_json() == c.to_json());
  CHECK(TrainConfig::from_json(nlohmann::json{{"train_langs", "EN, zh"}}).train_langs ==
        std::vector<std::string>{"en", "zh"});
  CHECK_THROWS_AS(TrainConfig::from_json(nlohmann::json{{"bogus", 1}}), ConfigError);
  CHECK_THROWS_AS(TrainConfig::from_json(nlohmann::json{{"steps", "many"}}), ConfigError);
}

TEST_CASE("checkpoint round trip is bit exact") {
  const auto corpus = synth_docs({"en"}, 4, 3);
  const auto run = pretrain(pretrain_config(3), corpus, vocab());
  Checkpoint ckpt = run.checkpoint;
  // Include values whose bit patterns a text format would disturb.
  ckpt.params.all()[0]->value[0] = -0.0;
  ckpt.params.all()[0]->value[1] = std::nextafter(1.0, 2.0);
  ckpt.params.all()[0]->value[2] = 4.9406564584124654e-324;
  const fs::path path = scratch("roundtrip.ckpt");
  save_checkpoint(ckpt, path);
  const Checkpoint back = load_checkpoint(path);
  CHECK(back.model == ckpt.model);
  CHECK(back.task == Task::kPretrain);
  CHECK(back.step == 3);
  CHECK(back.train_config == ckpt.train_config);
  CHECK(same_params(back.params, ckpt.params));
  CHECK(std::signbit(back.params.all()[0]->value[0]));
  CHECK(same_moments(back.optimizer, ckpt.optimizer));
  CHECK(back.optimizer.step_count() == 3);
  // Saving the loaded state reproduces the same bytes.
  const fs::path again = scratch("roundtrip2.ckpt");
  save_checkpoint(back, again);
  CHECK(read_bytes(again) == read_bytes(path));
}

TEST_CASE("corrupt checkpoints are rejected") {
  Checkpoint ckpt = init_checkpoint(ModelConfig::preset(Preset::kTiny, vocab().size()), Task::kSer, 1);
  const fs::path path = scratch("good.ckpt");
  save_checkpoint(ckpt, path);
  const std::string bytes = read_bytes(path);
  const fs::path bad = scratch("bad.ckpt");
  for (std::size_t keep : {std::size_t{0}, std::size_t{3}, std::size_t{12}, std::size_t{40}, bytes.size() / 2,
                           bytes.size() - 1}) {
    INFO(keep);
    write_bytes(bad, bytes.substr(0, keep));
    CHECK_THROWS_AS(load_checkpoint(bad), CheckpointError);
  }
  write_bytes(bad, bytes + "x");
  CHECK_THROWS_AS(load_checkpoint(bad), CheckpointError);

  std::string wrong_version = bytes;
  wrong_version[4] = 2;
  write_bytes(bad, wrong_version);
  CHECK_THROWS_WITH_AS(load_checkpoint(bad), doctest::Contains("version 2"), CheckpointError);

  std::string wrong_magic = bytes;
  wrong_magic[0] = 'X';
  write_bytes(bad, wrong_magic);
  CHECK_THROWS_AS(load_checkpoint(bad), CheckpointError);
  CHECK_THROWS_AS(load_checkpoint(scratch("missing.ckpt")), CheckpointError);
}

TEST_CASE("loading a BASE-shaped checkpoint into TINY names the first offending tensor") {
  Checkpoint base;
  base.model = ModelConfig::preset(Preset::kBase, vocab().size());
  const auto d = static_cast<std::size_t>(base.model.hidden);
  base.params.add("embeddings.word", Tensor({static_cast<std::size_t>(vocab().size()), d}));
  base.params.add("embeddings.position", Tensor({static_cast<std::size_t>(base.model.max_seq_len()), d}));
  const fs::path path = scratch("base.ckpt");
  save_checkpoint(base, path);
  const Checkpoint loaded = load_checkpoint(path);
  CHECK(loaded.model.hidden == 768);

  Checkpoint tiny = init_checkpoint(ModelConfig::preset(Preset::kTiny, vocab().size()), Task::kSer, 1);
  CHECK_THROWS_WITH_AS(copy_params(loaded.params, tiny.params, {"embeddings.", "encoder."}),
                       doctest::Contains("'embeddings.word'"), CheckpointError);
  const auto docs = synth_docs({"en"}, 2, 1);
  CHECK_THROWS_WITH_AS(finetune(finetune_config(Task::kSer, 1), &loaded, docs, docs, vocab()),
                       doctest::Contains("'embeddings.word'"), CheckpointError);
}

TEST_CASE("zero steps leave the initialization untouched") {
  const auto corpus = synth_docs({"en", "zh"}, 3, 4);
  const TrainConfig c = pretrain_config(0);
  const auto run = pretrain(c, corpus, vocab());
  CHECK(run.curve.empty());
  CHECK(run.checkpoint.step == 0);
  CHECK(same_params(run.checkpoint.params, init_checkpoint(model_for(c, vocab()), Task::kPretrain, c.seed).params));
}

TEST_CASE("pretraining is deterministic and resumable") {
  const auto corpus = synth_docs({"en", "zh"}, 4, 6);
  const TrainConfig c = pretrain_config(8);
  const auto a = pretrain(c, corpus, vocab());
  const auto b = pretrain(c, corpus, vocab());
  save_checkpoint(a.checkpoint, scratch("det_a.ckpt"));
  save_checkpoint(b.checkpoint, scratch("det_b.ckpt"));
  CHECK(read_bytes(scratch("det_a.ckpt")) == read_bytes(scratch("det_b.ckpt")));
  CHECK(loss_csv(a.curve) == loss_csv(b.curve));
  REQUIRE(a.curve.size() == 8);
  CHECK(a.curve[0].lr == 0.0);

  const auto first = pretrain(c, corpus, vocab(), {nullptr, 3});
  CHECK(first.checkpoint.step == 3);
  save_checkpoint(first.checkpoint, scratch("half.ckpt"));
  const Checkpoint half = load_checkpoint(scratch("half.ckpt"));
  const auto rest = pretrain(c, corpus, vocab(), {&half, -1});
  CHECK(same_params(rest.checkpoint.params, a.checkpoint.params));
  CHECK(same_moments(rest.checkpoint.optimizer, a.checkpoint.optimizer));
  REQUIRE(rest.curve.size() == 5);
  for (std::size_t i = 0; i < rest.curve.size(); ++i) {
    CHECK(rest.curve[i].step == a.curve[i + 3].step);
    CHECK(rest.curve[i].total == a.curve[i + 3].total);
  }
  // A fine-tuning checkpoint cannot resume pre-training.
  Checkpoint ser = init_checkpoint(model_for(c, vocab()), Task::kSer, 1);
  CHECK_THROWS_AS(pretrain(c, corpus, vocab(), {&ser, -1}), CheckpointError);
}

TEST_CASE("fine-tuning resumes with identical next steps") {
  const auto docs = synth_docs({"en"}, 6, 8);
  for (Task task : {Task::kSer, Task::kRe}) {
    TrainConfig c = finetune_config(task, 7);
    const auto full = finetune(c, nullptr, docs, docs, vocab());
    const auto first = finetune(c, nullptr, docs, docs, vocab(), {nullptr, 4});
    save_checkpoint(first.checkpoint, scratch("ft_half.ckpt"));
    const Checkpoint half = load_checkpoint(scratch("ft_half.ckpt"));
    const auto rest = finetune(c, nullptr, docs, docs, vocab(), {&half, -1});
    CHECK(same_params(rest.checkpoint.params, full.checkpoint.params));
    REQUIRE(rest.curve.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) CHECK(rest.curve[i].total == full.curve[i + 4].total);
    CHECK(metric_csv(rest.metrics).find("7,en,") != std::string::npos);
    CHECK(rest.final_metrics.at("en").f1 == full.final_metrics.at("en").f1);
  }
}

TEST_CASE("fine-tuning starts from the pre-trained encoder") {
  const auto corpus = synth_docs({"en"}, 3, 9);
  const auto pre = pretrain(pretrain_config(2), corpus, vocab());
  const auto ft = finetune(finetune_config(Task::kSer, 0), &pre.checkpoint, corpus, corpus, vocab());
  for (const Param* p : ft.checkpoint.params.all()) {
    if (p->name.rfind("ser.", 0) == 0) continue;
    CHECK(p->value == pre.checkpoint.params.get(p->name).value);
  }
  CHECK_FALSE(ft.checkpoint.params.contains("pretrain.mvlm.weight"));
  CHECK(ft.final_metrics.count("en") == 1);
}

TEST_CASE("non-finite loss aborts with the step index") {
  const auto docs = synth_docs({"en"}, 4, 10);
  TrainConfig c = finetune_config(Task::kSer, 6);
  c.lr = 1e300;
  c.warmup_frac = 0.0;
  CHECK_THROWS_WITH_AS(finetune(c, nullptr, docs, docs, vocab()), doctest::Contains("training aborted at step"),
                       NumericError);
}

TEST_CASE("TINY overfits an 8-document fixture for SER and RE") {
  const auto docs = synth_docs({"en"}, 8, 99);
  for (Task task : {Task::kSer, Task::kRe}) {
    TrainConfig c = finetune_config(task, 300);
    c.eval_every = 50;
    const auto r = finetune(c, nullptr, docs, docs, vocab());
    INFO(task_name(task));
    CHECK(r.final_metrics.at("en").f1 == 1.0);
    CHECK(r.curve.back().total < r.curve.front().total);
  }
}

TEST_CASE("predictions round trip through evaluation") {
  const auto docs = synth_docs({"en"}, 8, 99);
  TrainConfig c = finetune_config(Task::kSer, 300);
  const auto ser = finetune(c, nullptr, docs, docs, vocab());
  const Document pred = predict_document(ser.checkpoint, docs.at("en")[0], vocab());
  CHECK(pred.links.empty());
  CHECK_NOTHROW(pred.validate());
  const auto scores = score_documents(docs.at("en"), {pred});
  CHECK(scores.ser.tp > 0);
  CHECK(evaluate(ser.checkpoint, docs.at("en"), vocab()).f1 == ser.final_metrics.at("en").f1);

  c.task = Task::kRe;
  c.steps = 150;
  const auto re = finetune(c, nullptr, docs, docs, vocab());
  const Document rp = predict_document(re.checkpoint, docs.at("en")[1], vocab());
  CHECK(rp.entities == docs.at("en")[1].entities);
  CHECK_NOTHROW(rp.validate());
}

TEST_CASE("regime harness emits a language report") {
  const auto train = synth_docs({"en", "zh"}, 4, 12);
  const auto eval = synth_docs({"en", "zh"}, 2, 13);
  TrainConfig c = finetune_config(Task::kSer, 4);
  c.regime = Regime::kZeroShot;
  c.train_langs = {"en"};
  c.eval_langs = report_languages();
  const auto zs = run_regime(c, nullptr, train, eval, vocab());
  CHECK(zs.report.regime == "ZERO_SHOT");
  CHECK(zs.report.columns == report_languages());
  CHECK(zs.report.cell(ReportTask::kSer, "en").has_value());
  CHECK(zs.report.cell(ReportTask::kRe, "zh").has_value());
  CHECK_FALSE(zs.report.cell(ReportTask::kSer, "ja").has_value());
  CHECK(render_csv(zs.report).find("FUNSD-EN") != std::string::npos);

  c.regime = Regime::kMultitask;
  c.train_langs = report_languages();
  const int warnings = log::warning_count();
  const auto mt = run_regime(c, nullptr, train, eval, vocab());
  CHECK(log::warning_count() > warnings);
  CHECK(mt.report.regime == "MULTITASK");
  CHECK(mt.runs.size() == 2);
}
