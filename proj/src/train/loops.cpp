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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include <fmt/format.h>

#include "lxlab/errors.hpp"
#include "lxlab/heads.hpp"
#include "lxlab/log.hpp"
#include "lxlab/pipeline.hpp"
#include "lxlab/train.hpp"

namespace lxlab {

namespace {

// Stream tags for mix_seed.
constexpr std::uint64_t kInitTag = 0x1417;
constexpr std::uint64_t kHeadTag = 0x4ead;
constexpr std::uint64_t kStreamTag = 0x57ea;
constexpr std::uint64_t kObjectiveTag = 0x0b1e;
constexpr std::uint64_t kShuffleTag = 0x5f1e;

constexpr int kEvalBatch = 8;

const std::vector<std::string> kEncoderPrefixes = {"embeddings.", "encoder."};

struct Prepared {
  const Document* doc = nullptr;
  std::vector<SubwordToken> tokens;  // truncated to the model's text length
};

Prepared prepare(const Document& doc, const UnigramVocab& vocab, const ModelConfig& model) {
  Prepared p{&doc, tokenize_document(doc, vocab)};
  if (static_cast<int>(p.tokens.size()) > model.max_text_len) p.tokens.resize(model.max_text_len);
  return p;
}

SampleInput sample_input(const Prepared& p) {
  SampleInput in;
  for (const auto& t : p.tokens) {
    in.token_ids.push_back(t.piece_id);
    in.boxes.push_back(t.box);
  }
  if (p.doc->raster) in.raster = *p.doc->raster;
  return in;
}

EncodedBatch encode_inputs(const std::vector<const Prepared*>& items, const ModelConfig& model,
                           const SpecialIds& specials) {
  std::vector<SampleInput> inputs;
  for (const auto* p : items) inputs.push_back(sample_input(*p));
  return build_batch(inputs, model, specials);
}

std::vector<int> token_words(const Prepared& p) {
  std::vector<int> w;
  for (const auto& t : p.tokens) w.push_back(t.word_index);
  return w;
}

// Entities of all samples with pairs indexing the concatenated list.
struct ReBatch {
  std::vector<ReEntity> entities;
  std::vector<std::pair<int, int>> pairs;
  std::vector<int> targets;
  std::vector<std::size_t> pair_begin;  // per sample, plus the end
  std::vector<std::size_t> entity_begin;
};

ReBatch re_batch(const std::vector<const Prepared*>& items, const EncodedBatch& batch) {
  ReBatch rb;
  for (std::size_t b = 0; b < items.size(); ++b) {
    const auto ents = re_entities(*items[b]->doc, items[b]->tokens, batch, static_cast<int>(b));
    const auto pairs = re_candidates(static_cast<int>(ents.size()));
    const auto targets = re_targets(*items[b]->doc, ents, pairs);
    const int offset = static_cast<int>(rb.entities.size());
    rb.entity_begin.push_back(rb.entities.size());
    rb.pair_begin.push_back(rb.pairs.size());
    rb.entities.insert(rb.entities.end(), ents.begin(), ents.end());
    for (const auto& [h, t] : pairs) rb.pairs.emplace_back(h + offset, t + offset);
    rb.targets.insert(rb.targets.end(), targets.begin(), targets.end());
  }
  rb.entity_begin.push_back(rb.entities.size());
  rb.pair_begin.push_back(rb.pairs.size());
  return rb;
}

void check_task(const Checkpoint& ckpt, Task task, const char* what) {
  if (ckpt.task != task) {
    throw CheckpointError(fmt::format("{} checkpoint is for task {}, expected {}", what, task_name(ckpt.task),
                                      task_name(task)));
  }
}

void check_resume(const Checkpoint& resume, const ModelConfig& model, Task task) {
  check_task(resume, task, "resume");
  if (!(resume.model == model)) throw CheckpointError("resume checkpoint has a different model configuration");
}

int end_step(const TrainConfig& config, const RunControl& control) {
  return control.stop_at >= 0 ? std::min(control.stop_at, config.steps) : config.steps;
}

// Clips, applies the scheduled Adam update and records the step.
LossPoint apply_update(Checkpoint& ckpt, const TrainConfig& config, int step) {
  LossPoint pt;
  pt.step = step;
  pt.grad_norm = clip_grad_norm(ckpt.params, config.grad_clip);
  pt.lr = learning_rate(step, config.steps, config.warmup_frac, config.lr);
  ckpt.optimizer.step(ckpt.params, pt.lr);
  ckpt.step = step + 1;
  return pt;
}

[[noreturn]] void abort_step(int step, const std::exception& e) {
  throw NumericError(fmt::format("training aborted at step {}: {}", step, e.what()));
}

void check_loss(double loss) {
  if (!std::isfinite(loss)) throw NumericError(fmt::format("loss is {}", loss));
}

// Forward pass of a fine-tuned model over prepared documents, writing
// predictions into copies of the documents.
std::vector<Document> predict_prepared(const Checkpoint& ckpt, const std::vector<Prepared>& items,
                                       const UnigramVocab& vocab) {
  const Encoder encoder(ckpt.model);
  // Forward only: the tape never runs backward, so no gradient is written.
  ParamStore& store = const_cast<ParamStore&>(ckpt.params);
  std::vector<Document> out;
  for (std::size_t start = 0; start < items.size(); start += kEvalBatch) {
    std::vector<const Prepared*> chunk;
    for (std::size_t i = start; i < std::min(items.size(), start + kEvalBatch); ++i) chunk.push_back(&items[i]);
    const EncodedBatch batch = encode_inputs(chunk, ckpt.model, vocab.specials());
    Tape tape;
    const Var hidden = encoder.encode(tape, store, batch);
    if (ckpt.task == Task::kSer) {
      for (std::size_t b = 0; b < chunk.size(); ++b) {
        const Document& doc = *chunk[b]->doc;
        const auto rows = text_rows(batch, static_cast<int>(b));
        std::vector<EntitySpan> spans;
        if (!rows.empty()) {
          spans = ser_predict(ser_logits(tape, store, hidden, rows).value(), chunk[b]->tokens, doc.words.size());
        }
        Document pred = doc;
        pred.entities.clear();
        pred.links.clear();
        std::vector<EntitySpan> all;
        std::size_t next = 0;
        for (int w = 0; w < static_cast<int>(doc.words.size());) {
          if (next < spans.size() && spans[next].first_word == w) {
            all.push_back(spans[next]);
            w = spans[next].last_word + 1;
            ++next;
          } else {
            EntitySpan other;
            other.first_word = other.last_word = w;
            other.label = EntityLabel::kOther;
            all.push_back(other);
            ++w;
          }
        }
        for (std::size_t i = 0; i < all.size(); ++i) {
          EntitySpan& e = all[i];
          e.id = static_cast<int>(i);
          e.text.clear();
          e.box_px = doc.words[e.first_word].box_px;
          for (int w = e.first_word; w <= e.last_word; ++w) {
            if (w > e.first_word) e.text += ' ';
            e.text += doc.words[w].text;
            e.box_px = merge(e.box_px, doc.words[w].box_px);
          }
        }
        pred.entities = std::move(all);
        out.push_back(std::move(pred));
      }
    } else if (ckpt.task == Task::kRe) {
      const ReBatch rb = re_batch(chunk, batch);
      Tensor logits;
      if (!rb.pairs.empty()) logits = re_logits(tape, store, hidden, rb.entities, rb.pairs).value();
      for (std::size_t b = 0; b < chunk.size(); ++b) {
        Document pred = *chunk[b]->doc;
        pred.links.clear();
        const std::size_t p0 = rb.pair_begin[b], p1 = rb.pair_begin[b + 1];
        if (p1 > p0) {
          const std::size_t e0 = rb.entity_begin[b], e1 = rb.entity_begin[b + 1];
          const std::vector<ReEntity> ents(rb.entities.begin() + e0, rb.entities.begin() + e1);
          std::vector<std::pair<int, int>> pairs;
          Tensor sub({p1 - p0, 2});
          for (std::size_t p = p0; p < p1; ++p) {
            pairs.emplace_back(rb.pairs[p].first - static_cast<int>(e0), rb.pairs[p].second - static_cast<int>(e0));
            sub.at(p - p0, 0) = logits.at(p, 0);
            sub.at(p - p0, 1) = logits.at(p, 1);
          }
          pred.links = re_predict(sub, ents, pairs);
        }
        out.push_back(std::move(pred));
      }
    } else {
      throw ConfigError("prediction needs a SER or RE checkpoint");
    }
  }
  return out;
}

Prf score(Task task, const std::vector<Document>& gold, const std::vector<Document>& pred) {
  if (task == Task::kSer) {
    std::vector<std::vector<EntitySpan>> g, p;
    for (const auto& d : gold) g.push_back(d.entities);
    for (const auto& d : pred) p.push_back(d.entities);
    return entity_f1(g, p);
  }
  std::vector<std::vector<RelationLink>> g, p;
  for (const auto& d : gold) g.push_back(d.links);
  for (const auto& d : pred) p.push_back(d.links);
  return relation_f1(g, p);
}

}  // namespace

ModelConfig model_for(const TrainConfig& config, const UnigramVocab& vocab) {
  ModelConfig m = ModelConfig::preset(config.preset, vocab.size());
  m.seed = config.seed;
  m.validate();
  return m;
}

Checkpoint init_checkpoint(const ModelConfig& model, Task task, std::uint64_t seed) {
  Checkpoint ckpt;
  ckpt.model = model;
  ckpt.task = task;
  Rng rng(mix_seed(seed, kInitTag));
  Encoder(model).init_params(ckpt.params, rng);
  Rng head_rng(mix_seed(seed, kHeadTag, static_cast<std::uint64_t>(task)));
  switch (task) {
    case Task::kPretrain: init_pretrain_heads(ckpt.params, model, head_rng); break;
    case Task::kSer: init_ser_head(ckpt.params, model, head_rng); break;
    case Task::kRe: init_re_head(ckpt.params, model, head_rng); break;
  }
  return ckpt;
}

std::string loss_csv(const std::vector<LossPoint>& curve) {
  std::string out = "step,lr,grad_norm,total,mvlm,tia,tim\n";
  for (const auto& p : curve) {
    out += fmt::format("{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", p.step, p.lr, p.grad_norm, p.total,
                       p.mvlm, p.tia, p.tim);
  }
  return out;
}

std::string metric_csv(const std::vector<MetricPoint>& curve) {
  std::string out = "step,lang,precision,recall,f1,tp,fp,fn\n";
  for (const auto& m : curve) {
    out += fmt::format("{},{},{:.17g},{:.17g},{:.17g},{},{},{}\n", m.step, m.lang, m.prf.precision, m.prf.recall,
                       m.prf.f1, m.prf.tp, m.prf.fp, m.prf.fn);
  }
  return out;
}

PretrainResult pretrain(const TrainConfig& config, const LangDocs& corpus, const UnigramVocab& vocab,
                        const RunControl& control) {
  config.validate();
  const ModelConfig model = model_for(config, vocab);
  PretrainResult result;
  Checkpoint& ckpt = result.checkpoint;
  if (control.resume != nullptr) {
    check_resume(*control.resume, model, Task::kPretrain);
    ckpt = *control.resume;
  } else {
    ckpt = init_checkpoint(model, Task::kPretrain, config.seed);
  }
  ckpt.train_config = config.to_json();

  std::map<std::string, std::vector<PretrainSample>> shards;
  SamplingSpec spec;
  spec.alpha = config.alpha;
  spec.seed = mix_seed(config.seed, kStreamTag);
  for (const auto& [lang, docs] : corpus) {
    if (docs.empty()) continue;
    auto& shard = shards[lang];
    for (const auto& d : docs) shard.push_back(PretrainSample{&d, tokenize_document(d, vocab)});
    spec.counts[lang] = docs.size();
  }
  if (shards.empty()) throw ValidationError("pretraining corpus is empty");
  SampleStream stream(spec);
  const auto batch_size = static_cast<std::size_t>(config.batch_size);
  const int start = static_cast<int>(ckpt.step);
  for (int s = 0; s < start; ++s) stream.next(batch_size);

  const Encoder encoder(model);
  const int stop = end_step(config, control);
  for (int step = start; step < stop; ++step) {
    const StreamDraw draw = stream.next(batch_size);
    std::vector<PretrainSample> samples;
    for (std::size_t i : draw.indices) samples.push_back(shards.at(draw.lang).at(i));
    Rng rng(mix_seed(config.seed, static_cast<std::uint64_t>(step), kObjectiveTag));
    LossPoint pt;
    try {
      const PretrainBatch pb = make_pretrain_batch(samples, model, vocab.specials(), rng, config.objectives);
      Tape tape;
      ckpt.params.zero_grad();
      const Var hidden = encoder.encode(tape, ckpt.params, pb.batch);
      const LossReport loss = pretrain_loss(tape, ckpt.params, hidden, pb);
      check_loss(loss.total_value());
      tape.backward(loss.total);
      pt = apply_update(ckpt, config, step);
      pt.total = loss.total_value();
      pt.mvlm = loss.mvlm_value();
      pt.tia = loss.tia_value();
      pt.tim = loss.tim_value();
    } catch (const NumericError& e) {
      abort_step(step, e);
    }
    log::debug("pretrain step {} lang {} loss {:.6f}", step, draw.lang, pt.total);
    result.curve.push_back(pt);
  }
  return result;
}

FinetuneResult finetune(const TrainConfig& config, const Checkpoint* init, const LangDocs& train, const LangDocs& eval,
                        const UnigramVocab& vocab, const RunControl& control) {
  config.validate();
  if (config.task == Task::kPretrain) throw ConfigError("finetune needs task SER or RE");
  const ModelConfig model = model_for(config, vocab);
  FinetuneResult result;
  Checkpoint& ckpt = result.checkpoint;
  if (control.resume != nullptr) {
    check_resume(*control.resume, model, config.task);
    ckpt = *control.resume;
  } else {
    ckpt = init_checkpoint(model, config.task, config.seed);
    if (init != nullptr) copy_params(init->params, ckpt.params, kEncoderPrefixes);
  }
  ckpt.train_config = config.to_json();

  std::vector<Prepared> items;
  for (const auto& lang : config.train_langs) {
    auto it = train.find(lang);
    if (it == train.end() || it->second.empty()) {
      log::warn("no {} training documents for language {}; skipped", task_name(config.task), lang);
      continue;
    }
    for (const auto& d : it->second) items.push_back(prepare(d, vocab, model));
  }
  if (items.empty()) throw ValidationError("no training documents for any training language");

  std::map<std::string, std::vector<Prepared>> eval_items;
  for (const auto& lang : config.eval_langs) {
    auto it = eval.find(lang);
    if (it == eval.end() || it->second.empty()) {
      log::warn("no evaluation documents for language {}; its cell stays empty", lang);
      continue;
    }
    auto& v = eval_items[lang];
    for (const auto& d : it->second) v.push_back(prepare(d, vocab, model));
  }

  const std::size_t n = items.size();
  const std::size_t bs = std::min(n, static_cast<std::size_t>(config.batch_size));
  const int steps_per_epoch = static_cast<int>((n + bs - 1) / bs);
  const int eval_interval = config.eval_every > 0 ? config.eval_every : steps_per_epoch;

  auto run_eval = [&](int step) {
    for (const auto& [lang, docs] : eval_items) {
      std::vector<Document> gold;
      for (const auto& p : docs) gold.push_back(*p.doc);
      const Prf prf = score(config.task, gold, predict_prepared(ckpt, docs, vocab));
      result.metrics.push_back(MetricPoint{step, lang, prf});
      result.final_metrics[lang] = prf;
      log::info("{} step {} {} F1 {:.4f}", task_name(config.task), step, lang, prf.f1);
    }
  };

  const Encoder encoder(model);
  const int start = static_cast<int>(ckpt.step);
  const int stop = end_step(config, control);
  std::vector<std::size_t> order;
  int order_epoch = -1;
  for (int step = start; step < stop; ++step) {
    const int epoch = step / steps_per_epoch;
    if (epoch != order_epoch) {
      order.resize(n);
      std::iota(order.begin(), order.end(), std::size_t{0});
      Rng rng(mix_seed(config.seed, static_cast<std::uint64_t>(epoch), kShuffleTag));
      rng.shuffle(order);
      order_epoch = epoch;
    }
    const std::size_t first = static_cast<std::size_t>(step % steps_per_epoch) * bs;
    std::vector<const Prepared*> chunk;
    for (std::size_t i = first; i < std::min(n, first + bs); ++i) chunk.push_back(&items[order[i]]);

    LossPoint pt;
    try {
      const EncodedBatch batch = encode_inputs(chunk, model, vocab.specials());
      Tape tape;
      ckpt.params.zero_grad();
      const Var hidden = encoder.encode(tape, ckpt.params, batch);
      std::optional<Var> loss;
      if (config.task == Task::kSer) {
        std::vector<int> rows, tags;
        for (std::size_t b = 0; b < chunk.size(); ++b) {
          const auto r = text_rows(batch, static_cast<int>(b));
          const auto t = bio_encode(*chunk[b]->doc, token_words(*chunk[b]));
          rows.insert(rows.end(), r.begin(), r.end());
          tags.insert(tags.end(), t.begin(), t.end());
        }
        if (rows.empty()) throw ValidationError("SER batch has no text tokens");
        loss = ops::cross_entropy(ser_logits(tape, ckpt.params, hidden, rows), tags, kIgnoreIndex);
      } else {
        const ReBatch rb = re_batch(chunk, batch);
        if (rb.pairs.empty()) {
          log::warn("RE step {} has no entity pairs; update skipped", step);
        } else {
          loss = ops::cross_entropy(re_logits(tape, ckpt.params, hidden, rb.entities, rb.pairs), rb.targets,
                                    kIgnoreIndex);
        }
      }
      if (loss) {
        check_loss(loss->value().item());
        tape.backward(*loss);
        pt = apply_update(ckpt, config, step);
        pt.total = loss->value().item();
      } else {
        pt.step = step;
        pt.lr = learning_rate(step, config.steps, config.warmup_frac, config.lr);
        ckpt.step = step + 1;
      }
      result.curve.push_back(pt);
      if ((step + 1) % eval_interval == 0 || step + 1 == config.steps) run_eval(step + 1);
    } catch (const NumericError& e) {
      abort_step(step, e);
    }
  }
  if (result.metrics.empty() && stop == start) run_eval(start);
  return result;
}

Document predict_document(const Checkpoint& ckpt, const Document& doc, const UnigramVocab& vocab) {
  const std::vector<Prepared> items = {prepare(doc, vocab, ckpt.model)};
  return predict_prepared(ckpt, items, vocab).at(0);
}

Prf evaluate(const Checkpoint& ckpt, const std::vector<Document>& docs, const UnigramVocab& vocab) {
  if (ckpt.task == Task::kPretrain) throw ConfigError("evaluation needs a SER or RE checkpoint");
  std::vector<Prepared> items;
  for (const auto& d : docs) items.push_back(prepare(d, vocab, ckpt.model));
  return score(ckpt.task, docs, predict_prepared(ckpt, items, vocab));
}

RegimeResult run_regime(const TrainConfig& config, const Checkpoint* init, const LangDocs& train,
                        const LangDocs& eval, const UnigramVocab& vocab) {
  RegimeResult out;
  std::map<ReportTask, std::map<std::string, Prf>> cells;
  for (Task task : {Task::kSer, Task::kRe}) {
    TrainConfig c = config;
    c.task = task;
    FinetuneResult r = finetune(c, init, train, eval, vocab);
    cells[task == Task::kSer ? ReportTask::kSer : ReportTask::kRe] = r.final_metrics;
    out.runs.emplace(task, std::move(r));
  }
  std::vector<std::string> columns;
  for (const auto& lang : report_languages()) {
    if (std::find(config.eval_langs.begin(), config.eval_langs.end(), lang) != config.eval_langs.end()) {
      columns.push_back(lang);
    }
  }
  out.report = build_report(regime_name(config.regime), columns, cells);
  return out;
}

}  // namespace lxlab
