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

#include "lxlab/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "lxlab/docmodel.hpp"
#include "lxlab/errors.hpp"
#include "lxlab/evalkit.hpp"
#include "lxlab/log.hpp"
#include "lxlab/pipeline.hpp"
#include "lxlab/synth.hpp"
#include "lxlab/tokenizer.hpp"
#include "lxlab/train.hpp"

namespace lxlab::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

fs::path default_vocab() { return fs::path(LXLAB_DATA_DIR) / "vocab.tsv"; }

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (c != ' ') {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  if (!path.parent_path().empty()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(fmt::format("cannot write {}", path.string()));
  f << text;
}

std::string read_text(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ValidationError(fmt::format("cannot read {}", path.string()));
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

nlohmann::json parse_json_file(const fs::path& path) {
  try {
    return nlohmann::json::parse(read_text(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

// Snapshot of everything a run consumed, written next to its outputs.
void write_resolved(const fs::path& dir, const std::string& command, const ordered_json& args,
                    const ordered_json& config = ordered_json::object()) {
  ordered_json j;
  j["command"] = command;
  j["args"] = args;
  j["config"] = config;
  write_text(dir / "resolved_config.json", j.dump(2) + "\n");
}

std::optional<std::uint64_t> env_seed() {
  const char* s = std::getenv("LXLAB_SEED");
  if (s == nullptr || *s == '\0') return std::nullopt;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(s, &end, 10);
  if (*end != '\0') throw ConfigError(fmt::format("LXLAB_SEED must be an unsigned integer, got '{}'", s));
  return v;
}

// Flat config: LXLAB_SEED, then the config file, then --set overrides,
// then an explicit --seed.
nlohmann::json resolve_config(const std::string& config_path, const std::vector<std::string>& sets,
                              const std::optional<std::uint64_t>& seed) {
  nlohmann::json flat = nlohmann::json::object();
  if (auto s = env_seed()) flat["seed"] = *s;
  if (!config_path.empty()) {
    nlohmann::json file = parse_json_file(config_path);
    // A resolved snapshot carries the flat config under "config".
    if (file.is_object() && file.contains("command") && file.contains("config")) file = file["config"];
    if (!file.is_object()) throw ConfigError(fmt::format("{}: config must be a JSON object", config_path));
    for (const auto& [k, v] : file.items()) flat[k] = v;
  }
  for (const auto& kv : sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError(fmt::format("--set expects key=value, got '{}'", kv));
    const std::string key = kv.substr(0, eq), value = kv.substr(eq + 1);
    try {
      flat[key] = nlohmann::json::parse(value);
    } catch (const nlohmann::json::parse_error&) {
      flat[key] = value;
    }
  }
  if (seed) flat["seed"] = *seed;
  return flat;
}

LangDocs load_datasets(const std::vector<std::string>& files) {
  LangDocs out;
  for (const auto& f : files) {
    Dataset ds = parse_dataset(f);
    for (auto& d : ds.documents) {
      const std::string lang = !ds.lang.empty() ? ds.lang : d.lang;
      out[lang].push_back(std::move(d));
    }
  }
  return out;
}

UnigramVocab load_vocab_for(const std::string& path) { return UnigramVocab::load(path); }

void check_vocab(const Checkpoint& ckpt, const UnigramVocab& vocab) {
  if (ckpt.model.vocab_size != vocab.size()) {
    throw ConfigError(fmt::format("checkpoint vocabulary size {} does not match the vocabulary ({})",
                                  ckpt.model.vocab_size, vocab.size()));
  }
}

std::string prf_line(const std::string& name, const Prf& p) {
  return fmt::format("{} precision={:.6f} recall={:.6f} f1={:.6f} tp={} fp={} fn={}\n", name, p.precision, p.recall,
                     p.f1, p.tp, p.fp, p.fn);
}

// --- subcommand bodies ---------------------------------------------------------

struct Common {
  std::string out;
  std::string vocab = default_vocab().string();
  std::string config;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
};

int cmd_synth(const Common& c, int docs, const std::string& langs_arg, int min_chars, std::ostream& out) {
  if (c.out.empty()) throw ConfigError("synth needs --out");
  if (docs < 1) throw ConfigError("--docs must be at least 1");
  const auto langs = split_list(langs_arg);
  if (langs.empty()) throw ConfigError("--langs is empty");
  const std::uint64_t seed = c.seed ? *c.seed : env_seed().value_or(0);
  SynthOptions opts;
  opts.min_chars = min_chars;
  const auto datasets = synth_datasets(load_lexicon(default_lexicon_path()), langs, docs, seed, opts);
  const fs::path dir = c.out;
  fs::create_directories(dir);
  std::string corpus;
  for (const auto& ds : datasets) {
    write_dataset(ds, dir / (ds.lang + ".json"));
    for (const auto& d : ds.documents) {
      if (d.raster) write_pgm(*d.raster, dir / d.image_fname);
      corpus += record_to_json(document_to_record(d, d.image_fname)).dump() + "\n";
    }
    out << fmt::format("{}: {} documents -> {}\n", ds.lang, ds.documents.size(), (dir / (ds.lang + ".json")).string());
  }
  write_text(dir / "corpus.jsonl", corpus);
  write_resolved(dir, "synth",
                 {{"docs", docs}, {"langs", langs}, {"seed", seed}, {"min_chars", min_chars}});
  return 0;
}

int cmd_corpus_build(const Common& c, const std::string& input, const std::string& profiles_dir, int min_chars,
                     double min_score, std::ostream& out) {
  if (c.out.empty()) throw ConfigError("corpus build needs --out");
  FilterConfig cfg;
  if (min_chars < 0) throw ConfigError("--min-chars must be non-negative");
  cfg.min_chars = static_cast<std::size_t>(min_chars);
  cfg.min_lang_score = min_score;
  const auto profiles = load_profiles(profiles_dir);
  const CorpusStats stats = build_corpus(input, c.out, profiles, cfg);
  const auto t = stats.totals();
  out << fmt::format("kept {} of {} records ({} too short, {} low language score)\n", t.kept, t.total(), t.too_short,
                     t.low_lang_score);
  write_resolved(c.out, "corpus build",
                 {{"input", input},
                  {"profiles", profiles_dir},
                  {"min_chars", min_chars},
                  {"min_lang_score", min_score}});
  return 0;
}

int cmd_corpus_stats(const std::string& dir, std::ostream& out) {
  fs::path path = dir;
  if (fs::is_directory(path)) path /= "stats.json";
  const CorpusStats stats = CorpusStats::from_json(parse_json_file(path));
  out << fmt::format("{:<6} {:>8} {:>10} {:>15} {:>10} {:>8}\n", "lang", "kept", "too_short", "low_lang_score",
                     "discarded", "total");
  auto row = [&](const std::string& name, const LangCounts& n) {
    out << fmt::format("{:<6} {:>8} {:>10} {:>15} {:>10} {:>8}\n", name, n.kept, n.too_short, n.low_lang_score,
                       n.discarded(), n.total());
  };
  for (const auto& [lang, n] : stats.by_lang) row(lang, n);
  row("total", stats.totals());
  return 0;
}

int cmd_sample_probs(const Common& c, const std::string& counts_arg, double alpha, int draws, std::ostream& out) {
  SamplingSpec spec;
  spec.alpha = alpha;
  spec.seed = c.seed ? *c.seed : env_seed().value_or(0);
  for (const auto& item : split_list(counts_arg)) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError(fmt::format("--counts expects LANG=N, got '{}'", item));
    const std::string n = item.substr(eq + 1);
    char* end = nullptr;
    const long long v = std::strtoll(n.c_str(), &end, 10);
    if (n.empty() || *end != '\0' || v < 0) throw ConfigError(fmt::format("bad count in '{}'", item));
    spec.counts[item.substr(0, eq)] = static_cast<std::size_t>(v);
  }
  const auto probs = sampling_probs(spec);
  std::string text;
  for (const auto& [lang, p] : probs) text += fmt::format("p_{}={:.17g}\n", lang, p);
  if (draws > 0) {
    SampleStream stream(spec);
    std::map<std::string, int> hits;
    for (int i = 0; i < draws; ++i) ++hits[stream.next(1).lang];
    for (const auto& [lang, p] : probs) {
      text += fmt::format("freq_{}={:.17g}\n", lang, static_cast<double>(hits[lang]) / draws);
    }
  }
  out << text;
  if (!c.out.empty()) {
    write_text(fs::path(c.out) / "probs.txt", text);
    write_resolved(c.out, "sample probs",
                   {{"counts", counts_arg}, {"alpha", alpha}, {"draws", draws}, {"seed", spec.seed}});
  }
  return 0;
}

int cmd_tokenize(const Common& c, const std::string& text, const std::string& dataset, std::ostream& out) {
  if (text.empty() == dataset.empty()) throw ConfigError("tokenize needs exactly one of --text or --dataset");
  const auto vocab = load_vocab_for(c.vocab);
  std::string result;
  if (!text.empty()) {
    const auto surfaces = segment_surfaces(text, vocab);
    const auto segs = segment(text, vocab);
    for (std::size_t i = 0; i < segs.size(); ++i) result += fmt::format("{}\t{}\n", surfaces[i], segs[i].piece_id);
  } else {
    const Dataset ds = parse_dataset(dataset);
    result += "doc\tword\tpiece_id\tpiece\tx0\ty0\tx1\ty1\n";
    for (const auto& d : ds.documents) {
      for (const auto& t : tokenize_document(d, vocab)) {
        result += fmt::format("{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n", d.id, t.word_index, t.piece_id,
                              vocab.piece(t.piece_id), t.box.x0, t.box.y0, t.box.x1, t.box.y1);
      }
    }
  }
  out << result;
  if (!c.out.empty()) {
    write_text(fs::path(c.out) / "tokens.tsv", result);
    write_resolved(c.out, "tokenize", {{"text", text}, {"dataset", dataset}, {"vocab", c.vocab}});
  }
  return 0;
}

int cmd_pretrain(const Common& c, const std::string& corpus_dir, const std::vector<std::string>& datasets,
                 const std::string& resume, int stop_at, std::ostream& out) {
  if (c.out.empty()) throw ConfigError("pretrain needs --out");
  nlohmann::json flat = resolve_config(c.config, c.sets, c.seed);
  if (!flat.contains("task")) flat["task"] = "PRETRAIN";
  TrainConfig cfg = TrainConfig::from_json(flat);
  if (cfg.task != Task::kPretrain) throw ConfigError("pretrain needs task PRETRAIN");
  cfg.validate();
  const auto vocab = load_vocab_for(c.vocab);

  LangDocs corpus = load_datasets(datasets);
  if (!corpus_dir.empty()) {
    std::vector<fs::path> shards;
    for (const auto& e : fs::directory_iterator(corpus_dir)) {
      if (e.path().extension() == ".jsonl") shards.push_back(e.path());
    }
    std::sort(shards.begin(), shards.end());
    for (const auto& s : shards) {
      auto docs = load_shard(s);
      auto& dst = corpus[s.stem().string()];
      for (auto& d : docs) dst.push_back(std::move(d));
    }
  }
  std::optional<Checkpoint> resume_ckpt;
  if (!resume.empty()) resume_ckpt = load_checkpoint(resume);
  const PretrainResult r = pretrain(cfg, corpus, vocab, {resume_ckpt ? &*resume_ckpt : nullptr, stop_at});

  const fs::path dir = c.out;
  save_checkpoint(r.checkpoint, dir / "checkpoint.lxlm");
  write_text(dir / "loss.csv", loss_csv(r.curve));
  write_resolved(dir, "pretrain",
                 {{"corpus", corpus_dir},
                  {"dataset", datasets},
                  {"vocab", c.vocab},
                  {"resume", resume},
                  {"stop_at", stop_at}},
                 cfg.to_json());
  if (!r.curve.empty()) {
    out << fmt::format("pretrained {} steps: loss {:.6f} -> {:.6f}\n", r.curve.size(), r.curve.front().total,
                       r.curve.back().total);
  }
  out << fmt::format("checkpoint: {}\n", (dir / "checkpoint.lxlm").string());
  return 0;
}

int cmd_finetune(const Common& c, const std::string& init, const std::vector<std::string>& train_files,
                 const std::vector<std::string>& eval_files, const std::string& resume, int stop_at,
                 std::ostream& out) {
  if (c.out.empty()) throw ConfigError("finetune needs --out");
  if (train_files.empty()) throw ConfigError("finetune needs --train");
  nlohmann::json flat = resolve_config(c.config, c.sets, c.seed);
  // task=BOTH runs SER and RE under the regime and writes a report.
  bool both = false;
  if (flat.contains("task") && flat["task"].is_string()) {
    std::string t = flat["task"].get<std::string>();
    std::transform(t.begin(), t.end(), t.begin(), [](unsigned char ch) { return std::toupper(ch); });
    if (t == "BOTH") {
      both = true;
      flat["task"] = "SER";
    }
  }
  TrainConfig cfg = TrainConfig::from_json(flat);
  cfg.validate();
  if (cfg.task == Task::kPretrain) throw ConfigError("finetune needs task SER, RE or BOTH");
  const auto vocab = load_vocab_for(c.vocab);
  const LangDocs train = load_datasets(train_files);
  const LangDocs eval = eval_files.empty() ? train : load_datasets(eval_files);
  std::optional<Checkpoint> init_ckpt;
  if (!init.empty()) {
    init_ckpt = load_checkpoint(init);
    check_vocab(*init_ckpt, vocab);
  }
  const fs::path dir = c.out;
  ordered_json resolved = cfg.to_json();
  if (both) resolved["task"] = "BOTH";
  const ordered_json args = {{"init", init},     {"train", train_files}, {"eval", eval_files}, {"vocab", c.vocab},
                             {"resume", resume}, {"stop_at", stop_at}};

  auto save_run = [&](const FinetuneResult& r, const fs::path& sub) {
    save_checkpoint(r.checkpoint, sub / "checkpoint.lxlm");
    write_text(sub / "loss.csv", loss_csv(r.curve));
    write_text(sub / "metrics.csv", metric_csv(r.metrics));
  };

  if (both) {
    if (!resume.empty()) throw ConfigError("--resume needs a single task");
    const RegimeResult rr = run_regime(cfg, init_ckpt ? &*init_ckpt : nullptr, train, eval, vocab);
    for (const auto& [task, r] : rr.runs) save_run(r, dir / (task == Task::kSer ? "ser" : "re"));
    const std::string text = render_text(rr.report);
    write_text(dir / "report.txt", text);
    write_text(dir / "report.csv", render_csv(rr.report));
    out << text;
  } else {
    std::optional<Checkpoint> resume_ckpt;
    if (!resume.empty()) resume_ckpt = load_checkpoint(resume);
    const FinetuneResult r = finetune(cfg, init_ckpt ? &*init_ckpt : nullptr, train, eval, vocab,
                                      {resume_ckpt ? &*resume_ckpt : nullptr, stop_at});
    save_run(r, dir);
    std::map<ReportTask, std::map<std::string, Prf>> cells;
    cells[cfg.task == Task::kSer ? ReportTask::kSer : ReportTask::kRe] = r.final_metrics;
    std::vector<std::string> columns;
    for (const auto& lang : report_languages()) {
      if (std::find(cfg.eval_langs.begin(), cfg.eval_langs.end(), lang) != cfg.eval_langs.end()) {
        columns.push_back(lang);
      }
    }
    const MetricReport report = build_report(regime_name(cfg.regime), columns, cells);
    write_text(dir / "report.txt", render_text(report));
    write_text(dir / "report.csv", render_csv(report));
    for (const auto& [lang, prf] : r.final_metrics) out << prf_line(task_name(cfg.task) + " " + lang, prf);
  }
  write_resolved(dir, "finetune", args, resolved);
  return 0;
}

int cmd_predict(const Common& c, const std::string& ckpt_path, const std::string& dataset,
                const std::string& pred_path, std::ostream& out) {
  if (pred_path.empty()) throw ConfigError("predict needs --pred");
  const Checkpoint ckpt = load_checkpoint(ckpt_path);
  const auto vocab = load_vocab_for(c.vocab);
  check_vocab(ckpt, vocab);
  Dataset ds = parse_dataset(dataset);
  Dataset pred;
  pred.lang = ds.lang;
  for (const auto& d : ds.documents) pred.documents.push_back(predict_document(ckpt, d, vocab));
  write_dataset(pred, pred_path);
  const fs::path dir = c.out.empty() ? fs::path(pred_path).parent_path() : fs::path(c.out);
  write_resolved(dir.empty() ? fs::path(".") : dir, "predict",
                 {{"ckpt", ckpt_path}, {"dataset", dataset}, {"pred", pred_path}, {"vocab", c.vocab}});
  out << fmt::format("{} predictions for {} documents -> {}\n", task_name(ckpt.task), pred.documents.size(),
                     pred_path);
  return 0;
}

int cmd_eval(const Common& c, const std::string& gold_path, const std::string& pred_path, std::ostream& out) {
  const Dataset gold = parse_dataset(gold_path);
  const Dataset pred = parse_dataset(pred_path);
  const DocumentScores s = score_documents(gold.documents, pred.documents);
  const std::string text = prf_line("SER", s.ser) + prf_line("RE", s.re);
  out << text;
  if (!c.out.empty()) {
    write_text(fs::path(c.out) / "eval.txt", text);
    write_resolved(c.out, "eval", {{"gold", gold_path}, {"pred", pred_path}});
  }
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"lxlab: multilingual layout-aware document model toolkit", "lxlab"};
  app.require_subcommand(1);
  std::string log_level = "warn";
  app.add_option("--log-level", log_level, "debug, info, warn, error or off");

  Common common;
  auto add_out = [&](CLI::App* sub, const char* help) { sub->add_option("--out", common.out, help); };
  auto add_seed = [&](CLI::App* sub) {
    sub->add_option("--seed", common.seed, "random seed (default: LXLAB_SEED or 0)");
  };
  auto add_vocab = [&](CLI::App* sub) { sub->add_option("--vocab", common.vocab, "vocabulary TSV"); };
  auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config", common.config, "JSON config with flat dotted keys")->check(CLI::ExistingFile);
    sub->add_option("--set", common.sets, "config override key=value (repeatable)");
  };

  // corpus build / corpus stats
  auto* corpus = app.add_subcommand("corpus", "build or inspect a filtered pre-training corpus");
  corpus->require_subcommand(1);
  auto* corpus_build = corpus->add_subcommand("build", "filter a JSONL corpus into language shards");
  std::string input, profiles = default_profile_dir().string();
  int min_chars = 200;
  double min_score = 0.5;
  corpus_build->add_option("--input", input, "corpus JSONL")->required()->check(CLI::ExistingFile);
  corpus_build->add_option("--profiles", profiles, "language profile directory");
  corpus_build->add_option("--min-chars", min_chars, "minimum characters per record");
  corpus_build->add_option("--min-score", min_score, "language score must exceed this");
  add_out(corpus_build, "output directory");
  auto* corpus_stats = corpus->add_subcommand("stats", "print filtering statistics");
  std::string stats_dir;
  corpus_stats->add_option("--dir", stats_dir, "corpus directory or stats.json")->required();

  // sample probs
  auto* sample = app.add_subcommand("sample", "inspect language sampling");
  sample->require_subcommand(1);
  auto* sample_probs_cmd = sample->add_subcommand("probs", "print sampling probabilities");
  std::string counts;
  double alpha = 0.7;
  int draws = 0;
  sample_probs_cmd->add_option("--counts", counts, "LANG=N,...")->required();
  sample_probs_cmd->add_option("--alpha", alpha, "sampling exponent");
  sample_probs_cmd->add_option("--draws", draws, "also print empirical frequencies of this many draws");
  add_seed(sample_probs_cmd);
  add_out(sample_probs_cmd, "also write probs.txt here");

  // tokenize
  auto* tokenize = app.add_subcommand("tokenize", "segment text or a dataset into vocabulary pieces");
  std::string text, dataset;
  tokenize->add_option("--text", text, "text to segment");
  tokenize->add_option("--dataset", dataset, "dataset JSON to tokenize")->check(CLI::ExistingFile);
  add_vocab(tokenize);
  add_out(tokenize, "also write tokens.tsv here");

  // pretrain
  auto* pre = app.add_subcommand("pretrain", "pre-train with MVLM, TIA and TIM");
  std::string corpus_dir, resume;
  std::vector<std::string> datasets;
  int stop_at = -1;
  pre->add_option("--corpus", corpus_dir, "directory of language shards")->check(CLI::ExistingDirectory);
  pre->add_option("--dataset", datasets, "dataset JSON files used as corpus documents");
  pre->add_option("--resume", resume, "checkpoint to continue from")->check(CLI::ExistingFile);
  pre->add_option("--stop-at", stop_at, "stop early at this step");
  add_config(pre);
  add_seed(pre);
  add_vocab(pre);
  add_out(pre, "output directory");

  // finetune
  auto* ft = app.add_subcommand("finetune", "fine-tune for SER or RE (task=BOTH runs both)");
  std::string init;
  std::vector<std::string> train_files, eval_files;
  ft->add_option("--init", init, "pre-trained checkpoint")->check(CLI::ExistingFile);
  ft->add_option("--train", train_files, "training dataset JSON files");
  ft->add_option("--eval", eval_files, "evaluation dataset JSON files (default: training files)");
  ft->add_option("--resume", resume, "fine-tuning checkpoint to continue from")->check(CLI::ExistingFile);
  ft->add_option("--stop-at", stop_at, "stop early at this step");
  add_config(ft);
  add_seed(ft);
  add_vocab(ft);
  add_out(ft, "output directory");

  // predict
  auto* predict = app.add_subcommand("predict", "write predictions of a fine-tuned checkpoint");
  std::string ckpt, pred_path;
  predict->add_option("--ckpt", ckpt, "fine-tuned checkpoint")->required()->check(CLI::ExistingFile);
  predict->add_option("--dataset", dataset, "input dataset JSON")->required()->check(CLI::ExistingFile);
  predict->add_option("--pred", pred_path, "output dataset JSON")->required();
  add_vocab(predict);
  add_out(predict, "directory for the resolved config (default: next to --pred)");

  // eval
  auto* ev = app.add_subcommand("eval", "score predictions against gold annotations");
  std::string gold;
  ev->add_option("--gold", gold, "gold dataset JSON")->required()->check(CLI::ExistingFile);
  ev->add_option("--pred", pred_path, "predicted dataset JSON")->required()->check(CLI::ExistingFile);
  add_out(ev, "also write eval.txt here");

  // synth
  auto* syn = app.add_subcommand("synth", "generate synthetic multilingual form fixtures");
  int docs = 8;
  std::string langs = "en,zh";
  int synth_min_chars = 200;
  syn->add_option("--docs", docs, "documents per language");
  syn->add_option("--langs", langs, "comma-separated languages");
  syn->add_option("--min-chars", synth_min_chars, "pad pages with filler to at least this many characters");
  add_seed(syn);
  add_out(syn, "output directory");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const CLI::App* failed = &app;
    for (const auto* sub : {corpus_build, corpus_stats, sample_probs_cmd, tokenize, pre, ft, predict, ev, syn}) {
      if (sub->parsed()) failed = sub;
    }
    if (failed == &app && corpus->parsed()) failed = corpus;
    if (failed == &app && sample->parsed()) failed = sample;
    err << failed->help();
    return 1;
  }

  try {
    log::set_level(log::parse_level(log_level));
    if (corpus_build->parsed()) return cmd_corpus_build(common, input, profiles, min_chars, min_score, out);
    if (corpus_stats->parsed()) return cmd_corpus_stats(stats_dir, out);
    if (sample_probs_cmd->parsed()) return cmd_sample_probs(common, counts, alpha, draws, out);
    if (tokenize->parsed()) return cmd_tokenize(common, text, dataset, out);
    if (pre->parsed()) return cmd_pretrain(common, corpus_dir, datasets, resume, stop_at, out);
    if (ft->parsed()) return cmd_finetune(common, init, train_files, eval_files, resume, stop_at, out);
    if (predict->parsed()) return cmd_predict(common, ckpt, dataset, pred_path, out);
    if (ev->parsed()) return cmd_eval(common, gold, pred_path, out);
    if (syn->parsed()) return cmd_synth(common, docs, langs, synth_min_chars, out);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  err << app.help();
  return 1;
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace lxlab::cli
