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
#include <set>

#include <fmt/format.h>

#include "lxlab/errors.hpp"
#include "lxlab/evalkit.hpp"
#include "lxlab/train.hpp"

namespace lxlab {

std::string regime_name(Regime r) {
  switch (r) {
    case Regime::kLangSpecific: return "LANG_SPECIFIC";
    case Regime::kZeroShot: return "ZERO_SHOT";
    case Regime::kMultitask: return "MULTITASK";
  }
  return "?";
}

Regime parse_regime(std::string_view name) {
  std::string up(name);
  std::transform(up.begin(), up.end(), up.begin(), [](unsigned char c) { return std::toupper(c); });
  if (up == "LANG_SPECIFIC") return Regime::kLangSpecific;
  if (up == "ZERO_SHOT") return Regime::kZeroShot;
  if (up == "MULTITASK") return Regime::kMultitask;
  throw ConfigError(fmt::format("unknown regime '{}'", name));
}

std::string task_name(Task t) {
  switch (t) {
    case Task::kPretrain: return "PRETRAIN";
    case Task::kSer: return "SER";
    case Task::kRe: return "RE";
  }
  return "?";
}

Task parse_task(std::string_view name) {
  std::string up(name);
  std::transform(up.begin(), up.end(), up.begin(), [](unsigned char c) { return std::toupper(c); });
  if (up == "PRETRAIN") return Task::kPretrain;
  if (up == "SER") return Task::kSer;
  if (up == "RE") return Task::kRe;
  throw ConfigError(fmt::format("unknown task '{}'", name));
}

namespace {

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (const auto& s : v) out += (out.empty() ? "" : ",") + s;
  return out;
}

template <typename T>
T get_as(const nlohmann::json& j, const std::string& key) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(fmt::format("config key '{}' has the wrong type", key));
  }
}

std::vector<std::string> lang_list(const nlohmann::json& j, const std::string& key) {
  const auto& v = j.at(key);
  if (v.is_string()) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : v.get<std::string>()) {
      if (c == ',') {
        if (!cur.empty()) out.push_back(cur);
        cur.clear();
      } else if (c != ' ') {
        cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
      }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
  }
  auto out = get_as<std::vector<std::string>>(j, key);
  for (auto& s : out) std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

}  // namespace

void TrainConfig::validate() const {
  if (!(lr > 0.0) || !std::isfinite(lr)) throw ConfigError(fmt::format("lr must be positive, got {}", lr));
  if (!(warmup_frac >= 0.0 && warmup_frac < 1.0)) {
    throw ConfigError(fmt::format("warmup_frac must be in [0, 1), got {}", warmup_frac));
  }
  if (steps < 0) throw ConfigError(fmt::format("steps must be non-negative, got {}", steps));
  if (batch_size < 1) throw ConfigError(fmt::format("batch_size must be at least 1, got {}", batch_size));
  if (!(grad_clip > 0.0)) throw ConfigError(fmt::format("grad_clip must be positive, got {}", grad_clip));
  if (eval_every < 0) throw ConfigError(fmt::format("eval_every must be non-negative, got {}", eval_every));
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError(fmt::format("alpha must be in [0, 1], got {}", alpha));
  objectives.validate();

  const auto& all = report_languages();
  for (const auto* list : {&train_langs, &eval_langs}) {
    for (const auto& l : *list) {
      if (std::find(all.begin(), all.end(), l) == all.end()) {
        throw ConfigError(fmt::format("unknown language '{}'", l));
      }
    }
  }
  if (task == Task::kPretrain) return;
  if (train_langs.empty()) throw ConfigError("train_langs is empty");
  if (eval_langs.empty()) throw ConfigError("eval_langs is empty");
  const std::set<std::string> train(train_langs.begin(), train_langs.end());
  switch (regime) {
    case Regime::kLangSpecific:
      if (train_langs.size() != 1 || eval_langs != train_langs) {
        throw ConfigError(fmt::format("LANG_SPECIFIC trains and evaluates on one language, got train={} eval={}",
                                      join(train_langs), join(eval_langs)));
      }
      break;
    case Regime::kZeroShot:
      if (train != std::set<std::string>{"en"}) {
        throw ConfigError(fmt::format("ZERO_SHOT trains on English only, got train_langs={}", join(train_langs)));
      }
      break;
    case Regime::kMultitask:
      if (train != std::set<std::string>(all.begin(), all.end())) {
        throw ConfigError(fmt::format("MULTITASK trains on all {} languages, got train_langs={}", all.size(),
                                      join(train_langs)));
      }
      break;
  }
}

nlohmann::ordered_json TrainConfig::to_json() const {
  nlohmann::ordered_json j;
  j["preset"] = preset_name(preset);
  j["task"] = task_name(task);
  j["regime"] = regime_name(regime);
  j["train_langs"] = train_langs;
  j["eval_langs"] = eval_langs;
  j["lr"] = lr;
  j["warmup_frac"] = warmup_frac;
  j["steps"] = steps;
  j["batch_size"] = batch_size;
  j["grad_clip"] = grad_clip;
  j["seed"] = seed;
  j["alpha"] = alpha;
  j["eval_every"] = eval_every;
  j["objectives.mvlm_prob"] = objectives.mvlm_prob;
  j["objectives.mvlm_mask_frac"] = objectives.mvlm_mask_frac;
  j["objectives.mvlm_random_frac"] = objectives.mvlm_random_frac;
  j["objectives.tia_line_prob"] = objectives.tia_line_prob;
  j["objectives.tim_swap_prob"] = objectives.tim_swap_prob;
  return j;
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("train config must be a JSON object");
  TrainConfig c;
  for (const auto& [key, value] : j.items()) {
    if (key == "preset") {
      c.preset = parse_preset(get_as<std::string>(j, key));
    } else if (key == "task") {
      c.task = parse_task(get_as<std::string>(j, key));
    } else if (key == "regime") {
      c.regime = parse_regime(get_as<std::string>(j, key));
    } else if (key == "train_langs") {
      c.train_langs = lang_list(j, key);
    } else if (key == "eval_langs") {
      c.eval_langs = lang_list(j, key);
    } else if (key == "lr") {
      c.lr = get_as<double>(j, key);
    } else if (key == "warmup_frac") {
      c.warmup_frac = get_as<double>(j, key);
    } else if (key == "steps") {
      c.steps = get_as<int>(j, key);
    } else if (key == "batch_size") {
      c.batch_size = get_as<int>(j, key);
    } else if (key == "grad_clip") {
      c.grad_clip = get_as<double>(j, key);
    } else if (key == "seed") {
      c.seed = get_as<std::uint64_t>(j, key);
    } else if (key == "alpha") {
      c.alpha = get_as<double>(j, key);
    } else if (key == "eval_every") {
      c.eval_every = get_as<int>(j, key);
    } else if (key == "objectives.mvlm_prob") {
      c.objectives.mvlm_prob = get_as<double>(j, key);
    } else if (key == "objectives.mvlm_mask_frac") {
      c.objectives.mvlm_mask_frac = get_as<double>(j, key);
    } else if (key == "objectives.mvlm_random_frac") {
      c.objectives.mvlm_random_frac = get_as<double>(j, key);
    } else if (key == "objectives.tia_line_prob") {
      c.objectives.tia_line_prob = get_as<double>(j, key);
    } else if (key == "objectives.tim_swap_prob") {
      c.objectives.tim_swap_prob = get_as<double>(j, key);
    } else {
      throw ConfigError(fmt::format("unknown train config key '{}'", key));
    }
    (void)value;
  }
  return c;
}

double learning_rate(int step, int total_steps, double warmup_frac, double peak) {
  if (total_steps <= 0) return 0.0;
  const double t = std::clamp(static_cast<double>(step), 0.0, static_cast<double>(total_steps));
  const double warm = warmup_frac * total_steps;
  if (t < warm) return peak * t / warm;
  const double decay = total_steps - warm;
  if (decay <= 0.0) return peak;
  return peak * (total_steps - t) / decay;
}

}  // namespace lxlab
