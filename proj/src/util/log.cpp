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

#include "lxlab/log.hpp"

#include <atomic>
#include <cstdio>
#include <mutex>

#include "lxlab/errors.hpp"

namespace lxlab::log {
namespace {

std::atomic<int> g_level{static_cast<int>(Level::kWarn)};
std::atomic<int> g_warnings{0};
std::mutex g_mutex;

const char* tag(Level l) {
  switch (l) {
    case Level::kDebug: return "debug";
    case Level::kInfo: return "info";
    case Level::kWarn: return "warn";
    case Level::kError: return "error";
    case Level::kOff: return "off";
  }
  return "";
}

}  // namespace

void set_level(Level l) { g_level = static_cast<int>(l); }
Level level() { return static_cast<Level>(g_level.load()); }
int warning_count() { return g_warnings.load(); }

Level parse_level(std::string_view name) {
  for (Level l : {Level::kDebug, Level::kInfo, Level::kWarn, Level::kError, Level::kOff}) {
    if (name == tag(l)) return l;
  }
  throw ConfigError("unknown log level '" + std::string(name) + "'");
}

void write(Level l, std::string_view message) {
  if (l == Level::kWarn) ++g_warnings;
  if (static_cast<int>(l) < g_level.load()) return;
  std::lock_guard lock(g_mutex);
  fmt::print(stderr, "[{}] {}\n", tag(l), message);
}

}  // namespace lxlab::log
