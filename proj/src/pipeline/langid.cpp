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
#include <fstream>
#include <sstream>

#include "lxlab/errors.hpp"
#include "lxlab/pipeline.hpp"
#include "lxlab/utf8.hpp"

namespace lxlab {
namespace {

char32_t to_lower(char32_t c) {
  if (c >= U'A' && c <= U'Z') return c + 32;
  if (c >= 0xC0 && c <= 0xDE && c != 0xD7) return c + 32;
  // Latin Extended-A pairs upper and lower case in adjacent code points.
  if ((c >= 0x100 && c <= 0x137) || (c >= 0x14A && c <= 0x177)) return c % 2 == 0 ? c + 1 : c;
  if ((c >= 0x139 && c <= 0x148) || (c >= 0x179 && c <= 0x17E)) return c % 2 == 1 ? c + 1 : c;
  if (c == 0x178) return 0xFF;
  return c;
}

bool is_space(char32_t c) {
  return c == U' ' || c == U'\t' || c == U'\n' || c == U'\r' || c == U'\f' || c == U'\v' || c == 0xA0 ||
         c == 0x3000;
}

}  // namespace

std::u32string normalize_for_langid(std::string_view utf8_text) {
  std::u32string out;
  bool pending_space = false;
  for (char32_t c : utf8::decode(utf8_text)) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(U' ');
    pending_space = false;
    out.push_back(to_lower(c));
  }
  return out;
}

TrigramVector trigram_vector(std::string_view utf8_text) {
  const std::u32string t = normalize_for_langid(utf8_text);
  TrigramVector v;
  if (t.size() < 3) return v;
  const double w = 1.0 / static_cast<double>(t.size() - 2);
  for (std::size_t i = 0; i + 3 <= t.size(); ++i) v[t.substr(i, 3)] += w;
  return v;
}

LangProfile build_profile(const std::string& lang, std::string_view seed_text) {
  LangProfile p{lang, trigram_vector(seed_text)};
  if (p.freq.empty()) throw ValidationError("language profile '" + lang + "' has no trigrams");
  return p;
}

std::filesystem::path default_profile_dir() { return std::filesystem::path(LXLAB_DATA_DIR) / "langid"; }

std::vector<LangProfile> load_profiles(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  if (!std::filesystem::is_directory(dir)) throw ValidationError("profile directory not found: " + dir.string());
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.path().extension() == ".txt") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<LangProfile> out;
  for (const auto& f : files) {
    std::ifstream in(f, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    out.push_back(build_profile(f.stem().string(), ss.str()));
  }
  if (out.empty()) throw ValidationError("no language profiles in " + dir.string());
  return out;
}

double cosine(const TrigramVector& a, const TrigramVector& b) {
  if (a.empty() || b.empty()) return 0.0;
  const TrigramVector& small = a.size() <= b.size() ? a : b;
  const TrigramVector& large = a.size() <= b.size() ? b : a;
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (const auto& [k, v] : small) {
    const auto it = large.find(k);
    if (it != large.end()) dot += v * it->second;
  }
  for (const auto& [k, v] : a) na += v * v;
  for (const auto& [k, v] : b) nb += v * v;
  return std::clamp(dot / std::sqrt(na * nb), 0.0, 1.0);
}

LangScore detect_language(std::string_view utf8_text, const std::vector<LangProfile>& profiles) {
  const TrigramVector v = trigram_vector(utf8_text);
  LangScore best;
  for (const auto& p : profiles) {
    const double s = cosine(v, p.freq);
    if (s > best.score) best = LangScore{p.lang, s};
  }
  return best;
}

}  // namespace lxlab
