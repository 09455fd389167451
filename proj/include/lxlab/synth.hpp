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

#include "lxlab/docmodel.hpp"
#include "lxlab/numerics/rng.hpp"

namespace lxlab {

struct LangLexicon {
  std::vector<std::string> headers;
  std::vector<std::string> keys;
  std::vector<std::string> values;
  std::vector<std::string> fillers;
};

using Lexicon = std::map<std::string, LangLexicon>;

Lexicon load_lexicon(const std::filesystem::path& path);
std::filesystem::path default_lexicon_path();

// Languages written without spaces between words.
bool is_unspaced(const std::string& lang);

struct SynthOptions {
  int page_w = 800;
  int page_h = 1400;
  int raster_divisor = 4;  // raster is the page shrunk by this factor
  int min_pairs = 2;
  int max_pairs = 4;
  // Filler lines are appended until the page holds at least this many
  // characters.
  int min_chars = 0;
};

// A form page: a HEADER line, an optional filler line, QUESTION/ANSWER
// rows linked key to value, and filler lines as OTHER entities. The raster
// renders every character as a hashed glyph.
Document synth_document(const LangLexicon& lexicon, const std::string& lang, const std::string& id, Rng& rng,
                        const SynthOptions& options = {});

// `docs` forms per language; document ids are "<lang>_<index>" and
// rasters are named "<id>.pgm".
std::vector<Dataset> synth_datasets(const Lexicon& lexicon, const std::vector<std::string>& langs, int docs,
                                    std::uint64_t seed, const SynthOptions& options = {});

// Character count of a document, summed over its words.
std::size_t document_chars(const Document& doc);

}  // namespace lxlab
