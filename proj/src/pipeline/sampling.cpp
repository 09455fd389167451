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

#include "lxlab/errors.hpp"
#include "lxlab/pipeline.hpp"

namespace lxlab {

std::map<std::string, double> sampling_probs(const SamplingSpec& spec) {
  if (!(spec.alpha >= 0.0) || !std::isfinite(spec.alpha)) throw ValidationError("sampling: alpha must be >= 0");
  double n = 0.0;
  for (const auto& [lang, c] : spec.counts) n += static_cast<double>(c);
  if (n == 0.0) throw ValidationError("sampling: all language counts are zero");
  std::map<std::string, double> p;
  double z = 0.0;
  for (const auto& [lang, c] : spec.counts) {
    if (c == 0) continue;
    p[lang] = std::pow(static_cast<double>(c) / n, spec.alpha);
    z += p[lang];
  }
  for (auto& [lang, v] : p) v /= z;
  return p;
}

SampleStream::SampleStream(SamplingSpec spec)
    : spec_(std::move(spec)), probs_(sampling_probs(spec_)), rng_(spec_.seed) {
  for (const auto& [lang, p] : probs_) {
    langs_.push_back(lang);
    weights_.push_back(p);
    cursor_[lang] = 0;
  }
}

StreamDraw SampleStream::next(std::size_t batch_size) {
  if (batch_size == 0) throw ValidationError("sample stream: batch size must be positive");
  const std::string& lang = langs_[rng_.categorical(weights_)];
  const std::size_t n = spec_.counts.at(lang);
  std::size_t& cur = cursor_[lang];
  StreamDraw d{lang, {}, cur / n};
  for (std::size_t i = 0; i < batch_size; ++i, ++cur) d.indices.push_back(cur % n);
  return d;
}

}  // namespace lxlab
