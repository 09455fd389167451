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
#include <memory>
#include <string>
#include <vector>

#include "lxlab/numerics/rng.hpp"
#include "lxlab/numerics/tensor.hpp"

namespace lxlab {

// A trainable tensor. grad always has the shape of value.
struct Param {
  std::string name;
  Tensor value;
  Tensor grad;
};

// Ordered collection of named parameters. Registration order is the
// iteration order, which keeps optimizer updates and checkpoints
// deterministic. Addresses of registered params never change.
class ParamStore {
 public:
  ParamStore() = default;
  ParamStore(const ParamStore& other);
  ParamStore& operator=(const ParamStore& other);
  ParamStore(ParamStore&&) noexcept = default;
  ParamStore& operator=(ParamStore&&) noexcept = default;

  Param& add(const std::string& name, Tensor init);
  // Registers a parameter initialized uniformly in [-scale, scale].
  Param& add_uniform(const std::string& name, Shape shape, double scale, Rng& rng);

  Param& get(const std::string& name);
  const Param& get(const std::string& name) const;
  Param* find(const std::string& name);
  const Param* find(const std::string& name) const;
  bool contains(const std::string& name) const { return index_.count(name) != 0; }

  std::size_t size() const { return params_.size(); }
  std::size_t element_count() const;
  std::vector<Param*> all();
  std::vector<const Param*> all() const;

  void zero_grad();

 private:
  std::vector<std::unique_ptr<Param>> params_;
  std::map<std::string, Param*> index_;
};

}  // namespace lxlab
