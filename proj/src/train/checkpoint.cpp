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

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include <fmt/format.h>

#include "lxlab/errors.hpp"
#include "lxlab/train.hpp"

namespace lxlab {

namespace {

constexpr char kMagic[4] = {'L', 'X', 'L', 'M'};
constexpr const char* kMomentM = "adam.m:";
constexpr const char* kMomentV = "adam.v:";

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_le(const std::string& in, std::size_t at, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[at + i])) << (8 * i);
  return v;
}

struct Entry {
  std::string name;
  const Tensor* tensor;
};

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  std::vector<Entry> entries;
  for (const Param* p : ckpt.params.all()) entries.push_back({p->name, &p->value});
  for (const auto& [name, mom] : ckpt.optimizer.moments()) {
    entries.push_back({kMomentM + name, &mom.m});
    entries.push_back({kMomentV + name, &mom.v});
  }

  nlohmann::ordered_json header;
  header["version"] = kCheckpointVersion;
  header["model"] = ckpt.model.to_json();
  header["task"] = task_name(ckpt.task);
  header["step"] = ckpt.step;
  header["train_config"] = ckpt.train_config;
  const auto& ac = ckpt.optimizer.config();
  header["adam"] = {{"step", ckpt.optimizer.step_count()}, {"beta1", ac.beta1}, {"beta2", ac.beta2}, {"eps", ac.eps}};
  auto tensors = nlohmann::ordered_json::array();
  std::size_t offset = 0;
  for (const auto& e : entries) {
    tensors.push_back({{"name", e.name}, {"offset", offset}, {"shape", e.tensor->shape()}});
    offset += e.tensor->size() * sizeof(double);
  }
  header["tensors"] = tensors;
  const std::string header_text = header.dump();

  std::string out(kMagic, 4);
  put_u32(out, kCheckpointVersion);
  put_u64(out, header_text.size());
  out += header_text;
  out.reserve(out.size() + offset);
  for (const auto& e : entries) {
    for (double v : e.tensor->data()) put_u64(out, std::bit_cast<std::uint64_t>(v));
  }

  if (!path.parent_path().empty()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(fmt::format("cannot write checkpoint {}", path.string()));
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw Error(fmt::format("failed writing checkpoint {}", path.string()));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw CheckpointError(fmt::format("cannot open checkpoint {}", path.string()));
  const std::string in((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  const std::string where = path.string();

  if (in.size() < 16) throw CheckpointError(fmt::format("{}: truncated checkpoint (file too short)", where));
  if (std::memcmp(in.data(), kMagic, 4) != 0) throw CheckpointError(fmt::format("{}: not a checkpoint", where));
  const auto version = static_cast<std::uint32_t>(get_le(in, 4, 4));
  if (version != kCheckpointVersion) {
    throw CheckpointError(
        fmt::format("{}: unsupported checkpoint version {} (expected {})", where, version, kCheckpointVersion));
  }
  const std::uint64_t header_len = get_le(in, 8, 8);
  if (header_len > in.size() - 16) throw CheckpointError(fmt::format("{}: truncated checkpoint header", where));

  nlohmann::ordered_json header;
  try {
    header = nlohmann::ordered_json::parse(in.substr(16, header_len));
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(fmt::format("{}: corrupt checkpoint header: {}", where, e.what()));
  }

  Checkpoint ckpt;
  const std::size_t payload = 16 + header_len;
  try {
    ckpt.model = ModelConfig::from_json(nlohmann::json(header.at("model")));
    ckpt.task = parse_task(header.at("task").get<std::string>());
    ckpt.step = header.at("step").get<std::int64_t>();
    ckpt.train_config = header.at("train_config");
    const auto& adam = header.at("adam");
    ckpt.optimizer = Adam(AdamConfig{adam.at("beta1").get<double>(), adam.at("beta2").get<double>(),
                                     adam.at("eps").get<double>()});
    ckpt.optimizer.set_step_count(adam.at("step").get<std::int64_t>());

    std::size_t expected_end = payload;
    for (const auto& t : header.at("tensors")) {
      const auto name = t.at("name").get<std::string>();
      const auto offset = t.at("offset").get<std::size_t>();
      const auto shape = t.at("shape").get<Shape>();
      std::size_t count = 1;
      for (std::size_t extent : shape) {
        if (extent == 0 || count > in.size() / extent) {
          throw CheckpointError(fmt::format("{}: truncated checkpoint payload at tensor '{}'", where, name));
        }
        count *= extent;
      }
      const std::size_t begin = payload + offset;
      const std::size_t bytes = count * sizeof(double);
      if (shape.empty() || begin > in.size() || bytes > in.size() - begin) {
        throw CheckpointError(fmt::format("{}: truncated checkpoint payload at tensor '{}'", where, name));
      }
      Tensor value(shape);
      for (std::size_t i = 0; i < value.size(); ++i) {
        value[i] = std::bit_cast<double>(get_le(in, begin + i * sizeof(double), 8));
      }
      expected_end = std::max(expected_end, begin + bytes);
      if (name.rfind(kMomentM, 0) == 0) {
        ckpt.optimizer.moments()[name.substr(std::strlen(kMomentM))].m = std::move(value);
      } else if (name.rfind(kMomentV, 0) == 0) {
        ckpt.optimizer.moments()[name.substr(std::strlen(kMomentV))].v = std::move(value);
      } else {
        ckpt.params.add(name, std::move(value));
      }
    }
    if (expected_end != in.size()) {
      throw CheckpointError(fmt::format("{}: {} trailing bytes after the payload", where, in.size() - expected_end));
    }
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(fmt::format("{}: corrupt checkpoint header: {}", where, e.what()));
  } catch (const CheckpointError&) {
    throw;
  } catch (const Error& e) {
    throw CheckpointError(fmt::format("{}: corrupt checkpoint: {}", where, e.what()));
  }
  return ckpt;
}

void copy_params(const ParamStore& src, ParamStore& dst, const std::vector<std::string>& prefixes) {
  for (const Param* p : src.all()) {
    bool wanted = false;
    for (const auto& pre : prefixes) wanted = wanted || p->name.rfind(pre, 0) == 0;
    if (!wanted) continue;
    Param* target = dst.find(p->name);
    if (target == nullptr) {
      throw CheckpointError(fmt::format("checkpoint tensor '{}' does not exist in the model", p->name));
    }
    if (target->value.shape() != p->value.shape()) {
      throw CheckpointError(fmt::format("shape mismatch for tensor '{}': checkpoint {} vs model {}", p->name,
                                        shape_to_string(p->value.shape()), shape_to_string(target->value.shape())));
    }
    target->value = p->value;
  }
}

}  // namespace lxlab
