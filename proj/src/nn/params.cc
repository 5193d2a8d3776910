// Copyright 2026 The Brightsynth Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "brightsynth/nn/params.h"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "brightsynth/errors.h"

namespace brightsynth::nn {

namespace fs = std::filesystem;

Tensor& ParamSet::Add(const std::string& name, Tensor value) {
  if (contains(name)) throw ConfigError("duplicate parameter '" + name + "'");
  index_.emplace(name, entries_.size());
  entries_.emplace_back(name, std::move(value));
  return entries_.back().second;
}

Tensor& ParamSet::at(std::string_view name) {
  auto it = index_.find(name);
  if (it == index_.end()) {
    throw ConfigError("unknown parameter '" + std::string(name) + "'");
  }
  return entries_[it->second].second;
}

const Tensor& ParamSet::at(std::string_view name) const {
  return const_cast<ParamSet*>(this)->at(name);
}

bool ParamSet::contains(std::string_view name) const {
  return index_.find(name) != index_.end();
}

size_t ParamSet::NumScalars() const {
  size_t n = 0;
  for (const auto& [name, t] : entries_) n += t.size();
  return n;
}

ParamSet ParamSet::ZerosLike() const {
  ParamSet out;
  for (const auto& [name, t] : entries_) out.Add(name, Tensor(t.shape));
  return out;
}

bool ParamSet::SameLayout(const ParamSet& other) const {
  if (entries_.size() != other.entries_.size()) return false;
  for (size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].first != other.entries_[i].first ||
        !(entries_[i].second.shape == other.entries_[i].second.shape)) {
      return false;
    }
  }
  return true;
}

bool ParamSet::AllFinite() const {
  for (const auto& [name, t] : entries_) {
    for (double v : t.data) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

void ParamSet::Scale(double factor) {
  for (auto& [name, t] : entries_) {
    for (double& v : t.data) v *= factor;
  }
}

void ParamSet::AddScaled(const ParamSet& other, double factor) {
  if (!SameLayout(other)) throw ShapeError("parameter layouts differ");
  for (size_t i = 0; i < entries_.size(); ++i) {
    auto& dst = entries_[i].second.data;
    const auto& src = other.entries_[i].second.data;
    for (size_t k = 0; k < dst.size(); ++k) dst[k] += factor * src[k];
  }
}

ParamSet WithPrefix(const ParamSet& params, const std::string& prefix) {
  ParamSet out;
  for (const auto& [name, t] : params.entries()) out.Add(prefix + name, t);
  return out;
}

ParamSet StripPrefix(const ParamSet& params, const std::string& prefix) {
  ParamSet out;
  for (const auto& [name, t] : params.entries()) {
    if (name.rfind(prefix, 0) == 0) out.Add(name.substr(prefix.size()), t);
  }
  return out;
}

std::string Checkpoint::Meta(const std::string& key,
                             const std::string& fallback) const {
  for (const auto& [k, v] : meta) {
    if (k == key) return v;
  }
  return fallback;
}

namespace {

constexpr char kMagic[] = "brightsynth-checkpoint v1";

void PutU32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

uint32_t GetU32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw InputError("truncated checkpoint");
  return b[0] | (b[1] << 8) | (b[2] << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

}  // namespace

void WriteCheckpoint(const fs::path& path, const Checkpoint& ckpt) {
  std::string out = std::string(kMagic) + "\n";
  for (const auto& [k, v] : ckpt.meta) {
    if (k.find('=') != std::string::npos || k.find('\n') != std::string::npos ||
        v.find('\n') != std::string::npos) {
      throw InputError("checkpoint metadata must be single-line key=value");
    }
    out += k + "=" + v + "\n";
  }
  out += "end\n";
  PutU32(out, static_cast<uint32_t>(ckpt.tensors.size()));
  for (const auto& [name, t] : ckpt.tensors.entries()) {
    PutU32(out, static_cast<uint32_t>(name.size()));
    out += name;
    PutU32(out, static_cast<uint32_t>(t.shape.n));
    PutU32(out, static_cast<uint32_t>(t.shape.c));
    PutU32(out, static_cast<uint32_t>(t.shape.h));
    PutU32(out, static_cast<uint32_t>(t.shape.w));
    for (double v : t.data) PutU32(out, std::bit_cast<uint32_t>(static_cast<float>(v)));
  }
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError("cannot open " + path.string() + " for writing");
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) throw IoError("failed writing " + path.string());
}

Checkpoint ReadCheckpoint(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  if (line != kMagic) throw InputError(path.string() + " is not a checkpoint");
  Checkpoint ckpt;
  while (std::getline(in, line) && line != "end") {
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw InputError("bad checkpoint metadata line");
    ckpt.meta.emplace_back(line.substr(0, eq), line.substr(eq + 1));
  }
  if (line != "end") throw InputError("truncated checkpoint header");
  const uint32_t count = GetU32(in);
  for (uint32_t i = 0; i < count; ++i) {
    const uint32_t len = GetU32(in);
    std::string name(len, '\0');
    in.read(name.data(), len);
    Shape s;
    s.n = static_cast<int>(GetU32(in));
    s.c = static_cast<int>(GetU32(in));
    s.h = static_cast<int>(GetU32(in));
    s.w = static_cast<int>(GetU32(in));
    Tensor t(s);
    for (double& v : t.data) v = std::bit_cast<float>(GetU32(in));
    ckpt.tensors.Add(name, std::move(t));
  }
  return ckpt;
}

ParamSet RoundToFloat(const ParamSet& params) {
  ParamSet out = params;
  for (auto& [name, t] : out.entries()) {
    for (double& v : t.data) v = static_cast<float>(v);
  }
  return out;
}

}  // namespace brightsynth::nn
