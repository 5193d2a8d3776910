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
#ifndef BRIGHTSYNTH_NN_PARAMS_H_
#define BRIGHTSYNTH_NN_PARAMS_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "brightsynth/nn/tensor.h"

namespace brightsynth::nn {

// Named tensors in insertion order. Used for weights, gradients, optimizer
// moments and EMA shadows, which must all share one layout.
class ParamSet {
 public:
  Tensor& Add(const std::string& name, Tensor value);
  Tensor& at(std::string_view name);
  const Tensor& at(std::string_view name) const;
  bool contains(std::string_view name) const;

  size_t size() const { return entries_.size(); }
  size_t NumScalars() const;
  const std::vector<std::pair<std::string, Tensor>>& entries() const {
    return entries_;
  }
  std::vector<std::pair<std::string, Tensor>>& entries() { return entries_; }

  ParamSet ZerosLike() const;
  bool SameLayout(const ParamSet& other) const;
  bool AllFinite() const;
  void Scale(double factor);
  // this += factor * other; layouts must match.
  void AddScaled(const ParamSet& other, double factor);

  bool operator==(const ParamSet& other) const { return entries_ == other.entries_; }

 private:
  std::vector<std::pair<std::string, Tensor>> entries_;
  std::map<std::string, size_t, std::less<>> index_;
};

// Copies every tensor under `prefix + name`, or strips the prefix back off
// (keeping only matching names).
ParamSet WithPrefix(const ParamSet& params, const std::string& prefix);
ParamSet StripPrefix(const ParamSet& params, const std::string& prefix);

// Checkpoint file:
//   "brightsynth-checkpoint v1\n", then "key=value\n" metadata lines, then
//   "end\n", then u32 tensor count and per tensor: u32 name length, name
//   bytes, 4 x u32 dims (n,c,h,w), little-endian float32 data.
struct Checkpoint {
  std::vector<std::pair<std::string, std::string>> meta;
  ParamSet tensors;

  std::string Meta(const std::string& key, const std::string& fallback = "") const;
};

void WriteCheckpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint ReadCheckpoint(const std::filesystem::path& path);

// Rounds every value to float32 precision, i.e. what a checkpoint stores.
ParamSet RoundToFloat(const ParamSet& params);

}  // namespace brightsynth::nn

#endif  // BRIGHTSYNTH_NN_PARAMS_H_
