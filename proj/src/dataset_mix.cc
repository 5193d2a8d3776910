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
#include "brightsynth/dataset_mix.h"

#include <cmath>
#include <numeric>

#include "brightsynth/errors.h"
#include "brightsynth/rng.h"

namespace brightsynth {

void MixSpec::Validate() const {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw ConfigError("mix fraction must lie in (0,1)");
  }
}

DatasetManifest SplitDataset(const DatasetManifest& real, int train_n, int val_n,
                             int test_n, uint64_t seed, const std::string& name) {
  if (train_n < 0 || val_n < 0 || test_n < 0) throw ConfigError("split sizes must be >= 0");
  const size_t need = static_cast<size_t>(train_n) + val_n + test_n;
  if (need > real.records.size()) {
    throw SizeError("split needs " + std::to_string(need) + " records, have " +
                    std::to_string(real.records.size()));
  }
  for (const ManifestRecord& r : real.records) {
    if (r.source != Source::kReal) throw InputError("split input must be real records");
  }
  std::vector<size_t> idx(real.records.size());
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed);
  rng.Shuffle(idx);
  DatasetManifest out{name, seed, {}};
  size_t k = 0;
  for (auto [split, n] : {std::pair{Split::kTrain, train_n}, std::pair{Split::kVal, val_n},
                          std::pair{Split::kTest, test_n}}) {
    for (int i = 0; i < n; ++i, ++k) {
      ManifestRecord r = real.records[idx[k]];
      r.split = split;
      out.records.push_back(std::move(r));
    }
  }
  return out;
}

int MixCount(int train_n, double fraction) {
  return static_cast<int>(std::lround(fraction * train_n));
}

namespace {

// Draws k synthetic records (as train) from the pool.
std::vector<ManifestRecord> DrawSynthetic(const std::vector<ManifestRecord>& pool, int k,
                                          Rng& rng) {
  if (static_cast<size_t>(k) > pool.size()) {
    throw SizeError("mix needs " + std::to_string(k) + " synthetic records, pool has " +
                    std::to_string(pool.size()));
  }
  std::vector<size_t> idx(pool.size());
  std::iota(idx.begin(), idx.end(), 0);
  rng.Shuffle(idx);
  std::vector<ManifestRecord> out;
  for (int i = 0; i < k; ++i) {
    ManifestRecord r = pool[idx[i]];
    if (r.source != Source::kSynthetic) throw InputError("synthetic pool holds a real record");
    r.split = Split::kTrain;
    out.push_back(std::move(r));
  }
  return out;
}

DatasetManifest Assemble(const DatasetManifest& base, const std::string& name, uint64_t seed,
                         std::vector<ManifestRecord> train) {
  DatasetManifest out{name, seed, std::move(train)};
  for (Split s : {Split::kVal, Split::kTest}) {
    for (ManifestRecord& r : base.RecordsIn(s)) out.records.push_back(std::move(r));
  }
  return out;
}

}  // namespace

DatasetManifest MakeReplacement(const DatasetManifest& base,
                                const std::vector<ManifestRecord>& synth_pool,
                                const MixSpec& spec) {
  spec.Validate();
  const std::vector<ManifestRecord> train = base.RecordsIn(Split::kTrain);
  const int k = MixCount(static_cast<int>(train.size()), spec.fraction);
  Rng rng(spec.seed);
  std::vector<ManifestRecord> synth = DrawSynthetic(synth_pool, k, rng);
  std::vector<size_t> idx(train.size());
  std::iota(idx.begin(), idx.end(), 0);
  rng.Shuffle(idx);
  std::vector<bool> removed(train.size(), false);
  for (int i = 0; i < k; ++i) removed[idx[i]] = true;
  std::vector<ManifestRecord> out;
  for (size_t i = 0; i < train.size(); ++i) {
    if (!removed[i]) out.push_back(train[i]);
  }
  for (ManifestRecord& r : synth) out.push_back(std::move(r));
  return Assemble(base, MixName(spec), spec.seed, std::move(out));
}

DatasetManifest MakeAddition(const DatasetManifest& base,
                             const std::vector<ManifestRecord>& synth_pool,
                             const MixSpec& spec) {
  spec.Validate();
  std::vector<ManifestRecord> train = base.RecordsIn(Split::kTrain);
  const int k = MixCount(static_cast<int>(train.size()), spec.fraction);
  Rng rng(spec.seed);
  for (ManifestRecord& r : DrawSynthetic(synth_pool, k, rng)) train.push_back(std::move(r));
  return Assemble(base, MixName(spec), spec.seed, std::move(train));
}

DatasetManifest MakeMix(const DatasetManifest& base,
                        const std::vector<ManifestRecord>& synth_pool, const MixSpec& spec) {
  return spec.mode == MixMode::kReplace ? MakeReplacement(base, synth_pool, spec)
                                        : MakeAddition(base, synth_pool, spec);
}

std::string MixName(const MixSpec& spec) {
  const long pct = std::lround(spec.fraction * 100.0);
  return std::string(spec.mode == MixMode::kReplace ? "scc_" : "scc_add_") +
         std::to_string(pct);
}

std::vector<DatasetManifest> BuildExperimentDatasets(
    const DatasetManifest& base, const std::vector<ManifestRecord>& synth_pool,
    uint64_t seed) {
  std::vector<DatasetManifest> out{base};
  out[0].name = "scc_real";
  uint64_t stream = 0;
  for (MixMode mode : {MixMode::kReplace, MixMode::kAdd}) {
    for (double f : {0.10, 0.30, 0.50}) {
      out.push_back(MakeMix(base, synth_pool, {mode, f, DeriveSeed(seed, stream++)}));
    }
  }
  return out;
}

std::string SerializeSplit(const DatasetManifest& manifest, Split split,
                           const std::filesystem::path& base_dir) {
  std::string out;
  for (const ManifestRecord& r : manifest.RecordsIn(split)) {
    out += FormatRecord(r, base_dir);
    out += '\n';
  }
  return out;
}

}  // namespace brightsynth
