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
#ifndef BRIGHTSYNTH_DATASET_MIX_H_
#define BRIGHTSYNTH_DATASET_MIX_H_

// Builders for the real baseline and the replacement / addition mixes.
// Records are kept in split order (train, val, test), so the val and test
// blocks of every mix serialize identically to the baseline's.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "brightsynth/manifest.h"

namespace brightsynth {

enum class MixMode { kReplace, kAdd };

struct MixSpec {
  MixMode mode = MixMode::kReplace;
  double fraction = 0.3;
  uint64_t seed = 1;

  void Validate() const;
};

// Shuffles the real records and assigns the first train_n / val_n / test_n
// to the three splits; leftovers are dropped.
DatasetManifest SplitDataset(const DatasetManifest& real, int train_n, int val_n,
                             int test_n, uint64_t seed,
                             const std::string& name = "scc_real");

// round(fraction * train) as an integer count.
int MixCount(int train_n, double fraction);

// Swaps MixCount randomly chosen real train records for synthetic ones.
DatasetManifest MakeReplacement(const DatasetManifest& base,
                                const std::vector<ManifestRecord>& synth_pool,
                                const MixSpec& spec);
// Appends MixCount synthetic records to the unchanged real train records.
DatasetManifest MakeAddition(const DatasetManifest& base,
                             const std::vector<ManifestRecord>& synth_pool,
                             const MixSpec& spec);
DatasetManifest MakeMix(const DatasetManifest& base,
                        const std::vector<ManifestRecord>& synth_pool,
                        const MixSpec& spec);

// scc_10 / scc_30 / scc_50 for replacement, scc_add_* for addition.
std::string MixName(const MixSpec& spec);

// The baseline followed by the six mixes at 10%, 30% and 50%.
std::vector<DatasetManifest> BuildExperimentDatasets(
    const DatasetManifest& base, const std::vector<ManifestRecord>& synth_pool,
    uint64_t seed);

// Serialized records of one split only (no header).
std::string SerializeSplit(const DatasetManifest& manifest, Split split,
                           const std::filesystem::path& base_dir);

}  // namespace brightsynth

#endif  // BRIGHTSYNTH_DATASET_MIX_H_
