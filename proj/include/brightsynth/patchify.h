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
#ifndef BRIGHTSYNTH_PATCHIFY_H_
#define BRIGHTSYNTH_PATCHIFY_H_

#include <cstdint>
#include <string>
#include <vector>

#include "brightsynth/errors.h"
#include "brightsynth/image.h"
#include "brightsynth/rng.h"

namespace brightsynth {

struct PatchRecord {
  std::string source_id;
  int x = 0;  // offset of the patch's top-left corner in the source
  int y = 0;
  Image patch;
};

// Non-overlapping tiles from the origin; trailing rows/columns that do not
// fill a whole patch are dropped. patch_size larger than the image yields
// an empty list.
std::vector<PatchRecord> ExtractPatches(const Image& image, int patch_size,
                                        const std::string& source_id = "");

struct WellEdgeResult {
  bool flag = false;
  // Fraction of the patch covered by the largest dark (< dark_thresh),
  // 8-connected region that touches the patch border.
  double score = 0.0;
};

inline constexpr double kDefaultDarkThresh = 0.2;
inline constexpr double kDefaultEdgeAreaFrac = 0.05;

WellEdgeResult DetectWellEdge(const Image& patch,
                              double dark_thresh = kDefaultDarkThresh,
                              double area_frac = kDefaultEdgeAreaFrac);

// Uniform sample of k items without replacement, in shuffled order.
template <typename T>
std::vector<T> SampleFiltered(const std::vector<T>& pool, size_t k,
                              uint64_t seed) {
  if (k > pool.size()) {
    throw SizeError("requested " + std::to_string(k) + " items from a pool of " +
                    std::to_string(pool.size()));
  }
  std::vector<size_t> order(pool.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  rng.Shuffle(order);
  std::vector<T> out;
  out.reserve(k);
  for (size_t i = 0; i < k; ++i) out.push_back(pool[order[i]]);
  return out;
}

struct PatchManifestEntry {
  std::string source_id;
  int x = 0;
  int y = 0;
  bool flag = false;
  double score = 0.0;
  std::string patch_ref;  // written patch file, empty when not exported
};

// Tab-separated: source_id, x, y, flag (0/1), score, patch_ref.
std::string FormatPatchManifest(const std::vector<PatchManifestEntry>& entries);

}  // namespace brightsynth

#endif  // BRIGHTSYNTH_PATCHIFY_H_
