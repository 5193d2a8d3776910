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
#include "brightsynth/patchify.h"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "brightsynth/autolabel.h"

namespace brightsynth {

std::vector<PatchRecord> ExtractPatches(const Image& image, int patch_size,
                                        const std::string& source_id) {
  if (patch_size < 1) throw ConfigError("patch_size must be >= 1");
  std::vector<PatchRecord> patches;
  const int nx = image.width / patch_size;
  const int ny = image.height / patch_size;
  for (int py = 0; py < ny; ++py) {
    for (int px = 0; px < nx; ++px) {
      PatchRecord rec;
      rec.source_id = source_id;
      rec.x = px * patch_size;
      rec.y = py * patch_size;
      rec.patch = Image(patch_size, patch_size);
      for (int y = 0; y < patch_size; ++y) {
        const double* row = &image.pixels[static_cast<size_t>(rec.y + y) *
                                              image.width + rec.x];
        std::copy(row, row + patch_size,
                  &rec.patch.pixels[static_cast<size_t>(y) * patch_size]);
      }
      patches.push_back(std::move(rec));
    }
  }
  return patches;
}

WellEdgeResult DetectWellEdge(const Image& patch, double dark_thresh,
                              double area_frac) {
  if (!(dark_thresh >= 0.0 && dark_thresh <= 1.0)) {
    throw ConfigError("dark_thresh must lie in [0,1]");
  }
  if (!(area_frac > 0.0 && area_frac <= 1.0)) {
    throw ConfigError("area_frac must lie in (0,1]");
  }
  WellEdgeResult result;
  if (patch.empty()) return result;
  Mask dark(patch.width, patch.height);
  for (size_t i = 0; i < patch.size(); ++i) {
    dark.bits[i] = patch.pixels[i] < dark_thresh ? 1 : 0;
  }
  size_t largest = 0;
  for (const Region& region : ConnectedComponents(dark)) {
    const bool touches = region.min_x == 0 || region.min_y == 0 ||
                         region.max_x == patch.width - 1 ||
                         region.max_y == patch.height - 1;
    if (touches) largest = std::max(largest, region.area());
  }
  result.score = static_cast<double>(largest) / static_cast<double>(patch.size());
  result.flag = result.score >= area_frac;
  return result;
}

std::string FormatPatchManifest(const std::vector<PatchManifestEntry>& entries) {
  std::ostringstream out;
  out << "# brightsynth patches v1\n";
  for (const auto& e : entries) {
    char score[32];
    std::snprintf(score, sizeof(score), "%.6f", e.score);
    out << e.source_id << '\t' << e.x << '\t' << e.y << '\t' << (e.flag ? 1 : 0)
        << '\t' << score << '\t' << e.patch_ref << '\n';
  }
  return out.str();
}

}  // namespace brightsynth
