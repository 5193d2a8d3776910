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
#ifndef BRIGHTSYNTH_PHANTOM_H_
#define BRIGHTSYNTH_PHANTOM_H_

// Procedural brightfield/fluorescence cell phantoms with exact boxes.

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "brightsynth/image.h"
#include "brightsynth/manifest.h"

namespace brightsynth {

struct PhantomConfig {
  int width = 64;
  int height = 64;
  std::pair<int, int> cell_count_range{2, 5};
  std::pair<double, double> radius_range{5.0, 8.0};
  // Ratio of major to minor semi-axis.
  std::pair<double, double> eccentricity_range{1.0, 1.5};
  double rim_darkness = 0.55;
  double interior_brightness = 0.68;
  double halo_width = 2.0;
  double background_level = 0.5;
  double noise_sigma = 0.02;
  bool overlap_allowed = false;
  uint64_t seed = 1;

  // Throws ConfigError when a range is inverted or an intensity is outside
  // [0,1].
  void Validate() const;
};

// Config used by the desk-scale experiment: 32x32 frames, 1-3 cells.
PhantomConfig DeskPhantomConfig();

struct CellParams {
  double cx = 0.0;
  double cy = 0.0;
  double semi_major = 0.0;
  double semi_minor = 0.0;
  double angle = 0.0;  // radians, major axis vs +x

  bool operator==(const CellParams&) const = default;
};

struct PhantomSample {
  Image brightfield;
  Image fluorescence;
  std::vector<BBox> boxes;
  std::vector<CellParams> cells;

  bool operator==(const PhantomSample&) const = default;
};

// Tight axis-aligned extent of a rotated ellipse, clipped to the frame.
BBox EllipseBounds(const CellParams& cell, int width, int height);

// Approximate signed distance (pixels, negative inside) from (px, py) to the
// ellipse boundary.
double EllipseSignedDistance(const CellParams& cell, double px, double py);

PhantomSample GenerateSample(const PhantomConfig& config, uint64_t seed);

struct WellEdgeArc {
  double cx = 0.0;
  double cy = 0.0;
  double radius = 1.0;
  double thickness = 1.0;
  double darkness = 1.0;
};

// Multiplies pixels within `thickness` of the circle by (1 - darkness).
Image AddWellEdge(const Image& image, const WellEdgeArc& arc);

// Writes bf_NNNNN.pgm / fl_NNNNN.pgm plus brightfield.manifest and
// fluorescence.manifest (same record order, ground-truth boxes) into out_dir.
// Sample i uses DeriveSeed(config.seed, i).
struct PhantomDataset {
  DatasetManifest brightfield;
  DatasetManifest fluorescence;
};
PhantomDataset GenerateDataset(const PhantomConfig& config, int n,
                               const std::filesystem::path& out_dir);

}  // namespace brightsynth

#endif  // BRIGHTSYNTH_PHANTOM_H_
