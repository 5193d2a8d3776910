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
#ifndef BRIGHTSYNTH_AUTOLABEL_H_
#define BRIGHTSYNTH_AUTOLABEL_H_

// Fluorescence-driven auto-labeling and model-assisted draft labels.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "brightsynth/image.h"

namespace brightsynth {

struct DetectorModel;

struct Mask {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> bits;

  Mask() = default;
  Mask(int w, int h) : width(w), height(h), bits(static_cast<size_t>(w) * h, 0) {}
  uint8_t at(int x, int y) const { return bits[static_cast<size_t>(y) * width + x]; }
  uint8_t& at(int x, int y) { return bits[static_cast<size_t>(y) * width + x]; }
  size_t count() const;
};

struct BinarizeMethod {
  enum class Kind { kOtsu, kFixed };
  Kind kind = Kind::kOtsu;
  double tau = 0.5;

  static BinarizeMethod Otsu() { return {Kind::kOtsu, 0.0}; }
  static BinarizeMethod Fixed(double tau) { return {Kind::kFixed, tau}; }
};

// Histogram bin (of 256 over [0,1]) after which Otsu splits the classes.
int OtsuBin(const Image& image);

// mask = intensity > threshold. For Otsu the comparison is done on the
// 256-bin histogram index so that the split is exact.
Mask Binarize(const Image& image, BinarizeMethod method);

struct Region {
  // Linear pixel indices in discovery (BFS) order; the first is the
  // top-left-most pixel of the region in raster order.
  std::vector<int> pixels;
  int min_x = 0;
  int min_y = 0;
  int max_x = 0;
  int max_y = 0;

  size_t area() const { return pixels.size(); }
};

// 8-connected components, ordered by their first pixel in raster order.
std::vector<Region> ConnectedComponents(const Mask& mask);

// Tight (integer pixel) box per region whose pixel count is >= min_area.
std::vector<BBox> BoxesFromRegions(const std::vector<Region>& regions,
                                   double min_area);

inline constexpr double kDefaultMinArea = 9.0;

std::vector<BBox> AutolabelFluorescence(const Image& fluorescence,
                                        BinarizeMethod method = BinarizeMethod::Otsu(),
                                        double min_area = kDefaultMinArea);

enum class Provenance { kAutoFluorescence, kModelAssisted, kReviewed };
std::string_view ToString(Provenance provenance);

struct LabelRecord {
  std::string image_id;
  std::vector<BBox> boxes;
  Provenance provenance = Provenance::kAutoFluorescence;

  bool operator==(const LabelRecord&) const = default;
};

struct LabeledImage {
  std::string image_id;
  Image image;
};

// Draft labels from a trained detector: predictions with score strictly
// greater than conf_thresh. Throws ConfigError when model is null.
std::vector<LabelRecord> ModelAssistedLabel(const DetectorModel* model,
                                            const std::vector<LabeledImage>& images,
                                            double conf_thresh);

// Review file: one line per image, "<image_id>\t<x,y,w,h,score ...>".
std::string FormatReviewFile(const std::vector<LabelRecord>& records);
std::vector<LabelRecord> ParseReviewFile(const std::string& text);

// Replaces the box list of every record named in `edits` and marks all
// records reviewed. Edits for unknown ids are an InputError.
std::vector<LabelRecord> ApplyReview(std::vector<LabelRecord> records,
                                     const std::vector<LabelRecord>& edits);

}  // namespace brightsynth

#endif  // BRIGHTSYNTH_AUTOLABEL_H_
