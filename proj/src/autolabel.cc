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
#include "brightsynth/autolabel.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <sstream>

#include "brightsynth/detector.h"
#include "brightsynth/errors.h"
#include "brightsynth/manifest.h"

namespace brightsynth {

size_t Mask::count() const {
  return static_cast<size_t>(std::count(bits.begin(), bits.end(), 1));
}

namespace {

int HistBin(double v) {
  return std::clamp(static_cast<int>(std::floor(v * 256.0)), 0, 255);
}

}  // namespace

int OtsuBin(const Image& image) {
  std::array<double, 256> hist{};
  for (double v : image.pixels) hist[HistBin(v)] += 1.0;
  const double total = static_cast<double>(image.size());
  double sum_all = 0.0;
  for (int i = 0; i < 256; ++i) sum_all += i * hist[i];

  double weight_lo = 0.0;
  double sum_lo = 0.0;
  double best = -1.0;
  int best_bin = 0;
  for (int t = 0; t < 255; ++t) {
    weight_lo += hist[t];
    sum_lo += t * hist[t];
    const double weight_hi = total - weight_lo;
    if (weight_lo == 0.0 || weight_hi == 0.0) continue;
    const double mean_lo = sum_lo / weight_lo;
    const double mean_hi = (sum_all - sum_lo) / weight_hi;
    const double between =
        weight_lo * weight_hi * (mean_lo - mean_hi) * (mean_lo - mean_hi);
    if (between > best) {
      best = between;
      best_bin = t;
    }
  }
  return best_bin;
}

Mask Binarize(const Image& image, BinarizeMethod method) {
  Mask mask(image.width, image.height);
  if (method.kind == BinarizeMethod::Kind::kOtsu) {
    const int split = OtsuBin(image);
    for (size_t i = 0; i < image.size(); ++i) {
      mask.bits[i] = HistBin(image.pixels[i]) > split ? 1 : 0;
    }
  } else {
    if (!(method.tau >= 0.0 && method.tau <= 1.0)) {
      throw ConfigError("fixed threshold must lie in [0,1]");
    }
    for (size_t i = 0; i < image.size(); ++i) {
      mask.bits[i] = image.pixels[i] > method.tau ? 1 : 0;
    }
  }
  return mask;
}

std::vector<Region> ConnectedComponents(const Mask& mask) {
  std::vector<Region> regions;
  std::vector<uint8_t> seen(mask.bits.size(), 0);
  const int w = mask.width;
  const int h = mask.height;
  for (int start = 0; start < w * h; ++start) {
    if (!mask.bits[start] || seen[start]) continue;
    Region region;
    region.min_x = region.max_x = start % w;
    region.min_y = region.max_y = start / w;
    seen[start] = 1;
    region.pixels.push_back(start);
    for (size_t head = 0; head < region.pixels.size(); ++head) {
      const int p = region.pixels[head];
      const int px = p % w;
      const int py = p / w;
      region.min_x = std::min(region.min_x, px);
      region.max_x = std::max(region.max_x, px);
      region.min_y = std::min(region.min_y, py);
      region.max_y = std::max(region.max_y, py);
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int nx = px + dx;
          const int ny = py + dy;
          if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
          const int q = ny * w + nx;
          if (mask.bits[q] && !seen[q]) {
            seen[q] = 1;
            region.pixels.push_back(q);
          }
        }
      }
    }
    regions.push_back(std::move(region));
  }
  return regions;
}

std::vector<BBox> BoxesFromRegions(const std::vector<Region>& regions,
                                   double min_area) {
  if (min_area < 0) throw ConfigError("min_area must be >= 0");
  std::vector<BBox> boxes;
  for (const Region& r : regions) {
    if (static_cast<double>(r.area()) < min_area) continue;
    boxes.push_back(BBox{static_cast<double>(r.min_x),
                         static_cast<double>(r.min_y),
                         static_cast<double>(r.max_x - r.min_x + 1),
                         static_cast<double>(r.max_y - r.min_y + 1),
                         std::nullopt});
  }
  return boxes;
}

std::vector<BBox> AutolabelFluorescence(const Image& fluorescence,
                                        BinarizeMethod method,
                                        double min_area) {
  return BoxesFromRegions(ConnectedComponents(Binarize(fluorescence, method)),
                          min_area);
}

std::string_view ToString(Provenance provenance) {
  switch (provenance) {
    case Provenance::kModelAssisted:
      return "model_assisted";
    case Provenance::kReviewed:
      return "reviewed";
    case Provenance::kAutoFluorescence:
      break;
  }
  return "auto_fluorescence";
}

std::vector<LabelRecord> ModelAssistedLabel(
    const DetectorModel* model, const std::vector<LabeledImage>& images,
    double conf_thresh) {
  if (model == nullptr) {
    throw ConfigError("model-assisted labeling needs a trained detector");
  }
  std::vector<LabelRecord> drafts;
  for (const auto& item : images) {
    LabelRecord record;
    record.image_id = item.image_id;
    record.provenance = Provenance::kModelAssisted;
    // Candidates at or below the threshold never become drafts.
    const Prediction pred = Detect(*model, item.image, 0.0, model->config.nms_iou);
    for (const BBox& box : pred.boxes) {
      if (box.score.value_or(0.0) > conf_thresh) record.boxes.push_back(box);
    }
    drafts.push_back(std::move(record));
  }
  return drafts;
}

std::string FormatReviewFile(const std::vector<LabelRecord>& records) {
  std::ostringstream out;
  for (const auto& r : records) {
    out << r.image_id << '\t' << FormatBoxes(r.boxes) << '\n';
  }
  return out.str();
}

std::vector<LabelRecord> ParseReviewFile(const std::string& text) {
  std::vector<LabelRecord> records;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    LabelRecord record;
    record.image_id = line.substr(0, tab);
    if (tab != std::string::npos) record.boxes = ParseBoxes(line.substr(tab + 1));
    record.provenance = Provenance::kReviewed;
    records.push_back(std::move(record));
  }
  return records;
}

std::vector<LabelRecord> ApplyReview(std::vector<LabelRecord> records,
                                     const std::vector<LabelRecord>& edits) {
  std::map<std::string, size_t> index;
  for (size_t i = 0; i < records.size(); ++i) index[records[i].image_id] = i;
  for (const auto& edit : edits) {
    auto it = index.find(edit.image_id);
    if (it == index.end()) {
      throw InputError("review names unknown image '" + edit.image_id + "'");
    }
    records[it->second].boxes = edit.boxes;
  }
  for (auto& r : records) r.provenance = Provenance::kReviewed;
  return records;
}

}  // namespace brightsynth
