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
#ifndef BRIGHTSYNTH_IMAGE_H_
#define BRIGHTSYNTH_IMAGE_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace brightsynth {

// Single-channel intensity grid, row-major, nominal range [0,1].
struct Image {
  int width = 0;
  int height = 0;
  std::vector<double> pixels;

  Image() = default;
  Image(int w, int h, double fill = 0.0)
      : width(w), height(h), pixels(static_cast<size_t>(w) * h, fill) {}

  double& at(int x, int y) { return pixels[static_cast<size_t>(y) * width + x]; }
  double at(int x, int y) const {
    return pixels[static_cast<size_t>(y) * width + x];
  }
  bool empty() const { return pixels.empty(); }
  size_t size() const { return pixels.size(); }

  bool operator==(const Image&) const = default;
};

// Axis-aligned box in pixel units; (x, y) is the top-left corner.
struct BBox {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;
  std::optional<double> score;

  double area() const { return w * h; }
  double cx() const { return x + 0.5 * w; }
  double cy() const { return y + 0.5 * h; }

  bool operator==(const BBox&) const = default;
};

// Clips a box to [0,width]x[0,height]; boxes fully outside collapse to w=h=0.
BBox ClipBox(const BBox& box, int width, int height);

// Binary portable graymap (P5), maxval 255. Values are clamped to [0,1] and
// rounded to the nearest 8-bit level on write.
void WritePgm(const std::filesystem::path& path, const Image& image);
Image ReadPgm(const std::filesystem::path& path);
std::string EncodePgm(const Image& image);
Image DecodePgm(const std::string& bytes);

// Round-trips through 8-bit storage, i.e. the values a P5 reader would see.
Image Quantize8(const Image& image);

void ClampInPlace(Image& image);

}  // namespace brightsynth

#endif  // BRIGHTSYNTH_IMAGE_H_
