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
#include "brightsynth/image.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "brightsynth/errors.h"

namespace brightsynth {

BBox ClipBox(const BBox& box, int width, int height) {
  const double x0 = std::clamp(box.x, 0.0, static_cast<double>(width));
  const double y0 = std::clamp(box.y, 0.0, static_cast<double>(height));
  const double x1 = std::clamp(box.x + box.w, 0.0, static_cast<double>(width));
  const double y1 = std::clamp(box.y + box.h, 0.0, static_cast<double>(height));
  BBox out = box;
  out.x = x0;
  out.y = y0;
  out.w = std::max(0.0, x1 - x0);
  out.h = std::max(0.0, y1 - y0);
  return out;
}

void ClampInPlace(Image& image) {
  for (double& v : image.pixels) v = std::clamp(v, 0.0, 1.0);
}

namespace {

uint8_t ToByte(double v) {
  return static_cast<uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

}  // namespace

std::string EncodePgm(const Image& image) {
  std::string out = "P5\n" + std::to_string(image.width) + " " +
                    std::to_string(image.height) + "\n255\n";
  out.reserve(out.size() + image.size());
  for (double v : image.pixels) out.push_back(static_cast<char>(ToByte(v)));
  return out;
}

Image DecodePgm(const std::string& bytes) {
  std::istringstream in(bytes);
  std::string magic;
  in >> magic;
  if (magic != "P5") throw InputError("not a binary graymap (P5)");
  // Header tokens may be separated by comments.
  auto next_int = [&in]() {
    in >> std::ws;
    while (in.peek() == '#') {
      std::string comment;
      std::getline(in, comment);
      in >> std::ws;
    }
    long value = -1;
    in >> value;
    if (!in) throw InputError("truncated graymap header");
    return value;
  };
  const long w = next_int();
  const long h = next_int();
  const long maxval = next_int();
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 255) {
    throw InputError("unsupported graymap dimensions or maxval");
  }
  in.get();  // single whitespace after maxval
  Image image(static_cast<int>(w), static_cast<int>(h));
  std::string data(image.size(), '\0');
  in.read(data.data(), static_cast<std::streamsize>(data.size()));
  if (static_cast<size_t>(in.gcount()) != data.size()) {
    throw InputError("truncated graymap data");
  }
  for (size_t i = 0; i < data.size(); ++i) {
    image.pixels[i] =
        static_cast<double>(static_cast<uint8_t>(data[i])) / maxval;
  }
  return image;
}

void WritePgm(const std::filesystem::path& path, const Image& image) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  const std::string bytes = EncodePgm(image);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

Image ReadPgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return DecodePgm(buffer.str());
}

Image Quantize8(const Image& image) {
  Image out = image;
  for (double& v : out.pixels) v = ToByte(v) / 255.0;
  return out;
}

}  // namespace brightsynth
