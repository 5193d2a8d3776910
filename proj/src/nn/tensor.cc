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
#include "brightsynth/nn/tensor.h"

#include <algorithm>

#include "brightsynth/errors.h"

namespace brightsynth::nn {

std::string Shape::str() const {
  return "[" + std::to_string(n) + "," + std::to_string(c) + "," +
         std::to_string(h) + "," + std::to_string(w) + "]";
}

void CheckSameShape(const Tensor& a, const Tensor& b, const char* what) {
  if (!(a.shape == b.shape)) {
    throw ShapeError(std::string(what) + ": " + a.shape.str() + " vs " +
                     b.shape.str());
  }
}

Tensor ImagesToBatch(const std::vector<Image>& images) {
  if (images.empty()) return Tensor(Shape{0, 1, 0, 0});
  const int w = images.front().width;
  const int h = images.front().height;
  Tensor batch(Shape{static_cast<int>(images.size()), 1, h, w});
  for (size_t i = 0; i < images.size(); ++i) {
    if (images[i].width != w || images[i].height != h) {
      throw ShapeError("batch images differ in size");
    }
    std::copy(images[i].pixels.begin(), images[i].pixels.end(),
              batch.plane(static_cast<int>(i), 0));
  }
  return batch;
}

std::vector<Image> BatchToImages(const Tensor& batch) {
  if (batch.shape.c != 1) throw ShapeError("expected single-channel batch");
  std::vector<Image> images;
  for (int i = 0; i < batch.shape.n; ++i) {
    Image img(batch.shape.w, batch.shape.h);
    std::copy(batch.plane(i, 0), batch.plane(i, 0) + batch.shape.plane(),
              img.pixels.begin());
    images.push_back(std::move(img));
  }
  return images;
}

}  // namespace brightsynth::nn
