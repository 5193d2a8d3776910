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
#ifndef BRIGHTSYNTH_NN_TENSOR_H_
#define BRIGHTSYNTH_NN_TENSOR_H_

#include <string>
#include <vector>

#include <Eigen/Core>

#include "brightsynth/image.h"

namespace brightsynth::nn {

// Storage aligned for the widest SIMD width Eigen was built for, so that
// vectorized reductions split their work the same way on every run.
using Buffer = std::vector<double, Eigen::aligned_allocator<double>>;

// NCHW. Vectors and matrices use the trailing dimensions with h = w = 1.
struct Shape {
  int n = 1;
  int c = 1;
  int h = 1;
  int w = 1;

  size_t numel() const {
    return static_cast<size_t>(n) * c * static_cast<size_t>(h) * w;
  }
  size_t plane() const { return static_cast<size_t>(h) * w; }
  std::string str() const;
  bool operator==(const Shape&) const = default;
};

struct Tensor {
  Shape shape;
  Buffer data;

  Tensor() = default;
  explicit Tensor(Shape s, double fill = 0.0) : shape(s), data(s.numel(), fill) {}

  size_t size() const { return data.size(); }
  double& operator[](size_t i) { return data[i]; }
  double operator[](size_t i) const { return data[i]; }
  double& at(int n, int c, int y, int x) {
    return data[((static_cast<size_t>(n) * shape.c + c) * shape.h + y) * shape.w + x];
  }
  double at(int n, int c, int y, int x) const {
    return data[((static_cast<size_t>(n) * shape.c + c) * shape.h + y) * shape.w + x];
  }
  // Pointer to the (n, c) plane.
  double* plane(int n, int c) {
    return data.data() + (static_cast<size_t>(n) * shape.c + c) * shape.plane();
  }
  const double* plane(int n, int c) const {
    return data.data() + (static_cast<size_t>(n) * shape.c + c) * shape.plane();
  }

  bool operator==(const Tensor&) const = default;
};

// Throws ShapeError unless a and b have identical shapes.
void CheckSameShape(const Tensor& a, const Tensor& b, const char* what);

// [N,1,H,W] batch from equally sized images.
Tensor ImagesToBatch(const std::vector<Image>& images);
std::vector<Image> BatchToImages(const Tensor& batch);

}  // namespace brightsynth::nn

#endif  // BRIGHTSYNTH_NN_TENSOR_H_
