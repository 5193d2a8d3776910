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
#ifndef BRIGHTSYNTH_FID_H_
#define BRIGHTSYNTH_FID_H_

// Frechet distance between Gaussian fits of image features.
//
// The feature extractor is a fixed handcrafted 72-d descriptor, not an
// Inception network, so values are only comparable with each other and not
// with published FID numbers.

#include <Eigen/Dense>
#include <vector>

#include "brightsynth/image.h"

namespace brightsynth {

inline constexpr int kFeatureDim = 72;

// [0,64): 8x8 area-downsampled intensities, row-major
// [64]:   global mean
// [65]:   global standard deviation (population)
// [66,72): gradient-magnitude histogram fractions
Eigen::VectorXd Features(const Image& image);

// Upper edges of the first five gradient-magnitude bins; the sixth is open.
inline constexpr double kGradientBinEdges[5] = {0.01, 0.03, 0.06, 0.10, 0.20};

struct FeatureStats {
  Eigen::VectorXd mu;
  Eigen::MatrixXd sigma;
  int n = 0;
};

// Sample mean and unbiased covariance of feature vectors (n >= 2).
FeatureStats StatsFromFeatures(const std::vector<Eigen::VectorXd>& features);
FeatureStats GaussianStats(const std::vector<Image>& images);

// d^2 = |mu_a - mu_b|^2 + tr(Sa + Sb - 2 (Sa Sb)^(1/2)), with the trace of
// the square root taken from the eigenvalues of Sa^(1/2) Sb Sa^(1/2).
double FrechetDistance(const FeatureStats& a, const FeatureStats& b);

double Fid(const std::vector<Image>& a, const std::vector<Image>& b);

}  // namespace brightsynth

#endif  // BRIGHTSYNTH_FID_H_
