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
#include "brightsynth/fid.h"

#include <algorithm>
#include <cmath>

#include "brightsynth/errors.h"

namespace brightsynth {

namespace {

// Overlap of the unit pixel [p, p+1) with [lo, hi).
double Overlap(int p, double lo, double hi) {
  return std::max(0.0, std::min(p + 1.0, hi) - std::max(static_cast<double>(p), lo));
}

Eigen::MatrixXd SymmetricSqrt(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(0.5 * (m + m.transpose()));
  Eigen::VectorXd roots = solver.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return solver.eigenvectors() * roots.asDiagonal() *
         solver.eigenvectors().transpose();
}

}  // namespace

Eigen::VectorXd Features(const Image& image) {
  if (image.empty()) throw ShapeError("features of an empty image");
  Eigen::VectorXd f = Eigen::VectorXd::Zero(kFeatureDim);
  const int w = image.width;
  const int h = image.height;

  const double cell_w = w / 8.0;
  const double cell_h = h / 8.0;
  for (int gy = 0; gy < 8; ++gy) {
    const double y0 = gy * cell_h;
    const double y1 = (gy + 1) * cell_h;
    for (int gx = 0; gx < 8; ++gx) {
      const double x0 = gx * cell_w;
      const double x1 = (gx + 1) * cell_w;
      double acc = 0.0;
      double weight = 0.0;
      for (int y = static_cast<int>(std::floor(y0)); y < std::min(h, static_cast<int>(std::ceil(y1))); ++y) {
        const double wy = Overlap(y, y0, y1);
        for (int x = static_cast<int>(std::floor(x0)); x < std::min(w, static_cast<int>(std::ceil(x1))); ++x) {
          const double wxy = wy * Overlap(x, x0, x1);
          acc += wxy * image.at(x, y);
          weight += wxy;
        }
      }
      f[gy * 8 + gx] = acc / weight;
    }
  }

  double sum = 0.0;
  for (double v : image.pixels) sum += v;
  const double mean = sum / static_cast<double>(image.size());
  double ss = 0.0;
  for (double v : image.pixels) ss += (v - mean) * (v - mean);
  f[64] = mean;
  f[65] = std::sqrt(ss / static_cast<double>(image.size()));

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double gx = 0.5 * (image.at(std::min(w - 1, x + 1), y) -
                               image.at(std::max(0, x - 1), y));
      const double gy = 0.5 * (image.at(x, std::min(h - 1, y + 1)) -
                               image.at(x, std::max(0, y - 1)));
      const double mag = std::sqrt(gx * gx + gy * gy);
      int bin = 0;
      while (bin < 5 && mag >= kGradientBinEdges[bin]) ++bin;
      f[66 + bin] += 1.0;
    }
  }
  for (int b = 66; b < 72; ++b) f[b] /= static_cast<double>(image.size());
  return f;
}

FeatureStats StatsFromFeatures(const std::vector<Eigen::VectorXd>& features) {
  if (features.size() < 2) {
    throw SizeError("Gaussian statistics need at least 2 samples");
  }
  const Eigen::Index d = features.front().size();
  FeatureStats stats;
  stats.n = static_cast<int>(features.size());
  stats.mu = Eigen::VectorXd::Zero(d);
  for (const auto& f : features) {
    if (f.size() != d) throw ShapeError("feature dimensions differ");
    stats.mu += f;
  }
  stats.mu /= static_cast<double>(stats.n);
  stats.sigma = Eigen::MatrixXd::Zero(d, d);
  for (const auto& f : features) {
    const Eigen::VectorXd c = f - stats.mu;
    stats.sigma.noalias() += c * c.transpose();
  }
  stats.sigma /= static_cast<double>(stats.n - 1);
  return stats;
}

FeatureStats GaussianStats(const std::vector<Image>& images) {
  if (images.size() < 2) {
    throw SizeError("Gaussian statistics need at least 2 images");
  }
  std::vector<Eigen::VectorXd> features;
  features.reserve(images.size());
  for (const auto& img : images) features.push_back(Features(img));
  return StatsFromFeatures(features);
}

double FrechetDistance(const FeatureStats& a, const FeatureStats& b) {
  if (a.mu.size() != b.mu.size() || a.sigma.rows() != b.sigma.rows()) {
    throw ShapeError("feature dimension mismatch in Frechet distance");
  }
  const double mean_term = (a.mu - b.mu).squaredNorm();
  const Eigen::MatrixXd sa = SymmetricSqrt(a.sigma);
  const Eigen::MatrixXd product = sa * b.sigma * sa;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
      0.5 * (product + product.transpose()), Eigen::EigenvaluesOnly);
  const double cross = solver.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  const double d2 = mean_term + a.sigma.trace() + b.sigma.trace() - 2.0 * cross;
  return std::max(0.0, d2);
}

double Fid(const std::vector<Image>& a, const std::vector<Image>& b) {
  return FrechetDistance(GaussianStats(a), GaussianStats(b));
}

}  // namespace brightsynth
