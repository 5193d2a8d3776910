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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "brightsynth/errors.h"
#include "brightsynth/phantom.h"
#include "brightsynth/rng.h"

namespace brightsynth {
namespace {

FeatureStats Stats1D(double mu, double var) {
  FeatureStats s;
  s.mu = Eigen::VectorXd::Constant(1, mu);
  s.sigma = Eigen::MatrixXd::Constant(1, 1, var);
  s.n = 100;
  return s;
}

FeatureStats RandomStats(Rng& rng, int d) {
  Eigen::MatrixXd a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = rng.Normal();
  FeatureStats s;
  s.mu = Eigen::VectorXd(d);
  for (int i = 0; i < d; ++i) s.mu(i) = rng.Normal();
  s.sigma = a * a.transpose() / d;
  s.n = 10;
  return s;
}

TEST(FrechetTest, ClosedForms) {
  EXPECT_NEAR(FrechetDistance(Stats1D(0, 1), Stats1D(1, 1)), 1.0, 1e-6);
  EXPECT_NEAR(FrechetDistance(Stats1D(0, 1), Stats1D(0, 4)), 1.0, 1e-6);
  EXPECT_NEAR(FrechetDistance(Stats1D(2, 9), Stats1D(-1, 1)), 9.0 + 4.0, 1e-6);
  Rng rng(1);
  const FeatureStats s = RandomStats(rng, 6);
  EXPECT_NEAR(FrechetDistance(s, s), 0.0, 1e-6);
}

TEST(FrechetTest, DiagonalCovariancesMatchClosedForm) {
  Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 5;
    FeatureStats a, b;
    a.mu = b.mu = Eigen::VectorXd::Zero(d);
    a.sigma = b.sigma = Eigen::MatrixXd::Zero(d, d);
    double expect = 0.0;
    for (int i = 0; i < d; ++i) {
      a.mu(i) = rng.Normal();
      b.mu(i) = rng.Normal();
      const double va = rng.Uniform(0.01, 3.0);
      const double vb = rng.Uniform(0.01, 3.0);
      a.sigma(i, i) = va;
      b.sigma(i, i) = vb;
      expect += std::pow(a.mu(i) - b.mu(i), 2) + std::pow(std::sqrt(va) - std::sqrt(vb), 2);
    }
    EXPECT_NEAR(FrechetDistance(a, b), expect, 1e-6);
  }
}

TEST(FrechetTest, SymmetricAndNonNegative) {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const FeatureStats a = RandomStats(rng, 8);
    const FeatureStats b = RandomStats(rng, 8);
    const double ab = FrechetDistance(a, b);
    EXPECT_NEAR(ab, FrechetDistance(b, a), 1e-6);
    EXPECT_GE(ab, 0.0);
  }
  // Rank-deficient covariances still give a clamped, finite result.
  FeatureStats z = Stats1D(0.0, 0.0);
  EXPECT_NEAR(FrechetDistance(z, z), 0.0, 1e-12);
}

TEST(FrechetTest, DimensionMismatch) {
  Rng rng(4);
  EXPECT_THROW(FrechetDistance(RandomStats(rng, 3), RandomStats(rng, 4)), ShapeError);
}

TEST(StatsTest, HandComputedTwoPointCase) {
  Eigen::VectorXd p(2), q(2);
  p << 1.0, 2.0;
  q << 3.0, 6.0;
  const FeatureStats s = StatsFromFeatures({p, q});
  EXPECT_DOUBLE_EQ(s.mu(0), 2.0);
  EXPECT_DOUBLE_EQ(s.mu(1), 4.0);
  // Unbiased (n - 1 = 1): deviations (-1,-2) and (1,2).
  EXPECT_DOUBLE_EQ(s.sigma(0, 0), 2.0);
  EXPECT_DOUBLE_EQ(s.sigma(0, 1), 4.0);
  EXPECT_DOUBLE_EQ(s.sigma(1, 0), 4.0);
  EXPECT_DOUBLE_EQ(s.sigma(1, 1), 8.0);
  EXPECT_EQ(s.n, 2);
  EXPECT_THROW(StatsFromFeatures({p}), SizeError);
}

TEST(StatsTest, IdenticalImagesAndOrdering) {
  const PhantomSample a = GenerateSample(DeskPhantomConfig(), 1);
  const PhantomSample b = GenerateSample(DeskPhantomConfig(), 2);
  const PhantomSample c = GenerateSample(DeskPhantomConfig(), 3);
  const FeatureStats same = GaussianStats({a.brightfield, a.brightfield});
  EXPECT_EQ(same.sigma.cwiseAbs().maxCoeff(), 0.0);
  const FeatureStats x = GaussianStats({a.brightfield, b.brightfield, c.brightfield});
  const FeatureStats y = GaussianStats({c.brightfield, a.brightfield, b.brightfield});
  EXPECT_LT((x.mu - y.mu).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT((x.sigma - y.sigma).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_TRUE(x.sigma.isApprox(x.sigma.transpose(), 0.0));
  EXPECT_THROW(GaussianStats({a.brightfield}), SizeError);
}

TEST(FeaturesTest, ConstantImage) {
  const Eigen::VectorXd f = Features(Image(32, 32, 0.4));
  ASSERT_EQ(f.size(), kFeatureDim);
  for (int i = 0; i < 64; ++i) EXPECT_DOUBLE_EQ(f(i), 0.4);
  EXPECT_NEAR(f(64), 0.4, 1e-12);
  EXPECT_NEAR(f(65), 0.0, 1e-12);
  EXPECT_DOUBLE_EQ(f(66), 1.0);
  for (int i = 67; i < 72; ++i) EXPECT_DOUBLE_EQ(f(i), 0.0);
}

TEST(FeaturesTest, MirrorKeepsGlobalStatistics) {
  const Image img = GenerateSample(DeskPhantomConfig(), 5).brightfield;
  Image mirror(img.width, img.height);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) mirror.at(x, y) = img.at(img.width - 1 - x, y);
  const Eigen::VectorXd a = Features(img);
  const Eigen::VectorXd b = Features(mirror);
  EXPECT_NEAR(a(64), b(64), 1e-12);
  EXPECT_NEAR(a(65), b(65), 1e-12);
  EXPECT_EQ(Features(img), Features(img));
  double hist = 0.0;
  for (int i = 66; i < 72; ++i) hist += a(i);
  EXPECT_NEAR(hist, 1.0, 1e-12);
}

TEST(FeaturesTest, AreaDownsampleMatchesBlockMeans) {
  Image img(16, 16);
  Rng rng(6);
  for (double& v : img.pixels) v = rng.Uniform();
  const Eigen::VectorXd f = Features(img);
  for (int by = 0; by < 8; ++by) {
    for (int bx = 0; bx < 8; ++bx) {
      const double mean = (img.at(2 * bx, 2 * by) + img.at(2 * bx + 1, 2 * by) +
                           img.at(2 * bx, 2 * by + 1) + img.at(2 * bx + 1, 2 * by + 1)) /
                          4.0;
      EXPECT_NEAR(f(by * 8 + bx), mean, 1e-12);
    }
  }
}

TEST(FidTest, SeparatesDistributions) {
  PhantomConfig c = DeskPhantomConfig();
  std::vector<Image> a, b, noise;
  Rng rng(7);
  for (int i = 0; i < 40; ++i) {
    a.push_back(GenerateSample(c, 100 + i).brightfield);
    b.push_back(GenerateSample(c, 200 + i).brightfield);
    Image n(32, 32);
    for (double& v : n.pixels) v = std::clamp(0.5 + 0.2 * rng.Normal(), 0.0, 1.0);
    noise.push_back(n);
  }
  EXPECT_LT(Fid(a, b), Fid(a, noise));
}

}  // namespace
}  // namespace brightsynth
