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

#include <gtest/gtest.h>

#include <set>

#include "brightsynth/detector.h"
#include "brightsynth/errors.h"
#include "brightsynth/phantom.h"
#include "brightsynth/rng.h"
#include "brightsynth/eval_map.h"

namespace brightsynth {
namespace {

Mask MaskFrom(int w, int h, const std::vector<std::pair<int, int>>& on) {
  Mask m(w, h);
  for (auto [x, y] : on) m.at(x, y) = 1;
  return m;
}

TEST(BinarizeTest, ConstantImageBelowTau) {
  const Mask m = Binarize(Image(8, 8, 0.3), BinarizeMethod::Fixed(0.5));
  EXPECT_EQ(m.count(), 0u);
  EXPECT_THROW(Binarize(Image(2, 2), BinarizeMethod::Fixed(1.5)), ConfigError);
}

TEST(BinarizeTest, OtsuSeparatesBimodalHalves) {
  Image img(10, 6, 0.0);
  for (int y = 0; y < 6; ++y)
    for (int x = 5; x < 10; ++x) img.at(x, y) = 1.0;
  const Mask m = Binarize(img, BinarizeMethod::Otsu());
  for (int y = 0; y < 6; ++y)
    for (int x = 0; x < 10; ++x) EXPECT_EQ(m.at(x, y), x >= 5 ? 1 : 0);
}

// Direct maximization of between-class variance over all 255 splits.
int BruteOtsu(const Image& img) {
  std::vector<int> bins;
  for (double v : img.pixels) bins.push_back(std::clamp(static_cast<int>(v * 256), 0, 255));
  double best = -1;
  int arg = 0;
  for (int t = 0; t < 255; ++t) {
    double n0 = 0, n1 = 0, s0 = 0, s1 = 0;
    for (int b : bins) (b <= t ? (n0 += 1, s0 += b) : (n1 += 1, s1 += b));
    if (n0 == 0 || n1 == 0) continue;
    const double w0 = n0 / bins.size(), w1 = n1 / bins.size();
    const double v = w0 * w1 * std::pow(s0 / n0 - s1 / n1, 2);
    if (v > best * (1 + 1e-12)) {
      best = v;
      arg = t;
    }
  }
  return arg;
}

TEST(BinarizeTest, OtsuMatchesBruteForce) {
  Rng rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    Image img(12, 12);
    const double a = rng.Uniform(0.05, 0.4), b = rng.Uniform(0.55, 0.95);
    for (double& v : img.pixels) v = std::clamp((rng.Uniform() < 0.4 ? b : a) + 0.05 * rng.Normal(), 0.0, 1.0);
    EXPECT_EQ(OtsuBin(img), BruteOtsu(img)) << trial;
  }
}

TEST(BinarizeTest, FixedTauIsMonotone) {
  const Image img = GenerateSample(DeskPhantomConfig(), 3).fluorescence;
  Mask prev = Binarize(img, BinarizeMethod::Fixed(0.0));
  for (double tau = 0.05; tau <= 1.0; tau += 0.05) {
    const Mask m = Binarize(img, BinarizeMethod::Fixed(tau));
    for (size_t i = 0; i < m.bits.size(); ++i) EXPECT_LE(m.bits[i], prev.bits[i]);
    prev = m;
  }
}

TEST(BinarizeTest, OtsuRecoversPhantomInteriors) {
  PhantomConfig c;
  for (uint64_t seed = 1; seed <= 20; ++seed) {
    const PhantomSample s = GenerateSample(c, seed);
    const Mask m = Binarize(s.fluorescence, BinarizeMethod::Otsu());
    size_t interior = 0, hit = 0;
    for (int y = 0; y < c.height; ++y) {
      for (int x = 0; x < c.width; ++x) {
        bool inside = false;
        for (const auto& cell : s.cells) inside |= EllipseSignedDistance(cell, x + 0.5, y + 0.5) < 0;
        if (!inside) continue;
        ++interior;
        hit += m.at(x, y);
      }
    }
    ASSERT_GT(interior, 0u);
    EXPECT_GE(static_cast<double>(hit) / interior, 0.95) << seed;
  }
}

TEST(ComponentsTest, EmptyAndDiagonal) {
  EXPECT_TRUE(ConnectedComponents(Mask(5, 5)).empty());
  const auto regions = ConnectedComponents(MaskFrom(4, 4, {{1, 1}, {2, 2}}));
  ASSERT_EQ(regions.size(), 1u);
  EXPECT_EQ(regions[0].area(), 2u);
}

TEST(ComponentsTest, GapInBothAxesSplits) {
  // 2x2 blobs at (0,0) and (3,3): one empty row and column between them.
  const auto regions = ConnectedComponents(
      MaskFrom(6, 6, {{0, 0}, {1, 0}, {0, 1}, {1, 1}, {3, 3}, {4, 3}, {3, 4}, {4, 4}}));
  ASSERT_EQ(regions.size(), 2u);
  EXPECT_EQ(regions[0].pixels.front(), 0);
  EXPECT_EQ(regions[1].pixels.front(), 3 * 6 + 3);
}

TEST(ComponentsTest, RandomMasksPartitionAndOrder) {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    Mask m(15, 11);
    for (auto& b : m.bits) b = rng.Uniform() < 0.35;
    const auto regions = ConnectedComponents(m);
    std::set<int> seen;
    int prev_first = -1;
    for (const auto& r : regions) {
      const int first = *std::min_element(r.pixels.begin(), r.pixels.end());
      EXPECT_EQ(first, r.pixels.front());
      EXPECT_GT(first, prev_first);
      prev_first = first;
      for (int p : r.pixels) {
        EXPECT_TRUE(m.bits[p]);
        EXPECT_TRUE(seen.insert(p).second);
      }
    }
    EXPECT_EQ(seen.size(), m.count());
    // No two components are 8-adjacent.
    std::vector<int> label(m.bits.size(), -1);
    for (size_t k = 0; k < regions.size(); ++k)
      for (int p : regions[k].pixels) label[p] = static_cast<int>(k);
    for (int y = 0; y < 11; ++y)
      for (int x = 0; x < 15; ++x)
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = x + dx, ny = y + dy;
            if (nx < 0 || ny < 0 || nx >= 15 || ny >= 11) continue;
            const int a = label[y * 15 + x], b = label[ny * 15 + nx];
            if (a >= 0 && b >= 0) {
              EXPECT_EQ(a, b);
            }
          }
  }
}

TEST(BoxesTest, RectangleAndMinArea) {
  std::vector<std::pair<int, int>> on;
  for (int y = 4; y < 9; ++y)
    for (int x = 3; x < 13; ++x) on.push_back({x, y});
  const auto boxes = BoxesFromRegions(ConnectedComponents(MaskFrom(20, 12, on)), 9);
  ASSERT_EQ(boxes.size(), 1u);
  EXPECT_EQ(boxes[0], (BBox{3, 4, 10, 5, std::nullopt}));
  EXPECT_TRUE(BoxesFromRegions(ConnectedComponents(MaskFrom(3, 3, {{1, 1}})), 4).empty());
  EXPECT_THROW(BoxesFromRegions({}, -1), ConfigError);
}

TEST(BoxesTest, PhantomEndToEnd) {
  PhantomConfig c;
  for (uint64_t seed = 1; seed <= 30; ++seed) {
    const PhantomSample s = GenerateSample(c, seed);
    const auto boxes = AutolabelFluorescence(s.fluorescence);
    ASSERT_EQ(boxes.size(), s.boxes.size()) << seed;
    for (const BBox& gt : s.boxes) {
      double best = 0;
      for (const BBox& b : boxes) best = std::max(best, Iou(b, gt));
      EXPECT_GE(best, 0.8) << seed;
    }
    for (const BBox& b : boxes) {
      EXPECT_GE(b.x, 0);
      EXPECT_GE(b.y, 0);
      EXPECT_LE(b.x + b.w, c.width);
      EXPECT_LE(b.y + b.h, c.height);
    }
  }
}

TEST(ReviewTest, RoundTripAndApply) {
  std::vector<LabelRecord> records = {
      {"a", {BBox{1, 2, 3, 4, 0.9}}, Provenance::kModelAssisted},
      {"b", {}, Provenance::kModelAssisted},
  };
  const std::string text = FormatReviewFile(records);
  auto parsed = ParseReviewFile(text);
  ASSERT_EQ(parsed.size(), 2u);
  EXPECT_EQ(parsed[0].boxes, records[0].boxes);
  EXPECT_TRUE(parsed[1].boxes.empty());

  const auto unchanged = ApplyReview(records, {});
  for (size_t i = 0; i < records.size(); ++i) {
    EXPECT_EQ(unchanged[i].boxes, records[i].boxes);
    EXPECT_EQ(unchanged[i].provenance, Provenance::kReviewed);
  }
  const auto edited = ApplyReview(records, {{"b", {BBox{0, 0, 5, 5, std::nullopt}}, {}}});
  EXPECT_EQ(edited[0].boxes, records[0].boxes);
  EXPECT_EQ(edited[1].boxes.size(), 1u);
  EXPECT_THROW(ApplyReview(records, {{"zzz", {}, {}}}), InputError);
  EXPECT_EQ(ToString(Provenance::kReviewed), "reviewed");
}

TEST(ModelAssistedTest, MissingDetector) {
  EXPECT_THROW(ModelAssistedLabel(nullptr, {}, 0.5), ConfigError);
}

std::vector<DetectionSample> PhantomSamples(const PhantomConfig& c, int n, uint64_t base) {
  std::vector<DetectionSample> out;
  for (int i = 0; i < n; ++i) {
    PhantomSample s = GenerateSample(c, DeriveSeed(base, i));
    out.push_back({"p" + std::to_string(i), s.brightfield, s.boxes});
  }
  return out;
}

TEST(ModelAssistedTest, DraftsFromTrainedDetector) {
  const PhantomConfig c = DeskPhantomConfig();
  DetectorConfig dc;
  dc.epochs = 25;
  dc.patience = 10;
  const auto train = PhantomSamples(c, 160, 100);
  const auto val = PhantomSamples(c, 40, 200);
  const DetectorModel model = TrainDetector(train, val, dc, 7);

  const auto fresh = PhantomSamples(c, 40, 300);
  std::vector<LabeledImage> images;
  for (const auto& s : fresh) images.push_back({s.id, s.image});
  EXPECT_TRUE(ModelAssistedLabel(&model, images, 1.0)[0].boxes.empty());

  const auto drafts = ModelAssistedLabel(&model, images, dc.conf_thresh);
  int cells = 0, matched = 0;
  for (size_t i = 0; i < fresh.size(); ++i) {
    EXPECT_EQ(drafts[i].provenance, Provenance::kModelAssisted);
    for (const BBox& b : drafts[i].boxes) EXPECT_GT(*b.score, dc.conf_thresh);
    for (const BBox& gt : fresh[i].boxes) {
      ++cells;
      for (const BBox& b : drafts[i].boxes) {
        if (Iou(b, gt) >= 0.5) {
          ++matched;
          break;
        }
      }
    }
  }
  EXPECT_GE(static_cast<double>(matched) / cells, 0.8) << matched << "/" << cells;
}

}  // namespace
}  // namespace brightsynth
