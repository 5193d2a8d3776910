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
#include "brightsynth/phantom.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "brightsynth/errors.h"
#include "brightsynth/rng.h"

namespace brightsynth {

namespace fs = std::filesystem;

namespace {

// Appearance constants not exposed as knobs.
constexpr double kRimSigma = 0.9;
constexpr double kHaloAmplitude = 0.08;
constexpr double kFluorMin = 0.75;
constexpr double kFluorMax = 0.95;
constexpr double kPlacementGap = 2.0;
constexpr int kMaxPlacementAttempts = 100;

void CheckRange(const char* name, double lo, double hi) {
  if (!(lo <= hi)) {
    throw ConfigError(std::string(name) + " range has min > max");
  }
}

void CheckUnit(const char* name, double v) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw ConfigError(std::string(name) + " must lie in [0,1]");
  }
}

// Coverage of a pixel by the shape given the signed distance of its center.
double Coverage(double d) { return std::clamp(0.5 - d, 0.0, 1.0); }

std::pair<double, double> HalfExtents(const CellParams& cell) {
  const double c = std::cos(cell.angle);
  const double s = std::sin(cell.angle);
  const double a = cell.semi_major;
  const double b = cell.semi_minor;
  return {std::sqrt(a * a * c * c + b * b * s * s),
          std::sqrt(a * a * s * s + b * b * c * c)};
}

}  // namespace

void PhantomConfig::Validate() const {
  if (width <= 0 || height <= 0) throw ConfigError("image size must be > 0");
  CheckRange("cell_count", cell_count_range.first, cell_count_range.second);
  if (cell_count_range.first < 0) throw ConfigError("cell_count must be >= 0");
  CheckRange("radius", radius_range.first, radius_range.second);
  if (radius_range.first <= 0) throw ConfigError("radius must be > 0");
  CheckRange("eccentricity", eccentricity_range.first,
             eccentricity_range.second);
  if (eccentricity_range.first < 1.0 || eccentricity_range.second > 2.0) {
    throw ConfigError("eccentricity must lie in [1,2]");
  }
  CheckUnit("rim_darkness", rim_darkness);
  CheckUnit("interior_brightness", interior_brightness);
  CheckUnit("background_level", background_level);
  CheckUnit("noise_sigma", noise_sigma);
  if (halo_width < 0) throw ConfigError("halo_width must be >= 0");
}

PhantomConfig DeskPhantomConfig() {
  PhantomConfig config;
  config.width = 32;
  config.height = 32;
  config.cell_count_range = {1, 3};
  config.radius_range = {3.5, 5.0};
  config.eccentricity_range = {1.0, 1.3};
  return config;
}

BBox EllipseBounds(const CellParams& cell, int width, int height) {
  const auto [ex, ey] = HalfExtents(cell);
  return ClipBox(BBox{cell.cx - ex, cell.cy - ey, 2 * ex, 2 * ey, std::nullopt},
                 width, height);
}

double EllipseSignedDistance(const CellParams& cell, double px, double py) {
  const double c = std::cos(cell.angle);
  const double s = std::sin(cell.angle);
  const double dx = px - cell.cx;
  const double dy = py - cell.cy;
  const double u = dx * c + dy * s;
  const double v = -dx * s + dy * c;
  const double a = cell.semi_major;
  const double b = cell.semi_minor;
  const double q = std::sqrt((u * u) / (a * a) + (v * v) / (b * b));
  if (q < 1e-12) return -b;
  // First-order distance: (q - 1) / |grad q|.
  const double grad =
      std::sqrt((u * u) / (a * a * a * a) + (v * v) / (b * b * b * b)) / q;
  return (q - 1.0) / grad;
}

PhantomSample GenerateSample(const PhantomConfig& config, uint64_t seed) {
  config.Validate();
  Rng rng(seed);
  PhantomSample sample;
  const int w = config.width;
  const int h = config.height;

  const int requested = static_cast<int>(
      rng.UniformInt(config.cell_count_range.first,
                     config.cell_count_range.second));
  std::vector<double> plateaus;
  for (int i = 0; i < requested; ++i) {
    for (int attempt = 0; attempt < kMaxPlacementAttempts; ++attempt) {
      CellParams cell;
      const double r =
          rng.Uniform(config.radius_range.first, config.radius_range.second);
      const double e = rng.Uniform(config.eccentricity_range.first,
                                   config.eccentricity_range.second);
      cell.semi_minor = r;
      cell.semi_major = r * e;
      cell.angle = rng.Uniform(0.0, std::numbers::pi);
      // Keep at least half of the cell's extent inside the frame.
      const auto [ex, ey] = HalfExtents(cell);
      const double mx = std::min(0.5 * ex, 0.5 * w);
      const double my = std::min(0.5 * ey, 0.5 * h);
      cell.cx = rng.Uniform(mx, w - mx);
      cell.cy = rng.Uniform(my, h - my);
      const double plateau = rng.Uniform(kFluorMin, kFluorMax);

      bool ok = true;
      if (!config.overlap_allowed) {
        for (const auto& other : sample.cells) {
          const double dist = std::hypot(cell.cx - other.cx, cell.cy - other.cy);
          if (dist < cell.semi_major + other.semi_major + kPlacementGap) {
            ok = false;
            break;
          }
        }
      }
      if (ok) {
        sample.cells.push_back(cell);
        plateaus.push_back(plateau);
        break;
      }
    }
  }

  const double bg = config.background_level;
  sample.brightfield = Image(w, h, bg);
  sample.fluorescence = Image(w, h, 0.0);
  for (size_t k = 0; k < sample.cells.size(); ++k) {
    const CellParams& cell = sample.cells[k];
    sample.boxes.push_back(EllipseBounds(cell, w, h));
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const double d = EllipseSignedDistance(cell, x + 0.5, y + 0.5);
        const double inside = Coverage(d);
        double delta = inside * (config.interior_brightness - bg);
        delta -= config.rim_darkness * bg *
                 std::exp(-0.5 * (d / kRimSigma) * (d / kRimSigma));
        if (d > 0 && config.halo_width > 0) {
          const double z = d / config.halo_width;
          delta += kHaloAmplitude * std::exp(-0.5 * z * z);
        }
        sample.brightfield.at(x, y) += delta;
        double& f = sample.fluorescence.at(x, y);
        f = std::max(f, plateaus[k] * inside);
      }
    }
  }

  for (double& v : sample.brightfield.pixels) {
    v = std::clamp(v + config.noise_sigma * rng.Normal(), 0.0, 1.0);
  }
  for (double& v : sample.fluorescence.pixels) {
    v = std::clamp(v + config.noise_sigma * rng.Normal(), 0.0, 1.0);
  }
  return sample;
}

Image AddWellEdge(const Image& image, const WellEdgeArc& arc) {
  if (!(arc.radius > 0) || !(arc.thickness > 0)) {
    throw ConfigError("well edge radius and thickness must be > 0");
  }
  Image out = image;
  const double keep = 1.0 - std::clamp(arc.darkness, 0.0, 1.0);
  for (int y = 0; y < out.height; ++y) {
    for (int x = 0; x < out.width; ++x) {
      const double r = std::hypot(x + 0.5 - arc.cx, y + 0.5 - arc.cy);
      if (std::abs(r - arc.radius) <= arc.thickness) out.at(x, y) *= keep;
    }
  }
  return out;
}

PhantomDataset GenerateDataset(const PhantomConfig& config, int n,
                               const fs::path& out_dir) {
  config.Validate();
  if (n < 0) throw ConfigError("sample count must be >= 0");
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec || !fs::is_directory(out_dir)) {
    throw IoError("cannot create directory " + out_dir.string());
  }
  const fs::path root = fs::absolute(out_dir).lexically_normal();
  PhantomDataset dataset;
  dataset.brightfield.name = "phantoms_brightfield";
  dataset.fluorescence.name = "phantoms_fluorescence";
  dataset.brightfield.seed = dataset.fluorescence.seed = config.seed;
  for (int i = 0; i < n; ++i) {
    const PhantomSample sample =
        GenerateSample(config, DeriveSeed(config.seed, static_cast<uint64_t>(i)));
    char name[32];
    std::snprintf(name, sizeof(name), "%05d.pgm", i);
    const fs::path bf = root / (std::string("bf_") + name);
    const fs::path fl = root / (std::string("fl_") + name);
    WritePgm(bf, sample.brightfield);
    WritePgm(fl, sample.fluorescence);
    dataset.brightfield.records.push_back(
        {bf, Source::kReal, Split::kPool, sample.boxes});
    dataset.fluorescence.records.push_back(
        {fl, Source::kReal, Split::kPool, sample.boxes});
  }
  WriteManifest(root / "brightfield.manifest", dataset.brightfield);
  WriteManifest(root / "fluorescence.manifest", dataset.fluorescence);
  return dataset;
}

}  // namespace brightsynth
