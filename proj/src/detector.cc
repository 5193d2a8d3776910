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
#include "brightsynth/detector.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <utility>

#include "brightsynth/errors.h"
#include "brightsynth/nn/ops.h"
#include "brightsynth/nn/optim.h"
#include "brightsynth/rng.h"

namespace brightsynth {

using nn::ParamSet;
using nn::Shape;
using nn::Tape;
using nn::Tensor;
using nn::Var;

namespace {

int Log2Exact(int v) {
  int k = 0;
  while ((1 << k) < v) ++k;
  return (1 << k) == v ? k : -1;
}

}  // namespace

void DetectorConfig::Validate(int image_side) const {
  const int k = Log2Exact(stride);
  if (stride < 1 || k < 0) throw ConfigError("detector stride must be a power of two");
  if (channels.size() != static_cast<size_t>(k + 1)) {
    throw ConfigError("detector needs log2(stride) + 1 channel entries");
  }
  for (int c : channels) {
    if (c < 1) throw ConfigError("detector channel counts must be positive");
  }
  for (double v : {conf_thresh, nms_iou, eval_conf, mosaic_prob}) {
    if (!(v >= 0.0 && v <= 1.0)) throw ConfigError("detector thresholds must lie in [0,1]");
  }
  if (epochs < 0 || patience < 1 || batch_size < 1) {
    throw ConfigError("detector epochs >= 0, patience >= 1, batch_size >= 1 required");
  }
  if (!(lr > 0.0)) throw ConfigError("detector lr must be > 0");
  if (augment.mixup) throw ConfigError("mixup augmentation is reserved and not implemented");
  if (image_side > 0 && image_side % stride != 0) {
    throw ShapeError("image side " + std::to_string(image_side) +
                     " not divisible by stride " + std::to_string(stride));
  }
}

HeatmapTargets EncodeTargets(const std::vector<BBox>& boxes, int width, int height,
                             int stride) {
  if (stride < 1 || width % stride != 0 || height % stride != 0) {
    throw ShapeError("image size not divisible by stride");
  }
  const int gw = width / stride;
  const int gh = height / stride;
  HeatmapTargets t{Tensor({1, 1, gh, gw}), Tensor({1, 2, gh, gw}),
                   Tensor({1, 2, gh, gw}), Tensor({1, 1, gh, gw}), 0};
  for (const BBox& b : boxes) {
    if (b.w <= 0.0 || b.h <= 0.0) continue;
    const double fx = b.cx() / stride;
    const double fy = b.cy() / stride;
    const int cx = std::clamp(static_cast<int>(std::floor(fx)), 0, gw - 1);
    const int cy = std::clamp(static_cast<int>(std::floor(fy)), 0, gh - 1);
    const double sigma = std::max(1.0, std::min(b.w, b.h) / (3.0 * stride));
    for (int y = 0; y < gh; ++y) {
      for (int x = 0; x < gw; ++x) {
        const double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
        double& v = t.heatmap.at(0, 0, y, x);
        v = std::max(v, std::exp(-d2 / (2.0 * sigma * sigma)));
      }
    }
    if (t.mask.at(0, 0, cy, cx) == 0.0) ++t.num_pos;
    t.mask.at(0, 0, cy, cx) = 1.0;
    t.size.at(0, 0, cy, cx) = b.w / stride;
    t.size.at(0, 1, cy, cx) = b.h / stride;
    t.offset.at(0, 0, cy, cx) = fx - cx;
    t.offset.at(0, 1, cy, cx) = fy - cy;
  }
  return t;
}

namespace {

void AddConv(ParamSet& p, Rng& rng, const std::string& name, int cin, int cout,
             int k, double std) {
  Tensor w({cout, cin, k, k});
  for (double& v : w.data) v = std * rng.Normal();
  p.Add(name + ".w", std::move(w));
  p.Add(name + ".b", Tensor({1, cout, 1, 1}));
}

double He(int fan_in) { return std::sqrt(2.0 / fan_in); }

}  // namespace

DetectorModel InitDetector(const DetectorConfig& config, uint64_t seed) {
  config.Validate();
  Rng rng(seed);
  DetectorModel model{config, {}};
  ParamSet& p = model.params;
  const auto& ch = config.channels;
  AddConv(p, rng, "stem", 1, ch[0], 3, He(9));
  for (size_t l = 1; l < ch.size(); ++l) {
    const std::string name = "stage" + std::to_string(l);
    AddConv(p, rng, name + ".down", ch[l - 1], ch[l], 3, He(ch[l - 1] * 9));
    AddConv(p, rng, name + ".conv", ch[l], ch[l], 3, He(ch[l] * 9));
  }
  const int c = ch.back();
  AddConv(p, rng, "neck", c, c, 3, He(c * 9));
  AddConv(p, rng, "heat", c, 1, 1, 0.01);
  AddConv(p, rng, "size", c, 2, 1, 0.01);
  AddConv(p, rng, "offset", c, 2, 1, 0.01);
  // Prior probability 0.1 per cell.
  p.at("heat.b").data[0] = -std::log(9.0);
  p.at("size.b").data.assign(2, 2.0);
  p.at("offset.b").data.assign(2, 0.5);
  return model;
}

DetectorVars DetectorForward(Tape& tape, const DetectorModel& model, Var x) {
  const Shape s = tape.value(x).shape;
  if (s.c != 1 || s.h % model.config.stride != 0 || s.w % model.config.stride != 0) {
    throw ShapeError("detector input " + s.str() + " not divisible by stride " +
                     std::to_string(model.config.stride));
  }
  const ParamSet& p = model.params;
  auto conv = [&](Var in, const std::string& name, int stride) {
    return nn::Conv2d(tape, in, tape.Param(p, name + ".w"), tape.Param(p, name + ".b"),
                      stride);
  };
  Var h = nn::Silu(tape, conv(x, "stem", 1));
  for (size_t l = 1; l < model.config.channels.size(); ++l) {
    const std::string name = "stage" + std::to_string(l);
    h = nn::Silu(tape, conv(h, name + ".down", 2));
    h = nn::Silu(tape, conv(h, name + ".conv", 1));
  }
  h = nn::Silu(tape, conv(h, "neck", 1));
  return {conv(h, "heat", 1), conv(h, "size", 1), conv(h, "offset", 1)};
}

std::vector<BBox> Nms(const std::vector<BBox>& boxes, double iou_thresh) {
  std::vector<BBox> kept;
  for (size_t i : ConfidenceOrder(boxes)) {
    bool keep = true;
    for (const BBox& k : kept) {
      if (Iou(k, boxes[i]) > iou_thresh) {
        keep = false;
        break;
      }
    }
    if (keep) kept.push_back(boxes[i]);
  }
  return kept;
}

Prediction DecodeHeads(const Tensor& heat, const Tensor& size, const Tensor& offset,
                       int stride, int width, int height, double conf_thresh,
                       double nms_iou) {
  const int gh = heat.shape.h;
  const int gw = heat.shape.w;
  std::vector<BBox> candidates;
  for (int y = 0; y < gh; ++y) {
    for (int x = 0; x < gw; ++x) {
      const double v = heat.at(0, 0, y, x);
      if (!(v > conf_thresh)) continue;
      bool peak = true;
      for (int dy = -1; dy <= 1 && peak; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int nx = x + dx;
          const int ny = y + dy;
          if ((dx == 0 && dy == 0) || nx < 0 || ny < 0 || nx >= gw || ny >= gh) continue;
          const double u = heat.at(0, 0, ny, nx);
          // Plateaus resolve to their first cell in raster order.
          const bool earlier = dy < 0 || (dy == 0 && dx < 0);
          if (u > v || (earlier && u == v)) {
            peak = false;
            break;
          }
        }
      }
      if (!peak) continue;
      const double cx = (x + offset.at(0, 0, y, x)) * stride;
      const double cy = (y + offset.at(0, 1, y, x)) * stride;
      const double w = std::max(0.0, size.at(0, 0, y, x)) * stride;
      const double h = std::max(0.0, size.at(0, 1, y, x)) * stride;
      BBox box = ClipBox({cx - 0.5 * w, cy - 0.5 * h, w, h, std::nullopt}, width, height);
      if (box.w <= 0.0 || box.h <= 0.0) continue;
      box.score = std::clamp(v, 0.0, 1.0);
      candidates.push_back(box);
    }
  }
  return {Nms(candidates, nms_iou)};
}

namespace {

struct HeadValues {
  Tensor heat;
  Tensor size;
  Tensor offset;
};

HeadValues RunHeads(const DetectorModel& model, const Tensor& batch) {
  Tape tape;
  DetectorVars v = DetectorForward(tape, model, tape.Constant(batch));
  HeadValues out{tape.value(v.heat_logits), tape.value(v.size), tape.value(v.offset)};
  for (double& z : out.heat.data) z = 1.0 / (1.0 + std::exp(-z));
  return out;
}

}  // namespace

Prediction Detect(const DetectorModel& model, const Image& image, double conf_thresh,
                  double nms_iou) {
  model.config.Validate();
  if (image.width % model.config.stride != 0 || image.height % model.config.stride != 0) {
    throw ShapeError("image size not divisible by detector stride");
  }
  const HeadValues h = RunHeads(model, nn::ImagesToBatch({image}));
  return DecodeHeads(h.heat, h.size, h.offset, model.config.stride, image.width,
                     image.height, conf_thresh, nms_iou);
}

std::vector<DetectionSample> LoadSamples(const DatasetManifest& manifest, Split split) {
  std::vector<DetectionSample> out;
  for (const ManifestRecord& r : manifest.records) {
    if (r.split != split) continue;
    out.push_back({r.image.string(), ReadPgm(r.image), r.boxes});
  }
  return out;
}

BoxesById PredictAll(const DetectorModel& model,
                     const std::vector<DetectionSample>& samples, double conf_thresh) {
  BoxesById out;
  for (const DetectionSample& s : samples) {
    out[s.id] = Detect(model, s.image, conf_thresh, model.config.nms_iou).boxes;
  }
  return out;
}

BoxesById GroundTruth(const std::vector<DetectionSample>& samples) {
  BoxesById out;
  for (const DetectionSample& s : samples) out[s.id] = s.boxes;
  return out;
}

namespace {

DetectionSample Flip(const DetectionSample& s, bool horizontal) {
  DetectionSample out{s.id, Image(s.image.width, s.image.height), {}};
  for (int y = 0; y < s.image.height; ++y) {
    for (int x = 0; x < s.image.width; ++x) {
      const int sx = horizontal ? s.image.width - 1 - x : x;
      const int sy = horizontal ? y : s.image.height - 1 - y;
      out.image.at(x, y) = s.image.at(sx, sy);
    }
  }
  for (BBox b : s.boxes) {
    if (horizontal) {
      b.x = s.image.width - b.x - b.w;
    } else {
      b.y = s.image.height - b.y - b.h;
    }
    out.boxes.push_back(b);
  }
  return out;
}

// Minimum visible fraction for a box cut by a mosaic crop to keep its label.
constexpr double kMosaicKeepFraction = 0.4;

// 2x2 canvas of four samples, cropped back to one tile's size at a random
// offset.
DetectionSample Mosaic(const std::vector<DetectionSample>& pool, size_t first, Rng& rng) {
  const int w = pool[first].image.width;
  const int h = pool[first].image.height;
  Image canvas(2 * w, 2 * h);
  std::vector<BBox> boxes;
  for (int q = 0; q < 4; ++q) {
    const size_t idx = q == 0 ? first
                              : static_cast<size_t>(rng.UniformInt(
                                    0, static_cast<int64_t>(pool.size()) - 1));
    const int ox = (q % 2) * w;
    const int oy = (q / 2) * h;
    const DetectionSample& s = pool[idx];
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) canvas.at(ox + x, oy + y) = s.image.at(x, y);
    }
    for (BBox b : s.boxes) {
      b.x += ox;
      b.y += oy;
      boxes.push_back(b);
    }
  }
  const int cx = static_cast<int>(rng.UniformInt(0, w));
  const int cy = static_cast<int>(rng.UniformInt(0, h));
  DetectionSample out{pool[first].id, Image(w, h), {}};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) out.image.at(x, y) = canvas.at(cx + x, cy + y);
  }
  for (BBox b : boxes) {
    const double area = b.area();
    b.x -= cx;
    b.y -= cy;
    const BBox clipped = ClipBox(b, w, h);
    if (area > 0.0 && clipped.area() >= kMosaicKeepFraction * area) out.boxes.push_back(clipped);
  }
  return out;
}

DetectionSample Augment(const std::vector<DetectionSample>& pool, size_t idx,
                        const DetectorConfig& cfg, Rng& rng) {
  DetectionSample s = pool[idx];
  if (cfg.augment.mosaic && rng.Uniform() < cfg.mosaic_prob) s = Mosaic(pool, idx, rng);
  if (cfg.augment.hflip && rng.Uniform() < 0.5) s = Flip(s, true);
  if (cfg.augment.vflip && rng.Uniform() < 0.5) s = Flip(s, false);
  if (cfg.augment.intensity_jitter) {
    const double scale = rng.Uniform(0.9, 1.1);
    const double shift = rng.Uniform(-0.05, 0.05);
    for (double& v : s.image.pixels) v = std::clamp(v * scale + shift, 0.0, 1.0);
  }
  return s;
}

struct BatchTargets {
  Tensor heatmap;
  Tensor size;
  Tensor offset;
  Tensor mask;
  int num_pos = 0;
};

BatchTargets StackTargets(const std::vector<DetectionSample>& batch, int stride) {
  const int n = static_cast<int>(batch.size());
  const int gw = batch[0].image.width / stride;
  const int gh = batch[0].image.height / stride;
  BatchTargets out{Tensor({n, 1, gh, gw}), Tensor({n, 2, gh, gw}),
                   Tensor({n, 2, gh, gw}), Tensor({n, 1, gh, gw}), 0};
  const size_t plane = static_cast<size_t>(gh) * gw;
  for (int i = 0; i < n; ++i) {
    const HeatmapTargets t =
        EncodeTargets(batch[i].boxes, batch[i].image.width, batch[i].image.height, stride);
    std::copy(t.heatmap.data.begin(), t.heatmap.data.end(), out.heatmap.data.begin() + i * plane);
    std::copy(t.mask.data.begin(), t.mask.data.end(), out.mask.data.begin() + i * plane);
    std::copy(t.size.data.begin(), t.size.data.end(), out.size.data.begin() + 2 * i * plane);
    std::copy(t.offset.data.begin(), t.offset.data.end(),
              out.offset.data.begin() + 2 * i * plane);
    out.num_pos += t.num_pos;
  }
  return out;
}

// Validation score: mAP@50, ties broken by mAP@50:95.
std::pair<double, double> ValScore(const DetectorModel& model,
                                   const std::vector<DetectionSample>& val) {
  const EvalResult r = MapSuite(PredictAll(model, val, model.config.eval_conf), GroundTruth(val));
  return {r.map50, r.map5095};
}

}  // namespace

DetectorModel TrainDetector(const std::vector<DetectionSample>& train,
                            const std::vector<DetectionSample>& val,
                            const DetectorConfig& config, uint64_t seed,
                            TrainingHistory* history, const LogFn& log) {
  if (train.empty()) throw ConfigError("detector training split is empty");
  const int w = train[0].image.width;
  const int h = train[0].image.height;
  config.Validate(w);
  config.Validate(h);
  for (const auto* set : {&train, &val}) {
    for (const DetectionSample& s : *set) {
      if (s.image.width != w || s.image.height != h) {
        throw ShapeError("detector images must share one size");
      }
    }
  }
  DetectorModel model = InitDetector(config, DeriveSeed(seed, 0));
  Rng rng(DeriveSeed(seed, 1));
  nn::OptState opt = nn::InitOptState(model.params);
  nn::AdamWConfig adam;
  adam.lr = config.lr;
  adam.weight_decay = config.weight_decay;

  TrainingHistory hist;
  ParamSet best = model.params;
  std::pair<double, double> best_score{0.0, 0.0};
  if (!val.empty()) best_score = ValScore(model, val);
  std::vector<size_t> order(train.size());
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    rng.Shuffle(order);
    double loss_sum = 0.0;
    int steps = 0;
    for (size_t start = 0; start < order.size(); start += config.batch_size) {
      const size_t n = std::min<size_t>(config.batch_size, order.size() - start);
      std::vector<DetectionSample> batch;
      std::vector<Image> images;
      for (size_t i = 0; i < n; ++i) {
        batch.push_back(Augment(train, order[start + i], config, rng));
        images.push_back(batch.back().image);
      }
      const BatchTargets tgt = StackTargets(batch, config.stride);
      const double norm = std::max(1, tgt.num_pos);
      Tape tape;
      DetectorVars v = DetectorForward(tape, model, tape.Constant(nn::ImagesToBatch(images)));
      Var loss = nn::FocalLoss(tape, v.heat_logits, tgt.heatmap, norm);
      loss = nn::Add(tape, loss,
                     nn::Scale(tape, nn::MaskedL1(tape, v.size, tgt.size, tgt.mask, norm),
                               config.size_weight));
      loss = nn::Add(tape, loss,
                     nn::Scale(tape, nn::MaskedL1(tape, v.offset, tgt.offset, tgt.mask, norm),
                               config.offset_weight));
      tape.Backward(loss);
      const double value = tape.value(loss).data[0];
      ParamSet grads = model.params.ZerosLike();
      tape.AccumulateParamGrads(grads);
      if (!std::isfinite(value) || !grads.AllFinite()) {
        throw NumericError("non-finite detector loss at epoch " + std::to_string(epoch));
      }
      nn::AdamWStep(model.params, grads, opt, adam);
      loss_sum += value;
      ++steps;
    }
    hist.epochs_run = epoch;
    hist.train_loss.push_back(loss_sum / std::max(1, steps));
    char line[128];
    if (!val.empty()) {
      const auto score = ValScore(model, val);
      const double m = score.first;
      hist.val_map50.push_back(m);
      hist.val_map5095.push_back(score.second);
      if (score > best_score) {
        best_score = score;
        best = model.params;
        hist.best_epoch = epoch;
      }
      std::snprintf(line, sizeof(line), "epoch %d loss %.5f val_map50 %.4f val_map5095 %.4f",
                    epoch, hist.train_loss.back(), m, score.second);
    } else {
      best = model.params;
      hist.best_epoch = epoch;
      std::snprintf(line, sizeof(line), "epoch %d loss %.5f", epoch, hist.train_loss.back());
    }
    if (log) log(line);
    if (!val.empty() && epoch - hist.best_epoch >= config.patience) break;
  }
  model.params = std::move(best);
  if (history) *history = std::move(hist);
  return model;
}

DetectorModel TrainDetector(const DatasetManifest& manifest, const DetectorConfig& config,
                            uint64_t seed, TrainingHistory* history, const LogFn& log) {
  return TrainDetector(LoadSamples(manifest, Split::kTrain), LoadSamples(manifest, Split::kVal),
                       config, seed, history, log);
}

namespace {

std::string JoinInts(const std::vector<int>& values) {
  std::string out;
  for (size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(values[i]);
  }
  return out;
}

std::string Num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void SaveDetector(const std::filesystem::path& path, const DetectorModel& model) {
  nn::Checkpoint ckpt;
  const DetectorConfig& c = model.config;
  ckpt.meta = {{"kind", "detector"},
               {"stride", std::to_string(c.stride)},
               {"channels", JoinInts(c.channels)},
               {"conf_thresh", Num(c.conf_thresh)},
               {"nms_iou", Num(c.nms_iou)}};
  ckpt.tensors = model.params;
  nn::WriteCheckpoint(path, ckpt);
}

DetectorModel LoadDetector(const std::filesystem::path& path) {
  nn::Checkpoint ckpt = nn::ReadCheckpoint(path);
  if (ckpt.Meta("kind") != "detector") {
    throw InputError(path.string() + " is not a detector checkpoint");
  }
  DetectorConfig c;
  try {
    c.stride = std::stoi(ckpt.Meta("stride"));
    c.conf_thresh = std::stod(ckpt.Meta("conf_thresh"));
    c.nms_iou = std::stod(ckpt.Meta("nms_iou"));
    c.channels.clear();
    std::stringstream ss(ckpt.Meta("channels"));
    std::string item;
    while (std::getline(ss, item, ',')) c.channels.push_back(std::stoi(item));
  } catch (const std::exception&) {
    throw InputError(path.string() + ": bad detector metadata");
  }
  DetectorModel model = InitDetector(c, 0);
  if (!ckpt.tensors.SameLayout(model.params)) {
    throw InputError(path.string() + ": tensors do not match the detector layout");
  }
  model.params = std::move(ckpt.tensors);
  return model;
}

Image GaussianBlur(const Image& image, double sigma) {
  if (!(sigma > 0.0)) throw ConfigError("blur sigma must be > 0");
  const int r = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(2 * r + 1);
  double sum = 0.0;
  for (int i = -r; i <= r; ++i) sum += k[i + r] = std::exp(-0.5 * i * i / (sigma * sigma));
  for (double& v : k) v /= sum;
  const int w = image.width;
  const int h = image.height;
  auto clampi = [](int v, int hi) { return std::clamp(v, 0, hi - 1); };
  Image tmp(w, h);
  Image out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i) acc += k[i + r] * image.at(clampi(x + i, w), y);
      tmp.at(x, y) = acc;
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i) acc += k[i + r] * tmp.at(x, clampi(y + i, h));
      out.at(x, y) = acc;
    }
  }
  return out;
}

Prediction BlobBaseline(const Image& image, const std::vector<double>& sigmas,
                        double thresh, double nms_iou) {
  if (sigmas.empty()) throw ConfigError("blob baseline needs at least one sigma");
  for (size_t i = 0; i < sigmas.size(); ++i) {
    if (!(sigmas[i] > 0.0) || (i > 0 && !(sigmas[i] > sigmas[i - 1]))) {
      throw ConfigError("blob sigmas must be positive and ascending");
    }
  }
  Image contrast = image;
  if (!image.pixels.empty()) {
    std::vector<double> sorted = image.pixels;
    auto mid = sorted.begin() + sorted.size() / 2;
    std::nth_element(sorted.begin(), mid, sorted.end());
    for (double& v : contrast.pixels) v = std::fabs(v - *mid);
  }
  constexpr double kRatio = 1.6;
  std::vector<Image> dog;
  for (double s : sigmas) {
    Image a = GaussianBlur(contrast, s);
    const Image b = GaussianBlur(contrast, kRatio * s);
    for (size_t k = 0; k < a.size(); ++k) a.pixels[k] -= b.pixels[k];
    dog.push_back(std::move(a));
  }
  const int w = image.width;
  const int h = image.height;
  const int ns = static_cast<int>(sigmas.size());
  struct Peak {
    int s, x, y;
    double v;
  };
  std::vector<Peak> peaks;
  double max_v = 0.0;
  for (int s = 0; s < ns; ++s) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const double v = dog[s].at(x, y);
        if (!(v > thresh)) continue;
        bool peak = true;
        for (int ds = -1; ds <= 1 && peak; ++ds) {
          for (int dy = -1; dy <= 1 && peak; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
              const int ss = s + ds, yy = y + dy, xx = x + dx;
              if ((ds | dy | dx) == 0 || ss < 0 || ss >= ns || yy < 0 || yy >= h ||
                  xx < 0 || xx >= w) {
                continue;
              }
              if (dog[ss].at(xx, yy) >= v) {
                peak = false;
                break;
              }
            }
          }
        }
        if (peak) {
          peaks.push_back({s, x, y, v});
          max_v = std::max(max_v, v);
        }
      }
    }
  }
  std::vector<BBox> boxes;
  for (const Peak& p : peaks) {
    const double side = 2.0 * std::sqrt(2.0) * sigmas[p.s];
    BBox b = ClipBox({p.x + 0.5 - 0.5 * side, p.y + 0.5 - 0.5 * side, side, side, std::nullopt},
                     w, h);
    if (b.w <= 0.0 || b.h <= 0.0) continue;
    b.score = p.v / max_v;
    boxes.push_back(b);
  }
  return {Nms(boxes, nms_iou)};
}

}  // namespace brightsynth
