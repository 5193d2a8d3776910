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
#include "brightsynth/pipeline.h"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <optional>
#include <sstream>

#include "brightsynth/errors.h"
#include "brightsynth/patchify.h"
#include "brightsynth/rng.h"

namespace brightsynth {

namespace fs = std::filesystem;

namespace {

std::string Trim(const std::string& s) {
  size_t a = 0;
  size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

void EnsureDir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory " + dir.string());
}

}  // namespace

IniConfig IniConfig::Parse(const std::string& text) {
  IniConfig ini;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const size_t hash = line.find_first_of("#;");
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = Trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("line " + std::to_string(lineno) + ": bad section");
      section = Trim(line.substr(1, line.size() - 2));
      continue;
    }
    const size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    }
    ini.Set(section, Trim(line.substr(0, eq)), Trim(line.substr(eq + 1)));
  }
  return ini;
}

IniConfig IniConfig::Load(const fs::path& path) {
  if (!fs::exists(path)) throw ConfigError("config file not found: " + path.string());
  return Parse(ReadTextFile(path));
}

void IniConfig::Set(const std::string& section, const std::string& key,
                    const std::string& value) {
  if (key.empty()) throw ConfigError("empty config key");
  sections_[section][key] = value;
}

void IniConfig::ApplyOverride(const std::string& assignment) {
  const size_t eq = assignment.find('=');
  // Sections may contain dots ("train.fid_sampler"); keys do not.
  const size_t dot = eq == std::string::npos ? std::string::npos : assignment.rfind('.', eq);
  if (eq == std::string::npos || dot == std::string::npos || dot == 0) {
    throw ConfigError("override must look like section.key=value: " + assignment);
  }
  Set(Trim(assignment.substr(0, dot)), Trim(assignment.substr(dot + 1, eq - dot - 1)),
      Trim(assignment.substr(eq + 1)));
}

bool IniConfig::Has(const std::string& section, const std::string& key) const {
  auto it = sections_.find(section);
  return it != sections_.end() && it->second.count(key) > 0;
}

std::string IniConfig::Get(const std::string& section, const std::string& key,
                           const std::string& fallback) const {
  auto it = sections_.find(section);
  if (it == sections_.end()) return fallback;
  auto kv = it->second.find(key);
  return kv == it->second.end() ? fallback : kv->second;
}

namespace {

template <typename T, typename F>
T ParseNumber(const std::string& section, const std::string& key, const std::string& text,
              F convert) {
  try {
    size_t used = 0;
    T v = convert(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(section + "." + key + ": cannot parse '" + text + "'");
  }
}

}  // namespace

int IniConfig::GetInt(const std::string& section, const std::string& key, int fallback) const {
  if (!Has(section, key)) return fallback;
  return ParseNumber<int>(section, key, Get(section, key, ""),
                          [](const std::string& s, size_t* n) { return std::stoi(s, n); });
}

uint64_t IniConfig::GetU64(const std::string& section, const std::string& key,
                           uint64_t fallback) const {
  if (!Has(section, key)) return fallback;
  const std::string text = Get(section, key, "");
  if (!text.empty() && text[0] == '-') throw ConfigError(section + "." + key + " must be >= 0");
  return ParseNumber<uint64_t>(section, key, text, [](const std::string& s, size_t* n) {
    return static_cast<uint64_t>(std::stoull(s, n));
  });
}

double IniConfig::GetDouble(const std::string& section, const std::string& key,
                            double fallback) const {
  if (!Has(section, key)) return fallback;
  return ParseNumber<double>(section, key, Get(section, key, ""),
                             [](const std::string& s, size_t* n) { return std::stod(s, n); });
}

bool IniConfig::GetBool(const std::string& section, const std::string& key,
                        bool fallback) const {
  if (!Has(section, key)) return fallback;
  const std::string v = Get(section, key, "");
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(section + "." + key + ": expected a boolean, got '" + v + "'");
}

std::vector<int> IniConfig::GetInts(const std::string& section, const std::string& key,
                                    const std::vector<int>& fallback) const {
  if (!Has(section, key)) return fallback;
  std::string text = Get(section, key, "");
  std::replace(text.begin(), text.end(), ',', ' ');
  std::replace(text.begin(), text.end(), '(', ' ');
  std::replace(text.begin(), text.end(), ')', ' ');
  std::istringstream in(text);
  std::vector<int> out;
  std::string tok;
  while (in >> tok) {
    out.push_back(ParseNumber<int>(section, key, tok,
                                   [](const std::string& s, size_t* n) { return std::stoi(s, n); }));
  }
  return out;
}

std::string IniConfig::Serialize() const {
  std::string out;
  for (const auto& [section, kv] : sections_) {
    out += "[" + section + "]\n";
    for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  }
  return out;
}

std::string IniConfig::Hash() const {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : Serialize()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

PhantomConfig PhantomConfigFrom(const IniConfig& ini, const std::string& s, PhantomConfig c) {
  c.width = ini.GetInt(s, "width", c.width);
  c.height = ini.GetInt(s, "height", c.height);
  c.cell_count_range.first = ini.GetInt(s, "min_cells", c.cell_count_range.first);
  c.cell_count_range.second = ini.GetInt(s, "max_cells", c.cell_count_range.second);
  c.radius_range.first = ini.GetDouble(s, "min_radius", c.radius_range.first);
  c.radius_range.second = ini.GetDouble(s, "max_radius", c.radius_range.second);
  c.eccentricity_range.first = ini.GetDouble(s, "min_eccentricity", c.eccentricity_range.first);
  c.eccentricity_range.second = ini.GetDouble(s, "max_eccentricity", c.eccentricity_range.second);
  c.rim_darkness = ini.GetDouble(s, "rim_darkness", c.rim_darkness);
  c.interior_brightness = ini.GetDouble(s, "interior_brightness", c.interior_brightness);
  c.halo_width = ini.GetDouble(s, "halo_width", c.halo_width);
  c.background_level = ini.GetDouble(s, "background_level", c.background_level);
  c.noise_sigma = ini.GetDouble(s, "noise_sigma", c.noise_sigma);
  c.overlap_allowed = ini.GetBool(s, "overlap_allowed", c.overlap_allowed);
  c.seed = ini.GetU64(s, "seed", c.seed);
  c.Validate();
  return c;
}

UNetConfig UNetConfigFrom(const IniConfig& ini, const std::string& s) {
  UNetConfig c;
  c.block_channels = ini.GetInts(s, "block_channels", c.block_channels);
  c.time_embed_dim = ini.GetInt(s, "time_embed_dim", c.time_embed_dim);
  c.attention = ini.GetBool(s, "attention", c.attention);
  c.Validate();
  return c;
}

SamplerConfig SamplerConfigFrom(const IniConfig& ini, const std::string& s, SamplerConfig c) {
  if (ini.Has(s, "kind")) c.kind = ParseSamplerKind(ini.Get(s, "kind", ""));
  if (ini.Has(s, "spacing")) c.spacing = ParseSpacing(ini.Get(s, "spacing", ""));
  c.steps = ini.GetInt(s, "steps", c.steps);
  c.eta = ini.GetDouble(s, "eta", c.eta);
  if (ini.Has(s, "prediction") && ini.Get(s, "prediction", "") != "epsilon") {
    throw ConfigError(s + ".prediction: only epsilon prediction is supported");
  }
  return c;
}

TrainConfig TrainConfigFrom(const IniConfig& ini, const std::string& s) {
  TrainConfig c;
  c.lr = ini.GetDouble(s, "lr", c.lr);
  c.weight_decay = ini.GetDouble(s, "weight_decay", c.weight_decay);
  c.batch_size = ini.GetInt(s, "batch_size", c.batch_size);
  c.epochs = ini.GetInt(s, "epochs", c.epochs);
  c.ema_decay = ini.GetDouble(s, "ema_decay", c.ema_decay);
  c.ema_warmup = ini.GetBool(s, "ema_warmup", c.ema_warmup);
  c.fid_every_epochs = ini.GetInt(s, "fid_every_epochs", c.fid_every_epochs);
  c.fid_samples = ini.GetInt(s, "fid_samples", c.fid_samples);
  c.fid_sampler = SamplerConfigFrom(ini, s + ".fid_sampler", c.fid_sampler);
  c.seed = ini.GetU64(s, "seed", c.seed);
  c.Validate();
  return c;
}

DetectorConfig DetectorConfigFrom(const IniConfig& ini, const std::string& s) {
  DetectorConfig c;
  c.stride = ini.GetInt(s, "stride", c.stride);
  c.channels = ini.GetInts(s, "channels", c.channels);
  c.conf_thresh = ini.GetDouble(s, "conf_thresh", c.conf_thresh);
  c.nms_iou = ini.GetDouble(s, "nms_iou", c.nms_iou);
  c.eval_conf = ini.GetDouble(s, "eval_conf", c.eval_conf);
  c.epochs = ini.GetInt(s, "epochs", c.epochs);
  c.patience = ini.GetInt(s, "patience", c.patience);
  c.batch_size = ini.GetInt(s, "batch_size", c.batch_size);
  c.lr = ini.GetDouble(s, "lr", c.lr);
  c.weight_decay = ini.GetDouble(s, "weight_decay", c.weight_decay);
  c.size_weight = ini.GetDouble(s, "size_weight", c.size_weight);
  c.offset_weight = ini.GetDouble(s, "offset_weight", c.offset_weight);
  c.mosaic_prob = ini.GetDouble(s, "mosaic_prob", c.mosaic_prob);
  c.augment.hflip = ini.GetBool(s, "hflip", c.augment.hflip);
  c.augment.vflip = ini.GetBool(s, "vflip", c.augment.vflip);
  c.augment.intensity_jitter = ini.GetBool(s, "intensity_jitter", c.augment.intensity_jitter);
  c.augment.mosaic = ini.GetBool(s, "mosaic", c.augment.mosaic);
  c.augment.mixup = ini.GetBool(s, "mixup", c.augment.mixup);
  c.Validate();
  return c;
}

SampleParams SampleParamsFrom(const IniConfig& ini, const std::string& s,
                              const std::string& sampler_section) {
  SampleParams p;
  p.side = ini.GetInt(s, "side", p.side);
  p.count = ini.GetInt(s, "count", p.count);
  p.batch = ini.GetInt(s, "batch", p.batch);
  p.min_steps = ini.GetInt(s, "min_steps", p.min_steps);
  p.max_steps = ini.GetInt(s, "max_steps", p.max_steps);
  p.use_ema = ini.GetBool(s, "use_ema", p.use_ema);
  p.seed = ini.GetU64(s, "seed", p.seed);
  p.sampler = SamplerConfigFrom(ini, sampler_section, p.sampler);
  if (p.count <= 0 || p.batch <= 0 || p.min_steps <= 0 || p.max_steps < p.min_steps) {
    throw ConfigError("[" + s + "] needs count, batch > 0 and 0 < min_steps <= max_steps");
  }
  return p;
}

DeskExperimentConfig DeskExperimentConfigFrom(const IniConfig& ini) {
  DeskExperimentConfig c;
  c.seed = ini.GetU64("experiment", "seed", c.seed);
  c.subwell_images = ini.GetInt("experiment", "subwell_images", c.subwell_images);
  c.real_images = ini.GetInt("experiment", "real_images", c.real_images);
  c.train_n = ini.GetInt("experiment", "train", c.train_n);
  c.val_n = ini.GetInt("experiment", "val", c.val_n);
  c.test_n = ini.GetInt("experiment", "test", c.test_n);
  c.labeler_conf = ini.GetDouble("experiment", "labeler_conf", c.labeler_conf);
  c.subwell.phantom = PhantomConfigFrom(ini, "subwell", c.subwell.phantom);
  c.subwell.edge_fraction = ini.GetDouble("subwell", "edge_fraction", c.subwell.edge_fraction);
  c.real_phantom = PhantomConfigFrom(ini, "phantom", c.real_phantom);
  c.patchify.patch_size = ini.GetInt("patchify", "patch_size", c.patchify.patch_size);
  c.patchify.dark_thresh = ini.GetDouble("patchify", "dark_thresh", c.patchify.dark_thresh);
  c.patchify.area_frac = ini.GetDouble("patchify", "area_frac", c.patchify.area_frac);
  c.patchify.train_count = ini.GetInt("patchify", "train_count", c.patchify.train_count);
  c.unet = UNetConfigFrom(ini, "unet");
  c.diffusion = TrainConfigFrom(ini, "train");
  c.sample = SampleParamsFrom(ini, "sample", "sampler");
  c.detector = DetectorConfigFrom(ini, "detector");
  if (c.train_n <= 0 || c.val_n <= 0 || c.test_n <= 0 ||
      c.train_n + c.val_n + c.test_n > c.real_images) {
    throw ConfigError("[experiment] split sizes must be positive and fit in real_images");
  }
  return c;
}

void WriteRunRecord(const fs::path& dir, const std::string& stage, const IniConfig& config,
                    const std::vector<std::pair<std::string, std::string>>& extra) {
  std::string text = "version=" + std::string(kVersion) + "\nstage=" + stage +
                     "\nconfig_hash=" + config.Hash() + "\n";
  for (const auto& [k, v] : extra) text += k + "=" + v + "\n";
  text += "--- config ---\n" + config.Serialize();
  WriteTextFile(dir / "run_record.txt", text);
}

std::string FormatFixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
  return buf;
}

SubwellConfig DefaultSubwellConfig() {
  SubwellConfig c;
  c.phantom = DeskPhantomConfig();
  c.phantom.width = 160;
  c.phantom.height = 160;
  c.phantom.cell_count_range = {40, 60};
  c.phantom.seed = 101;
  return c;
}

DatasetManifest GenerateSubwellImages(const SubwellConfig& config, int n,
                                      const fs::path& out_dir) {
  config.phantom.Validate();
  if (n < 0) throw ConfigError("image count must be >= 0");
  if (!(config.edge_fraction >= 0.0 && config.edge_fraction <= 1.0)) {
    throw ConfigError("edge_fraction must lie in [0,1]");
  }
  EnsureDir(out_dir);
  const fs::path root = fs::absolute(out_dir).lexically_normal();
  DatasetManifest manifest{"subwell", config.phantom.seed, {}};
  const uint64_t edge_seed = DeriveSeed(config.phantom.seed, 0xED6E);
  const double side = std::min(config.phantom.width, config.phantom.height);
  for (int i = 0; i < n; ++i) {
    Image img = GenerateSample(config.phantom, DeriveSeed(config.phantom.seed, i)).brightfield;
    Rng rng(DeriveSeed(edge_seed, i));
    if (rng.Uniform() < config.edge_fraction) {
      // A large circle whose rim crosses the frame at offset o from its center.
      const double theta = rng.Uniform(0.0, 2.0 * std::numbers::pi);
      const double o = rng.Uniform(-0.3, 0.4) * side;
      const double radius = rng.Uniform(200.0, 400.0);
      const double ux = std::cos(theta);
      const double uy = std::sin(theta);
      WellEdgeArc arc;
      arc.cx = 0.5 * config.phantom.width + (o + radius) * ux;
      arc.cy = 0.5 * config.phantom.height + (o + radius) * uy;
      arc.radius = radius;
      arc.thickness = rng.Uniform(3.0, 5.0);
      arc.darkness = rng.Uniform(0.75, 0.9);
      img = AddWellEdge(img, arc);
    }
    char name[32];
    std::snprintf(name, sizeof(name), "sw_%05d.pgm", i);
    WritePgm(root / name, img);
    manifest.records.push_back({root / name, Source::kReal, Split::kPool, {}});
  }
  WriteManifest(root / "subwell.manifest", manifest);
  return manifest;
}

std::vector<Image> LoadImages(const DatasetManifest& manifest) {
  std::vector<Image> out;
  out.reserve(manifest.records.size());
  for (const ManifestRecord& r : manifest.records) out.push_back(ReadPgm(r.image));
  return out;
}

PatchifyOutput PatchifyStage(const DatasetManifest& sources, const PatchifyParams& params,
                             const fs::path& out_dir) {
  EnsureDir(out_dir / "patches");
  const fs::path root = fs::absolute(out_dir).lexically_normal();
  PatchifyOutput out;
  std::vector<PatchManifestEntry> entries;
  std::vector<fs::path> clean;
  for (const ManifestRecord& r : sources.records) {
    const std::string id = r.image.stem().string();
    for (const PatchRecord& p : ExtractPatches(ReadPgm(r.image), params.patch_size, id)) {
      const WellEdgeResult edge = DetectWellEdge(p.patch, params.dark_thresh, params.area_frac);
      char name[96];
      std::snprintf(name, sizeof(name), "%s_%03d_%03d.pgm", id.c_str(), p.x, p.y);
      const fs::path file = root / "patches" / name;
      WritePgm(file, p.patch);
      entries.push_back({id, p.x, p.y, edge.flag, edge.score, "patches/" + std::string(name)});
      ++out.total;
      if (edge.flag) {
        ++out.flagged;
      } else {
        clean.push_back(file);
      }
    }
  }
  const std::vector<fs::path> train =
      SampleFiltered(clean, static_cast<size_t>(params.train_count), params.seed);
  std::vector<bool> used(clean.size(), false);
  out.train = {"diffusion_train", params.seed, {}};
  out.heldout = {"diffusion_heldout", params.seed, {}};
  for (const fs::path& p : train) {
    out.train.records.push_back({p, Source::kReal, Split::kTrain, {}});
  }
  std::vector<fs::path> sorted_train = train;
  std::sort(sorted_train.begin(), sorted_train.end());
  for (const fs::path& p : clean) {
    if (!std::binary_search(sorted_train.begin(), sorted_train.end(), p)) {
      out.heldout.records.push_back({p, Source::kReal, Split::kPool, {}});
    }
  }
  WriteTextFile(root / "patches.tsv", FormatPatchManifest(entries));
  WriteManifest(root / "train.manifest", out.train);
  WriteManifest(root / "heldout.manifest", out.heldout);
  return out;
}

DiffusionOutput TrainDiffusionStage(const DatasetManifest& train, const DatasetManifest& heldout,
                                    const UNetConfig& unet, const TrainConfig& config,
                                    const fs::path& out_dir, const LogFn& log) {
  EnsureDir(out_dir);
  DiffusionOutput out;
  const NoiseSchedule schedule = MakeSchedule();
  out.train = TrainDenoiser(LoadImages(train), unet, config, LoadImages(heldout), out_dir,
                            schedule, {}, log);
  std::string fid_csv = "epoch,fid\n";
  if (!heldout.records.empty()) fid_csv += "0," + FormatFixed(out.train.initial_fid, 6) + "\n";
  std::vector<double> fids;
  for (const FidPoint& p : out.train.fid_curve) {
    fid_csv += std::to_string(p.epoch) + "," + FormatFixed(p.fid, 6) + "\n";
    fids.push_back(p.fid);
  }
  std::string loss_csv = "step,loss\n";
  for (size_t i = 0; i < out.train.loss_curve.size(); ++i) {
    loss_csv += std::to_string(i + 1) + "," + FormatFixed(out.train.loss_curve[i], 6) + "\n";
  }
  WriteTextFile(out_dir / "fid_curve.csv", fid_csv);
  WriteTextFile(out_dir / "loss_curve.csv", loss_csv);
  if (fids.empty()) {
    // No evaluation happened; the initial checkpoint is the only candidate.
    out.selected = 0;
    out.selected_fid = out.train.initial_fid;
  } else {
    out.selected = SelectModel(fids) + 1;
    out.selected_fid = fids[out.selected - 1];
  }
  out.selected_checkpoint = out.train.checkpoints.at(out.selected);
  WriteTextFile(out_dir / "selected.txt",
                "checkpoint=" + out.selected_checkpoint.filename().string() +
                    "\nepoch=" + std::to_string(out.train.checkpoint_epochs.at(out.selected)) +
                    "\nfid=" + FormatFixed(out.selected_fid, 6) +
                    "\ninitial_fid=" + FormatFixed(out.train.initial_fid, 6) + "\n");
  return out;
}

SampleOutput SampleStage(const DenoiserCheckpoint& checkpoint, const SampleParams& params,
                         const fs::path& out_dir) {
  if (params.count < 0 || params.batch < 1 || params.side < 1) throw ConfigError("bad sample count, batch or side");
  if (params.min_steps < 1 || params.min_steps > params.max_steps) {
    throw ConfigError("step range must satisfy 1 <= min <= max");
  }
  EnsureDir(out_dir);
  const fs::path root = fs::absolute(out_dir).lexically_normal();
  const NoiseSchedule schedule = MakeSchedule();
  UNetDenoiser denoiser(params.use_ema ? checkpoint.ema : checkpoint.params, checkpoint.unet);
  Rng step_rng(DeriveSeed(params.seed, 0));
  SampleOutput out;
  out.synthetic = {"synthetic", params.seed, {}};
  std::string steps_log;
  int index = 0;
  for (int start = 0, b = 0; start < params.count; start += params.batch, ++b) {
    const int n = std::min(params.batch, params.count - start);
    SamplerConfig sampler = params.sampler;
    sampler.steps = static_cast<int>(step_rng.UniformInt(params.min_steps, params.max_steps));
    out.batch_steps.push_back(sampler.steps);
    steps_log += "batch " + std::to_string(b) + " steps " + std::to_string(sampler.steps) + "\n";
    nn::Tensor x = Sample(denoiser, sampler, schedule, {n, 1, params.side, params.side},
                          DeriveSeed(params.seed, 1 + static_cast<uint64_t>(b)));
    for (const Image& img : nn::BatchToImages(x)) {
      char name[32];
      std::snprintf(name, sizeof(name), "syn_%05d.pgm", index++);
      WritePgm(root / name, img);
      out.synthetic.records.push_back({root / name, Source::kSynthetic, Split::kPool, {}});
    }
  }
  WriteTextFile(root / "steps.log", steps_log);
  WriteManifest(root / "synthetic.manifest", out.synthetic);
  return out;
}

DatasetManifest AutolabelStage(const DatasetManifest& brightfield,
                               const DatasetManifest& fluorescence, BinarizeMethod method,
                               double min_area) {
  if (brightfield.records.size() != fluorescence.records.size()) {
    throw InputError("brightfield and fluorescence manifests differ in length");
  }
  DatasetManifest out = brightfield;
  out.name = brightfield.name + "_autolabel";
  for (size_t i = 0; i < out.records.size(); ++i) {
    out.records[i].boxes =
        AutolabelFluorescence(ReadPgm(fluorescence.records[i].image), method, min_area);
  }
  return out;
}

DatasetManifest ModelAssistStage(const DetectorModel& model, const DatasetManifest& images,
                                 double conf_thresh, const std::string& review_text,
                                 const fs::path& out_dir) {
  // Review ids are paths relative to the output directory, as in manifests.
  std::vector<LabeledImage> items;
  for (const ManifestRecord& r : images.records) {
    const std::string id = out_dir.empty() ? r.image.string()
                                           : r.image.lexically_proximate(out_dir).string();
    items.push_back({id, ReadPgm(r.image)});
  }
  std::vector<LabelRecord> drafts = ModelAssistedLabel(&model, items, conf_thresh);
  if (!out_dir.empty()) WriteTextFile(out_dir / "review_draft.tsv", FormatReviewFile(drafts));
  const std::vector<LabelRecord> reviewed =
      ApplyReview(std::move(drafts), ParseReviewFile(review_text));
  DatasetManifest out = images;
  out.name = images.name + "_labeled";
  for (size_t i = 0; i < out.records.size(); ++i) {
    std::vector<BBox> boxes = reviewed[i].boxes;
    for (BBox& b : boxes) b.score.reset();
    out.records[i].boxes = std::move(boxes);
  }
  if (!out_dir.empty()) WriteManifest(out_dir / "labeled.manifest", out);
  return out;
}

std::vector<DatasetManifest> MixStage(const DatasetManifest& real_labeled,
                                      const DatasetManifest& synthetic_labeled, int train_n,
                                      int val_n, int test_n, uint64_t seed,
                                      const fs::path& out_dir) {
  const DatasetManifest base =
      SplitDataset(real_labeled, train_n, val_n, test_n, DeriveSeed(seed, 0), "scc_real");
  std::vector<DatasetManifest> sets =
      BuildExperimentDatasets(base, synthetic_labeled.records, DeriveSeed(seed, 1));
  if (!out_dir.empty()) {
    EnsureDir(out_dir);
    for (const DatasetManifest& m : sets) WriteManifest(out_dir / (m.name + ".manifest"), m);
  }
  return sets;
}

EvalResult EvaluateStage(const DetectorModel& model, const DatasetManifest& manifest,
                         Split split) {
  const std::vector<DetectionSample> samples = LoadSamples(manifest, split);
  if (samples.empty()) throw InputError("no records in the " + std::string(ToString(split)) +
                                        " split of " + manifest.name);
  return MapSuite(PredictAll(model, samples, model.config.eval_conf), GroundTruth(samples));
}

std::vector<std::pair<std::string, EvalResult>> ReadMetricsFiles(
    const std::vector<fs::path>& files) {
  std::vector<std::pair<std::string, EvalResult>> rows;
  for (const fs::path& f : files) {
    std::istringstream in(ReadTextFile(f));
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line.rfind("dataset,", 0) == 0) continue;
      std::vector<std::string> cols;
      std::stringstream ss(line);
      std::string c;
      while (std::getline(ss, c, ',')) cols.push_back(c);
      if (cols.size() != 4) throw InputError(f.string() + ": bad metrics row '" + line + "'");
      EvalResult r;
      try {
        r.map50 = std::stod(cols[1]);
        r.map75 = std::stod(cols[2]);
        r.map5095 = std::stod(cols[3]);
      } catch (const std::exception&) {
        throw InputError(f.string() + ": bad metrics row '" + line + "'");
      }
      rows.emplace_back(cols[0], r);
    }
  }
  return rows;
}

namespace {

std::string ExactDouble(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Completion markers live in <out>/stages/<name>.done as a one-section INI.
class StageMarkers {
 public:
  StageMarkers(const fs::path& out_dir, const ExperimentOptions& options)
      : dir_(out_dir / "stages"), options_(options), valid_(options.resume) {}

  // The marker for `name` when resuming and every earlier stage was reused.
  std::optional<IniConfig> Reuse(const std::string& name) {
    if (!valid_) return std::nullopt;
    const fs::path path = dir_ / (name + ".done");
    if (fs::exists(path)) {
      IniConfig ini = IniConfig::Load(path);
      if (ini.Get("stage", "fingerprint", "") == options_.fingerprint) return ini;
    }
    valid_ = false;
    return std::nullopt;
  }

  void Done(const std::string& name, std::vector<std::pair<std::string, std::string>> fields) {
    EnsureDir(dir_);
    std::string text = "[stage]\nfingerprint = " + options_.fingerprint + "\n";
    for (const auto& [k, v] : fields) text += k + " = " + v + "\n";
    WriteTextFile(dir_ / (name + ".done"), text);
  }

 private:
  fs::path dir_;
  ExperimentOptions options_;
  bool valid_;
};

std::string JoinInts(const std::vector<int>& v) {
  std::string out;
  for (size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

}  // namespace

DeskExperimentResult RunDeskExperiment(const DeskExperimentConfig& config,
                                       const fs::path& out_dir, const LogFn& log,
                                       const ExperimentOptions& options) {
  auto say = [&](const std::string& s) {
    if (log) log(s);
  };
  EnsureDir(out_dir);
  DeskExperimentResult res;
  StageMarkers stages(out_dir, options);

  if (auto done = stages.Reuse("diffusion")) {
    say("[1-2/7] reusing patches and diffusion checkpoints");
    res.diffusion.selected = static_cast<size_t>(done->GetInt("stage", "selected", 0));
    res.diffusion.selected_fid = done->GetDouble("stage", "selected_fid", 0.0);
    res.diffusion.train.initial_fid = done->GetDouble("stage", "initial_fid", 0.0);
    res.diffusion.selected_checkpoint =
        out_dir / "diffusion" / done->Get("stage", "checkpoint", "");
  } else {
    say("[1/7] unlabeled frames and patches");
    SubwellConfig subwell = config.subwell;
    subwell.phantom.seed = DeriveSeed(config.seed, 10);
    const DatasetManifest frames =
        GenerateSubwellImages(subwell, config.subwell_images, out_dir / "subwell");
    PatchifyParams pp = config.patchify;
    pp.seed = DeriveSeed(config.seed, 11);
    const PatchifyOutput patches = PatchifyStage(frames, pp, out_dir / "patches");
    say("  patches " + std::to_string(patches.total) + ", well-edge flagged " +
        std::to_string(patches.flagged) + ", held out " +
        std::to_string(patches.heldout.records.size()));

    say("[2/7] diffusion training");
    TrainConfig tc = config.diffusion;
    tc.seed = DeriveSeed(config.seed, 12);
    const auto train_start = std::chrono::steady_clock::now();
    res.diffusion = TrainDiffusionStage(patches.train, patches.heldout, config.unet, tc,
                                        out_dir / "diffusion", log);
    res.diffusion_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - train_start).count();
    stages.Done("diffusion",
                {{"selected", std::to_string(res.diffusion.selected)},
                 {"selected_fid", ExactDouble(res.diffusion.selected_fid)},
                 {"initial_fid", ExactDouble(res.diffusion.train.initial_fid)},
                 {"checkpoint", res.diffusion.selected_checkpoint.filename().string()}});
  }
  say("  initial fid " + FormatFixed(res.diffusion.train.initial_fid, 4) + ", selected fid " +
      FormatFixed(res.diffusion.selected_fid, 4));

  if (auto done = stages.Reuse("sample")) {
    say("[3/7] reusing samples");
    res.sample.synthetic = ReadManifest(out_dir / "synthetic" / "synthetic.manifest");
    res.sample.batch_steps = done->GetInts("stage", "steps", {});
  } else {
    say("[3/7] sampling");
    SampleParams sp = config.sample;
    sp.side = config.patchify.patch_size;
    sp.seed = DeriveSeed(config.seed, 13);
    res.sample = SampleStage(LoadDenoiserCheckpoint(res.diffusion.selected_checkpoint), sp,
                             out_dir / "synthetic");
    stages.Done("sample", {{"steps", JoinInts(res.sample.batch_steps)}});
  }

  DatasetManifest real_labeled;
  if (stages.Reuse("real")) {
    say("[4/7] reusing labeled real phantoms");
    real_labeled = ReadManifest(out_dir / "real" / "autolabel.manifest");
  } else {
    say("[4/7] labeled real phantoms");
    PhantomConfig pc = config.real_phantom;
    pc.seed = DeriveSeed(config.seed, 14);
    const PhantomDataset real = GenerateDataset(pc, config.real_images, out_dir / "real");
    real_labeled = AutolabelStage(real.brightfield, real.fluorescence, BinarizeMethod::Otsu(),
                                  kDefaultMinArea);
    real_labeled.name = "real_autolabel";
    WriteManifest(out_dir / "real" / "autolabel.manifest", real_labeled);
    stages.Done("real", {});
  }

  // Same seeding as MixStage(mix_seed), so the mix command reproduces these sets.
  const uint64_t mix_seed = DeriveSeed(config.seed, 15);
  const DatasetManifest base = SplitDataset(real_labeled, config.train_n, config.val_n,
                                            config.test_n, DeriveSeed(mix_seed, 0), "scc_real");
  const uint64_t det_seed = DeriveSeed(config.seed, 16);
  EnsureDir(out_dir / "detectors");
  // Only best_epoch and epochs_run survive a resume; per-epoch curves do not.
  auto history_fields = [](const TrainingHistory& h) {
    return std::vector<std::pair<std::string, std::string>>{
        {"best_epoch", std::to_string(h.best_epoch)},
        {"epochs_run", std::to_string(h.epochs_run)}};
  };
  auto history_from = [](const IniConfig& ini) {
    TrainingHistory h;
    h.best_epoch = ini.GetInt("stage", "best_epoch", 0);
    h.epochs_run = ini.GetInt("stage", "epochs_run", 0);
    return h;
  };

  DetectorModel labeler;
  TrainingHistory base_hist;
  DatasetManifest synth_labeled;
  if (auto done = stages.Reuse("labeler")) {
    say("[5/7] reusing baseline detector and model-assisted labels");
    labeler = LoadDetector(out_dir / "detectors" / "scc_real.bin");
    base_hist = history_from(*done);
    synth_labeled = ReadManifest(out_dir / "synthetic" / "labeled.manifest");
  } else {
    say("[5/7] baseline detector and model-assisted labels");
    labeler = TrainDetector(base, config.detector, det_seed, &base_hist, log);
    SaveDetector(out_dir / "detectors" / "scc_real.bin", labeler);
    synth_labeled = ModelAssistStage(labeler, res.sample.synthetic, config.labeler_conf, "",
                                     out_dir / "synthetic");
    stages.Done("labeler", history_fields(base_hist));
  }

  say("[6/7] datasets");
  res.datasets = BuildExperimentDatasets(base, synth_labeled.records, DeriveSeed(mix_seed, 1));
  EnsureDir(out_dir / "datasets");
  for (const DatasetManifest& m : res.datasets) {
    WriteManifest(out_dir / "datasets" / (m.name + ".manifest"), m);
  }

  say("[7/7] detectors");
  EnsureDir(out_dir / "metrics");
  for (const DatasetManifest& m : res.datasets) {
    DetectorModel model = labeler;
    TrainingHistory hist = base_hist;
    if (m.name != "scc_real") {
      const fs::path bin = out_dir / "detectors" / (m.name + ".bin");
      if (auto done = stages.Reuse("detector_" + m.name)) {
        model = LoadDetector(bin);
        hist = history_from(*done);
      } else {
        model = TrainDetector(m, config.detector, det_seed, &hist);
        SaveDetector(bin, model);
        stages.Done("detector_" + m.name, history_fields(hist));
      }
    }
    const EvalResult r = EvaluateStage(model, m, Split::kTest);
    res.metrics.emplace_back(m.name, r);
    res.histories.push_back(hist);
    WriteTextFile(out_dir / "metrics" / (m.name + ".csv"), FormatMetricsCsv({{m.name, r}}));
    say("  " + m.name + " epochs " + std::to_string(hist.epochs_run) + " best " +
        std::to_string(hist.best_epoch) + " mAP@50 " + FormatFixed(r.map50, 4));
  }
  res.table = FormatMetricsTable(res.metrics);
  res.csv = FormatMetricsCsv(res.metrics);
  WriteTextFile(out_dir / "report.txt", res.table);
  WriteTextFile(out_dir / "report.csv", res.csv);
  return res;
}

}  // namespace brightsynth
