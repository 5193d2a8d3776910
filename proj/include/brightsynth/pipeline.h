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
#ifndef BRIGHTSYNTH_PIPELINE_H_
#define BRIGHTSYNTH_PIPELINE_H_

// Stage functions shared by the command line tool and the end-to-end
// experiment, plus the plain-text configuration format.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "brightsynth/autolabel.h"
#include "brightsynth/dataset_mix.h"
#include "brightsynth/denoiser_train.h"
#include "brightsynth/detector.h"
#include "brightsynth/diffusion.h"
#include "brightsynth/eval_map.h"
#include "brightsynth/log.h"
#include "brightsynth/manifest.h"
#include "brightsynth/patchify.h"
#include "brightsynth/phantom.h"
#include "brightsynth/unet.h"

namespace brightsynth {

inline constexpr char kVersion[] = "brightsynth 1.0.0";

// INI-style "[section]" headers and "key = value" lines; '#' and ';' start
// comments. Keys outside any section land in section "".
class IniConfig {
 public:
  static IniConfig Parse(const std::string& text);
  static IniConfig Load(const std::filesystem::path& path);

  void Set(const std::string& section, const std::string& key, const std::string& value);
  // "section.key=value"
  void ApplyOverride(const std::string& assignment);
  bool Has(const std::string& section, const std::string& key) const;

  std::string Get(const std::string& section, const std::string& key,
                  const std::string& fallback) const;
  int GetInt(const std::string& section, const std::string& key, int fallback) const;
  uint64_t GetU64(const std::string& section, const std::string& key, uint64_t fallback) const;
  double GetDouble(const std::string& section, const std::string& key, double fallback) const;
  bool GetBool(const std::string& section, const std::string& key, bool fallback) const;
  std::vector<int> GetInts(const std::string& section, const std::string& key,
                           const std::vector<int>& fallback) const;

  // Sorted, normalized text; equal configs serialize identically.
  std::string Serialize() const;
  // FNV-1a 64 of Serialize(), as 16 hex digits.
  std::string Hash() const;

 private:
  std::map<std::string, std::map<std::string, std::string>> sections_;
};

PhantomConfig PhantomConfigFrom(const IniConfig& ini, const std::string& section,
                                PhantomConfig base);
UNetConfig UNetConfigFrom(const IniConfig& ini, const std::string& section);
TrainConfig TrainConfigFrom(const IniConfig& ini, const std::string& section);
SamplerConfig SamplerConfigFrom(const IniConfig& ini, const std::string& section,
                                SamplerConfig base);
DetectorConfig DetectorConfigFrom(const IniConfig& ini, const std::string& section);

// run_record.txt: version, stage, config hash, the config itself and any
// extra key=value lines (seeds, counts).
void WriteRunRecord(const std::filesystem::path& dir, const std::string& stage,
                    const IniConfig& config,
                    const std::vector<std::pair<std::string, std::string>>& extra = {});

std::string FormatFixed(double value, int decimals);

// --- Stages -----------------------------------------------------------------

struct SubwellConfig {
  PhantomConfig phantom;
  // Fraction of frames crossed by a dark well-edge arc.
  double edge_fraction = 0.3;
};

// Large desk-style frames (160x160, 40-60 cells) standing in for unlabeled
// whole-well acquisitions.
SubwellConfig DefaultSubwellConfig();

// Writes sw_NNNNN.pgm and subwell.manifest (real, pool, no boxes).
DatasetManifest GenerateSubwellImages(const SubwellConfig& config, int n,
                                      const std::filesystem::path& out_dir);

struct PatchifyParams {
  int patch_size = 32;
  double dark_thresh = kDefaultDarkThresh;
  double area_frac = kDefaultEdgeAreaFrac;
  int train_count = 500;
  uint64_t seed = 1;
};

struct PatchifyOutput {
  DatasetManifest train;    // sampled clean patches (split train)
  DatasetManifest heldout;  // remaining clean patches (split pool)
  int total = 0;
  int flagged = 0;
};

// Tiles every source, drops well-edge patches, samples train_count clean
// patches and keeps the rest as a held-out reference. Writes patch files,
// patches.tsv, train.manifest and heldout.manifest.
PatchifyOutput PatchifyStage(const DatasetManifest& sources, const PatchifyParams& params,
                             const std::filesystem::path& out_dir);

std::vector<Image> LoadImages(const DatasetManifest& manifest);

// Writes fid_curve.csv, loss_curve.csv and selected.txt next to the
// checkpoints.
struct DiffusionOutput {
  TrainResult train;
  size_t selected = 0;  // index into train.checkpoints
  double selected_fid = 0.0;
  std::filesystem::path selected_checkpoint;
};
DiffusionOutput TrainDiffusionStage(const DatasetManifest& train, const DatasetManifest& heldout,
                                    const UNetConfig& unet, const TrainConfig& config,
                                    const std::filesystem::path& out_dir,
                                    const LogFn& log = nullptr);

struct SampleParams {
  int side = 32;
  int count = 250;
  int batch = 16;
  int min_steps = 35;
  int max_steps = 40;
  SamplerConfig sampler;  // steps replaced per batch
  bool use_ema = true;
  uint64_t seed = 1;
};

struct SampleOutput {
  DatasetManifest synthetic;
  std::vector<int> batch_steps;
};

// Writes syn_NNNNN.pgm, synthetic.manifest (synthetic, pool, no boxes) and
// steps.log with one "batch <i> steps <n>" line per batch.
SampleParams SampleParamsFrom(const IniConfig& ini, const std::string& section,
                              const std::string& sampler_section);

SampleOutput SampleStage(const DenoiserCheckpoint& checkpoint, const SampleParams& params,
                         const std::filesystem::path& out_dir);

// Boxes for each brightfield record from the fluorescence record at the same
// position.
DatasetManifest AutolabelStage(const DatasetManifest& brightfield,
                               const DatasetManifest& fluorescence, BinarizeMethod method,
                               double min_area);

// Draft boxes from the detector, an optional review applied on top.
// Writes review_draft.tsv and labeled.manifest when out_dir is set.
DatasetManifest ModelAssistStage(const DetectorModel& model, const DatasetManifest& images,
                                 double conf_thresh, const std::string& review_text,
                                 const std::filesystem::path& out_dir);

// Split plus the six mixes; writes <name>.manifest for each.
std::vector<DatasetManifest> MixStage(const DatasetManifest& real_labeled,
                                      const DatasetManifest& synthetic_labeled, int train_n,
                                      int val_n, int test_n, uint64_t seed,
                                      const std::filesystem::path& out_dir);

EvalResult EvaluateStage(const DetectorModel& model, const DatasetManifest& manifest,
                         Split split = Split::kTest);

// Rows of FormatMetricsCsv files (mAP columns only).
std::vector<std::pair<std::string, EvalResult>> ReadMetricsFiles(
    const std::vector<std::filesystem::path>& files);

// --- End-to-end desk experiment ---------------------------------------------

struct DeskExperimentConfig {
  uint64_t seed = 7;
  SubwellConfig subwell = DefaultSubwellConfig();
  int subwell_images = 40;
  PatchifyParams patchify;
  PhantomConfig real_phantom = DeskPhantomConfig();
  int real_images = 1000;
  int train_n = 500;
  int val_n = 200;
  int test_n = 300;
  UNetConfig unet;
  TrainConfig diffusion;
  SampleParams sample;
  DetectorConfig detector;
  double labeler_conf = 0.3;
};

struct DeskExperimentResult {
  DiffusionOutput diffusion;
  double diffusion_seconds = 0.0;  // wall time, not written to disk
  SampleOutput sample;
  std::vector<DatasetManifest> datasets;
  std::vector<std::pair<std::string, EvalResult>> metrics;
  std::vector<TrainingHistory> histories;
  std::string table;
  std::string csv;
};

// Reads [experiment], [phantom], [patchify], [unet], [train], [sample],
// [sampler] and [detector] over the defaults above.
DeskExperimentConfig DeskExperimentConfigFrom(const IniConfig& ini);

struct ExperimentOptions {
  // Reuse stages whose completion marker carries the same fingerprint. Once
  // one stage reruns, every later stage reruns too.
  bool resume = false;
  std::string fingerprint;  // e.g. IniConfig::Hash() of the run config
};

// Writes stages/<name>.done after each expensive stage. diffusion_seconds is
// zero when the diffusion stage was reused.
DeskExperimentResult RunDeskExperiment(const DeskExperimentConfig& config,
                                       const std::filesystem::path& out_dir,
                                       const LogFn& log = nullptr,
                                       const ExperimentOptions& options = {});

}  // namespace brightsynth

#endif  // BRIGHTSYNTH_PIPELINE_H_
