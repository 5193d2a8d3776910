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
// Command line driver for the synthetic-brightfield pipeline. Every
// subcommand reads an optional INI config (--config), applies --set
// section.key=value overrides and its own flags (flags win), writes its
// artifacts into --out and leaves a run_record.txt there.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "brightsynth/autolabel.h"
#include "brightsynth/dataset_mix.h"
#include "brightsynth/denoiser_train.h"
#include "brightsynth/detector.h"
#include "brightsynth/errors.h"
#include "brightsynth/eval_map.h"
#include "brightsynth/fid.h"
#include "brightsynth/manifest.h"
#include "brightsynth/phantom.h"
#include "brightsynth/pipeline.h"
#include "brightsynth/rng.h"
#include "brightsynth/runtime.h"
#include "brightsynth/survey_server.h"

namespace bs = brightsynth;
namespace fs = std::filesystem;

namespace {

struct Binding {
  CLI::Option* option;
  std::string section;
  std::string key;
  std::shared_ptr<std::string> value;
};

struct Command {
  CLI::App* app = nullptr;
  std::string config;
  std::vector<std::string> sets;
  std::string out;
  std::vector<Binding> bindings;

  // Flag that maps onto [section] key.
  void Setting(const std::string& flag, const std::string& section, const std::string& key,
               const std::string& help) {
    auto value = std::make_shared<std::string>();
    CLI::Option* opt = app->add_option(flag, *value, help + " ([" + section + "] " + key + ")");
    bindings.push_back({opt, section, key, value});
  }

  bs::IniConfig Resolve() const {
    bs::IniConfig ini = config.empty() ? bs::IniConfig{} : bs::IniConfig::Load(config);
    for (const std::string& s : sets) ini.ApplyOverride(s);
    for (const Binding& b : bindings) {
      if (b.option->count() > 0) ini.Set(b.section, b.key, *b.value);
    }
    return ini;
  }
};

Command MakeCommand(CLI::App& root, const std::string& name, const std::string& help,
                    bool needs_out = true) {
  Command c;
  c.app = root.add_subcommand(name, help);
  c.app->add_option("--config", c.config, "INI config file")->check(CLI::ExistingFile);
  c.app->add_option("--set", c.sets, "Override as section.key=value (repeatable)");
  if (needs_out) c.app->add_option("--out", c.out, "Output directory")->required();
  return c;
}

fs::path RequirePath(const bs::IniConfig& ini, const std::string& section, const std::string& key) {
  const std::string v = ini.Get(section, key, "");
  if (v.empty()) throw bs::ConfigError("missing required input [" + section + "] " + key);
  if (!fs::exists(v)) throw bs::ConfigError("input not found: " + v);
  return v;
}

void Say(const std::string& line) { std::cout << line << std::endl; }

std::string Seed(const bs::IniConfig& ini, const std::string& section) {
  return std::to_string(ini.GetU64(section, "seed", 1));
}

// --- subcommands -------------------------------------------------------------

void RunPhantomGen(const bs::IniConfig& ini, const fs::path& out) {
  const std::string kind = ini.Get("phantom", "kind", "labeled");
  const int count = ini.GetInt("phantom", "count", 1000);
  if (kind == "labeled") {
    const bs::PhantomConfig config =
        bs::PhantomConfigFrom(ini, "phantom", bs::DeskPhantomConfig());
    const bs::PhantomDataset ds = bs::GenerateDataset(config, count, out);
    Say("wrote " + std::to_string(ds.brightfield.records.size()) + " phantom pairs to " +
        out.string());
  } else if (kind == "subwell") {
    bs::SubwellConfig config = bs::DefaultSubwellConfig();
    config.phantom = bs::PhantomConfigFrom(ini, "phantom", config.phantom);
    config.edge_fraction = ini.GetDouble("phantom", "edge_fraction", config.edge_fraction);
    const bs::DatasetManifest m = bs::GenerateSubwellImages(config, count, out);
    Say("wrote " + std::to_string(m.records.size()) + " frames to " + out.string());
  } else {
    throw bs::ConfigError("[phantom] kind must be 'labeled' or 'subwell'");
  }
  bs::WriteRunRecord(out, "phantom-gen", ini, {{"seed", Seed(ini, "phantom")}});
}

void RunPatchify(const bs::IniConfig& ini, const fs::path& out) {
  bs::PatchifyParams p;
  p.patch_size = ini.GetInt("patchify", "patch_size", p.patch_size);
  p.dark_thresh = ini.GetDouble("patchify", "dark_thresh", p.dark_thresh);
  p.area_frac = ini.GetDouble("patchify", "area_frac", p.area_frac);
  p.train_count = ini.GetInt("patchify", "train_count", p.train_count);
  p.seed = ini.GetU64("patchify", "seed", p.seed);
  const bs::PatchifyOutput r =
      bs::PatchifyStage(bs::ReadManifest(RequirePath(ini, "patchify", "input")), p, out);
  Say("patches " + std::to_string(r.total) + ", flagged " + std::to_string(r.flagged) +
      ", train " + std::to_string(r.train.records.size()) + ", held out " +
      std::to_string(r.heldout.records.size()));
  bs::WriteRunRecord(out, "patchify", ini, {{"seed", std::to_string(p.seed)}});
}

void RunTrainDiffusion(const bs::IniConfig& ini, const fs::path& out) {
  const bs::UNetConfig unet = bs::UNetConfigFrom(ini, "unet");
  const bs::TrainConfig train = bs::TrainConfigFrom(ini, "train");
  const bs::DatasetManifest train_set = bs::ReadManifest(RequirePath(ini, "train", "dataset"));
  const bs::DatasetManifest heldout = bs::ReadManifest(RequirePath(ini, "train", "fid_reference"));
  const bs::DiffusionOutput r = bs::TrainDiffusionStage(train_set, heldout, unet, train, out, Say);
  Say("selected " + r.selected_checkpoint.filename().string() + " fid " +
      bs::FormatFixed(r.selected_fid, 4) + " (initial " +
      bs::FormatFixed(r.train.initial_fid, 4) + ")");
  bs::WriteRunRecord(out, "train-diffusion", ini, {{"seed", std::to_string(train.seed)}});
}

void RunSample(const bs::IniConfig& ini, const fs::path& out) {
  const bs::SampleParams p = bs::SampleParamsFrom(ini, "sample", "sampler");
  const bs::DenoiserCheckpoint ckpt =
      bs::LoadDenoiserCheckpoint(RequirePath(ini, "sample", "checkpoint"));
  const bs::SampleOutput r = bs::SampleStage(ckpt, p, out);
  for (size_t b = 0; b < r.batch_steps.size(); ++b) {
    Say("batch " + std::to_string(b) + " steps " + std::to_string(r.batch_steps[b]));
  }
  Say("wrote " + std::to_string(r.synthetic.records.size()) + " images");
  bs::WriteRunRecord(out, "sample", ini, {{"seed", std::to_string(p.seed)}});
}

void RunFid(const bs::IniConfig& ini, const fs::path& out) {
  const auto a = bs::LoadImages(bs::ReadManifest(RequirePath(ini, "fid", "a")));
  const auto b = bs::LoadImages(bs::ReadManifest(RequirePath(ini, "fid", "b")));
  const double fid = bs::Fid(a, b);
  Say("fid " + bs::FormatFixed(fid, 6));
  bs::WriteTextFile(out / "fid.txt", bs::FormatFixed(fid, 6) + "\n");
  bs::WriteRunRecord(out, "fid", ini);
}

void RunAutolabel(const bs::IniConfig& ini, const fs::path& out) {
  const std::string mode = ini.Get("autolabel", "mode", "fluorescence");
  if (mode == "fluorescence") {
    const std::string method = ini.Get("autolabel", "method", "otsu");
    bs::BinarizeMethod bin = bs::BinarizeMethod::Otsu();
    if (method == "fixed") {
      bin = bs::BinarizeMethod::Fixed(ini.GetDouble("autolabel", "tau", 0.5));
    } else if (method != "otsu") {
      throw bs::ConfigError("[autolabel] method must be 'otsu' or 'fixed'");
    }
    bs::DatasetManifest m = bs::AutolabelStage(
        bs::ReadManifest(RequirePath(ini, "autolabel", "brightfield")),
        bs::ReadManifest(RequirePath(ini, "autolabel", "fluorescence")), bin,
        ini.GetDouble("autolabel", "min_area", bs::kDefaultMinArea));
    fs::create_directories(out);
    bs::WriteManifest(out / "labeled.manifest", m);
    Say("labeled " + std::to_string(m.records.size()) + " images from fluorescence");
  } else if (mode == "model") {
    const bs::DetectorModel model = bs::LoadDetector(RequirePath(ini, "autolabel", "detector"));
    const std::string review_path = ini.Get("autolabel", "review", "");
    const std::string review = review_path.empty() ? "" : bs::ReadTextFile(review_path);
    fs::create_directories(out);
    const bs::DatasetManifest m = bs::ModelAssistStage(
        model, bs::ReadManifest(RequirePath(ini, "autolabel", "images")),
        ini.GetDouble("autolabel", "conf_thresh", model.config.conf_thresh), review, out);
    Say("labeled " + std::to_string(m.records.size()) + " images with the detector");
  } else {
    throw bs::ConfigError("[autolabel] mode must be 'fluorescence' or 'model'");
  }
  bs::WriteRunRecord(out, "autolabel", ini);
}

void RunMix(const bs::IniConfig& ini, const fs::path& out) {
  const auto sets = bs::MixStage(
      bs::ReadManifest(RequirePath(ini, "mix", "real")),
      bs::ReadManifest(RequirePath(ini, "mix", "synthetic")), ini.GetInt("mix", "train", 500),
      ini.GetInt("mix", "val", 200), ini.GetInt("mix", "test", 300),
      ini.GetU64("mix", "seed", 1), out);
  for (const bs::DatasetManifest& m : sets) {
    const bs::ManifestCounts c = m.Counts();
    Say(m.name + ": train " + std::to_string(c.train_real) + " real + " +
        std::to_string(c.train_synthetic) + " synthetic, val " + std::to_string(c.val) +
        ", test " + std::to_string(c.test));
  }
  bs::WriteRunRecord(out, "mix", ini, {{"seed", Seed(ini, "mix")}});
}

void RunTrainDetector(const bs::IniConfig& ini, const fs::path& out) {
  const bs::DetectorConfig config = bs::DetectorConfigFrom(ini, "detector");
  const bs::DatasetManifest m = bs::ReadManifest(RequirePath(ini, "detector", "dataset"));
  bs::TrainingHistory hist;
  const uint64_t seed = ini.GetU64("detector", "seed", 1);
  const bs::DetectorModel model = bs::TrainDetector(m, config, seed, &hist, Say);
  fs::create_directories(out);
  bs::SaveDetector(out / "detector.bin", model);
  std::string csv = "epoch,train_loss,val_map50,val_map5095\n";
  for (size_t i = 0; i < hist.train_loss.size(); ++i) {
    const bool has_val = i < hist.val_map50.size();
    csv += std::to_string(i + 1) + "," + bs::FormatFixed(hist.train_loss[i], 6) + "," +
           (has_val ? bs::FormatFixed(hist.val_map50[i], 6) : "") + "," +
           (has_val ? bs::FormatFixed(hist.val_map5095[i], 6) : "") + "\n";
  }
  bs::WriteTextFile(out / "history.csv", csv);
  Say("best epoch " + std::to_string(hist.best_epoch) + " of " + std::to_string(hist.epochs_run));
  bs::WriteRunRecord(out, "train-detector", ini,
                     {{"seed", std::to_string(seed)}, {"dataset", m.name}});
}

void RunDetect(const bs::IniConfig& ini, const fs::path& out) {
  const bs::DetectorModel model = bs::LoadDetector(RequirePath(ini, "detect", "detector"));
  bs::DatasetManifest m = bs::ReadManifest(RequirePath(ini, "detect", "images"));
  const double conf = ini.GetDouble("detect", "conf_thresh", model.config.conf_thresh);
  for (bs::ManifestRecord& r : m.records) {
    r.boxes = bs::Detect(model, bs::ReadPgm(r.image), conf, model.config.nms_iou).boxes;
  }
  m.name += "_predictions";
  fs::create_directories(out);
  bs::WriteManifest(out / "predictions.manifest", m);
  Say("wrote predictions for " + std::to_string(m.records.size()) + " images");
  bs::WriteRunRecord(out, "detect", ini);
}

void RunEvaluate(const bs::IniConfig& ini, const fs::path& out) {
  const bs::DetectorModel model = bs::LoadDetector(RequirePath(ini, "evaluate", "detector"));
  const bs::DatasetManifest m = bs::ReadManifest(RequirePath(ini, "evaluate", "dataset"));
  const bs::Split split = bs::ParseSplit(ini.Get("evaluate", "split", "test"));
  const std::string name = ini.Get("evaluate", "name", m.name);
  const bs::EvalResult r = bs::EvaluateStage(model, m, split);
  fs::create_directories(out);
  bs::WriteTextFile(out / "metrics.csv", bs::FormatMetricsCsv({{name, r}}));
  std::cout << bs::FormatMetricsTable({{name, r}});
  bs::WriteRunRecord(out, "evaluate", ini);
}

void RunReport(const bs::IniConfig& ini, const std::vector<std::string>& files,
               const fs::path& out) {
  std::vector<fs::path> paths(files.begin(), files.end());
  if (paths.empty()) throw bs::ConfigError("report needs at least one metrics file");
  const auto rows = bs::ReadMetricsFiles(paths);
  const std::string table = bs::FormatMetricsTable(rows);
  fs::create_directories(out);
  bs::WriteTextFile(out / "report.txt", table);
  bs::WriteTextFile(out / "report.csv", bs::FormatMetricsCsv(rows));
  std::cout << table;
  bs::WriteRunRecord(out, "report", ini);
}

void RunSurvey(const bs::IniConfig& ini) {
  bs::SurveyServerConfig config;
  for (const auto& r : bs::ReadManifest(RequirePath(ini, "survey", "synthetic")).records) {
    config.synthetic_pool.push_back(r.image);
  }
  for (const auto& r : bs::ReadManifest(RequirePath(ini, "survey", "real")).records) {
    config.real_pool.push_back(r.image);
  }
  config.response_log = ini.Get("survey", "log", "survey_responses.log");
  bs::SurveyServer server(std::move(config));
  const std::string host = ini.Get("survey", "host", "127.0.0.1");
  const int port = ini.GetInt("survey", "port", 8080);
  Say("serving survey on http://" + host + ":" + std::to_string(port));
  if (!server.Listen(host, port)) throw bs::IoError("cannot bind " + host + ":" + std::to_string(port));
}

void RunExperiment(const bs::IniConfig& ini, const fs::path& out, bool resume) {
  const bs::DeskExperimentConfig c = bs::DeskExperimentConfigFrom(ini);
  const bs::DeskExperimentResult r =
      bs::RunDeskExperiment(c, out, Say, {.resume = resume, .fingerprint = ini.Hash()});
  std::cout << r.table;
  bs::WriteRunRecord(out, "experiment", ini, {{"seed", std::to_string(c.seed)}});
}

}  // namespace

int main(int argc, char** argv) {
  bs::TuneAllocator();
  CLI::App app{"Synthetic brightfield data pipeline (" + std::string(bs::kVersion) + ")"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(bs::kVersion));

  Command phantom = MakeCommand(app, "phantom-gen", "Generate phantom images");
  phantom.Setting("--kind", "phantom", "kind", "labeled or subwell");
  phantom.Setting("--count", "phantom", "count", "Number of images");
  phantom.Setting("--seed", "phantom", "seed", "Seed");

  Command patchify = MakeCommand(app, "patchify", "Tile frames and filter well edges");
  patchify.Setting("--input", "patchify", "input", "Frame manifest");
  patchify.Setting("--patch-size", "patchify", "patch_size", "Patch side");
  patchify.Setting("--train-count", "patchify", "train_count", "Patches kept for training");
  patchify.Setting("--seed", "patchify", "seed", "Seed");

  Command train = MakeCommand(app, "train-diffusion", "Train the diffusion U-Net");
  train.Setting("--dataset", "train", "dataset", "Training patch manifest");
  train.Setting("--fid-reference", "train", "fid_reference", "Held-out manifest for FID");
  train.Setting("--epochs", "train", "epochs", "Epochs");
  train.Setting("--seed", "train", "seed", "Seed");

  Command sample = MakeCommand(app, "sample", "Generate synthetic images");
  sample.Setting("--checkpoint", "sample", "checkpoint", "Denoiser checkpoint");
  sample.Setting("--count", "sample", "count", "Number of images");
  sample.Setting("--batch", "sample", "batch", "Images per batch");
  sample.Setting("--min-steps", "sample", "min_steps", "Minimum steps per batch");
  sample.Setting("--max-steps", "sample", "max_steps", "Maximum steps per batch");
  sample.Setting("--sampler", "sampler", "kind", "ddim or euler_ancestral");
  sample.Setting("--seed", "sample", "seed", "Seed");

  Command fid = MakeCommand(app, "fid", "FID between two image manifests");
  fid.Setting("--a", "fid", "a", "First manifest");
  fid.Setting("--b", "fid", "b", "Second manifest");

  Command autolabel = MakeCommand(app, "autolabel", "Label images from fluorescence or a detector");
  autolabel.Setting("--mode", "autolabel", "mode", "fluorescence or model");
  autolabel.Setting("--brightfield", "autolabel", "brightfield", "Brightfield manifest");
  autolabel.Setting("--fluorescence", "autolabel", "fluorescence", "Fluorescence manifest");
  autolabel.Setting("--detector", "autolabel", "detector", "Detector checkpoint");
  autolabel.Setting("--images", "autolabel", "images", "Images to label");
  autolabel.Setting("--review", "autolabel", "review", "Review edits file");

  Command mix = MakeCommand(app, "mix", "Build the seven experiment datasets");
  mix.Setting("--real", "mix", "real", "Labeled real manifest");
  mix.Setting("--synthetic", "mix", "synthetic", "Labeled synthetic manifest");
  mix.Setting("--seed", "mix", "seed", "Seed");

  Command train_det = MakeCommand(app, "train-detector", "Train the heatmap detector");
  train_det.Setting("--dataset", "detector", "dataset", "Dataset manifest");
  train_det.Setting("--epochs", "detector", "epochs", "Maximum epochs");
  train_det.Setting("--seed", "detector", "seed", "Seed");

  Command detect = MakeCommand(app, "detect", "Run a detector over a manifest");
  detect.Setting("--detector", "detect", "detector", "Detector checkpoint");
  detect.Setting("--images", "detect", "images", "Image manifest");

  Command evaluate = MakeCommand(app, "evaluate", "mAP of a detector on a dataset split");
  evaluate.Setting("--detector", "evaluate", "detector", "Detector checkpoint");
  evaluate.Setting("--dataset", "evaluate", "dataset", "Dataset manifest");
  evaluate.Setting("--split", "evaluate", "split", "Split to score");
  evaluate.Setting("--name", "evaluate", "name", "Row name");

  Command survey = MakeCommand(app, "survey-serve", "Serve the realism survey", false);
  survey.Setting("--synthetic", "survey", "synthetic", "Synthetic image manifest");
  survey.Setting("--real", "survey", "real", "Real image manifest");
  survey.Setting("--log", "survey", "log", "Response log file");
  survey.Setting("--host", "survey", "host", "Bind address");
  survey.Setting("--port", "survey", "port", "Port");

  Command report = MakeCommand(app, "report", "Aggregate metrics files into one table");
  std::vector<std::string> metrics_files;
  report.app->add_option("metrics", metrics_files, "metrics.csv files")->check(CLI::ExistingFile);

  Command experiment = MakeCommand(app, "experiment", "Run the whole desk-scale experiment");
  experiment.Setting("--seed", "experiment", "seed", "Seed");
  bool resume = false;
  experiment.app->add_flag("--resume", resume,
                           "Reuse finished stages from an earlier run with the same config");

  CLI11_PARSE(app, argc, argv);
  try {
    if (phantom.app->parsed()) RunPhantomGen(phantom.Resolve(), phantom.out);
    if (patchify.app->parsed()) RunPatchify(patchify.Resolve(), patchify.out);
    if (train.app->parsed()) RunTrainDiffusion(train.Resolve(), train.out);
    if (sample.app->parsed()) RunSample(sample.Resolve(), sample.out);
    if (fid.app->parsed()) RunFid(fid.Resolve(), fid.out);
    if (autolabel.app->parsed()) RunAutolabel(autolabel.Resolve(), autolabel.out);
    if (mix.app->parsed()) RunMix(mix.Resolve(), mix.out);
    if (train_det.app->parsed()) RunTrainDetector(train_det.Resolve(), train_det.out);
    if (detect.app->parsed()) RunDetect(detect.Resolve(), detect.out);
    if (evaluate.app->parsed()) RunEvaluate(evaluate.Resolve(), evaluate.out);
    if (survey.app->parsed()) RunSurvey(survey.Resolve());
    if (report.app->parsed()) RunReport(report.Resolve(), metrics_files, report.out);
    if (experiment.app->parsed()) RunExperiment(experiment.Resolve(), experiment.out, resume);
  } catch (const bs::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const bs::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
