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

#include <gtest/gtest.h>

#include <filesystem>
#include <set>

#include "brightsynth/errors.h"

namespace brightsynth {
namespace {

namespace fs = std::filesystem;

TEST(IniTest, ParseOverridesAndTypes) {
  IniConfig ini = IniConfig::Parse(
      "top = 1\n# comment\n[train]\nlr = 1e-4 ; trailing\nepochs=3\n\n[unet]\nblock_channels = 8, 16\n"
      "[detector]\nmosaic = false\n");
  EXPECT_EQ(ini.Get("", "top", ""), "1");
  EXPECT_DOUBLE_EQ(ini.GetDouble("train", "lr", 0), 1e-4);
  EXPECT_EQ(ini.GetInt("train", "epochs", 0), 3);
  EXPECT_EQ(ini.GetInts("unet", "block_channels", {}), (std::vector<int>{8, 16}));
  EXPECT_FALSE(ini.GetBool("detector", "mosaic", true));
  EXPECT_EQ(ini.GetInt("train", "missing", 42), 42);
  ini.ApplyOverride("train.epochs=9");
  EXPECT_EQ(ini.GetInt("train", "epochs", 0), 9);
  ini.ApplyOverride("train.fid_sampler.steps=5");
  EXPECT_EQ(ini.GetInt("train.fid_sampler", "steps", 0), 5);
  EXPECT_THROW(ini.ApplyOverride("noequals"), ConfigError);
  EXPECT_THROW(ini.GetInt("train", "lr", 0), ConfigError);
  EXPECT_THROW(IniConfig::Parse("[open\n"), ConfigError);
  EXPECT_THROW(IniConfig::Load("/nonexistent/x.ini"), ConfigError);
}

TEST(IniTest, SerializeIsCanonical) {
  const IniConfig a = IniConfig::Parse("[b]\ny=2\nx = 1\n[a]\nz=3\n");
  const IniConfig b = IniConfig::Parse("[a]\n z = 3\n[b]\nx=1\ny = 2\n");
  EXPECT_EQ(a.Serialize(), b.Serialize());
  EXPECT_EQ(a.Hash(), b.Hash());
  EXPECT_EQ(a.Hash().size(), 16u);
  EXPECT_NE(a.Hash(), IniConfig::Parse("[a]\nz=4\n").Hash());
  EXPECT_EQ(IniConfig::Parse(a.Serialize()).Serialize(), a.Serialize());
}

TEST(IniTest, DeskConfigFileMatchesDefaults) {
  const IniConfig ini = IniConfig::Load(fs::path(BRIGHTSYNTH_SOURCE_DIR) / "configs/desk.ini");
  const DeskExperimentConfig from_file = DeskExperimentConfigFrom(ini);
  const DeskExperimentConfig defaults = DeskExperimentConfigFrom(IniConfig());
  EXPECT_EQ(from_file.train_n, 500);
  EXPECT_EQ(from_file.val_n, 200);
  EXPECT_EQ(from_file.test_n, 300);
  EXPECT_EQ(from_file.sample.count, 250);
  EXPECT_EQ(from_file.sample.min_steps, 35);
  EXPECT_EQ(from_file.sample.max_steps, 40);
  EXPECT_EQ(from_file.unet.block_channels, defaults.unet.block_channels);
  EXPECT_EQ(from_file.diffusion.epochs, defaults.diffusion.epochs);
  EXPECT_EQ(from_file.detector.patience, 35);

  IniConfig bad;
  bad.Set("experiment", "train", "900");
  bad.Set("experiment", "real_images", "1000");
  EXPECT_THROW(DeskExperimentConfigFrom(bad), ConfigError);
  IniConfig steps;
  steps.Set("sample", "min_steps", "41");
  EXPECT_THROW(DeskExperimentConfigFrom(steps), ConfigError);
}

TEST(RunRecordTest, Contents) {
  const fs::path dir = fs::path(testing::TempDir()) / "run_record";
  fs::create_directories(dir);
  const IniConfig ini = IniConfig::Parse("[train]\nepochs = 2\n");
  WriteRunRecord(dir, "train-diffusion", ini, {{"seed", "11"}});
  const std::string text = ReadTextFile(dir / "run_record.txt");
  EXPECT_NE(text.find(kVersion), std::string::npos);
  EXPECT_NE(text.find("stage=train-diffusion"), std::string::npos);
  EXPECT_NE(text.find("config_hash=" + ini.Hash()), std::string::npos);
  EXPECT_NE(text.find("seed=11"), std::string::npos);
  EXPECT_NE(text.find("epochs = 2"), std::string::npos);
}

IniConfig TinyExperiment() {
  return IniConfig::Parse(R"(
[experiment]
seed = 5
subwell_images = 2
real_images = 40
train = 20
val = 10
test = 10
[patchify]
train_count = 16
[unet]
block_channels = 4,8
time_embed_dim = 8
[train]
epochs = 1
batch_size = 4
fid_every_epochs = 1
fid_samples = 4
[train.fid_sampler]
steps = 2
[sample]
count = 12
batch = 4
min_steps = 2
max_steps = 3
[detector]
epochs = 2
)");
}

std::map<std::string, std::string> ReadTree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (entry.is_regular_file()) {
      out[fs::relative(entry.path(), root).string()] = ReadTextFile(entry.path());
    }
  }
  return out;
}

TEST(DeskExperimentTest, RerunIsByteIdentical) {
  const DeskExperimentConfig config = DeskExperimentConfigFrom(TinyExperiment());
  const fs::path a = fs::path(testing::TempDir()) / "desk_a";
  const fs::path b = fs::path(testing::TempDir()) / "desk_b";
  fs::remove_all(a);
  fs::remove_all(b);
  const DeskExperimentResult ra = RunDeskExperiment(config, a);
  const DeskExperimentResult rb = RunDeskExperiment(config, b);

  ASSERT_EQ(ra.metrics.size(), 7u);
  EXPECT_EQ(ra.csv, rb.csv);
  EXPECT_EQ(ra.sample.batch_steps, rb.sample.batch_steps);
  for (int s : ra.sample.batch_steps) {
    EXPECT_GE(s, 2);
    EXPECT_LE(s, 3);
  }
  EXPECT_EQ(ra.sample.synthetic.records.size(), 12u);

  const auto ta = ReadTree(a);
  const auto tb = ReadTree(b);
  ASSERT_EQ(ta.size(), tb.size());
  int manifests = 0;
  for (const auto& [name, bytes] : ta) {
    ASSERT_TRUE(tb.count(name)) << name;
    EXPECT_TRUE(bytes == tb.at(name)) << name;
    manifests += name.ends_with(".manifest");
  }
  EXPECT_GE(manifests, 7);
  EXPECT_TRUE(ta.count("report.csv"));
  EXPECT_EQ(std::count(ta.at("report.csv").begin(), ta.at("report.csv").end(), '\n'), 8);

  // Seven datasets share val/test bytes.
  for (const auto& m : ra.datasets) {
    EXPECT_EQ(SerializeSplit(m, Split::kTest, a), SerializeSplit(ra.datasets[0], Split::kTest, a));
    EXPECT_EQ(SerializeSplit(m, Split::kVal, a), SerializeSplit(ra.datasets[0], Split::kVal, a));
  }
}

TEST(DeskExperimentTest, ResumeReusesFinishedStages) {
  const DeskExperimentConfig config = DeskExperimentConfigFrom(TinyExperiment());
  const fs::path dir = fs::path(testing::TempDir()) / "desk_resume";
  fs::remove_all(dir);
  const ExperimentOptions opts{.resume = true, .fingerprint = "abc"};
  const DeskExperimentResult first = RunDeskExperiment(config, dir, nullptr, opts);
  const auto before = ReadTree(dir);
  ASSERT_TRUE(before.count("stages/diffusion.done"));
  ASSERT_TRUE(before.count("stages/detector_scc_30.done"));

  // Patches feed only the diffusion stage, so a full resume leaves them gone.
  fs::remove_all(dir / "patches");
  fs::remove(dir / "stages" / "detector_scc_30.done");
  fs::remove(dir / "detectors" / "scc_30.bin");
  std::vector<std::string> lines;
  const DeskExperimentResult second =
      RunDeskExperiment(config, dir, [&](const std::string& l) { lines.push_back(l); }, opts);
  EXPECT_FALSE(fs::exists(dir / "patches"));
  EXPECT_TRUE(fs::exists(dir / "detectors" / "scc_30.bin"));
  EXPECT_EQ(first.csv, second.csv);
  EXPECT_EQ(first.sample.batch_steps, second.sample.batch_steps);
  EXPECT_EQ(first.diffusion.selected_fid, second.diffusion.selected_fid);
  EXPECT_EQ(second.diffusion_seconds, 0.0);
  EXPECT_EQ(std::count_if(lines.begin(), lines.end(),
                          [](const std::string& l) { return l.find("reusing") != l.npos; }),
            4);

  const auto after = ReadTree(dir);
  for (const auto& [name, bytes] : after) {
    ASSERT_TRUE(before.count(name)) << name;
    EXPECT_TRUE(bytes == before.at(name)) << name;
  }
}

TEST(DeskExperimentTest, ResumeWithOtherFingerprintRecomputes) {
  const DeskExperimentConfig config = DeskExperimentConfigFrom(TinyExperiment());
  const fs::path dir = fs::path(testing::TempDir()) / "desk_refingerprint";
  fs::remove_all(dir);
  RunDeskExperiment(config, dir, nullptr, {.resume = true, .fingerprint = "one"});
  fs::remove_all(dir / "patches");
  RunDeskExperiment(config, dir, nullptr, {.resume = true, .fingerprint = "two"});
  EXPECT_TRUE(fs::exists(dir / "patches" / "train.manifest"));
  EXPECT_NE(ReadTextFile(dir / "stages" / "sample.done").find("two"), std::string::npos);
}

}  // namespace
}  // namespace brightsynth
