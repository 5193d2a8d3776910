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
#ifndef BRIGHTSYNTH_MANIFEST_H_
#define BRIGHTSYNTH_MANIFEST_H_

// Line-delimited dataset manifests.
//
// File layout:
//   # brightsynth manifest v1
//   # name=<name> seed=<seed>
//   # counts train_real=<n> train_synthetic=<n> val=<n> test=<n> pool=<n>
//   <image_ref>\t<real|synthetic>\t<train|val|test|pool>\t<boxes>
//
// <boxes> is a space separated list of x,y,w,h or x,y,w,h,score tuples.
// Image refs are written relative to the manifest's directory and resolved
// back to absolute paths on read.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "brightsynth/image.h"

namespace brightsynth {

enum class Source { kReal, kSynthetic };
enum class Split { kPool, kTrain, kVal, kTest };

std::string_view ToString(Source source);
std::string_view ToString(Split split);
Source ParseSource(std::string_view text);
Split ParseSplit(std::string_view text);

struct ManifestRecord {
  std::filesystem::path image;
  Source source = Source::kReal;
  Split split = Split::kPool;
  std::vector<BBox> boxes;

  bool operator==(const ManifestRecord&) const = default;
};

struct ManifestCounts {
  int train_real = 0;
  int train_synthetic = 0;
  int val = 0;
  int test = 0;
  int pool = 0;

  int train() const { return train_real + train_synthetic; }
  bool operator==(const ManifestCounts&) const = default;
};

struct DatasetManifest {
  std::string name;
  uint64_t seed = 0;
  std::vector<ManifestRecord> records;

  ManifestCounts Counts() const;
  std::vector<ManifestRecord> RecordsIn(Split split) const;
};

std::string FormatBox(const BBox& box);
BBox ParseBox(std::string_view text);
std::string FormatBoxes(const std::vector<BBox>& boxes);
std::vector<BBox> ParseBoxes(std::string_view text);

// One manifest line without the trailing newline.
std::string FormatRecord(const ManifestRecord& record,
                         const std::filesystem::path& base_dir);

std::string SerializeManifest(const DatasetManifest& manifest,
                              const std::filesystem::path& base_dir);
DatasetManifest ParseManifest(const std::string& text,
                              const std::filesystem::path& base_dir);

void WriteManifest(const std::filesystem::path& path,
                   const DatasetManifest& manifest);
DatasetManifest ReadManifest(const std::filesystem::path& path);

// Reads/writes a whole file as bytes; shared by the text formats.
std::string ReadTextFile(const std::filesystem::path& path);
void WriteTextFile(const std::filesystem::path& path, const std::string& text);

}  // namespace brightsynth

#endif  // BRIGHTSYNTH_MANIFEST_H_
