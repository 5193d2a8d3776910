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
#include "brightsynth/manifest.h"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "brightsynth/errors.h"

namespace brightsynth {

namespace fs = std::filesystem;

std::string_view ToString(Source source) {
  return source == Source::kReal ? "real" : "synthetic";
}

std::string_view ToString(Split split) {
  switch (split) {
    case Split::kTrain:
      return "train";
    case Split::kVal:
      return "val";
    case Split::kTest:
      return "test";
    case Split::kPool:
      break;
  }
  return "pool";
}

Source ParseSource(std::string_view text) {
  if (text == "real") return Source::kReal;
  if (text == "synthetic") return Source::kSynthetic;
  throw InputError("unknown source tag '" + std::string(text) + "'");
}

Split ParseSplit(std::string_view text) {
  if (text == "train") return Split::kTrain;
  if (text == "val") return Split::kVal;
  if (text == "test") return Split::kTest;
  if (text == "pool") return Split::kPool;
  throw InputError("unknown split tag '" + std::string(text) + "'");
}

ManifestCounts DatasetManifest::Counts() const {
  ManifestCounts counts;
  for (const auto& r : records) {
    switch (r.split) {
      case Split::kTrain:
        (r.source == Source::kReal ? counts.train_real
                                   : counts.train_synthetic)++;
        break;
      case Split::kVal:
        counts.val++;
        break;
      case Split::kTest:
        counts.test++;
        break;
      case Split::kPool:
        counts.pool++;
        break;
    }
  }
  return counts;
}

std::vector<ManifestRecord> DatasetManifest::RecordsIn(Split split) const {
  std::vector<ManifestRecord> out;
  for (const auto& r : records) {
    if (r.split == split) out.push_back(r);
  }
  return out;
}

namespace {

std::string FormatNumber(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  std::string s(buf);
  if (s.find('.') != std::string::npos) {
    while (!s.empty() && s.back() == '0') s.pop_back();
    if (!s.empty() && s.back() == '.') s.pop_back();
  }
  if (s == "-0") s = "0";
  return s;
}

std::vector<std::string_view> SplitOn(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  size_t start = 0;
  while (true) {
    size_t pos = text.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.push_back(text.substr(start));
      break;
    }
    parts.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
  return parts;
}

double ParseDouble(std::string_view text) {
  std::string s(text);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw InputError("bad number '" + s + "'");
  }
  return v;
}

}  // namespace

std::string FormatBox(const BBox& box) {
  std::string s = FormatNumber(box.x, 4) + "," + FormatNumber(box.y, 4) + "," +
                  FormatNumber(box.w, 4) + "," + FormatNumber(box.h, 4);
  if (box.score) s += "," + FormatNumber(*box.score, 6);
  return s;
}

BBox ParseBox(std::string_view text) {
  const auto parts = SplitOn(text, ',');
  if (parts.size() != 4 && parts.size() != 5) {
    throw InputError("box tuple needs 4 or 5 fields: '" + std::string(text) +
                     "'");
  }
  BBox box{ParseDouble(parts[0]), ParseDouble(parts[1]), ParseDouble(parts[2]),
           ParseDouble(parts[3]), std::nullopt};
  if (parts.size() == 5) box.score = ParseDouble(parts[4]);
  if (box.w < 0 || box.h < 0) throw InputError("negative box size");
  return box;
}

std::string FormatBoxes(const std::vector<BBox>& boxes) {
  std::string s;
  for (size_t i = 0; i < boxes.size(); ++i) {
    if (i) s += ' ';
    s += FormatBox(boxes[i]);
  }
  return s;
}

std::vector<BBox> ParseBoxes(std::string_view text) {
  std::vector<BBox> boxes;
  for (auto part : SplitOn(text, ' ')) {
    if (!part.empty()) boxes.push_back(ParseBox(part));
  }
  return boxes;
}

std::string FormatRecord(const ManifestRecord& record,
                         const fs::path& base_dir) {
  fs::path ref = record.image;
  if (ref.is_absolute() && !base_dir.empty()) {
    ref = ref.lexically_relative(fs::absolute(base_dir).lexically_normal());
  }
  std::string line = ref.generic_string();
  line += '\t';
  line += ToString(record.source);
  line += '\t';
  line += ToString(record.split);
  line += '\t';
  line += FormatBoxes(record.boxes);
  return line;
}

std::string SerializeManifest(const DatasetManifest& manifest,
                              const fs::path& base_dir) {
  const ManifestCounts c = manifest.Counts();
  std::ostringstream out;
  out << "# brightsynth manifest v1\n";
  out << "# name=" << manifest.name << " seed=" << manifest.seed << "\n";
  out << "# counts train_real=" << c.train_real
      << " train_synthetic=" << c.train_synthetic << " val=" << c.val
      << " test=" << c.test << " pool=" << c.pool << "\n";
  for (const auto& r : manifest.records) {
    out << FormatRecord(r, base_dir) << "\n";
  }
  return out.str();
}

DatasetManifest ParseManifest(const std::string& text,
                              const fs::path& base_dir) {
  DatasetManifest manifest;
  std::istringstream in(text);
  std::string line;
  bool have_counts = false;
  ManifestCounts declared;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream fields(line.substr(1));
      std::string token;
      while (fields >> token) {
        const auto eq = token.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = token.substr(0, eq);
        const std::string value = token.substr(eq + 1);
        if (key == "name") manifest.name = value;
        if (key == "seed") manifest.seed = std::stoull(value);
        if (key == "train_real") declared.train_real = std::stoi(value), have_counts = true;
        if (key == "train_synthetic") declared.train_synthetic = std::stoi(value);
        if (key == "val") declared.val = std::stoi(value);
        if (key == "test") declared.test = std::stoi(value);
        if (key == "pool") declared.pool = std::stoi(value);
      }
      continue;
    }
    const auto parts = SplitOn(line, '\t');
    if (parts.size() != 4) {
      throw InputError("manifest line " + std::to_string(line_no) +
                       ": expected 4 tab-separated fields");
    }
    ManifestRecord record;
    fs::path ref{std::string(parts[0])};
    record.image = ref.is_absolute() || base_dir.empty()
                       ? ref
                       : (fs::absolute(base_dir) / ref).lexically_normal();
    record.source = ParseSource(parts[1]);
    record.split = ParseSplit(parts[2]);
    record.boxes = ParseBoxes(parts[3]);
    manifest.records.push_back(std::move(record));
  }
  if (have_counts && !(declared == manifest.Counts())) {
    throw InputError("manifest counts header disagrees with its records");
  }
  return manifest;
}

std::string ReadTextFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void WriteTextFile(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

void WriteManifest(const fs::path& path, const DatasetManifest& manifest) {
  WriteTextFile(path,
                SerializeManifest(manifest, fs::absolute(path).parent_path()));
}

DatasetManifest ReadManifest(const fs::path& path) {
  return ParseManifest(ReadTextFile(path), fs::absolute(path).parent_path());
}

}  // namespace brightsynth
