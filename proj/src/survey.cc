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
#include "brightsynth/survey.h"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <tuple>

#include "brightsynth/errors.h"
#include "brightsynth/rng.h"

namespace brightsynth {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

uint64_t Fnv1a(const std::string& text) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string Hex(uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::vector<size_t> Pick(size_t pool, size_t k, Rng& rng) {
  std::vector<size_t> idx(pool);
  std::iota(idx.begin(), idx.end(), 0);
  rng.Shuffle(idx);
  idx.resize(k);
  return idx;
}

}  // namespace

std::string SurveyImageId(const fs::path& path) {
  return Hex(Fnv1a(path.lexically_normal().generic_string()));
}

SurveySession CreateSession(const std::vector<fs::path>& synthetic_pool,
                            const std::vector<fs::path>& real_pool, uint64_t seed) {
  if (synthetic_pool.size() < kSurveySynthetic || real_pool.size() < kSurveyReal) {
    throw SizeError("survey needs at least 20 synthetic and 10 real images");
  }
  Rng rng(seed);
  SurveySession s;
  s.seed = seed;
  s.session_id = "s" + Hex(DeriveSeed(seed, 0)).substr(0, 12);
  for (size_t i : Pick(synthetic_pool.size(), kSurveySynthetic, rng)) {
    s.images.push_back({SurveyImageId(synthetic_pool[i]), synthetic_pool[i], Source::kSynthetic});
  }
  for (size_t i : Pick(real_pool.size(), kSurveyReal, rng)) {
    s.images.push_back({SurveyImageId(real_pool[i]), real_pool[i], Source::kReal});
  }
  rng.Shuffle(s.images);
  return s;
}

json SessionClientView(const SurveySession& session) {
  json images = json::array();
  for (size_t i = 0; i < session.images.size(); ++i) {
    images.push_back({{"index", i}, {"id", session.images[i].id}});
  }
  return {{"session_id", session.session_id}, {"seed", session.seed}, {"images", images}};
}

namespace {

bool HasControl(const std::string& s) {
  return std::any_of(s.begin(), s.end(),
                     [](unsigned char c) { return c == '\t' || c == '\n' || c == '\r'; });
}

bool Blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

}  // namespace

std::vector<FieldError> ValidateResponse(const SurveyResponse& r,
                                         const std::map<std::string, Source>* known_images) {
  std::vector<FieldError> errors;
  if (r.participant_id.empty() || HasControl(r.participant_id)) {
    errors.push_back({"participant_id", "must be nonempty without tabs or newlines"});
  }
  if (r.image_id.empty() || HasControl(r.image_id)) {
    errors.push_back({"image_id", "must be nonempty without tabs or newlines"});
  } else if (known_images != nullptr && !known_images->count(r.image_id)) {
    errors.push_back({"image_id", "unknown image"});
  }
  if (r.confidence < 1 || r.confidence > 5) {
    errors.push_back({"confidence", "must be an integer from 1 to 5"});
  }
  if (r.guess == Source::kSynthetic && Blank(r.explanation)) {
    errors.push_back({"explanation", "required when the guess is synthetic"});
  }
  if (r.timestamp < 0) errors.push_back({"timestamp", "must be >= 0"});
  return errors;
}

SurveyResponse ResponseFromJson(const json& body, std::vector<FieldError>& errors) {
  SurveyResponse r;
  if (!body.is_object()) {
    errors.push_back({"body", "must be a JSON object"});
    return r;
  }
  auto get_string = [&](const char* key, std::string& out, bool required) {
    auto it = body.find(key);
    if (it == body.end() || it->is_null()) {
      if (required) errors.push_back({key, "missing"});
    } else if (!it->is_string()) {
      errors.push_back({key, "must be a string"});
    } else {
      out = it->get<std::string>();
    }
  };
  get_string("participant_id", r.participant_id, true);
  get_string("image_id", r.image_id, true);
  get_string("explanation", r.explanation, false);
  std::string guess;
  get_string("guess", guess, true);
  if (guess == "real") {
    r.guess = Source::kReal;
  } else if (guess == "synthetic") {
    r.guess = Source::kSynthetic;
  } else if (!guess.empty()) {
    errors.push_back({"guess", "must be 'real' or 'synthetic'"});
  }
  auto conf = body.find("confidence");
  if (conf == body.end()) {
    errors.push_back({"confidence", "missing"});
  } else if (!conf->is_number_integer()) {
    errors.push_back({"confidence", "must be an integer from 1 to 5"});
  } else {
    r.confidence = conf->get<int>();
  }
  auto ts = body.find("timestamp");
  if (ts != body.end() && !ts->is_null()) {
    if (!ts->is_number_integer()) {
      errors.push_back({"timestamp", "must be an integer"});
    } else {
      r.timestamp = ts->get<int64_t>();
    }
  }
  return r;
}

json ResponseToJson(const SurveyResponse& r) {
  return {{"participant_id", r.participant_id},
          {"image_id", r.image_id},
          {"guess", std::string(ToString(r.guess))},
          {"confidence", r.confidence},
          {"explanation", r.explanation},
          {"timestamp", r.timestamp}};
}

std::string FormatResponseLine(const SurveyResponse& r) {
  return r.participant_id + '\t' + r.image_id + '\t' + std::string(ToString(r.guess)) + '\t' +
         std::to_string(r.confidence) + '\t' + json(r.explanation).dump() + '\t' +
         std::to_string(r.timestamp);
}

SurveyResponse ParseResponseLine(const std::string& line) {
  std::vector<std::string> f;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, '\t')) f.push_back(item);
  if (f.size() != 6) throw InputError("response line needs 6 fields: " + line);
  SurveyResponse r;
  r.participant_id = f[0];
  r.image_id = f[1];
  try {
    r.guess = ParseSource(f[2]);
    r.confidence = std::stoi(f[3]);
    r.explanation = json::parse(f[4]).get<std::string>();
    r.timestamp = std::stoll(f[5]);
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    throw InputError("malformed response line: " + line);
  }
  return r;
}

ResponseStore::ResponseStore(fs::path log_path) : log_path_(std::move(log_path)) {
  auto initial = std::make_shared<std::vector<SurveyResponse>>();
  if (!log_path_.empty()) {
    if (log_path_.has_parent_path()) fs::create_directories(log_path_.parent_path());
    std::ifstream in(log_path_);
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty()) initial->push_back(ParseResponseLine(line));
    }
  }
  snapshot_ = std::move(initial);
}

void ResponseStore::Append(const SurveyResponse& response) {
  std::lock_guard<std::mutex> lock(write_mu_);
  if (!log_path_.empty()) {
    std::ofstream out(log_path_, std::ios::app | std::ios::binary);
    out << FormatResponseLine(response) << '\n';
    out.flush();
    if (!out) throw IoError("cannot append to " + log_path_.string());
  }
  auto next = std::make_shared<std::vector<SurveyResponse>>(*std::atomic_load(&snapshot_));
  next->push_back(response);
  std::atomic_store(&snapshot_, std::shared_ptr<const std::vector<SurveyResponse>>(next));
}

std::shared_ptr<const std::vector<SurveyResponse>> ResponseStore::Snapshot() const {
  return std::atomic_load(&snapshot_);
}

std::vector<SurveyResponse> LatestResponses(const std::vector<SurveyResponse>& responses) {
  auto rank = [](const SurveyResponse& r) {
    return std::tie(r.timestamp, r.guess, r.confidence, r.explanation);
  };
  std::map<std::pair<std::string, std::string>, SurveyResponse> latest;
  for (const SurveyResponse& r : responses) {
    auto key = std::make_pair(r.participant_id, r.image_id);
    auto it = latest.find(key);
    if (it == latest.end()) {
      latest.emplace(key, r);
    } else if (rank(it->second) < rank(r)) {
      it->second = r;
    }
  }
  std::vector<SurveyResponse> out;
  for (auto& [key, r] : latest) out.push_back(r);
  return out;
}

std::map<std::string, Source> TruthMap(const std::vector<SurveySession>& sessions) {
  std::map<std::string, Source> truth;
  for (const SurveySession& s : sessions) {
    for (const SurveyImage& img : s.images) truth[img.id] = img.truth;
  }
  return truth;
}

namespace {

const std::set<std::string>& Stopwords() {
  static const std::set<std::string> words = {
      "a",     "about", "all",   "also",  "am",    "an",    "and",  "any",  "are",
      "as",    "at",    "be",    "been",  "but",   "by",    "can",  "could", "did",
      "do",    "does",  "for",   "from",  "had",   "has",   "have", "i",    "if",
      "in",    "into",  "is",    "it",    "its",   "just",  "me",   "more", "most",
      "my",    "no",    "not",   "of",    "on",    "or",    "so",   "some", "than",
      "that",  "the",   "their", "them",  "then",  "there", "these", "they", "this",
      "those", "to",    "too",   "very",  "was",   "we",    "were", "what", "which",
      "while", "with",  "would", "you"};
  return words;
}

}  // namespace

bool IsStopword(const std::string& token) { return Stopwords().count(token) > 0; }

std::vector<std::pair<std::string, int>> TermFrequency(const std::vector<std::string>& texts) {
  std::map<std::string, int> counts;
  for (const std::string& text : texts) {
    std::string clean;
    for (unsigned char c : text) {
      if (std::ispunct(c)) continue;
      clean += static_cast<char>(std::tolower(c));
    }
    std::stringstream ss(clean);
    std::string tok;
    while (ss >> tok) {
      if (!IsStopword(tok)) ++counts[tok];
    }
  }
  std::vector<std::pair<std::string, int>> out(counts.begin(), counts.end());
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  return out;
}

SurveyReport BuildReport(const std::vector<SurveyResponse>& responses,
                         const std::map<std::string, Source>& truth) {
  if (responses.empty()) throw InputError("survey report needs at least one response");
  SurveyReport rep;
  std::array<std::array<int, 2>, 2> counts{};
  std::vector<std::string> explanations;
  for (const SurveyResponse& r : LatestResponses(responses)) {
    auto it = truth.find(r.image_id);
    if (it == truth.end()) throw InputError("response for unknown image " + r.image_id);
    const int row = it->second == Source::kReal ? 0 : 1;
    const int col = r.guess == Source::kReal ? 0 : 1;
    ++counts[row][col];
    ImageAccuracy& img = rep.per_image[r.image_id];
    img.truth = it->second;
    ++img.responses;
    if (row == col) ++img.correct;
    if (!r.explanation.empty()) explanations.push_back(r.explanation);
  }
  rep.real_responses = counts[0][0] + counts[0][1];
  rep.synthetic_responses = counts[1][0] + counts[1][1];
  rep.responses = rep.real_responses + rep.synthetic_responses;
  rep.overall_accuracy = static_cast<double>(counts[0][0] + counts[1][1]) / rep.responses;
  for (int row = 0; row < 2; ++row) {
    const int total = counts[row][0] + counts[row][1];
    for (int col = 0; col < 2; ++col) {
      rep.confusion[row][col] = total ? static_cast<double>(counts[row][col]) / total : 0.0;
    }
  }
  rep.accuracy_real = rep.confusion[0][0];
  rep.accuracy_synthetic = rep.confusion[1][1];
  rep.term_frequency = TermFrequency(explanations);
  return rep;
}

json ReportJson(const SurveyReport& rep) {
  json per_image = json::object();
  for (const auto& [id, img] : rep.per_image) {
    per_image[id] = {{"responses", img.responses},
                     {"correct", img.correct},
                     {"accuracy", img.accuracy()}};
  }
  json terms = json::array();
  for (const auto& [term, count] : rep.term_frequency) {
    terms.push_back({{"term", term}, {"count", count}});
  }
  return {{"responses", rep.responses},
          {"overall_accuracy", rep.overall_accuracy},
          {"accuracy_real", rep.accuracy_real},
          {"accuracy_synthetic", rep.accuracy_synthetic},
          {"confusion",
           {{"rows", {"real", "synthetic"}},
            {"columns", {"real", "synthetic"}},
            {"matrix", {{rep.confusion[0][0], rep.confusion[0][1]},
                        {rep.confusion[1][0], rep.confusion[1][1]}}}}},
          {"per_image_accuracy", per_image},
          {"term_frequency", terms}};
}

std::string ReportCsv(const SurveyReport& rep) {
  std::string out = "image_id,responses,correct,accuracy\n";
  for (const auto& [id, img] : rep.per_image) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%s,%d,%d,%.4f\n", id.c_str(), img.responses,
                  img.correct, img.accuracy());
    out += buf;
  }
  return out;
}

}  // namespace brightsynth
