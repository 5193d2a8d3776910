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
#ifndef BRIGHTSYNTH_SURVEY_H_
#define BRIGHTSYNTH_SURVEY_H_

// Realism survey: 30-image sessions (20 synthetic, 10 real), validated
// responses in an append-only log, and the accuracy / confusion / term
// frequency report.

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "brightsynth/manifest.h"

namespace brightsynth {

inline constexpr int kSurveySynthetic = 20;
inline constexpr int kSurveyReal = 10;

struct SurveyImage {
  std::string id;
  std::filesystem::path path;
  Source truth = Source::kReal;
};

struct SurveySession {
  std::string session_id;
  uint64_t seed = 0;
  std::vector<SurveyImage> images;
};

// Opaque id derived from the image path; does not encode the truth.
std::string SurveyImageId(const std::filesystem::path& path);

SurveySession CreateSession(const std::vector<std::filesystem::path>& synthetic_pool,
                            const std::vector<std::filesystem::path>& real_pool,
                            uint64_t seed);

// What participants receive: session id, seed and ordered image ids.
nlohmann::json SessionClientView(const SurveySession& session);

struct SurveyResponse {
  std::string participant_id;
  std::string image_id;
  Source guess = Source::kReal;
  int confidence = 3;
  std::string explanation;
  int64_t timestamp = 0;

  bool operator==(const SurveyResponse&) const = default;
};

struct FieldError {
  std::string field;
  std::string message;
};

// Field-level checks; `known_images` may be null to skip the membership
// check.
std::vector<FieldError> ValidateResponse(const SurveyResponse& response,
                                         const std::map<std::string, Source>* known_images);

// Parses a JSON request body. Missing or mistyped fields become FieldErrors.
SurveyResponse ResponseFromJson(const nlohmann::json& body, std::vector<FieldError>& errors);
nlohmann::json ResponseToJson(const SurveyResponse& response);

// participant \t image_id \t guess \t confidence \t "explanation" \t timestamp
// The explanation is a JSON string literal so it may hold any text.
std::string FormatResponseLine(const SurveyResponse& response);
SurveyResponse ParseResponseLine(const std::string& line);

// Append-only response log. Writes go through one mutex; readers take an
// immutable snapshot without locking.
class ResponseStore {
 public:
  // Loads existing lines from `log_path` (created if missing). An empty path
  // keeps responses in memory only.
  explicit ResponseStore(std::filesystem::path log_path = {});

  void Append(const SurveyResponse& response);
  std::shared_ptr<const std::vector<SurveyResponse>> Snapshot() const;

 private:
  std::filesystem::path log_path_;
  std::mutex write_mu_;
  std::shared_ptr<const std::vector<SurveyResponse>> snapshot_;
};

// Last write wins per (participant, image), decided by timestamp and then by
// the record contents, so the result ignores input order. Output is sorted by
// (participant, image).
std::vector<SurveyResponse> LatestResponses(const std::vector<SurveyResponse>& responses);

struct ImageAccuracy {
  Source truth = Source::kReal;
  int responses = 0;
  int correct = 0;
  double accuracy() const { return responses ? static_cast<double>(correct) / responses : 0.0; }
};

struct SurveyReport {
  int responses = 0;
  double overall_accuracy = 0.0;
  double accuracy_real = 0.0;
  double accuracy_synthetic = 0.0;
  int real_responses = 0;
  int synthetic_responses = 0;
  std::map<std::string, ImageAccuracy> per_image;
  // Rows: truth (real, synthetic); columns: guess (real, synthetic); each
  // row normalized to sum 1 when it has responses.
  std::array<std::array<double, 2>, 2> confusion{};
  std::vector<std::pair<std::string, int>> term_frequency;
};

// `truth` maps image id to its source. Throws InputError on empty input or
// unknown image ids.
SurveyReport BuildReport(const std::vector<SurveyResponse>& responses,
                         const std::map<std::string, Source>& truth);

std::map<std::string, Source> TruthMap(const std::vector<SurveySession>& sessions);

// Lowercase, punctuation removed, whitespace tokens, stopwords dropped;
// sorted by descending count then term.
std::vector<std::pair<std::string, int>> TermFrequency(
    const std::vector<std::string>& texts);
bool IsStopword(const std::string& token);

// Participant-facing report: aggregate figures without per-image truth.
nlohmann::json ReportJson(const SurveyReport& report);
// image_id,responses,correct,accuracy
std::string ReportCsv(const SurveyReport& report);

}  // namespace brightsynth

#endif  // BRIGHTSYNTH_SURVEY_H_
