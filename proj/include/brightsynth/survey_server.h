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
#ifndef BRIGHTSYNTH_SURVEY_SERVER_H_
#define BRIGHTSYNTH_SURVEY_SERVER_H_

// HTTP front end for the survey:
//   GET  /api/session?seed=N   session client view (ids only)
//   GET  /api/image/{id}       8-bit grayscale PGM bytes
//   POST /api/response         JSON response; 200 ack or 400 field errors
//   GET  /api/report           JSON report
//   GET  /api/report.csv       per-image CSV rows

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "brightsynth/survey.h"

namespace httplib {
class Server;
}

namespace brightsynth {

struct SurveyServerConfig {
  std::vector<std::filesystem::path> synthetic_pool;
  std::vector<std::filesystem::path> real_pool;
  std::filesystem::path response_log;
  // Clock for responses without a timestamp (ms since epoch by default).
  std::function<int64_t()> now;
};

class SurveyServer {
 public:
  explicit SurveyServer(SurveyServerConfig config);
  ~SurveyServer();

  // Binds and serves until Stop(). Returns false if binding failed.
  bool Listen(const std::string& host, int port);
  // Binds an ephemeral port and returns it (or -1); serve with ListenAfterBind.
  int BindToAnyPort(const std::string& host);
  bool ListenAfterBind();
  void Stop();
  bool WaitUntilReady() const;

  const ResponseStore& store() const { return store_; }
  SurveySession SessionFor(uint64_t seed);

 private:
  void RegisterRoutes();

  SurveyServerConfig config_;
  std::map<std::string, Source> truth_;
  std::map<std::string, std::filesystem::path> paths_;
  ResponseStore store_;
  std::mutex sessions_mu_;
  std::map<uint64_t, SurveySession> sessions_;
  std::unique_ptr<httplib::Server> http_;
};

}  // namespace brightsynth

#endif  // BRIGHTSYNTH_SURVEY_SERVER_H_
