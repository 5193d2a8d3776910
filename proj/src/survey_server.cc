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
#include "brightsynth/survey_server.h"

#include <chrono>

#include "httplib.h"
#include "json.hpp"

#include "brightsynth/errors.h"
#include "brightsynth/image.h"

namespace brightsynth {

using nlohmann::json;

namespace {

void SendJson(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void SendError(httplib::Response& res, int status, const std::string& message) {
  SendJson(res, status, {{"error", message}});
}

int64_t WallClockMs() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

}  // namespace

SurveyServer::SurveyServer(SurveyServerConfig config)
    : config_(std::move(config)),
      store_(config_.response_log),
      http_(std::make_unique<httplib::Server>()) {
  if (!config_.now) config_.now = WallClockMs;
  for (const auto& p : config_.synthetic_pool) {
    truth_[SurveyImageId(p)] = Source::kSynthetic;
    paths_[SurveyImageId(p)] = p;
  }
  for (const auto& p : config_.real_pool) {
    truth_[SurveyImageId(p)] = Source::kReal;
    paths_[SurveyImageId(p)] = p;
  }
  if (truth_.size() != config_.synthetic_pool.size() + config_.real_pool.size()) {
    throw InputError("survey pools contain duplicate images");
  }
  RegisterRoutes();
}

SurveyServer::~SurveyServer() = default;

SurveySession SurveyServer::SessionFor(uint64_t seed) {
  std::lock_guard<std::mutex> lock(sessions_mu_);
  auto it = sessions_.find(seed);
  if (it == sessions_.end()) {
    it = sessions_.emplace(seed, CreateSession(config_.synthetic_pool, config_.real_pool, seed))
             .first;
  }
  return it->second;
}

void SurveyServer::RegisterRoutes() {
  http_->Get("/api/session", [this](const httplib::Request& req, httplib::Response& res) {
    uint64_t seed = 0;
    if (req.has_param("seed")) {
      try {
        const std::string text = req.get_param_value("seed");
        if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos) {
          throw std::invalid_argument(text);
        }
        seed = std::stoull(text);
      } catch (const std::exception&) {
        return SendError(res, 400, "seed must be a non-negative integer");
      }
    }
    try {
      SendJson(res, 200, SessionClientView(SessionFor(seed)));
    } catch (const Error& e) {
      SendError(res, 500, e.what());
    }
  });

  http_->Get(R"(/api/image/([0-9a-f]+))",
             [this](const httplib::Request& req, httplib::Response& res) {
               auto it = paths_.find(req.matches[1].str());
               if (it == paths_.end()) return SendError(res, 404, "unknown image");
               try {
                 res.set_content(EncodePgm(ReadPgm(it->second)), "image/x-portable-graymap");
               } catch (const Error& e) {
                 SendError(res, 500, e.what());
               }
             });

  http_->Post("/api/response", [this](const httplib::Request& req, httplib::Response& res) {
    json body = json::parse(req.body, nullptr, false);
    std::vector<FieldError> errors;
    SurveyResponse r;
    if (body.is_discarded()) {
      errors.push_back({"body", "invalid JSON"});
    } else {
      r = ResponseFromJson(body, errors);
      if (!body.contains("timestamp") || body["timestamp"].is_null()) r.timestamp = config_.now();
    }
    if (errors.empty()) errors = ValidateResponse(r, &truth_);
    if (!errors.empty()) {
      json list = json::array();
      for (const FieldError& e : errors) list.push_back({{"field", e.field}, {"message", e.message}});
      return SendJson(res, 400, {{"errors", list}});
    }
    try {
      store_.Append(r);
    } catch (const Error& e) {
      return SendError(res, 500, e.what());
    }
    SendJson(res, 200, {{"ok", true}});
  });

  auto report = [this](httplib::Response& res, bool csv) {
    const auto snapshot = store_.Snapshot();
    if (snapshot->empty()) return SendError(res, 409, "no responses recorded yet");
    try {
      const SurveyReport rep = BuildReport(*snapshot, truth_);
      if (csv) {
        res.set_content(ReportCsv(rep), "text/csv");
      } else {
        SendJson(res, 200, ReportJson(rep));
      }
    } catch (const Error& e) {
      SendError(res, 500, e.what());
    }
  };
  http_->Get("/api/report", [report](const httplib::Request&, httplib::Response& res) {
    report(res, false);
  });
  http_->Get("/api/report.csv", [report](const httplib::Request&, httplib::Response& res) {
    report(res, true);
  });
}

bool SurveyServer::Listen(const std::string& host, int port) {
  return http_->listen(host, port);
}

int SurveyServer::BindToAnyPort(const std::string& host) {
  return http_->bind_to_any_port(host);
}

bool SurveyServer::ListenAfterBind() { return http_->listen_after_bind(); }

void SurveyServer::Stop() { http_->stop(); }

bool SurveyServer::WaitUntilReady() const {
  http_->wait_until_ready();
  return http_->is_running();
}

}  // namespace brightsynth
