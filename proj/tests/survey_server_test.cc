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

#include <gtest/gtest.h>

#include <filesystem>
#include <thread>

#include "httplib.h"
#include "json.hpp"

#include "brightsynth/image.h"

namespace brightsynth {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class SurveyServerTest : public testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::path(testing::TempDir()) / "survey_server";
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    SurveyServerConfig config;
    for (int i = 0; i < 24; ++i) {
      const fs::path p = dir_ / ("gen_" + std::to_string(i) + ".pgm");
      WritePgm(p, Image(8, 8, i / 24.0));
      config.synthetic_pool.push_back(p);
    }
    for (int i = 0; i < 12; ++i) {
      const fs::path p = dir_ / ("obs_" + std::to_string(i) + ".pgm");
      WritePgm(p, Image(8, 8, 1.0 - i / 24.0));
      config.real_pool.push_back(p);
      real_ids_.insert(SurveyImageId(p));
    }
    config.response_log = dir_ / "responses.log";
    config.now = [] { return int64_t{1000}; };
    server_ = std::make_unique<SurveyServer>(config);
    port_ = server_->BindToAnyPort("127.0.0.1");
    ASSERT_GT(port_, 0);
    thread_ = std::thread([this] { server_->ListenAfterBind(); });
    ASSERT_TRUE(server_->WaitUntilReady());
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
  }

  void TearDown() override {
    server_->Stop();
    if (thread_.joinable()) thread_.join();
  }

  json Session(int seed) {
    auto res = client_->Get("/api/session?seed=" + std::to_string(seed));
    EXPECT_TRUE(res);
    EXPECT_EQ(res->status, 200);
    return json::parse(res->body);
  }

  httplib::Result Post(const json& body) {
    return client_->Post("/api/response", body.dump(), "application/json");
  }

  fs::path dir_;
  std::set<std::string> real_ids_;
  std::unique_ptr<SurveyServer> server_;
  int port_ = 0;
  std::thread thread_;
  std::unique_ptr<httplib::Client> client_;
};

TEST_F(SurveyServerTest, SessionIsDeterministicAndHidesTruth) {
  const json a = Session(5);
  EXPECT_EQ(a["images"].size(), 30u);
  EXPECT_EQ(a, Session(5));
  EXPECT_NE(a["images"], Session(6)["images"]);
  const std::string text = a.dump();
  for (const char* word : {"truth", "real", "synthetic", "gen_", "obs_", ".pgm"}) {
    EXPECT_EQ(text.find(word), std::string::npos) << word;
  }
  EXPECT_EQ(client_->Get("/api/session?seed=abc")->status, 400);
  EXPECT_EQ(client_->Get("/api/session?seed=-3")->status, 400);
}

TEST_F(SurveyServerTest, ImageBytes) {
  const std::string id = Session(1)["images"][0]["id"];
  auto res = client_->Get("/api/image/" + id);
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  const Image img = DecodePgm(res->body);
  EXPECT_EQ(img.width, 8);
  EXPECT_EQ(res->body.substr(0, 2), "P5");
  EXPECT_EQ(client_->Get("/api/image/00ff")->status, 404);
}

TEST_F(SurveyServerTest, ResponsesAndReports) {
  EXPECT_EQ(client_->Get("/api/report")->status, 409);
  EXPECT_EQ(client_->Get("/api/report.csv")->status, 409);

  const json session = Session(2);
  int expect_correct = 0;
  for (const auto& entry : session["images"]) {
    const std::string id = entry["id"];
    const bool real = real_ids_.count(id) > 0;
    // Everyone answers "real": only the real images are scored correct.
    auto res = Post({{"participant_id", "expert1"}, {"image_id", id}, {"guess", "real"},
                     {"confidence", 4}});
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 200) << res->body;
    expect_correct += real;
  }
  EXPECT_EQ(expect_correct, 10);

  auto rep = client_->Get("/api/report");
  ASSERT_EQ(rep->status, 200);
  const json report = json::parse(rep->body);
  EXPECT_EQ(report["responses"], 30);
  EXPECT_NEAR(report["overall_accuracy"].get<double>(), 10.0 / 30.0, 1e-12);
  EXPECT_EQ(report["accuracy_real"], 1.0);
  EXPECT_EQ(report["accuracy_synthetic"], 0.0);
  EXPECT_EQ(report["confusion"]["matrix"], json::parse("[[1.0,0.0],[1.0,0.0]]"));
  for (const auto& [id, row] : report["per_image_accuracy"].items()) {
    EXPECT_FALSE(row.contains("truth")) << id;
  }

  // Overwrite one synthetic answer with a later, correct one.
  std::string synth_id;
  for (const auto& e : session["images"])
    if (!real_ids_.count(e["id"])) synth_id = e["id"];
  ASSERT_EQ(Post({{"participant_id", "expert1"}, {"image_id", synth_id}, {"guess", "synthetic"},
                  {"confidence", 5}, {"explanation", "halo too even"}, {"timestamp", 5000}})
                ->status,
            200);
  const json updated = json::parse(client_->Get("/api/report")->body);
  EXPECT_EQ(updated["responses"], 30);
  EXPECT_NEAR(updated["overall_accuracy"].get<double>(), 11.0 / 30.0, 1e-12);
  EXPECT_EQ(updated["term_frequency"][0]["term"], "even");

  auto csv = client_->Get("/api/report.csv");
  ASSERT_EQ(csv->status, 200);
  EXPECT_EQ(csv->body.substr(0, csv->body.find('\n')), "image_id,responses,correct,accuracy");
  EXPECT_EQ(std::count(csv->body.begin(), csv->body.end(), '\n'), 31);
  EXPECT_EQ(server_->store().Snapshot()->size(), 31u);
  EXPECT_TRUE(fs::exists(dir_ / "responses.log"));
}

TEST_F(SurveyServerTest, FieldErrors) {
  const std::string id = Session(3)["images"][0]["id"];
  auto fields = [](const httplib::Result& res) {
    EXPECT_EQ(res->status, 400) << res->body;
    const json body = json::parse(res->body);
    std::set<std::string> out;
    for (const auto& e : body["errors"]) out.insert(e["field"].get<std::string>());
    return out;
  };
  EXPECT_TRUE(fields(Post({{"participant_id", "p"}, {"image_id", id}, {"guess", "real"},
                           {"confidence", 6}}))
                  .count("confidence"));
  EXPECT_TRUE(fields(Post({{"participant_id", "p"}, {"image_id", id}, {"guess", "synthetic"},
                           {"confidence", 3}}))
                  .count("explanation"));
  EXPECT_TRUE(fields(Post({{"participant_id", "p"}, {"image_id", "beef"}, {"guess", "real"},
                           {"confidence", 3}}))
                  .count("image_id"));
  EXPECT_TRUE(fields(Post({{"image_id", id}, {"guess", "real"}, {"confidence", 3}}))
                  .count("participant_id"));
  auto bad = client_->Post("/api/response", "{not json", "application/json");
  EXPECT_TRUE(fields(bad).count("body"));
  EXPECT_EQ(server_->store().Snapshot()->size(), 0u);
}

TEST_F(SurveyServerTest, ConcurrentPosts) {
  const json session = Session(4);
  std::vector<std::thread> workers;
  for (int t = 0; t < 4; ++t) {
    workers.emplace_back([&, t] {
      httplib::Client c("127.0.0.1", port_);
      for (const auto& e : session["images"]) {
        json body = {{"participant_id", "w" + std::to_string(t)}, {"image_id", e["id"]},
                     {"guess", "real"}, {"confidence", 2}};
        auto res = c.Post("/api/response", body.dump(), "application/json");
        EXPECT_TRUE(res && res->status == 200);
      }
    });
  }
  for (auto& w : workers) w.join();
  EXPECT_EQ(server_->store().Snapshot()->size(), 120u);
  EXPECT_EQ(json::parse(client_->Get("/api/report")->body)["responses"], 120);
}

}  // namespace
}  // namespace brightsynth
