// Copyright 2026 The MI Observer Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "service/http_server.h"

#include <gtest/gtest.h>

#include "core/error.h"
#include "httplib.h"
#include "model_fixture.h"

namespace miobs {
namespace {

using nlohmann::json;

class HttpTest : public ::testing::Test {
 protected:
  HttpTest()
      : observer_(models()), server_(observer_), port_(server_.start("127.0.0.1", 0)),
        client_("127.0.0.1", port_) {}

  static ObserverModels models() {
    using testing::tiny_config;
    using testing::toy_vocab;
    ObserverModels m;
    m.client_categorize = std::make_shared<Model>(tiny_config("C_C", 3), toy_vocab(), 1);
    m.therapist_categorize = std::make_shared<Model>(tiny_config("C_T", 3), toy_vocab(), 2);
    m.therapist_forecast = std::make_shared<Model>(tiny_config("F_T", 3), toy_vocab(), 3);
    return m;
  }

  std::string create() {
    auto res = client_.Post("/sessions");
    EXPECT_EQ(res->status, 201);
    return json::parse(res->body)["session_id"];
  }

  httplib::Result say(const std::string& id, const std::string& body) {
    return client_.Post("/sessions/" + id + "/utterances", body, "application/json");
  }

  Observer observer_;
  HttpServer server_;
  int port_;
  httplib::Client client_;
};

TEST_F(HttpTest, HealthReportsLoadedModels) {
  auto res = client_.Get("/healthz");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  const json j = json::parse(res->body);
  EXPECT_EQ(j["status"], "ok");
  EXPECT_TRUE(j["models"]["therapist_forecast"].get<bool>());
  EXPECT_FALSE(j["models"]["client_forecast"].get<bool>());
  EXPECT_EQ(res->get_header_value("Content-Type"), "application/json");
}

TEST_F(HttpTest, SessionLifecycle) {
  const std::string id = create();
  auto res = say(id, R"({"speaker":"C","text":"w1 w2"})");
  ASSERT_EQ(res->status, 201);
  json j = json::parse(res->body);
  EXPECT_EQ(j["distribution"].size(), 3u);
  EXPECT_EQ(j["index"], 0);

  res = client_.Get("/sessions/" + id + "/forecast?speaker=T&k=8");
  ASSERT_EQ(res->status, 200);
  j = json::parse(res->body);
  EXPECT_EQ(j["top"].size(), 8u);
  EXPECT_TRUE(j["warning"].get<bool>());
  EXPECT_EQ(j, json(observer_.forecast(id, "T", 8).body));

  res = client_.Get("/sessions/" + id + "/forecast?speaker=T");
  EXPECT_EQ(json::parse(res->body)["top"].size(), 3u);
}

TEST_F(HttpTest, CloneEndpoint) {
  const std::string id = create();
  say(id, R"({"speaker":"T","text":"w3"})");
  auto res = client_.Post("/sessions/" + id + "/clone");
  ASSERT_EQ(res->status, 201);
  const json j = json::parse(res->body);
  EXPECT_EQ(j["source_id"], id);
  const std::string copy = j["session_id"];
  EXPECT_NE(copy, id);
  EXPECT_EQ(json::parse(say(copy, R"({"speaker":"C","text":"w1"})")->body)["index"], 1);
  EXPECT_EQ(json::parse(say(id, R"({"speaker":"C","text":"w1"})")->body)["index"], 1);
  EXPECT_EQ(client_.Post("/sessions/nope/clone")->status, 404);
}

TEST_F(HttpTest, ErrorStatuses) {
  const std::string id = create();
  EXPECT_EQ(client_.Get("/sessions/" + id + "/forecast?speaker=T")->status, 409);
  EXPECT_EQ(say(id, "not json")->status, 400);
  EXPECT_EQ(say(id, R"(["C","x"])")->status, 400);
  EXPECT_EQ(say(id, R"({"speaker":"C"})")->status, 400);
  EXPECT_EQ(say(id, R"({"speaker":1,"text":"x"})")->status, 400);
  EXPECT_EQ(say(id, R"({"speaker":"Z","text":"x"})")->status, 422);
  EXPECT_EQ(say("s424242", R"({"speaker":"C","text":"x"})")->status, 404);
  say(id, R"({"speaker":"C","text":"w1"})");
  EXPECT_EQ(client_.Get("/sessions/" + id + "/forecast?speaker=T&k=9")->status, 422);
  EXPECT_EQ(client_.Get("/sessions/" + id + "/forecast?speaker=T&k=two")->status, 422);
  EXPECT_EQ(client_.Get("/sessions/" + id + "/forecast?speaker=T&k=-1")->status, 422);
  EXPECT_EQ(client_.Get("/sessions/" + id + "/forecast")->status, 422);
  EXPECT_EQ(client_.Get("/sessions/" + id + "/forecast?speaker=C")->status, 503);
  EXPECT_EQ(client_.Get("/sessions/zzz/forecast?speaker=T")->status, 404);
  auto res = client_.Get("/sessions/" + id + "/forecast?speaker=T&k=0");
  EXPECT_EQ(res->status, 422);
  EXPECT_TRUE(json::parse(res->body).contains("error"));
  EXPECT_EQ(client_.Get("/nowhere")->status, 404);
}

TEST(HttpServerTest, StartsTwiceOnDifferentPortsAndStops) {
  Observer obs(ObserverModels{});
  HttpServer a(obs), b(obs);
  const int pa = a.start("127.0.0.1", 0), pb = b.start("127.0.0.1", 0);
  EXPECT_NE(pa, pb);
  EXPECT_THROW(a.start("127.0.0.1", 0), Error);
  a.stop();
  httplib::Client c("127.0.0.1", pb);
  EXPECT_EQ(c.Get("/healthz")->status, 200);
  httplib::Client dead("127.0.0.1", pa);
  dead.set_connection_timeout(1);
  EXPECT_FALSE(dead.Get("/healthz"));
}

}  // namespace
}  // namespace miobs
