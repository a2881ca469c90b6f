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

#include <cstdlib>
#include <optional>
#include <stdexcept>
#include <utility>

#include "core/error.h"
#include "httplib.h"

namespace miobs {
namespace {

void send(httplib::Response& res, const Reply& reply) {
  res.status = reply.status;
  res.set_content(reply.body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
  Reply r;
  r.status = status;
  r.body["error"] = message;
  send(res, r);
}

// Parses a positive decimal integer; nullopt on anything else.
std::optional<std::size_t> parse_k(const std::string& s) {
  if (s.empty() || s.size() > 6) return std::nullopt;
  for (char c : s)
    if (c < '0' || c > '9') return std::nullopt;
  return static_cast<std::size_t>(std::strtoul(s.c_str(), nullptr, 10));
}

}  // namespace

HttpServer::HttpServer(Observer& observer)
    : observer_(observer), server_(std::make_unique<httplib::Server>()) {
  auto& s = *server_;
  s.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      send_error(res, 500, e.what());
    } catch (...) {
      send_error(res, 500, "internal error");
    }
  });

  s.Get("/healthz", [this](const httplib::Request&, httplib::Response& res) {
    send(res, observer_.health());
  });

  s.Post("/sessions", [this](const httplib::Request&, httplib::Response& res) {
    send(res, observer_.create_session());
  });

  s.Post(R"(/sessions/([^/]+)/utterances)", [this](const httplib::Request& req,
                                                   httplib::Response& res) {
    const std::string id = req.matches[1];
    nlohmann::json body = nlohmann::json::parse(req.body, nullptr, false);
    if (body.is_discarded() || !body.is_object()) {
      send_error(res, 400, "body must be a JSON object {speaker, text}");
      return;
    }
    auto speaker = body.find("speaker");
    auto text = body.find("text");
    if (speaker == body.end() || !speaker->is_string() || text == body.end() ||
        !text->is_string()) {
      send_error(res, 400, "body must carry string fields speaker and text");
      return;
    }
    send(res, observer_.add_utterance(id, speaker->get<std::string>(), text->get<std::string>()));
  });

  s.Get(R"(/sessions/([^/]+)/forecast)", [this](const httplib::Request& req,
                                                 httplib::Response& res) {
    const std::string id = req.matches[1];
    const std::string speaker = req.get_param_value("speaker");
    std::optional<std::size_t> k;
    if (req.has_param("k")) {
      k = parse_k(req.get_param_value("k"));
      if (!k) {
        send_error(res, 422, "k must be a positive integer");
        return;
      }
    }
    send(res, observer_.forecast(id, speaker, k));
  });

  s.Post(R"(/sessions/([^/]+)/clone)", [this](const httplib::Request& req,
                                               httplib::Response& res) {
    send(res, observer_.clone_session(req.matches[1]));
  });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::start(const std::string& host, int port) {
  if (thread_.joinable()) throw ContractError("server already started");
  const int bound = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw IoError("cannot bind " + host + ":" + std::to_string(port));
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return bound;
}

void HttpServer::listen(const std::string& host, int port) {
  if (!server_->listen(host, port)) throw IoError("cannot listen on " + host + ":" + std::to_string(port));
}

void HttpServer::stop() {
  server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace miobs
