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

#ifndef MIOBS_SERVICE_HTTP_SERVER_H_
#define MIOBS_SERVICE_HTTP_SERVER_H_

#include <memory>
#include <string>
#include <thread>

#include "service/observer.h"

namespace httplib {
class Server;
}

namespace miobs {

// Routes:
//   POST /sessions                          -> 201 {session_id}
//   POST /sessions/{id}/utterances          -> 201 {code, distribution, ...}
//   GET  /sessions/{id}/forecast?speaker=&k= -> 200 {top, warning, ...}
//   POST /sessions/{id}/clone               -> 201 {session_id, source_id}
//   GET  /healthz                           -> 200
class HttpServer {
 public:
  explicit HttpServer(Observer& observer);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Binds to host:port (port 0 picks a free port) and serves on a background
  // thread. Returns the bound port.
  int start(const std::string& host, int port);
  // Serves on the calling thread until stop().
  void listen(const std::string& host, int port);
  void stop();

 private:
  Observer& observer_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
};

}  // namespace miobs

#endif  // MIOBS_SERVICE_HTTP_SERVER_H_
