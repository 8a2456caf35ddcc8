// Copyright 2026 The REALM Authors
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

#ifndef REALM_PLAYGROUND_SERVER_H_
#define REALM_PLAYGROUND_SERVER_H_

#include <memory>
#include <optional>
#include <string>

#include "realm/session.h"

namespace realm {

struct ServerOptions {
  std::string address = "127.0.0.1";
  unsigned short port = 8080;  // 0 picks a free port
  std::optional<std::string> static_dir;  // served under /
  double control_hz = 10.0;
  bool handle_signals = false;  // stop on SIGINT / SIGTERM
};

// Hosts one session for one interactive client.
//
//   GET /health      JSON liveness probe with the session position
//   GET /ws          websocket: frames out, HumanInput messages in
//   GET /<file>      static assets from static_dir, when configured
//
// Messages are newline-terminated JSON objects. The session advances one
// cycle per control tick while a client is connected and pauses otherwise.
// Each tick consumes at most one queued input. Inputs that fail to parse are
// answered with an error frame (code bad_input) as they arrive; inputs that do
// not match the active mode get code mode_mismatch. A second client is
// refused with 409 while one is attached.
class PlaygroundServer {
 public:
  PlaygroundServer(std::unique_ptr<Session> session, ServerOptions options);
  ~PlaygroundServer();
  PlaygroundServer(const PlaygroundServer&) = delete;
  PlaygroundServer& operator=(const PlaygroundServer&) = delete;

  // Binds and listens; returns the bound port. Throws std::runtime_error when
  // the address cannot be bound.
  unsigned short Start();
  // Serves until Stop() or a handled signal. The session log is finished
  // (summary written) before returning.
  void Run();
  // Safe to call from any thread.
  void Stop();

  std::string Url() const;

 private:
  class Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace realm

#endif  // REALM_PLAYGROUND_SERVER_H_
