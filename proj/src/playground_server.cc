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

#include "realm/playground_server.h"

#include <chrono>
#include <csignal>
#include <deque>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

namespace realm {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;

namespace {

std::string Line(const nlohmann::json& json) { return json.dump() + "\n"; }

nlohmann::json ErrorMessage(const std::string& code, const std::string& message) {
  return {{"type", "error"}, {"code", code}, {"message", message}};
}

std::string_view MimeType(const std::filesystem::path& path) {
  const std::string ext = path.extension().string();
  if (ext == ".html" || ext == ".htm") return "text/html";
  if (ext == ".js" || ext == ".mjs") return "application/javascript";
  if (ext == ".css") return "text/css";
  if (ext == ".json") return "application/json";
  if (ext == ".svg") return "image/svg+xml";
  if (ext == ".png") return "image/png";
  if (ext == ".ico") return "image/x-icon";
  return "application/octet-stream";
}

}  // namespace

class PlaygroundServer::Impl {
 public:
  class Client;
  class Connection;

  Impl(std::unique_ptr<Session> session, ServerOptions options)
      : session_(std::move(session)),
        options_(std::move(options)),
        acceptor_(io_),
        timer_(io_),
        signals_(io_) {
    if (!session_) throw std::invalid_argument("server needs a session");
    if (!(options_.control_hz > 0.0)) {
      throw std::invalid_argument("control rate must be positive");
    }
  }

  unsigned short Start() {
    beast::error_code ec;
    const auto address = net::ip::make_address(options_.address, ec);
    if (ec) throw std::runtime_error("bad bind address " + options_.address);
    const tcp::endpoint endpoint(address, options_.port);
    acceptor_.open(endpoint.protocol(), ec);
    if (!ec) acceptor_.set_option(net::socket_base::reuse_address(true), ec);
    if (!ec) acceptor_.bind(endpoint, ec);
    if (!ec) acceptor_.listen(net::socket_base::max_listen_connections, ec);
    if (ec) {
      throw std::runtime_error("cannot bind " + options_.address + ":" +
                               std::to_string(options_.port) + ": " + ec.message());
    }
    port_ = acceptor_.local_endpoint().port();
    if (options_.handle_signals) {
      signals_.add(SIGINT);
      signals_.add(SIGTERM);
      signals_.async_wait([this](beast::error_code e, int) {
        if (!e) Shutdown();
      });
    }
    Accept();
    ScheduleTick();
    return port_;
  }

  void Run() {
    io_.run();
    session_->Finish(!session_->done());
  }

  void Stop() {
    net::post(io_, [this] { Shutdown(); });
  }

  std::string Url() const {
    return "http://" + options_.address + ":" + std::to_string(port_) + "/";
  }

  // HTTP side.
  http::response<http::string_body> Handle(
      const http::request<http::string_body>& req);
  void Upgrade(tcp::socket socket, http::request<http::string_body> req);

  // Websocket side.
  void Received(Client* client, const std::string& text);
  void Detach(Client* client);

 private:
  void Accept();
  void ScheduleTick();
  void Tick();
  void Shutdown();

  std::unique_ptr<Session> session_;
  ServerOptions options_;
  net::io_context io_;
  tcp::acceptor acceptor_;
  net::steady_timer timer_;
  net::signal_set signals_;
  unsigned short port_ = 0;
  std::shared_ptr<Client> client_;
  std::deque<HumanInput> inputs_;
  bool summary_sent_ = false;
  bool stopping_ = false;
};

class PlaygroundServer::Impl::Client
    : public std::enable_shared_from_this<Client> {
 public:
  Client(tcp::socket socket, Impl* server)
      : ws_(std::move(socket)), server_(server) {}

  void Accept(http::request<http::string_body> req) {
    ws_.set_option(
        websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(req, [self = shared_from_this()](beast::error_code ec) {
      if (ec) {
        self->server_->Detach(self.get());
        return;
      }
      self->open_ = true;
      // Messages queued during the handshake go out first.
      if (!self->outbox_.empty()) self->Write();
      self->Read();
    });
  }

  void Send(std::string text) {
    if (closing_) return;
    outbox_.push_back(std::move(text));
    if (outbox_.size() == 1 && open_) Write();
  }

  void Close() {
    if (closing_) return;
    closing_ = true;
    beast::error_code ignored;
    beast::get_lowest_layer(ws_).socket().shutdown(tcp::socket::shutdown_both,
                                                   ignored);
    beast::get_lowest_layer(ws_).close();
  }

  bool open() const { return open_ && !closing_; }

 private:
  void Read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec,
                                                        std::size_t) {
      if (ec) {
        self->open_ = false;
        self->server_->Detach(self.get());
        return;
      }
      const std::string text = beast::buffers_to_string(self->buffer_.data());
      self->buffer_.consume(self->buffer_.size());
      self->server_->Received(self.get(), text);
      if (self->open()) self->Read();
    });
  }

  void Write() {
    ws_.text(true);
    ws_.async_write(net::buffer(outbox_.front()),
                    [self = shared_from_this()](beast::error_code ec, std::size_t) {
                      if (ec) {
                        self->outbox_.clear();
                        return;
                      }
                      self->outbox_.pop_front();
                      if (!self->outbox_.empty()) self->Write();
                    });
  }

  websocket::stream<beast::tcp_stream> ws_;
  beast::flat_buffer buffer_;
  std::deque<std::string> outbox_;
  Impl* server_;
  bool open_ = false;
  bool closing_ = false;
};

class PlaygroundServer::Impl::Connection
    : public std::enable_shared_from_this<Connection> {
 public:
  Connection(tcp::socket socket, Impl* server)
      : stream_(std::move(socket)), server_(server) {}

  void Start() {
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buffer_, req_,
                     [self = shared_from_this()](beast::error_code ec, std::size_t) {
                       if (!ec) self->OnRead();
                     });
  }

 private:
  void OnRead() {
    if (websocket::is_upgrade(req_)) {
      stream_.expires_never();
      server_->Upgrade(stream_.release_socket(), std::move(req_));
      return;
    }
    auto res = std::make_shared<http::response<http::string_body>>(
        server_->Handle(req_));
    http::async_write(stream_, *res,
                      [self = shared_from_this(), res](beast::error_code, std::size_t) {
                        beast::error_code ignored;
                        self->stream_.socket().shutdown(
                            tcp::socket::shutdown_send, ignored);
                      });
  }

  beast::tcp_stream stream_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> req_;
  Impl* server_;
};

namespace {

http::response<http::string_body> Respond(const http::request<http::string_body>& req,
                                          http::status status,
                                          std::string_view type, std::string body) {
  http::response<http::string_body> res{status, req.version()};
  res.set(http::field::server, "realm");
  res.set(http::field::content_type, beast::string_view(type.data(), type.size()));
  res.keep_alive(false);
  res.body() = std::move(body);
  res.prepare_payload();
  return res;
}

}  // namespace

http::response<http::string_body> PlaygroundServer::Impl::Handle(
    const http::request<http::string_body>& req) {
  if (req.method() != http::verb::get && req.method() != http::verb::head) {
    return Respond(req, http::status::method_not_allowed, "text/plain",
                   "method not allowed\n");
  }
  std::string target(req.target());
  target = target.substr(0, target.find('?'));
  if (target == "/health") {
    const nlohmann::json body = {
        {"status", "ok"},
        {"t", session_->t()},
        {"cycle", session_->cycle()},
        {"mode", session_->mode().Name()},
        {"done", session_->done()},
        {"client", client_ != nullptr}};
    return Respond(req, http::status::ok, "application/json", Line(body));
  }
  if (target == "/ws") {
    return Respond(req, http::status::upgrade_required, "text/plain",
                   "websocket upgrade required\n");
  }
  if (options_.static_dir && target.find("..") == std::string::npos) {
    if (target == "/") target = "/index.html";
    const std::filesystem::path path =
        std::filesystem::path(*options_.static_dir) / target.substr(1);
    if (std::filesystem::is_regular_file(path)) {
      std::ifstream in(path, std::ios::binary);
      std::ostringstream body;
      body << in.rdbuf();
      return Respond(req, http::status::ok, MimeType(path), body.str());
    }
  }
  return Respond(req, http::status::not_found, "text/plain", "not found\n");
}

void PlaygroundServer::Impl::Upgrade(tcp::socket socket,
                                     http::request<http::string_body> req) {
  std::string target(req.target());
  target = target.substr(0, target.find('?'));
  if (target != "/ws" || client_ != nullptr || stopping_) {
    auto stream = std::make_shared<beast::tcp_stream>(std::move(socket));
    auto res = std::make_shared<http::response<http::string_body>>(
        target != "/ws"
            ? Respond(req, http::status::not_found, "text/plain", "not found\n")
            : Respond(req, http::status::conflict, "text/plain",
                      "session already has a client\n"));
    http::async_write(*stream, *res, [stream, res](beast::error_code, std::size_t) {
      beast::error_code ignored;
      stream->socket().shutdown(tcp::socket::shutdown_send, ignored);
    });
    return;
  }
  client_ = std::make_shared<Client>(std::move(socket), this);
  client_->Accept(std::move(req));
  // Bring the new client up to date.
  if (const auto& frame = session_->last_frame()) client_->Send(Line(ToJson(*frame)));
  if (session_->done()) {
    client_->Send(Line(session_->Finish()));
  }
}

void PlaygroundServer::Impl::Received(Client* client, const std::string& text) {
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      inputs_.push_back(ParseHumanInput(nlohmann::json::parse(line)));
    } catch (const std::exception& e) {
      client->Send(Line(ErrorMessage("bad_input", e.what())));
    }
  }
}

void PlaygroundServer::Impl::Detach(Client* client) {
  // The session simply stops advancing until someone reconnects.
  if (client_.get() == client) {
    client_.reset();
    inputs_.clear();
  }
}

void PlaygroundServer::Impl::Accept() {
  acceptor_.async_accept([this](beast::error_code ec, tcp::socket socket) {
    if (ec) return;  // acceptor closed
    std::make_shared<Connection>(std::move(socket), this)->Start();
    Accept();
  });
}

void PlaygroundServer::Impl::ScheduleTick() {
  timer_.expires_after(std::chrono::duration_cast<net::steady_timer::duration>(
      std::chrono::duration<double>(1.0 / options_.control_hz)));
  timer_.async_wait([this](beast::error_code ec) {
    if (ec) return;
    Tick();
    ScheduleTick();
  });
}

void PlaygroundServer::Impl::Tick() {
  if (!client_ || !client_->open() || session_->done()) return;
  std::optional<HumanInput> input;
  if (!inputs_.empty()) {
    input = std::move(inputs_.front());
    inputs_.pop_front();
  }
  try {
    StepResult result = session_->Step(input);
    if (!result.ok()) {
      client_->Send(
          Line(ErrorMessage(result.rejection->code, result.rejection->message)));
      result = session_->Step(std::nullopt);
    }
    client_->Send(Line(ToJson(*result.frame)));
  } catch (const std::exception& e) {
    client_->Send(Line(ErrorMessage("internal", e.what())));
  }
  if (session_->done() && !summary_sent_) {
    summary_sent_ = true;
    nlohmann::json summary = session_->Finish();
    if (auto path = session_->log_path()) summary["log"] = *path;
    client_->Send(Line(summary));
  }
}

void PlaygroundServer::Impl::Shutdown() {
  if (stopping_) return;
  stopping_ = true;
  beast::error_code ignored;
  acceptor_.close(ignored);
  timer_.cancel();
  signals_.cancel(ignored);
  if (client_) client_->Close();
  session_->Finish(!session_->done());
  io_.stop();
}

PlaygroundServer::PlaygroundServer(std::unique_ptr<Session> session,
                                   ServerOptions options)
    : impl_(std::make_unique<Impl>(std::move(session), std::move(options))) {}

PlaygroundServer::~PlaygroundServer() = default;

unsigned short PlaygroundServer::Start() { return impl_->Start(); }
void PlaygroundServer::Run() { impl_->Run(); }
void PlaygroundServer::Stop() { impl_->Stop(); }
std::string PlaygroundServer::Url() const { return impl_->Url(); }

}  // namespace realm
