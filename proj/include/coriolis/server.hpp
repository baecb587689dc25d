#pragma once

// Live session service: plain HTTP for static assets plus WebSocket upgrade on
// any path. Each WebSocket connection owns one LiveSession. Everything runs on
// a single io_context thread, so a session's messages, physics batches and
// publishes are serialized without locks.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "coriolis/live_session.hpp"
#include "coriolis/protocol.hpp"

namespace coriolis::service {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;

struct ServerConfig {
  std::string address = "127.0.0.1";
  unsigned short port = 8080;  // 0 picks a free port
  LiveConfig live{};
  double publish_hz = 50.0;
  std::uint64_t max_ticks_per_batch = 200;
  std::filesystem::path static_dir;  // empty: no static files
};

namespace detail {

inline std::string mime_type(const std::filesystem::path& p) {
  const std::string ext = p.extension().string();
  if (ext == ".html" || ext == ".htm") return "text/html";
  if (ext == ".js" || ext == ".mjs") return "application/javascript";
  if (ext == ".css") return "text/css";
  if (ext == ".json") return "application/json";
  if (ext == ".svg") return "image/svg+xml";
  if (ext == ".png") return "image/png";
  return "application/octet-stream";
}

class WsSession : public std::enable_shared_from_this<WsSession> {
 public:
  WsSession(tcp::socket&& socket, const ServerConfig& cfg)
      : ws_(std::move(socket)), timer_(ws_.get_executor()), cfg_(cfg), live_(cfg.live) {}

  void start(http::request<http::string_body> req) {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.text(true);
    ws_.async_accept(req, beast::bind_front_handler(&WsSession::on_accept, shared_from_this()));
  }

 private:
  using Clock = std::chrono::steady_clock;

  void on_accept(beast::error_code ec) {
    if (ec) return;
    started_ = Clock::now();
    do_read();
    schedule();
  }

  void do_read() {
    ws_.async_read(buffer_, beast::bind_front_handler(&WsSession::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec) {
      close();
      return;
    }
    const std::string text = beast::buffers_to_string(buffer_.data());
    buffer_.consume(buffer_.size());
    if (auto err = live_.apply_text(text)) send(protocol::encode(*err), true);
    do_read();
  }

  void schedule() {
    const auto period = std::chrono::duration_cast<Clock::duration>(
        std::chrono::duration<double>(1.0 / cfg_.publish_hz));
    timer_.expires_after(period);
    timer_.async_wait(beast::bind_front_handler(&WsSession::on_timer, shared_from_this()));
  }

  void on_timer(beast::error_code ec) {
    if (ec || closed_) return;
    // Physics follows wall time at the session dt; lag beyond one batch is dropped.
    const double elapsed = std::chrono::duration<double>(Clock::now() - started_).count();
    const auto target = static_cast<std::uint64_t>(elapsed / live_.session().config().dt);
    const std::uint64_t due = target > ticks_done_ ? target - ticks_done_ : 0;
    const std::uint64_t batch = std::clamp<std::uint64_t>(due, 1, cfg_.max_ticks_per_batch);
    live_.advance(batch);
    ticks_done_ += std::max(due, batch);
    send(protocol::encode(live_.publish()), false);
    schedule();
  }

  void send(std::string frame, bool keep) {
    // A slow reader only ever gets the newest states; error replies are kept.
    while (queue_.size() > 8) {
      auto it = std::find_if(std::next(queue_.begin()), queue_.end(),
                             [](const Outgoing& o) { return !o.keep; });
      if (it == queue_.end()) break;
      queue_.erase(it);
    }
    queue_.push_back({std::move(frame), keep});
    if (queue_.size() == 1) do_write();
  }

  void do_write() {
    ws_.async_write(net::buffer(queue_.front().text),
                    beast::bind_front_handler(&WsSession::on_write, shared_from_this()));
  }

  void on_write(beast::error_code ec, std::size_t) {
    if (ec) {
      close();
      return;
    }
    queue_.pop_front();
    if (!queue_.empty()) do_write();
  }

  void close() {
    closed_ = true;
    timer_.cancel();
  }

  struct Outgoing {
    std::string text;
    bool keep = false;
  };

  websocket::stream<beast::tcp_stream> ws_;
  net::steady_timer timer_;
  const ServerConfig& cfg_;
  LiveSession live_;
  beast::flat_buffer buffer_;
  std::deque<Outgoing> queue_;
  Clock::time_point started_{};
  std::uint64_t ticks_done_ = 0;
  bool closed_ = false;
};

class HttpSession : public std::enable_shared_from_this<HttpSession> {
 public:
  HttpSession(tcp::socket&& socket, const ServerConfig& cfg) : stream_(std::move(socket)), cfg_(cfg) {}

  void run() {
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buffer_, req_,
                     beast::bind_front_handler(&HttpSession::on_read, shared_from_this()));
  }

 private:
  void on_read(beast::error_code ec, std::size_t) {
    if (ec) return;
    if (websocket::is_upgrade(req_)) {
      stream_.expires_never();
      std::make_shared<WsSession>(stream_.release_socket(), cfg_)->start(std::move(req_));
      return;
    }
    res_ = std::make_shared<http::response<http::string_body>>(respond());
    http::async_write(stream_, *res_,
                      beast::bind_front_handler(&HttpSession::on_write, shared_from_this()));
  }

  http::response<http::string_body> respond() const {
    http::response<http::string_body> res{http::status::ok, req_.version()};
    res.set(http::field::server, "coriolis");
    res.keep_alive(false);
    auto fail = [&](http::status s, std::string body) {
      res.result(s);
      res.set(http::field::content_type, "text/plain");
      res.body() = std::move(body);
      res.prepare_payload();
      return res;
    };
    if (req_.method() != http::verb::get) return fail(http::status::bad_request, "GET only\n");
    std::string target(req_.target());
    if (const auto q = target.find('?'); q != std::string::npos) target.resize(q);
    if (cfg_.static_dir.empty())
      return fail(http::status::ok, "coriolis live service: open a WebSocket on this port\n");
    if (target.empty() || target[0] != '/' || target.find("..") != std::string::npos)
      return fail(http::status::bad_request, "bad path\n");
    if (target.back() == '/') target += "index.html";
    const std::filesystem::path path = cfg_.static_dir / target.substr(1);
    std::ifstream in(path, std::ios::binary);
    if (!in) return fail(http::status::not_found, "not found\n");
    std::ostringstream body;
    body << in.rdbuf();
    res.set(http::field::content_type, mime_type(path));
    res.body() = body.str();
    res.prepare_payload();
    return res;
  }

  void on_write(beast::error_code, std::size_t) {
    beast::error_code ec;
    stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
  }

  beast::tcp_stream stream_;
  const ServerConfig& cfg_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> req_;
  std::shared_ptr<http::response<http::string_body>> res_;
};

}  // namespace detail

/// Binds on construction; run() blocks until stop() is called.
class Server {
 public:
  explicit Server(ServerConfig cfg) : cfg_(std::move(cfg)), acceptor_(io_) {
    validate(normalized(cfg_.live.scenario));
    if (!(cfg_.publish_hz > 0.0)) throw Error(ErrorKind::config, "publish rate must be > 0");
    const tcp::endpoint ep{net::ip::make_address(cfg_.address), cfg_.port};
    acceptor_.open(ep.protocol());
    acceptor_.set_option(net::socket_base::reuse_address(true));
    acceptor_.bind(ep);
    acceptor_.listen(net::socket_base::max_listen_connections);
  }

  unsigned short port() const { return acceptor_.local_endpoint().port(); }

  void run() {
    do_accept();
    io_.run();
  }

  void stop() { net::post(io_, [this] { io_.stop(); }); }

 private:
  void do_accept() {
    acceptor_.async_accept(net::make_strand(io_), [this](beast::error_code ec, tcp::socket socket) {
      if (!ec) std::make_shared<detail::HttpSession>(std::move(socket), cfg_)->run();
      if (acceptor_.is_open()) do_accept();
    });
  }

  ServerConfig cfg_;
  net::io_context io_{1};
  tcp::acceptor acceptor_;
};

}  // namespace coriolis::service
