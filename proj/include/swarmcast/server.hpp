#pragma once

// HTTP + WebSocket front end for SessionRouter. Synchronous Boost.Beast,
// one thread per connection, one request per HTTP connection.

#include <atomic>
#include <chrono>
#include <list>
#include <mutex>
#include <string>
#include <thread>

#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "swarmcast/session.hpp"

namespace swarmcast {

namespace detail {
namespace http = boost::beast::http;
}  // namespace detail

struct ServerOptions {
  std::string address = "127.0.0.1";
  unsigned short port = 8080;  // 0 picks a free port
  std::chrono::milliseconds tick{50};
  std::chrono::milliseconds stream_cadence{200};
};

class SessionServer {
 public:
  SessionServer(SessionManager& manager, ServerOptions opts)
      : mgr_(manager), router_(manager), opts_(std::move(opts)), acceptor_(ioc_) {
    namespace net = boost::asio;
    const net::ip::tcp::endpoint ep(net::ip::make_address(opts_.address), opts_.port);
    acceptor_.open(ep.protocol());
    acceptor_.set_option(net::socket_base::reuse_address(true));
    acceptor_.bind(ep);
    acceptor_.listen();
  }

  ~SessionServer() { stop(); }

  unsigned short port() const { return acceptor_.local_endpoint().port(); }

  void start() {
    running_ = true;
    ticker_ = std::thread([this] { tick_loop(); });
    accept_thread_ = std::thread([this] { accept_loop(); });
  }

  /// Blocks until stop() is called from another thread.
  void run() {
    start();
    if (accept_thread_.joinable()) accept_thread_.join();
  }

  void stop() {
    if (!running_.exchange(false)) return;
    boost::system::error_code ec;
    if (accept_thread_.joinable() && accept_thread_.get_id() != std::this_thread::get_id()) {
      // A throwaway connection wakes the blocking accept.
      tcp::socket wake(ioc_);
      wake.connect(tcp::endpoint(acceptor_.local_endpoint().address(), port()), ec);
      accept_thread_.join();
    }
    acceptor_.close(ec);
    if (ticker_.joinable()) ticker_.join();
    std::list<std::thread> workers;
    {
      std::lock_guard lock(workers_mu_);
      workers.swap(workers_);
    }
    for (auto& w : workers)
      if (w.joinable()) w.join();
  }

 private:
  using tcp = boost::asio::ip::tcp;

  void tick_loop() {
    auto last = std::chrono::steady_clock::now();
    while (running_) {
      std::this_thread::sleep_for(opts_.tick);
      const auto now = std::chrono::steady_clock::now();
      mgr_.tick(std::chrono::duration<double>(now - last).count());
      last = now;
    }
  }

  void accept_loop() {
    while (running_) {
      boost::system::error_code ec;
      tcp::socket socket(ioc_);
      acceptor_.accept(socket, ec);
      if (!running_) break;
      if (ec) continue;
      std::lock_guard lock(workers_mu_);
      workers_.emplace_back([this, s = std::move(socket)]() mutable { serve(std::move(s)); });
    }
  }

  void serve(tcp::socket socket) {
    boost::system::error_code ec;
    boost::beast::flat_buffer buffer;
    detail::http::request<detail::http::string_body> req;
    detail::http::read(socket, buffer, req, ec);
    if (ec) return;

    if (boost::beast::websocket::is_upgrade(req)) {
      stream(std::move(socket), req);
      return;
    }

    const auto result = router_.handle(std::string(req.method_string()), std::string(req.target()), req.body());
    detail::http::response<detail::http::string_body> res{static_cast<detail::http::status>(result.status), req.version()};
    res.set(detail::http::field::content_type, "application/json");
    res.set(detail::http::field::access_control_allow_origin, "*");
    res.keep_alive(false);
    res.body() = canonical_dump(result.body);
    res.prepare_payload();
    detail::http::write(socket, res, ec);
    socket.shutdown(tcp::socket::shutdown_both, ec);
  }

  // Pushes every new RunEvent as soon as it is seen and the full state at
  // the configured cadence.
  void stream(tcp::socket socket, const detail::http::request<detail::http::string_body>& req) {
    namespace websocket = boost::beast::websocket;
    std::shared_ptr<Session> session;
    try {
      const auto id = SessionRouter::stream_session_id(std::string(req.target()));
      require(id.has_value(), ErrorKind::NotFound, "no stream route for " + std::string(req.target()));
      session = mgr_.get(*id);
    } catch (const Error& e) {
      detail::http::response<detail::http::string_body> res{static_cast<detail::http::status>(http_status_for(e.kind())), req.version()};
      res.set(detail::http::field::content_type, "application/json");
      res.body() = canonical_dump(error_body(e.kind(), e.what()));
      res.prepare_payload();
      boost::system::error_code ec;
      detail::http::write(socket, res, ec);
      return;
    }

    websocket::stream<tcp::socket> ws(std::move(socket));
    boost::system::error_code ec;
    ws.accept(req, ec);
    if (ec) return;
    ws.text(true);

    auto send = [&](const Json& j) {
      ws.write(boost::asio::buffer(canonical_dump(j)), ec);
      return !ec;
    };

    std::size_t sent_events = session->event_count();
    std::uint64_t sent_version = 0;
    auto next_state = std::chrono::steady_clock::now();
    while (running_) {
      // Client frames are ignored; reading them lets Beast answer a close.
      if (ws.next_layer().available(ec) > 0) {
        boost::beast::flat_buffer incoming;
        ws.read(incoming, ec);
        if (ec) return;
      }
      const auto now = std::chrono::steady_clock::now();
      const auto count = session->event_count();
      if (count > sent_events) {
        const auto batch = session->log_since(sent_events);
        for (const auto& e : batch["events"]) {
          if (!send({{"type", "event"}, {"event", e}})) return;
          ++sent_events;
        }
      }
      if (now >= next_state) {
        const auto snap = session->snapshot();
        const auto version = snap->at("version").get<std::uint64_t>();
        if (version != sent_version || sent_version == 0) {
          if (!send({{"type", "state"}, {"state", *snap}})) return;
          sent_version = version;
        }
        next_state = now + opts_.stream_cadence;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    ws.close(websocket::close_code::going_away, ec);
  }

  SessionManager& mgr_;
  SessionRouter router_;
  ServerOptions opts_;
  boost::asio::io_context ioc_;
  tcp::acceptor acceptor_;
  std::atomic<bool> running_{false};
  std::thread accept_thread_;
  std::thread ticker_;
  std::mutex workers_mu_;
  std::list<std::thread> workers_;
};

}  // namespace swarmcast
