#pragma once

#include <atomic>
#include <charconv>
#include <cstdio>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "swarmcast/scenario.hpp"

namespace swarmcast {

enum class SessionStatus { Running, Paused, Split, Finished };

inline constexpr std::string_view to_string(SessionStatus s) noexcept {
  switch (s) {
    case SessionStatus::Running: return "running";
    case SessionStatus::Paused: return "paused";
    case SessionStatus::Split: return "split";
    case SessionStatus::Finished: return "finished";
  }
  return "?";
}

inline constexpr std::size_t kRecentEvents = 32;

/// One interactive run. Commands serialise on the session mutex; readers
/// take the latest published snapshot and never wait for a command.
class Session {
 public:
  Session(std::string id, Scenario sc) : id_(std::move(id)), runner_(std::move(sc)) { publish(); }

  const std::string& id() const noexcept { return id_; }

  /// Closes the current interval and returns the summary of the new one.
  Json apply_broadcast(const BroadcastCommand& cmd) {
    std::lock_guard lock(mu_);
    require(status_ == SessionStatus::Running || status_ == SessionStatus::Paused, ErrorKind::Conflict,
            "session is " + std::string(to_string(status_)));
    runner_.apply_broadcast(cmd);
    publish();
    return interval_summary();
  }

  Json advance(double dt) {
    require(std::isfinite(dt) && dt >= 0.0, ErrorKind::Validation, "dt must be a non-negative number");
    std::lock_guard lock(mu_);
    require(status_ == SessionStatus::Running, ErrorKind::Conflict,
            "session is " + std::string(to_string(status_)));
    if (dt > 0.0) step(dt);
    return *snapshot_unlocked();
  }

  /// Wall-clock driven advance for Running sessions, scaled by the clock ratio.
  void tick(double wall_seconds) {
    std::lock_guard lock(mu_);
    if (status_ != SessionStatus::Running || wall_seconds <= 0.0) return;
    step(wall_seconds * clock_ratio_);
  }

  void pause() {
    std::lock_guard lock(mu_);
    require(status_ == SessionStatus::Running || status_ == SessionStatus::Paused, ErrorKind::Conflict,
            "session is " + std::string(to_string(status_)));
    status_ = SessionStatus::Paused;
    publish();
  }

  void resume() {
    std::lock_guard lock(mu_);
    require(status_ == SessionStatus::Running || status_ == SessionStatus::Paused, ErrorKind::Conflict,
            "session is " + std::string(to_string(status_)));
    status_ = SessionStatus::Running;
    publish();
  }

  void set_clock(double ratio) {
    require(std::isfinite(ratio) && ratio > 0.0, ErrorKind::Validation, "clock ratio must be positive");
    std::lock_guard lock(mu_);
    clock_ratio_ = ratio;
    publish();
  }

  std::shared_ptr<const Json> snapshot() const {
    std::lock_guard lock(snap_mu_);
    return snapshot_;
  }

  /// Events with index >= since, plus the total count.
  Json log_since(std::size_t since) const {
    auto events = events_view();
    Json out = Json::array();
    for (std::size_t i = since; i < events->size(); ++i) out.push_back(to_json((*events)[i]));
    return {{"since", since}, {"count", events->size()}, {"events", std::move(out)}};
  }

  std::size_t event_count() const { return events_view()->size(); }

  SessionStatus status() const {
    std::lock_guard lock(mu_);
    return status_;
  }

  RunLog run_log() const {
    std::lock_guard lock(mu_);
    return runner_.log();
  }

 private:
  using EventList = std::vector<RunEvent>;

  void step(double dt) {
    runner_.advance_to(runner_.state().t + dt);
    if (runner_.status() == RunStatus::Split) status_ = SessionStatus::Split;
    else if (runner_.status() == RunStatus::Finished) status_ = SessionStatus::Finished;
    publish();
  }

  std::shared_ptr<const EventList> events_view() const {
    std::lock_guard lock(snap_mu_);
    return events_;
  }

  std::shared_ptr<const Json> snapshot_unlocked() const { return snapshot(); }

  Json interval_summary() const {
    const auto& st = runner_.state();
    Json j = {{"t", st.t},
              {"u", to_json(st.u)},
              {"leaders", to_json(st.leaders)},
              {"model", std::string(to_string(runner_.scenario().model))},
              {"components", to_json(runner_.components())},
              {"certificate", to_json(runner_.certificate())},
              {"prediction", nullptr},
              {"beta", nullptr}};
    if (runner_.prediction()) {
      j["prediction"] = to_json(*runner_.prediction());
      j["beta"] = runner_.prediction()->beta;
    }
    const auto& bound = runner_.certificate().max_speed;
    j["exceeds_certified_bound"] = bound ? Json(st.u.norm() > *bound) : Json(nullptr);
    return j;
  }

  // Called with mu_ held.
  void publish() {
    const auto& st = runner_.state();
    const auto& log = runner_.log();
    Json positions = Json::array();
    Json flags = Json::array();
    for (std::size_t i = 0; i < st.size(); ++i) {
      positions.push_back(to_json(st.position(i)));
      flags.push_back(st.leaders.contains(i));
    }
    Json recent = Json::array();
    const std::size_t first = log.events.size() > kRecentEvents ? log.events.size() - kRecentEvents : 0;
    for (std::size_t i = first; i < log.events.size(); ++i) recent.push_back(to_json(log.events[i]));
    auto current = build_visibility_graph(st.positions(), runner_.scenario().radius);
    Json snap = {{"id", id_},
                 {"version", ++version_},
                 {"status", std::string(to_string(status_))},
                 {"t", st.t},
                 {"clock", clock_ratio_},
                 {"u", to_json(st.u)},
                 {"positions", std::move(positions)},
                 {"leaders", std::move(flags)},
                 {"edges", to_json(current)["edges"]},
                 {"components", to_json(connected_components(current))},
                 {"interval", interval_summary()},
                 {"prediction", runner_.prediction() ? to_json(*runner_.prediction()) : Json(nullptr)},
                 {"certificate", to_json(runner_.certificate())},
                 {"event_count", log.events.size()},
                 {"recent_events", std::move(recent)}};
    auto snap_ptr = std::make_shared<const Json>(std::move(snap));
    auto events_ptr = std::make_shared<const EventList>(log.events);
    std::lock_guard lock(snap_mu_);
    snapshot_ = std::move(snap_ptr);
    events_ = std::move(events_ptr);
  }

  std::string id_;
  mutable std::mutex mu_;
  ScenarioRunner runner_;
  SessionStatus status_ = SessionStatus::Paused;
  double clock_ratio_ = 1.0;
  std::uint64_t version_ = 0;

  mutable std::mutex snap_mu_;
  std::shared_ptr<const Json> snapshot_;
  std::shared_ptr<const EventList> events_;
};

class SessionManager {
 public:
  std::string create(Scenario sc) {
    sc.validate();
    const auto id = "s" + std::to_string(next_id_.fetch_add(1) + 1);
    auto s = std::make_shared<Session>(id, std::move(sc));
    std::unique_lock lock(mu_);
    sessions_.emplace(id, std::move(s));
    return id;
  }

  std::shared_ptr<Session> get(const std::string& id) const {
    std::shared_lock lock(mu_);
    auto it = sessions_.find(id);
    require(it != sessions_.end(), ErrorKind::NotFound, "unknown session '" + id + "'");
    return it->second;
  }

  std::vector<std::shared_ptr<Session>> all() const {
    std::shared_lock lock(mu_);
    std::vector<std::shared_ptr<Session>> out;
    for (const auto& [_, s] : sessions_) out.push_back(s);
    return out;
  }

  void tick(double wall_seconds) {
    for (auto& s : all()) s->tick(wall_seconds);
  }

 private:
  mutable std::shared_mutex mu_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::atomic<std::uint64_t> next_id_{0};
};

struct HttpResult {
  int status = 200;
  Json body;
};

inline int http_status_for(ErrorKind k) noexcept {
  switch (k) {
    case ErrorKind::NotFound: return 404;
    case ErrorKind::Conflict: return 409;
    default: return 400;
  }
}

inline Json error_body(ErrorKind k, const std::string& message) {
  return {{"error", {{"kind", std::string(to_string(k))}, {"message", message}}}};
}

/// Transport-free REST routing; the server only moves bytes.
class SessionRouter {
 public:
  explicit SessionRouter(SessionManager& manager) : mgr_(manager) {}

  HttpResult handle(std::string_view method, std::string_view target, std::string_view body) const {
    try {
      return dispatch(method, target, body);
    } catch (const Error& e) {
      return {http_status_for(e.kind()), error_body(e.kind(), e.what())};
    } catch (const nlohmann::json::exception& e) {
      return {400, error_body(ErrorKind::Validation, std::string("malformed JSON: ") + e.what())};
    }
  }

  /// Splits "/sessions/{id}/stream"; returns the id or nullopt.
  static std::optional<std::string> stream_session_id(std::string_view target) {
    const auto parts = split_path(strip_query(target));
    if (parts.size() == 3 && parts[0] == "sessions" && parts[2] == "stream") return std::string(parts[1]);
    return std::nullopt;
  }

 private:
  static std::string_view strip_query(std::string_view target) {
    const auto q = target.find('?');
    return q == std::string_view::npos ? target : target.substr(0, q);
  }

  static std::vector<std::string_view> split_path(std::string_view path) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (pos < path.size()) {
      while (pos < path.size() && path[pos] == '/') ++pos;
      const auto end = path.find('/', pos);
      const auto stop = end == std::string_view::npos ? path.size() : end;
      if (stop > pos) out.push_back(path.substr(pos, stop - pos));
      pos = stop;
    }
    return out;
  }

  static std::optional<std::string> query_param(std::string_view target, std::string_view key) {
    const auto q = target.find('?');
    if (q == std::string_view::npos) return std::nullopt;
    auto rest = target.substr(q + 1);
    while (!rest.empty()) {
      const auto amp = rest.find('&');
      const auto item = rest.substr(0, amp);
      const auto eq = item.find('=');
      if (item.substr(0, eq) == key) return std::string(eq == std::string_view::npos ? "" : item.substr(eq + 1));
      if (amp == std::string_view::npos) break;
      rest = rest.substr(amp + 1);
    }
    return std::nullopt;
  }

  static Json parse_body(std::string_view body) {
    if (body.empty()) return Json::object();
    auto j = Json::parse(body, nullptr, false);
    require(!j.is_discarded(), ErrorKind::Validation, "request body is not valid JSON");
    return j;
  }

  HttpResult dispatch(std::string_view method, std::string_view target, std::string_view body) const {
    const auto parts = split_path(strip_query(target));
    if (parts.empty() || parts[0] != "sessions") fail(ErrorKind::NotFound, "no route for " + std::string(target));

    if (parts.size() == 1) {
      if (method != "POST") return method_not_allowed();
      const auto id = mgr_.create(scenario_from_json(parse_body(body)));
      return {201, {{"id", id}}};
    }

    auto session = mgr_.get(std::string(parts[1]));
    if (parts.size() == 2) {
      if (method != "GET") return method_not_allowed();
      return {200, *session->snapshot()};
    }
    if (parts.size() != 3) fail(ErrorKind::NotFound, "no route for " + std::string(target));
    const auto action = parts[2];

    if (action == "state") {
      if (method != "GET") return method_not_allowed();
      return {200, *session->snapshot()};
    }
    if (action == "log") {
      if (method != "GET") return method_not_allowed();
      std::size_t since = 0;
      if (auto s = query_param(target, "since")) {
        auto [ptr, ec] = std::from_chars(s->data(), s->data() + s->size(), since);
        require(ec == std::errc() && ptr == s->data() + s->size(), ErrorKind::Validation,
                "since must be a non-negative integer");
      }
      return {200, session->log_since(since)};
    }
    if (method != "POST") return method_not_allowed();
    const Json j = parse_body(body);
    if (action == "broadcast") return {200, session->apply_broadcast(broadcast_from_json(j))};
    if (action == "advance") {
      require(j.contains("dt") && j["dt"].is_number(), ErrorKind::Validation, "advance needs a numeric 'dt'");
      return {200, session->advance(j["dt"].get<double>())};
    }
    if (action == "pause") {
      session->pause();
      return {200, *session->snapshot()};
    }
    if (action == "resume") {
      session->resume();
      return {200, *session->snapshot()};
    }
    if (action == "clock") {
      require(j.contains("ratio") && j["ratio"].is_number(), ErrorKind::Validation, "clock needs a numeric 'ratio'");
      session->set_clock(j["ratio"].get<double>());
      return {200, *session->snapshot()};
    }
    fail(ErrorKind::NotFound, "no route for " + std::string(target));
  }

  static HttpResult method_not_allowed() {
    return {405, error_body(ErrorKind::Validation, "method not allowed")};
  }

  SessionManager& mgr_;
};

}  // namespace swarmcast
