#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "swarmcast/dynamics.hpp"
#include "swarmcast/json_io.hpp"
#include "swarmcast/safety.hpp"

namespace swarmcast {

/// One broadcast: velocity plus either a detection probability or an
/// explicit (0-based) leader list.
struct BroadcastCommand {
  Vec2 u;
  std::optional<double> detect_prob;
  std::optional<std::vector<std::size_t>> leaders;
  std::uint64_t seed_offset = 0;

  void validate(std::size_t n) const {
    require(u.finite(), ErrorKind::Validation, "broadcast velocity must be finite");
    require(detect_prob.has_value() != leaders.has_value(), ErrorKind::Validation,
            "broadcast needs exactly one of 'detect_prob' or 'leaders'");
    if (detect_prob)
      require(std::isfinite(*detect_prob) && *detect_prob > 0.0 && *detect_prob <= 1.0, ErrorKind::Validation,
              "detect_prob must be in (0, 1]");
    if (leaders)
      for (auto i : *leaders) require(i < n, ErrorKind::Validation, "leader index out of range");
  }
};

struct ScheduleEntry {
  double t = 0.0;
  BroadcastCommand command;
};

struct Scenario {
  std::string id = "scenario";
  std::uint64_t seed = 0;
  std::size_t n = 0;
  double radius = 1.0;
  InfluenceModel model = InfluenceModel::Uniform;
  std::optional<Positions> positions;
  std::optional<std::pair<double, double>> random_box;
  double horizon = 10.0;
  double sample_dt = 0.1;
  bool continue_after_split = false;
  std::vector<ScheduleEntry> schedule;

  void validate() const {
    require(n >= 1, ErrorKind::Validation, "scenario needs n >= 1");
    require(std::isfinite(radius) && radius > 0.0, ErrorKind::Validation, "radius must be positive");
    require(std::isfinite(horizon) && horizon > 0.0, ErrorKind::Validation, "horizon must be positive");
    require(std::isfinite(sample_dt) && sample_dt > 0.0, ErrorKind::Validation, "sample_dt must be positive");
    require(positions.has_value() != random_box.has_value(), ErrorKind::Validation,
            "scenario needs explicit positions or a random box");
    if (positions) {
      require(positions->size() == n, ErrorKind::Validation, "positions length does not match n");
      for (const auto& p : *positions) require(p.finite(), ErrorKind::Validation, "positions must be finite");
    } else {
      require(std::isfinite(random_box->first) && std::isfinite(random_box->second) &&
                  random_box->first < random_box->second,
              ErrorKind::Validation, "random box needs lo < hi");
    }
    double prev = 0.0;
    for (const auto& e : schedule) {
      require(std::isfinite(e.t) && e.t >= 0.0 && e.t <= horizon, ErrorKind::Validation,
              "schedule time outside [0, horizon]");
      require(e.t >= prev, ErrorKind::Validation, "schedule must be sorted by time");
      prev = e.t;
      e.command.validate(n);
    }
  }

  /// Explicit positions, or a uniform draw in box² from the seed's stream 0.
  Positions initial_positions() const {
    if (positions) return *positions;
    auto rng = CounterRng(seed).split(0);
    Positions out(n);
    for (auto& p : out) {
      p.x = rng.uniform(random_box->first, random_box->second);
      p.y = rng.uniform(random_box->first, random_box->second);
    }
    return out;
  }
};

inline BroadcastCommand broadcast_from_json(const Json& j) {
  require(j.is_object(), ErrorKind::Validation, "broadcast must be a JSON object");
  require(j.contains("u"), ErrorKind::Validation, "broadcast needs 'u'");
  BroadcastCommand c;
  c.u = vec2_from_json(j.at("u"));
  if (j.contains("detect_prob")) {
    require(j["detect_prob"].is_number(), ErrorKind::Validation, "detect_prob must be a number");
    c.detect_prob = j["detect_prob"].get<double>();
  }
  if (j.contains("leaders")) {
    require(j["leaders"].is_array(), ErrorKind::Validation, "leaders must be an array");
    std::vector<std::size_t> l;
    for (const auto& v : j["leaders"]) {
      require(v.is_number_unsigned(), ErrorKind::Validation, "leader indices must be non-negative integers");
      l.push_back(v.get<std::size_t>());
    }
    c.leaders = std::move(l);
  }
  if (j.contains("seed_offset")) {
    require(j["seed_offset"].is_number_unsigned(), ErrorKind::Validation, "seed_offset must be a non-negative integer");
    c.seed_offset = j["seed_offset"].get<std::uint64_t>();
  }
  return c;
}

inline Json to_json(const BroadcastCommand& c) {
  Json j = {{"u", to_json(c.u)}, {"seed_offset", c.seed_offset}};
  if (c.detect_prob) j["detect_prob"] = *c.detect_prob;
  if (c.leaders) j["leaders"] = *c.leaders;
  return j;
}

inline Scenario scenario_from_json(const Json& j) {
  require(j.is_object(), ErrorKind::Validation, "scenario must be a JSON object");
  Scenario sc;
  try {
    sc.id = j.value("id", sc.id);
    sc.seed = j.value("seed", std::uint64_t{0});
    require(j.contains("n"), ErrorKind::Validation, "scenario needs 'n'");
    sc.n = j.at("n").get<std::size_t>();
    sc.radius = j.value("radius", 1.0);
    sc.model = parse_influence_model(j.value("model", std::string("uniform")));
    require(j.contains("positions"), ErrorKind::Validation, "scenario needs 'positions'");
    const auto& pos = j.at("positions");
    if (pos.is_array()) {
      Positions p;
      for (const auto& v : pos) p.push_back(vec2_from_json(v));
      sc.positions = std::move(p);
    } else {
      require(pos.is_object() && pos.contains("random") && pos["random"].contains("box"), ErrorKind::Validation,
              "positions must be a list or {\"random\": {\"box\": [lo, hi]}}");
      const auto& box = pos["random"]["box"];
      require(box.is_array() && box.size() == 2, ErrorKind::Validation, "random box must be [lo, hi]");
      sc.random_box = std::pair{box[0].get<double>(), box[1].get<double>()};
    }
    sc.horizon = j.value("horizon", sc.horizon);
    sc.sample_dt = j.value("sample_dt", sc.sample_dt);
    sc.continue_after_split = j.value("continue_after_split", false);
    if (j.contains("schedule")) {
      require(j["schedule"].is_array(), ErrorKind::Validation, "schedule must be an array");
      for (const auto& e : j["schedule"]) {
        require(e.is_object() && e.contains("t"), ErrorKind::Validation, "schedule entry needs 't'");
        sc.schedule.push_back({e.at("t").get<double>(), broadcast_from_json(e)});
      }
    }
  } catch (const nlohmann::json::exception& ex) {
    fail(ErrorKind::Validation, std::string("malformed scenario: ") + ex.what());
  }
  sc.validate();
  return sc;
}

inline Json to_json(const Scenario& sc) {
  Json j = {{"id", sc.id},
            {"seed", sc.seed},
            {"n", sc.n},
            {"radius", sc.radius},
            {"model", std::string(to_string(sc.model))},
            {"horizon", sc.horizon},
            {"sample_dt", sc.sample_dt},
            {"continue_after_split", sc.continue_after_split}};
  if (sc.positions) {
    Json p = Json::array();
    for (const auto& v : *sc.positions) p.push_back(to_json(v));
    j["positions"] = std::move(p);
  } else {
    j["positions"] = {{"random", {{"box", {sc.random_box->first, sc.random_box->second}}}}};
  }
  Json sched = Json::array();
  for (const auto& e : sc.schedule) {
    Json ej = to_json(e.command);
    ej["t"] = e.t;
    sched.push_back(std::move(ej));
  }
  j["schedule"] = std::move(sched);
  return j;
}

enum class RunEventKind { LinkLost, LinkGained, Split, LeaderResample, BroadcastChange, IntervalStart };

inline constexpr std::string_view to_string(RunEventKind k) noexcept {
  switch (k) {
    case RunEventKind::LinkLost: return "LinkLost";
    case RunEventKind::LinkGained: return "LinkGained";
    case RunEventKind::Split: return "Split";
    case RunEventKind::LeaderResample: return "LeaderResample";
    case RunEventKind::BroadcastChange: return "BroadcastChange";
    case RunEventKind::IntervalStart: return "IntervalStart";
  }
  return "?";
}

struct RunEvent {
  RunEventKind kind = RunEventKind::IntervalStart;
  double t = 0.0;
  Json payload = Json::object();
};

inline Json to_json(const RunEvent& e) {
  return {{"kind", std::string(to_string(e.kind))}, {"t", e.t}, {"payload", e.payload}};
}

struct RunSample {
  double t = 0.0;
  std::size_t agent = 0;
  double x = 0.0;
  double y = 0.0;
  bool is_leader = false;
};

enum class RunStatus { Active, Split, Finished };

inline constexpr std::string_view to_string(RunStatus s) noexcept {
  switch (s) {
    case RunStatus::Active: return "active";
    case RunStatus::Split: return "split";
    case RunStatus::Finished: return "finished";
  }
  return "?";
}

struct RunLog {
  std::string scenario_id;
  std::uint64_t seed = 0;
  std::vector<RunEvent> events;
  std::vector<RunSample> samples;
  SwarmState final_state;
  RunStatus status = RunStatus::Active;

  std::size_t count(RunEventKind k) const {
    return static_cast<std::size_t>(std::count_if(events.begin(), events.end(), [k](const auto& e) { return e.kind == k; }));
  }
};

inline void write_trajectory_csv(std::ostream& os, const RunLog& log) {
  os << "t,agent,x,y,is_leader\n";
  char buf[128];
  for (const auto& s : log.samples) {
    std::snprintf(buf, sizeof buf, "%.17g,%zu,%.17g,%.17g,%d\n", s.t, s.agent, s.x, s.y, s.is_leader ? 1 : 0);
    os << buf;
  }
}

inline void write_events_jsonl(std::ostream& os, const RunLog& log) {
  for (const auto& e : log.events) os << canonical_dump(to_json(e)) << '\n';
}

/// Event-driven runner. Each interval freezes graph, leaders and u; the
/// closed-form propagator is stepped at a check cadence and any change in
/// geometric link status is bisected, ending the interval at that time.
class ScenarioRunner {
 public:
  explicit ScenarioRunner(Scenario sc) : sc_(std::move(sc)) {
    sc_.validate();
    log_.scenario_id = sc_.id;
    log_.seed = sc_.seed;
    state_ = SwarmState::from_positions(sc_.initial_positions());
    open_interval();
    record_sample_row(state_.t);
    next_sample_ = 1;
  }

  const Scenario& scenario() const noexcept { return sc_; }
  const SwarmState& state() const noexcept { return state_; }
  const RunLog& log() const noexcept { return log_; }
  RunStatus status() const noexcept { return status_; }
  const VisibilityGraph& graph() const noexcept { return graph_; }
  const std::vector<std::vector<std::size_t>>& components() const noexcept { return components_; }
  const std::optional<AsymptoticPrediction>& prediction() const noexcept { return prediction_; }
  const SafetyCertificate& certificate() const noexcept { return certificate_; }
  double interval_start() const noexcept { return interval_start_; }
  std::size_t broadcast_count() const noexcept { return broadcasts_; }

  /// Runs to min(t, horizon), firing every schedule entry on the way.
  void advance_to(double t) {
    require(std::isfinite(t), ErrorKind::InvalidInput, "target time must be finite");
    t = std::min(t, sc_.horizon);
    while (status_ == RunStatus::Active && next_entry_ < sc_.schedule.size() && sc_.schedule[next_entry_].t <= t) {
      const auto& e = sc_.schedule[next_entry_];
      propagate_until(e.t);
      if (status_ != RunStatus::Active) break;
      ++next_entry_;
      apply_broadcast(e.command);
    }
    propagate_until(t);
    if (status_ == RunStatus::Active && state_.t >= sc_.horizon) {
      status_ = RunStatus::Finished;
      record_sample_row(state_.t);
    }
    log_.final_state = state_;
    log_.status = status_;
  }

  void advance(double dt) {
    require(dt >= 0.0, ErrorKind::InvalidInput, "dt must be non-negative");
    advance_to(state_.t + dt);
  }

  /// Closes the running interval now and opens one under `cmd`.
  void apply_broadcast(const BroadcastCommand& cmd) {
    require(status_ == RunStatus::Active, ErrorKind::Conflict, "run is no longer active");
    cmd.validate(sc_.n);
    const double now = state_.t;
    LeaderSet leaders;
    if (cmd.leaders) {
      leaders = LeaderSet(sc_.n, *cmd.leaders);
    } else {
      auto rng = CounterRng(sc_.seed).split(1 + broadcasts_ + cmd.seed_offset * kOffsetStride);
      leaders = sample_leaders(sc_.n, *cmd.detect_prob, rng);
    }
    ++broadcasts_;
    if (!(cmd.u == state_.u)) emit(RunEventKind::BroadcastChange, now, {{"u", to_json(cmd.u)}});
    state_.u = cmd.u;
    emit(RunEventKind::LeaderResample, now, {{"leaders", to_json(leaders)}});
    state_.leaders = std::move(leaders);
    open_interval();
    record_sample_row(now);
    log_.final_state = state_;
  }

 private:
  static constexpr std::uint64_t kOffsetStride = 0x100000000ULL;

  void emit(RunEventKind k, double t, Json payload) { log_.events.push_back({k, t, std::move(payload)}); }

  void open_interval() {
    interval_start_ = state_.t;
    graph_ = build_visibility_graph(state_.positions(), sc_.radius);
    components_ = connected_components(graph_);
    IntervalSpec spec{state_.t, state_.u, state_.leaders, graph_, sc_.model};
    propagator_ = std::make_unique<IntervalPropagator>(spec, state_.x, state_.y);
    prediction_.reset();
    if (components_.size() == 1) {
      std::vector<double> x(state_.x.data(), state_.x.data() + state_.x.size());
      std::vector<double> y(state_.y.data(), state_.y.data() + state_.y.size());
      prediction_ = predict(graph_, sc_.model, state_.leaders, x, y, state_.u);
    }
    certificate_ = certify(state_.positions(), sc_.radius, sc_.model, state_.leaders);
    certificate_.scenario_id = sc_.id;

    const double speed = state_.u.norm();
    double h = sc_.sample_dt;
    const double lmax = propagator_->max_eigenvalue();
    if (lmax > 0.0) h = std::min(h, 0.05 / lmax);
    if (speed > 0.0) h = std::min(h, 0.05 * sc_.radius / speed);
    check_step_ = std::max(h, 1e-6);

    Json payload = {{"edges", to_json(graph_)["edges"]},
                    {"components", to_json(components_)},
                    {"leaders", to_json(state_.leaders)},
                    {"u", to_json(state_.u)}};
    emit(RunEventKind::IntervalStart, state_.t, std::move(payload));
  }

  std::pair<Eigen::VectorXd, Eigen::VectorXd> trajectory(double t) const {
    return propagator_->at(t - interval_start_);
  }

  void set_state_at(double t) {
    auto [x, y] = trajectory(t);
    state_.x = std::move(x);
    state_.y = std::move(y);
    state_.t = t;
  }

  void record_sample_row(double t) {
    if (last_sample_t_ && *last_sample_t_ == t) return;
    last_sample_t_ = t;
    for (std::size_t i = 0; i < state_.size(); ++i) {
      const auto k = static_cast<Eigen::Index>(i);
      log_.samples.push_back({t, i, state_.x(k), state_.y(k), state_.leaders.contains(i)});
    }
  }

  // Cadence samples in (state_.t, upto], evaluated on the current interval.
  void record_cadence_until(double upto) {
    for (;;) {
      const double ts = static_cast<double>(next_sample_) * sc_.sample_dt;
      if (ts > upto || ts > sc_.horizon) break;
      auto [x, y] = trajectory(ts);
      if (!(last_sample_t_ && *last_sample_t_ == ts)) {
        last_sample_t_ = ts;
        for (std::size_t i = 0; i < state_.size(); ++i) {
          const auto k = static_cast<Eigen::Index>(i);
          log_.samples.push_back({ts, i, x(k), y(k), state_.leaders.contains(i)});
        }
      }
      ++next_sample_;
    }
  }

  void propagate_until(double t_end) {
    while (status_ == RunStatus::Active && state_.t < t_end) {
      const double t_next = std::min(state_.t + check_step_, t_end);
      const auto crossings =
          detect_edge_crossings([this](double t) { return trajectory(t); }, state_.t, t_next, sc_.radius);
      if (crossings.empty()) {
        record_cadence_until(t_next);
        set_state_at(t_next);
        continue;
      }
      const double t_star = crossings.front().t;
      record_cadence_until(t_star);
      set_state_at(t_star);
      close_interval_at_crossing();
    }
  }

  void close_interval_at_crossing() {
    const double now = state_.t;
    const auto old_graph = graph_;
    const auto old_components = components_.size();
    const auto fresh = build_visibility_graph(state_.positions(), sc_.radius);
    for (const auto& e : old_graph.edges())
      if (!fresh.has_edge(e.first, e.second)) emit(RunEventKind::LinkLost, now, {{"edge", to_json(e)}});
    for (const auto& e : fresh.edges())
      if (!old_graph.has_edge(e.first, e.second)) emit(RunEventKind::LinkGained, now, {{"edge", to_json(e)}});
    open_interval();
    if (components_.size() > old_components) {
      emit(RunEventKind::Split, now, {{"components", to_json(components_)}});
      if (!sc_.continue_after_split) status_ = RunStatus::Split;
    }
    record_sample_row(now);
  }

  Scenario sc_;
  RunLog log_;
  SwarmState state_;
  RunStatus status_ = RunStatus::Active;
  VisibilityGraph graph_{1, {}};
  std::vector<std::vector<std::size_t>> components_;
  std::unique_ptr<IntervalPropagator> propagator_;
  std::optional<AsymptoticPrediction> prediction_;
  SafetyCertificate certificate_;
  double interval_start_ = 0.0;
  double check_step_ = 0.1;
  std::size_t next_entry_ = 0;
  std::size_t broadcasts_ = 0;
  std::uint64_t next_sample_ = 0;
  std::optional<double> last_sample_t_;
};

inline RunLog run_scenario(const Scenario& sc) {
  ScenarioRunner runner(sc);
  runner.advance_to(sc.horizon);
  return runner.log();
}

/// Certificate for the t = 0 configuration, with the leaders the runner
/// would draw for the first broadcast at t = 0 (none otherwise).
inline SafetyCertificate certify_scenario(const Scenario& sc) {
  ScenarioRunner runner(sc);
  runner.advance_to(0.0);
  return runner.certificate();
}

}  // namespace swarmcast
