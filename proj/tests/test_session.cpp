#include <gtest/gtest.h>

#include <sstream>

#include "swarmcast/session.hpp"

using namespace swarmcast;

namespace {

Scenario example_a_scenario(InfluenceModel model = InfluenceModel::Uniform) {
  Scenario sc;
  sc.id = "a";
  sc.seed = 1;
  sc.n = 5;
  sc.model = model;
  sc.positions = Positions{{0.0, 0.85}, {-0.6, 0.3}, {0.0, -0.25}, {1.4, 0.3}, {0.6, 0.3}};
  sc.horizon = 30.0;
  return sc;
}

Scenario complete_scenario(std::size_t n, double horizon = 30.0) {
  Scenario sc;
  sc.seed = 2;
  sc.n = n;
  sc.random_box = std::pair{0.0, 0.4};
  sc.horizon = horizon;
  return sc;
}

BroadcastCommand all_leaders(Vec2 u) { return {u, 1.0, std::nullopt, 0}; }

}  // namespace

TEST(Session, StartsPausedAtRest) {
  SessionManager mgr;
  const auto id = mgr.create(example_a_scenario());
  const auto id2 = mgr.create(example_a_scenario());
  EXPECT_NE(id, id2);
  auto s = mgr.get(id);
  EXPECT_EQ(s->status(), SessionStatus::Paused);
  const auto snap = s->snapshot();
  EXPECT_EQ((*snap)["status"], "paused");
  EXPECT_EQ((*snap)["t"].get<double>(), 0.0);
  EXPECT_EQ((*snap)["u"], Json::array({0.0, 0.0}));
  EXPECT_EQ((*snap)["positions"].size(), 5u);
  EXPECT_EQ((*snap)["edges"].size(), 5u);
  EXPECT_THROW(mgr.get("nope"), Error);
}

TEST(Session, AllLeadersBroadcastGivesUnitSlope) {
  SessionManager mgr;
  auto s = mgr.get(mgr.create(complete_scenario(5)));
  const auto summary = s->apply_broadcast(all_leaders({10, 2}));
  EXPECT_DOUBLE_EQ(summary["beta"].get<double>(), 1.0);
  EXPECT_EQ(summary["leaders"].size(), 5u);
  EXPECT_DOUBLE_EQ(summary["u"][0].get<double>(), 10.0);
  EXPECT_DOUBLE_EQ(summary["u"][1].get<double>(), 2.0);
  // Collective velocity is beta u; slope of y over x is 0.2.
  const auto dir = summary["prediction"]["line"]["direction"];
  EXPECT_NEAR(dir[1].get<double>() / dir[0].get<double>(), 0.2, 1e-12);
}

TEST(Session, ExplicitLeaderScaledBeta) {
  SessionManager mgr;
  auto s = mgr.get(mgr.create(example_a_scenario(InfluenceModel::Scaled)));
  const auto summary = s->apply_broadcast({{1, 0}, std::nullopt, std::vector<std::size_t>{4}, 0});
  // Degree share of agent 4: 3 of 10.
  EXPECT_NEAR(summary["beta"].get<double>(), 0.3, 1e-12);
  EXPECT_EQ(summary["model"], "scaled");
  EXPECT_EQ(summary["leaders"], Json::array({4}));
}

TEST(Session, AdvanceNeedsRunning) {
  SessionManager mgr;
  auto s = mgr.get(mgr.create(example_a_scenario()));
  try {
    s->advance(1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Conflict);
  }
  s->resume();
  EXPECT_THROW(s->advance(-1.0), Error);
  const auto snap = s->advance(1.5);
  EXPECT_DOUBLE_EQ(snap["t"].get<double>(), 1.5);
  s->pause();
  EXPECT_THROW(s->advance(1.0), Error);
}

TEST(Session, ScheduledEventLoggedOnce) {
  auto sc = example_a_scenario();
  sc.schedule.push_back({2.0, {{0.1, 0}, std::nullopt, std::vector<std::size_t>{4}, 0}});
  SessionManager mgr;
  auto s = mgr.get(mgr.create(sc));
  s->resume();
  s->advance(1.0);
  s->advance(1.5);
  s->advance(1.5);
  std::size_t changes = 0;
  const auto log = s->log_since(0);
  for (const auto& e : log["events"]) changes += e["kind"] == "BroadcastChange" ? 1 : 0;
  EXPECT_EQ(changes, 1u);
}

TEST(Session, SplitBlocksCommands) {
  auto sc = complete_scenario(5, 40.0);
  sc.model = InfluenceModel::Scaled;
  SessionManager mgr;
  auto scaled = mgr.get(mgr.create(sc));
  scaled->apply_broadcast({{3.0 * 1.25, 0}, std::nullopt, std::vector<std::size_t>{0}, 0});
  scaled->resume();
  scaled->advance(40.0);
  EXPECT_EQ(scaled->status(), SessionStatus::Split);
  EXPECT_EQ((*scaled->snapshot())["status"], "split");
  for (auto fn : {+[](Session& x) { x.resume(); }, +[](Session& x) { x.pause(); },
                  +[](Session& x) { x.advance(1.0); }, +[](Session& x) { x.apply_broadcast(all_leaders({1, 0})); }}) {
    try {
      fn(*scaled);
      ADD_FAILURE();
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::Conflict);
    }
  }
}

TEST(Session, RunsToFinished) {
  SessionManager mgr;
  auto s = mgr.get(mgr.create(complete_scenario(4, 3.0)));
  s->resume();
  s->advance(10.0);
  EXPECT_EQ(s->status(), SessionStatus::Finished);
  EXPECT_DOUBLE_EQ((*s->snapshot())["t"].get<double>(), 3.0);
}

TEST(Session, SnapshotPredictionMatchesLibrary) {
  auto sc = example_a_scenario();
  SessionManager mgr;
  auto s = mgr.get(mgr.create(sc));
  s->apply_broadcast({{1, 0.5}, std::nullopt, std::vector<std::size_t>{4}, 0});
  const auto g = build_visibility_graph(*sc.positions, sc.radius);
  const auto pred = predict(g, sc.model, LeaderSet(5, {4}), std::span<const Vec2>(*sc.positions), Vec2{1, 0.5});
  EXPECT_EQ(canonical_dump((*s->snapshot())["prediction"]), canonical_dump(to_json(pred)));
}

TEST(Session, LogSince) {
  SessionManager mgr;
  auto s = mgr.get(mgr.create(example_a_scenario()));
  s->apply_broadcast(all_leaders({1, 0}));
  const auto all = s->log_since(0);
  const auto n = all["count"].get<std::size_t>();
  EXPECT_EQ(n, s->event_count());
  EXPECT_EQ(all["events"].size(), n);
  EXPECT_EQ(s->log_since(n - 1)["events"].size(), 1u);
  EXPECT_EQ(s->log_since(n + 5)["events"].size(), 0u);
}

TEST(Session, ClockRatioScalesTicks) {
  SessionManager mgr;
  auto s = mgr.get(mgr.create(complete_scenario(3)));
  EXPECT_THROW(s->set_clock(0.0), Error);
  s->set_clock(4.0);
  mgr.tick(0.5);
  EXPECT_EQ((*s->snapshot())["t"].get<double>(), 0.0);  // paused
  s->resume();
  mgr.tick(0.5);
  EXPECT_DOUBLE_EQ((*s->snapshot())["t"].get<double>(), 2.0);
}

TEST(Session, DeterministicRunLog) {
  auto sc = complete_scenario(6);
  sc.schedule.push_back({1.0, {{1, 1}, 0.5, std::nullopt, 0}});
  auto run = [&] {
    SessionManager mgr;
    auto s = mgr.get(mgr.create(sc));
    s->resume();
    s->advance(0.7);
    s->apply_broadcast({{0, 2}, 0.4, std::nullopt, 0});
    s->advance(3.0);
    std::ostringstream os;
    write_events_jsonl(os, s->run_log());
    return os.str();
  };
  EXPECT_EQ(run(), run());
}

TEST(Router, StatusCodes) {
  SessionManager mgr;
  const SessionRouter router(mgr);
  const auto created = router.handle("POST", "/sessions", R"({"n": 3, "positions": [[0,0],[0.5,0],[0,0.5]]})");
  EXPECT_EQ(created.status, 201);
  const auto id = created.body["id"].get<std::string>();
  EXPECT_EQ(router.handle("GET", "/sessions/" + id, "").status, 200);
  EXPECT_EQ(router.handle("GET", "/sessions/" + id + "/state", "").status, 200);
  EXPECT_EQ(router.handle("POST", "/sessions", R"({"n": 3, "model": "weighted", "positions": [[0,0],[1,0],[0,1]]})").status,
            400);
  EXPECT_EQ(router.handle("POST", "/sessions", "{not json").status, 400);
  EXPECT_EQ(router.handle("GET", "/sessions/zzz", "").status, 404);
  EXPECT_EQ(router.handle("GET", "/elsewhere", "").status, 404);
  EXPECT_EQ(router.handle("POST", "/sessions/" + id + "/advance", R"({"dt": 1})").status, 409);
  EXPECT_EQ(router.handle("DELETE", "/sessions/" + id, "").status, 405);
  EXPECT_EQ(router.handle("GET", "/sessions/" + id + "/broadcast", "").status, 405);
  EXPECT_EQ(router.handle("POST", "/sessions/" + id + "/broadcast", R"({"u": [1, 0]})").status, 400);
  EXPECT_EQ(router.handle("POST", "/sessions/" + id + "/broadcast", R"({"u": [1, 0], "detect_prob": 1})").status, 200);
  EXPECT_EQ(router.handle("POST", "/sessions/" + id + "/resume", "").status, 200);
  const auto adv = router.handle("POST", "/sessions/" + id + "/advance", R"({"dt": 0.5})");
  EXPECT_EQ(adv.status, 200);
  EXPECT_DOUBLE_EQ(adv.body["t"].get<double>(), 0.5);
  EXPECT_EQ(router.handle("POST", "/sessions/" + id + "/clock", R"({"ratio": -1})").status, 400);
  EXPECT_EQ(router.handle("GET", "/sessions/" + id + "/log?since=x", "").status, 400);
  const auto log = router.handle("GET", "/sessions/" + id + "/log?since=1", "");
  EXPECT_EQ(log.status, 200);
  EXPECT_EQ(log.body["since"], 1);
  const auto err = router.handle("GET", "/sessions/zzz", "");
  EXPECT_EQ(err.body["error"]["kind"], "not-found");
}

TEST(Router, StreamTarget) {
  EXPECT_EQ(SessionRouter::stream_session_id("/sessions/s3/stream"), std::optional<std::string>("s3"));
  EXPECT_FALSE(SessionRouter::stream_session_id("/sessions/s3/state").has_value());
}
