#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "swarmcast/scenario.hpp"
#include "swarmcast/server.hpp"
#include "verify_suite.hpp"

#ifndef SWARMCAST_GOLDENS_PATH
#define SWARMCAST_GOLDENS_PATH "tests/data/goldens.json"
#endif

namespace fs = std::filesystem;
using namespace swarmcast;

namespace {

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::InvalidInput, "cannot open " + path);
  auto j = Json::parse(in, nullptr, false);
  require(!j.is_discarded(), ErrorKind::Validation, path + " is not valid JSON");
  return j;
}

std::optional<std::uint64_t> env_seed() {
  const char* s = std::getenv("SWARMCAST_SEED");
  if (!s || !*s) return std::nullopt;
  char* end = nullptr;
  const auto v = std::strtoull(s, &end, 10);
  require(end && *end == '\0', ErrorKind::InvalidInput, "SWARMCAST_SEED must be an unsigned integer");
  return v;
}

Vec2 parse_velocity(const std::string& text) {
  Vec2 u;
  char comma = 0;
  std::istringstream in(text);
  in >> u.x >> comma >> u.y;
  require(!in.fail() && comma == ',' && in.eof(), ErrorKind::InvalidInput, "velocity must look like 'ux,uy'");
  require(u.finite(), ErrorKind::InvalidInput, "velocity must be finite");
  return u;
}

std::string fmt(double v, const char* spec = "%.4f") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v + 0.0);  // + 0.0 turns -0 into 0
  return buf;
}

int cmd_simulate(const std::string& path, const std::string& out_dir) {
  auto sc = scenario_from_json(read_json_file(path));
  if (auto s = env_seed()) sc.seed = *s;
  const auto log = run_scenario(sc);
  fs::create_directories(out_dir);
  {
    std::ofstream csv(fs::path(out_dir) / "trajectory.csv");
    write_trajectory_csv(csv, log);
  }
  {
    std::ofstream ev(fs::path(out_dir) / "events.jsonl");
    write_events_jsonl(ev, log);
  }
  Json summary = {{"scenario_id", log.scenario_id},
                  {"seed", log.seed},
                  {"status", std::string(to_string(log.status))},
                  {"t_final", log.final_state.t},
                  {"events", log.events.size()},
                  {"link_lost", log.count(RunEventKind::LinkLost)},
                  {"link_gained", log.count(RunEventKind::LinkGained)},
                  {"splits", log.count(RunEventKind::Split)},
                  {"samples", log.samples.size()}};
  std::cout << canonical_dump(summary) << '\n';
  return 0;
}

int cmd_analyze(const std::string& path, const std::string& model_text, const std::vector<std::size_t>& leader_ids,
                const std::string& velocity, bool as_json) {
  const auto j = read_json_file(path);
  const auto g = graph_from_json(j);
  const auto model = parse_influence_model(model_text);
  const LeaderSet leaders(g.size(), leader_ids);
  const Vec2 u = parse_velocity(velocity);
  require(is_connected(g), ErrorKind::Disconnected, "analyze needs a connected graph");

  std::optional<Positions> positions;
  if (j.contains("positions")) {
    Positions p;
    for (const auto& v : j["positions"]) p.push_back(vec2_from_json(v));
    require(p.size() == g.size(), ErrorKind::Validation, "positions length does not match n");
    positions = std::move(p);
  }

  const auto dec = spectrum(g, model);
  const double beta = collective_speed_beta(g, model, leaders);
  const auto gamma = deviation_gamma(dec, leaders);
  const auto classes = g.size() <= kMaxEquivalenceSearchSize ? std::optional(find_equivalent_agents(g, leaders))
                                                              : std::nullopt;
  const auto cert = positions ? certify(g, model, leaders, *positions) : certify(g, model, leaders);
  std::optional<AsymptoticPrediction> pred;
  if (positions) pred = predict(g, model, leaders, *positions, u);

  if (as_json) {
    Json out = {{"graph", to_json(g)},
                {"model", std::string(to_string(model))},
                {"leaders", to_json(leaders)},
                {"degrees", g.degrees()},
                {"spectrum", to_json(dec)},
                {"beta", beta},
                {"gamma", to_json(gamma)},
                {"equivalence_classes", classes ? to_json(*classes) : Json(nullptr)},
                {"prediction", pred ? to_json(*pred) : Json(nullptr)},
                {"certificate", to_json(cert)}};
    std::cout << canonical_dump(out) << '\n';
    return 0;
  }

  std::cout << "model " << to_string(model) << ", n = " << g.size() << ", edges = " << g.edge_count()
            << ", R = " << g.radius() << '\n';
  std::cout << "eigenvalues:";
  for (auto v : dec.eigenvalues) std::cout << ' ' << fmt(v, "%.6f");
  std::cout << "\nbeta = " << fmt(beta, "%.6f") << "  (collective speed beta*|u| = " << fmt(beta * u.norm(), "%.6f")
            << ")\n";
  if (pred) std::cout << "alpha = (" << fmt(pred->alpha.x, "%.6f") << ", " << fmt(pred->alpha.y, "%.6f") << ")\n";
  else std::cout << "alpha: needs positions in the graph file\n";
  std::cout << "\nagent  degree  leader    gamma     gamma*u\n";
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    char row[128];
    std::snprintf(row, sizeof row, "%5zu  %6zu  %6s  %8s  (%s, %s)\n", i, g.degree(i), leaders.contains(i) ? "yes" : "no",
                  fmt(gamma(k)).c_str(), fmt(gamma(k) * u.x).c_str(), fmt(gamma(k) * u.y).c_str());
    std::cout << row;
  }
  if (classes) {
    std::cout << "\nequivalence classes:";
    for (const auto& c : *classes) {
      std::cout << " {";
      for (std::size_t i = 0; i < c.size(); ++i) std::cout << (i ? "," : "") << c[i];
      std::cout << '}';
    }
    std::cout << '\n';
  }
  std::cout << "\ncertificate: rule " << cert.rule << ", max |u| = ";
  if (!cert.max_speed) std::cout << "no guarantee";
  else if (std::isinf(*cert.max_speed)) std::cout << "unbounded";
  else std::cout << fmt(*cert.max_speed, "%.6f");
  std::cout << '\n';
  for (const auto& v : cert.verdicts) {
    std::cout << "  (" << v.edge.first << "," << v.edge.second << ") " << to_string(v.classification);
    if (v.bound) std::cout << " " << fmt(*v.bound, "%.6f");
    std::cout << '\n';
  }
  for (const auto& n : cert.notes) std::cout << "  note: " << n << '\n';
  return 0;
}

int cmd_verify(std::uint64_t seed, std::size_t trials) {
  const auto results = verify::run(seed, trials);
  std::size_t failed = 0, passed = 0;
  for (const auto& r : results) {
    std::cout << (r.failed ? "FAIL " : "PASS ") << r.name << "  " << r.passed << "/" << (r.passed + r.failed);
    if (r.failed) std::cout << "  first: " << r.first_failure;
    std::cout << '\n';
    failed += r.failed;
    passed += r.passed;
  }
  std::cout << "seed " << seed << ": " << passed << " passed, " << failed << " failed\n";
  return failed ? 1 : 0;
}

Json golden_actual(const Json& entry, const Json& graphs) {
  const auto g = graph_from_json(graphs.at(entry.at("graph").get<std::string>()));
  const auto quantity = entry.at("quantity").get<std::string>();
  const auto model = parse_influence_model(entry.value("model", std::string("uniform")));
  const LeaderSet leaders(g.size(), entry.value("leaders", std::vector<std::size_t>{}));
  if (quantity == "degrees") return g.degrees();
  if (quantity == "gamma") return to_json(deviation_gamma(g, model, leaders));
  if (quantity == "gamma_unit_eigvecs") return to_json(deviation_gamma_unit_eigvecs(g, model, leaders));
  if (quantity == "eigenvalues") return to_json(spectrum(g, model).eigenvalues);
  if (quantity == "beta") return collective_speed_beta(g, model, leaders);
  if (quantity == "equivalence_classes") return to_json(find_equivalent_agents(g, leaders));
  fail(ErrorKind::Validation, "unknown golden quantity '" + quantity + "'");
}

bool golden_match(const Json& expected, const Json& actual, double tol) {
  if (expected.is_number() && actual.is_number())
    return std::abs(expected.get<double>() - actual.get<double>()) <= tol;
  if (expected.is_array() && actual.is_array()) {
    if (expected.size() != actual.size()) return false;
    for (std::size_t i = 0; i < expected.size(); ++i)
      if (!golden_match(expected[i], actual[i], tol)) return false;
    return true;
  }
  return expected == actual;
}

int cmd_paper_examples(const std::string& path) {
  const auto goldens = read_json_file(path);
  const double tol = goldens.value("tolerance", 5e-4);
  std::size_t failed = 0;
  for (const auto& entry : goldens.at("entries")) {
    const auto actual = golden_actual(entry, goldens.at("graphs"));
    const bool ok = golden_match(entry.at("expected"), actual, tol);
    failed += ok ? 0 : 1;
    Json shown = actual;
    std::function<void(Json&)> round4 = [&](Json& v) {
      if (v.is_number_float()) v = std::round(v.get<double>() * 1e4) / 1e4 + 0.0;
      else if (v.is_array())
        for (auto& x : v) round4(x);
    };
    round4(shown);
    std::cout << (ok ? "ok   " : "DIFF ") << entry.at("name").get<std::string>() << "  " << shown.dump();
    if (!ok) std::cout << "  expected " << entry.at("expected").dump();
    if (entry.contains("note")) std::cout << "  (" << entry["note"].get<std::string>() << ")";
    std::cout << '\n';
  }
  std::cout << goldens.at("entries").size() - failed << "/" << goldens.at("entries").size() << " golden values match\n";
  return failed ? 1 : 0;
}

int cmd_serve(const std::string& address, unsigned short port) {
  SessionManager manager;
  SessionServer server(manager, {address, port});
  std::cout << "listening on " << address << ":" << server.port() << std::endl;
  server.run();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Broadcast-controlled swarm analysis and simulation"};
  app.require_subcommand(1);
  bool json_errors = false;
  app.add_flag("--json-errors", json_errors, "Report errors as JSON on stderr");

  std::string scenario_path, out_dir = ".";
  auto* simulate = app.add_subcommand("simulate", "Run a scenario; write trajectory.csv and events.jsonl");
  simulate->add_option("scenario", scenario_path, "Scenario JSON file")->required();
  simulate->add_option("--out", out_dir, "Output directory");

  std::string graph_path, model_text = "u", velocity = "1,0";
  std::vector<std::size_t> leader_ids;
  bool as_json = false;
  auto* analyze = app.add_subcommand("analyze", "Spectrum, alpha/beta/gamma, equivalence classes and certificate");
  analyze->add_option("graph", graph_path, "Graph JSON file")->required();
  analyze->add_option("--model", model_text, "u|s (uniform or scaled)");
  analyze->add_option("--leaders", leader_ids, "Leader indices (0-based)")->required();
  analyze->add_option("--u", velocity, "Broadcast velocity 'ux,uy'");
  analyze->add_flag("--json", as_json, "Machine-readable output");

  std::uint64_t seed = 1;
  std::size_t trials = 20;
  auto* verify_cmd = app.add_subcommand("verify", "Run the randomized property suite");
  auto* seed_opt = verify_cmd->add_option("--seed", seed, "Base seed");
  verify_cmd->add_option("--trials", trials, "Trials per property");

  std::string goldens_path = SWARMCAST_GOLDENS_PATH;
  auto* paper = app.add_subcommand("paper-examples", "Recompute the worked examples and diff against goldens");
  paper->add_option("--goldens", goldens_path, "Golden values file");

  std::string address = "127.0.0.1";
  unsigned short port = 8080;
  auto* serve = app.add_subcommand("serve", "Start the session service");
  serve->add_option("--port", port, "TCP port");
  serve->add_option("--address", address, "Bind address");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*simulate) return cmd_simulate(scenario_path, out_dir);
    if (*analyze) return cmd_analyze(graph_path, model_text, leader_ids, velocity, as_json);
    if (*verify_cmd) {
      if (seed_opt->count() == 0)
        if (auto s = env_seed()) seed = *s;
      return cmd_verify(seed, trials);
    }
    if (*paper) return cmd_paper_examples(goldens_path);
    if (*serve) return cmd_serve(address, port);
  } catch (const Error& e) {
    if (json_errors) std::cerr << canonical_dump(error_body(e.kind(), e.what())) << '\n';
    else std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    if (json_errors) std::cerr << canonical_dump(error_body(ErrorKind::InvalidInput, e.what())) << '\n';
    else std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
