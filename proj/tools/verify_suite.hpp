#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "swarmcast/random_graphs.hpp"
#include "swarmcast/scenario.hpp"

namespace swarmcast::verify {

struct PropertyResult {
  std::string name;
  std::size_t passed = 0;
  std::size_t failed = 0;
  std::string first_failure;
};

using Trial = std::function<bool(CounterRng&, std::string&)>;

struct Property {
  std::string name;
  Trial trial;
};

inline InfluenceModel pick_model(CounterRng& rng) {
  return rng.uniform() < 0.5 ? InfluenceModel::Uniform : InfluenceModel::Scaled;
}

inline std::vector<Property> properties() {
  std::vector<Property> out;

  out.push_back({"deviation-identities", [](CounterRng& rng, std::string& why) {
                   const auto n = 2 + uniform_index(rng, 11);
                   const auto g = random_connected_graph(n, 0.3, rng);
                   const auto leaders = random_leaders(n, 0.4, rng);
                   const double su = deviation_gamma(g, InfluenceModel::Uniform, leaders).sum();
                   const Eigen::VectorXd d = detail::degree_weights(g);
                   const double ss = d.dot(deviation_gamma(g, InfluenceModel::Scaled, leaders));
                   if (std::abs(su) < 1e-9 && std::abs(ss) < 1e-9) return true;
                   why = "sum gamma = " + std::to_string(su) + ", d.gamma = " + std::to_string(ss);
                   return false;
                 }});

  out.push_back({"spectrum-vs-reference", [](CounterRng& rng, std::string& why) {
                   const auto n = 2 + uniform_index(rng, 11);
                   const auto g = random_connected_graph(n, 0.4, rng);
                   const auto m = laplacian(g, InfluenceModel::Uniform).entries;
                   const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ref(m);
                   const double err = (symmetric_eig(m).eigenvalues - ref.eigenvalues()).cwiseAbs().maxCoeff();
                   if (err < 1e-9) return true;
                   why = "eigenvalue mismatch " + std::to_string(err);
                   return false;
                 }});

  out.push_back({"conservation", [](CounterRng& rng, std::string& why) {
                   const auto n = 2 + uniform_index(rng, 7);
                   const auto model = pick_model(rng);
                   IntervalSpec spec{0.0, 3.0 * random_direction(rng), random_leaders(n, 0.4, rng),
                                     random_connected_graph(n, 0.3, rng), model};
                   Eigen::VectorXd x0(static_cast<Eigen::Index>(n));
                   for (auto& v : x0) v = rng.uniform(-2.0, 2.0);
                   const Eigen::VectorXd y0 = x0.reverse();
                   const double t = rng.uniform(0.0, 5.0);
                   const auto s = exact_state(spec, x0, y0, t);
                   const Eigen::VectorXd w = model == InfluenceModel::Uniform ? Eigen::VectorXd(Eigen::VectorXd::Ones(x0.size()))
                                                                              : detail::degree_weights(spec.graph);
                   const Eigen::VectorXd b = spec.leaders.indicator();
                   const double ex = w.dot(s.x) - w.dot(b) * spec.u.x * t - w.dot(x0);
                   const double ey = w.dot(s.y) - w.dot(b) * spec.u.y * t - w.dot(y0);
                   if (std::abs(ex) < 1e-6 && std::abs(ey) < 1e-6) return true;
                   why = "drift " + std::to_string(std::max(std::abs(ex), std::abs(ey)));
                   return false;
                 }});

  out.push_back({"exact-vs-rk4", [](CounterRng& rng, std::string& why) {
                   const auto n = 2 + uniform_index(rng, 7);
                   IntervalSpec spec{0.0, 2.0 * random_direction(rng), random_leaders(n, 0.4, rng),
                                     random_connected_graph(n, 0.3, rng), pick_model(rng)};
                   auto s = SwarmState::from_positions(random_disc_positions(n, 1.0, rng));
                   const Eigen::VectorXd x0 = s.x, y0 = s.y;
                   for (int k = 0; k < 5000; ++k) s = integrate_step(s, spec, 1e-3);
                   const auto e = exact_state(spec, x0, y0, 5.0);
                   const double err = std::max((e.x - s.x).cwiseAbs().maxCoeff(), (e.y - s.y).cwiseAbs().maxCoeff());
                   if (err < 1e-6) return true;
                   why = "max error " + std::to_string(err);
                   return false;
                 }});

  out.push_back({"edge-deletion-interlacing", [](CounterRng& rng, std::string& why) {
                   const auto n = 3 + uniform_index(rng, 8);
                   auto g = random_connected_graph(n, 0.5, rng);
                   // The normalized bound needs both graphs free of isolated vertices.
                   std::vector<Edge> candidates;
                   for (const auto& e : g.edges())
                     if (g.degree(e.first) > 1 && g.degree(e.second) > 1) candidates.push_back(e);
                   if (candidates.empty()) return true;
                   const auto e = candidates[uniform_index(rng, candidates.size())];
                   const auto r = interlacing_check(g, e);
                   if (r.all()) return true;
                   why = "interlacing failed on edge (" + std::to_string(e.first) + "," + std::to_string(e.second) + ")";
                   return false;
                 }});

  out.push_back({"normalized-spectrum", [](CounterRng& rng, std::string& why) {
                   const auto n = 2 + uniform_index(rng, 11);
                   const auto g = random_connected_graph(n, 0.3, rng);
                   const auto phi = symmetric_eig(normalized_laplacian(g).entries).eigenvalues;
                   const bool ok = std::abs(phi.sum() - static_cast<double>(n)) < 1e-9 && phi.maxCoeff() <= 2.0 + 1e-9 &&
                                   butler_bound_check(g);
                   if (!ok) why = "normalized spectrum bounds violated";
                   return ok;
                 }});

  out.push_back({"complete-graph-preservation", [](CounterRng& rng, std::string& why) {
                   Scenario sc;
                   sc.n = 3 + uniform_index(rng, 6);
                   sc.model = pick_model(rng);
                   sc.positions = random_disc_positions(sc.n, 0.5, rng);
                   sc.horizon = 20.0;
                   sc.sample_dt = 1.0;
                   const auto leaders = random_leaders(sc.n, 0.4, rng).members();
                   const double bound = complete_graph_bound(sc.n, 1.0, sc.model);
                   sc.schedule.push_back({0.0, {0.95 * bound * random_direction(rng), std::nullopt, leaders, 0}});
                   const auto log = run_scenario(sc);
                   if (log.count(RunEventKind::LinkLost) == 0) return true;
                   why = std::to_string(log.count(RunEventKind::LinkLost)) + " links lost below the bound";
                   return false;
                 }});

  return out;
}

inline std::vector<PropertyResult> run(std::uint64_t seed, std::size_t trials) {
  std::vector<PropertyResult> results;
  std::uint64_t stream = 0;
  for (const auto& p : properties()) {
    PropertyResult r;
    r.name = p.name;
    for (std::size_t k = 0; k < trials; ++k) {
      auto rng = CounterRng(seed).split(stream * 1'000'000 + k);
      std::string why;
      bool ok = false;
      try {
        ok = p.trial(rng, why);
      } catch (const std::exception& e) {
        why = e.what();
      }
      if (ok) {
        ++r.passed;
      } else {
        if (r.failed++ == 0) r.first_failure = "trial " + std::to_string(k) + ": " + why;
      }
    }
    results.push_back(std::move(r));
    ++stream;
  }
  return results;
}

}  // namespace swarmcast::verify
