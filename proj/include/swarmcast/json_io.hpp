#pragma once

#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "swarmcast/asymptotics.hpp"
#include "swarmcast/graph.hpp"
#include "swarmcast/safety.hpp"
#include "swarmcast/spectral.hpp"

namespace swarmcast {

using Json = nlohmann::json;

namespace detail {

inline void canonical_dump_into(const Json& j, std::string& out) {
  switch (j.type()) {
    case Json::value_t::object: {
      out += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {  // std::map keeps keys sorted
        if (!first) out += ',';
        first = false;
        out += Json(it.key()).dump();
        out += ':';
        canonical_dump_into(it.value(), out);
      }
      out += '}';
      break;
    }
    case Json::value_t::array: {
      out += '[';
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ',';
        canonical_dump_into(j[i], out);
      }
      out += ']';
      break;
    }
    case Json::value_t::number_float: {
      const double v = j.get<double>();
      if (!std::isfinite(v)) {
        out += "null";
        break;
      }
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out += buf;
      break;
    }
    default:
      out += j.dump();
  }
}

}  // namespace detail

/// Compact JSON with sorted keys and every double printed with 17
/// significant digits, so equal values always serialise to equal bytes.
inline std::string canonical_dump(const Json& j) {
  std::string out;
  detail::canonical_dump_into(j, out);
  return out;
}

inline Json to_json(Vec2 v) { return Json::array({v.x, v.y}); }

inline Vec2 vec2_from_json(const Json& j) {
  require(j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number(), ErrorKind::Validation,
          "expected a [x, y] pair");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline Json to_json(const Eigen::VectorXd& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

inline Json to_json(const Eigen::MatrixXd& m) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) out.push_back(to_json(Eigen::VectorXd(m.row(i).transpose())));
  return out;
}

inline Json to_json(Edge e) { return Json::array({e.first, e.second}); }

inline Json to_json(const std::vector<std::vector<std::size_t>>& partition) {
  Json out = Json::array();
  for (const auto& part : partition) out.push_back(part);
  return out;
}

inline Json to_json(const VisibilityGraph& g) {
  Json edges = Json::array();
  for (const auto& e : g.edges()) edges.push_back(to_json(e));
  return {{"n", g.size()}, {"edges", std::move(edges)}, {"radius", g.radius()}};
}

/// {"n": int, "edges": [[i, j], ...], "radius": float}, 0-based indices.
inline VisibilityGraph graph_from_json(const Json& j) {
  require(j.is_object() && j.contains("n") && j.contains("edges"), ErrorKind::Validation,
          "graph JSON needs 'n' and 'edges'");
  const auto n = j.at("n").get<std::size_t>();
  std::vector<Edge> edges;
  for (const auto& e : j.at("edges")) {
    require(e.is_array() && e.size() == 2, ErrorKind::Validation, "edge must be an [i, j] pair");
    edges.push_back({e[0].get<std::size_t>(), e[1].get<std::size_t>()});
  }
  return VisibilityGraph(n, std::move(edges), j.value("radius", 1.0));
}

inline Json to_json(const SpectralDecomposition& d) {
  return {{"eigenvalues", to_json(d.eigenvalues)}, {"V", to_json(d.right)}, {"Wt", to_json(d.left_t)}};
}

inline Json to_json(const LeaderSet& s) { return s.members(); }

/// Alignment line as {anchor, direction, offsets}.
inline Json to_json(const AsymptoticPrediction& p) {
  return {{"model", std::string(to_string(p.model))},
          {"alpha", to_json(p.alpha)},
          {"beta", p.beta},
          {"gamma", to_json(p.gamma)},
          {"u", to_json(p.u)},
          {"lambda2", p.lambda2},
          {"line", {{"anchor", to_json(p.alpha)}, {"direction", to_json(p.u)}, {"offsets", to_json(p.gamma)}}}};
}

inline Json to_json(const LinkVerdict& v) {
  Json out = {{"edge", to_json(v.edge)}, {"class", std::string(to_string(v.classification))}, {"rule", v.rule}};
  if (v.bound) out["bound"] = *v.bound;
  return out;
}

/// max_speed: number when bounded, the string "unbounded" for +inf, null when
/// no guarantee is issued.
inline Json to_json(const SafetyCertificate& c) {
  Json verdicts = Json::array();
  for (const auto& v : c.verdicts) verdicts.push_back(to_json(v));
  Json max_speed = nullptr;
  if (c.max_speed) max_speed = std::isinf(*c.max_speed) ? Json("unbounded") : Json(*c.max_speed);
  return {{"scenario_id", c.scenario_id}, {"rule", c.rule},       {"verdicts", std::move(verdicts)},
          {"max_speed", max_speed},       {"assumptions", c.assumptions}, {"notes", c.notes}};
}

}  // namespace swarmcast
