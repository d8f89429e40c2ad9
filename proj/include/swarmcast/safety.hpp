#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "swarmcast/asymptotics.hpp"
#include "swarmcast/error.hpp"
#include "swarmcast/geometry.hpp"
#include "swarmcast/graph.hpp"

namespace swarmcast {

enum class VerdictClass { PreservedUnconditionally, PreservedIfSpeedBelow, NoGuarantee };

inline constexpr std::string_view to_string(VerdictClass c) noexcept {
  switch (c) {
    case VerdictClass::PreservedUnconditionally: return "preserved-unconditionally";
    case VerdictClass::PreservedIfSpeedBelow: return "preserved-if-speed-below";
    case VerdictClass::NoGuarantee: return "no-guarantee";
  }
  return "unknown";
}

/// Citation tags of the preservation rules a verdict can come from.
namespace rules {
inline constexpr const char* kCompleteUniform = "complete-uniform";          // |u| <= nR
inline constexpr const char* kCompleteScaled = "complete-scaled";            // |u| <= n/(n-1) R
inline constexpr const char* kChainUniform = "chain-uniform";                // single leader, R/(n-1) premise
inline constexpr const char* kChainScaled = "chain-scaled";                  // single leader, R premise
inline constexpr const char* kClusteredUniform = "clustered-uniform";        // leaders and followers each complete
inline constexpr const char* kIncompleteUniform = "incomplete-uniform";      // per-link common-neighbour counts
inline constexpr const char* kScaledIncompleteOpen = "scaled-incomplete-open";
inline constexpr const char* kNoLinks = "no-links";
}  // namespace rules

struct LinkVerdict {
  Edge edge;
  VerdictClass classification = VerdictClass::NoGuarantee;
  std::optional<double> bound;  // speed limit, only for PreservedIfSpeedBelow
  std::string rule;

  static LinkVerdict unconditional(Edge e, std::string rule) {
    return {e, VerdictClass::PreservedUnconditionally, std::nullopt, std::move(rule)};
  }
  static LinkVerdict below(Edge e, double bound, std::string rule) {
    return {e, VerdictClass::PreservedIfSpeedBelow, bound, std::move(rule)};
  }
  static LinkVerdict none(Edge e, std::string rule) { return {e, VerdictClass::NoGuarantee, std::nullopt, std::move(rule)}; }
};

/// Conservative guarantee that every initial link survives. A missing
/// max_speed means at least one link has no applicable rule; +inf means no
/// link depends on |u|.
struct SafetyCertificate {
  std::string scenario_id;
  std::string rule;
  std::vector<LinkVerdict> verdicts;
  std::optional<double> max_speed;
  std::vector<std::string> assumptions;
  std::vector<std::string> notes;

  bool guarantees(double speed) const noexcept { return max_speed.has_value() && speed <= *max_speed; }
};

namespace detail {

inline SafetyCertificate finalize(SafetyCertificate cert) {
  double bound = std::numeric_limits<double>::infinity();
  bool complete = true;
  for (const auto& v : cert.verdicts) {
    if (v.classification == VerdictClass::NoGuarantee) complete = false;
    if (v.bound) bound = std::min(bound, *v.bound);
  }
  cert.max_speed = complete ? std::optional<double>(bound) : std::nullopt;
  return cert;
}

struct LinkCounts {
  std::size_t ni = 0, nj = 0;                 // neighbourhood sizes
  std::size_t common_f = 0, common_l = 0;     // n_(ij)f, n_(ij)l
  std::size_t il = 0, if_ = 0, jl = 0, jf = 0;  // leader / follower neighbours of i and j
};

inline LinkCounts count_link(const VisibilityGraph& g, const LeaderSet& leaders, std::size_t i, std::size_t j) {
  LinkCounts c;
  c.ni = g.degree(i);
  c.nj = g.degree(j);
  for (auto k : g.neighbors(i)) (leaders.contains(k) ? c.il : c.if_)++;
  for (auto k : g.neighbors(j)) (leaders.contains(k) ? c.jl : c.jf)++;
  for (auto k : g.neighbors(i))
    if (k != j && g.has_edge(j, k)) (leaders.contains(k) ? c.common_l : c.common_f)++;
  return c;
}

inline bool is_clique(const VisibilityGraph& g, std::span<const std::size_t> members) {
  for (std::size_t a = 0; a < members.size(); ++a)
    for (std::size_t b = a + 1; b < members.size(); ++b)
      if (!g.has_edge(members[a], members[b])) return false;
  return true;
}

inline std::vector<std::size_t> followers_of(const LeaderSet& leaders) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < leaders.universe(); ++i)
    if (!leaders.contains(i)) out.push_back(i);
  return out;
}

inline void require_link(const VisibilityGraph& g, std::size_t i, std::size_t j) {
  require(g.has_edge(i, j), ErrorKind::InvalidInput, "link (" + std::to_string(i) + "," + std::to_string(j) + ") is not in the graph");
}

}  // namespace detail

/// Largest |u| for which a complete graph provably keeps every link:
/// nR (Uniform) or n/(n-1) R (Scaled).
inline double complete_graph_bound(std::size_t n, double radius, InfluenceModel model) {
  require(n >= 2, ErrorKind::InvalidInput, "complete-graph bound needs at least two agents");
  require(radius > 0.0, ErrorKind::InvalidInput, "sensing radius must be positive");
  const auto nn = static_cast<double>(n);
  return model == InfluenceModel::Uniform ? nn * radius : nn / (nn - 1.0) * radius;
}

/// Per-link sufficient condition for a general graph under uniform influence.
/// Same-role pairs are safe whenever n_i + n_j <= 3 (n_(ij)f + n_(ij)l); a
/// leader-follower pair is safe for |u| <= [3 (n_(ij)f + n_(ij)l) - (n_i + n_j)] R
/// when that is positive.
inline LinkVerdict link_condition_uniform(const VisibilityGraph& g, const LeaderSet& leaders, std::size_t i,
                                          std::size_t j, double radius) {
  detail::require_link(g, i, j);
  const auto c = detail::count_link(g, leaders, i, j);
  const auto edge = Edge::make(i, j);
  const long slack = 3L * static_cast<long>(c.common_f + c.common_l) - static_cast<long>(c.ni + c.nj);
  if (leaders.contains(i) == leaders.contains(j))
    return slack >= 0 ? LinkVerdict::unconditional(edge, rules::kIncompleteUniform)
                      : LinkVerdict::none(edge, rules::kIncompleteUniform);
  if (slack > 0) return LinkVerdict::below(edge, static_cast<double>(slack) * radius, rules::kIncompleteUniform);
  return LinkVerdict::none(edge, rules::kIncompleteUniform);
}

inline LinkVerdict link_condition_uniform(const VisibilityGraph& g, const LeaderSet& leaders, std::size_t i,
                                          std::size_t j) {
  return link_condition_uniform(g, leaders, i, j, g.radius());
}

/// Whether leaders and followers each form a complete subgraph (both non-empty).
inline bool has_clustered_structure(const VisibilityGraph& g, const LeaderSet& leaders) {
  const auto lead = leaders.members();
  const auto follow = detail::followers_of(leaders);
  return !lead.empty() && !follow.empty() && detail::is_clique(g, lead) && detail::is_clique(g, follow);
}

/// Uniform influence with leaders forming one clique and followers another.
///   follower pair: n_il + n_jl <= n_f + 3 n_(ij)l
///   leader pair:   n_if + n_jf <= n_l + 3 n_(ij)f
///   leader-follower: n_(follower)l + n_(leader)f - n/2 > 0, bound 2R (that quantity)
inline LinkVerdict subgraph_complete_case(const VisibilityGraph& g, const LeaderSet& leaders, std::size_t i,
                                          std::size_t j, double radius) {
  detail::require_link(g, i, j);
  require(has_clustered_structure(g, leaders), ErrorKind::NotApplicable,
          "leaders and followers must each form a complete subgraph");
  const auto edge = Edge::make(i, j);
  const auto c = detail::count_link(g, leaders, i, j);
  const auto n_l = static_cast<long>(leaders.count());
  const auto n_f = static_cast<long>(g.size()) - n_l;
  const bool li = leaders.contains(i), lj = leaders.contains(j);
  if (!li && !lj) {
    const bool ok = static_cast<long>(c.il + c.jl) <= n_f + 3L * static_cast<long>(c.common_l);
    return ok ? LinkVerdict::unconditional(edge, rules::kClusteredUniform) : LinkVerdict::none(edge, rules::kClusteredUniform);
  }
  if (li && lj) {
    const bool ok = static_cast<long>(c.if_ + c.jf) <= n_l + 3L * static_cast<long>(c.common_f);
    return ok ? LinkVerdict::unconditional(edge, rules::kClusteredUniform) : LinkVerdict::none(edge, rules::kClusteredUniform);
  }
  // follower's leader-neighbours plus leader's follower-neighbours
  const double margin = li ? static_cast<double>(c.jl + c.if_) - 0.5 * static_cast<double>(g.size())
                           : static_cast<double>(c.il + c.jf) - 0.5 * static_cast<double>(g.size());
  if (margin > 0.0) return LinkVerdict::below(edge, 2.0 * radius * margin, rules::kClusteredUniform);
  return LinkVerdict::none(edge, rules::kClusteredUniform);
}

inline SafetyCertificate complete_graph_certificate(const VisibilityGraph& g, const LeaderSet& leaders, double radius,
                                                    InfluenceModel model) {
  require(is_complete(g), ErrorKind::NotApplicable, "graph is not complete");
  SafetyCertificate cert;
  cert.rule = model == InfluenceModel::Uniform ? rules::kCompleteUniform : rules::kCompleteScaled;
  cert.assumptions.push_back("visibility graph complete at t=0");
  for (const auto& e : g.edges()) {
    if (leaders.contains(e.first) == leaders.contains(e.second))
      cert.verdicts.push_back(LinkVerdict::unconditional(e, cert.rule));
    else
      cert.verdicts.push_back(LinkVerdict::below(e, complete_graph_bound(g.size(), radius, model), cert.rule));
  }
  return detail::finalize(std::move(cert));
}

namespace detail {

struct ChainTopology {
  std::size_t leader = 0;
  std::size_t head = 0;  // the only follower the leader sees
};

inline std::optional<ChainTopology> match_chain(const VisibilityGraph& g, const LeaderSet& leaders) {
  if (g.size() < 2 || leaders.count() != 1) return std::nullopt;
  const auto leader = leaders.members().front();
  if (g.degree(leader) != 1) return std::nullopt;
  const auto follow = followers_of(leaders);
  if (!is_clique(g, follow)) return std::nullopt;
  return ChainTopology{leader, g.neighbors(leader).front()};
}

}  // namespace detail

/// Single leader seeing exactly one "head" follower, followers mutually
/// connected. Guarantee needs |u| <= n/(n-1) R, δ(leader, head) < R and
/// δ(head, i) < R/(n-1) (Uniform) or < R (Scaled) for every other follower.
inline SafetyCertificate chain_guarantee(std::span<const Vec2> positions, double radius, InfluenceModel model,
                                         const LeaderSet& leaders) {
  const auto g = build_visibility_graph(positions, radius);
  const auto topo = detail::match_chain(g, leaders);
  require(topo.has_value(), ErrorKind::NotApplicable,
          "topology is not a single leader linked to one follower of a complete follower group");
  const std::size_t n = g.size();
  const double nn = static_cast<double>(n);
  const double speed_cap = nn / (nn - 1.0) * radius;
  const double head_limit = model == InfluenceModel::Uniform ? radius / (nn - 1.0) : radius;

  SafetyCertificate cert;
  cert.rule = model == InfluenceModel::Uniform ? rules::kChainUniform : rules::kChainScaled;
  cert.assumptions.push_back("single leader " + std::to_string(topo->leader) + " linked only to follower " +
                             std::to_string(topo->head));
  cert.assumptions.push_back("followers form a complete subgraph at t=0");

  bool premises = distance(positions[topo->leader], positions[topo->head]) < radius;
  if (!premises) cert.notes.push_back("premise failed: leader-to-head distance is not strictly below R");
  for (std::size_t i = 0; i < n; ++i) {
    if (i == topo->leader || i == topo->head) continue;
    if (!(distance(positions[topo->head], positions[i]) < head_limit)) {
      premises = false;
      cert.notes.push_back("premise failed: head-to-follower " + std::to_string(i) + " distance not below " +
                           std::to_string(head_limit));
    }
  }
  for (const auto& e : g.edges()) {
    const bool touches_chain = e.first == topo->head || e.second == topo->head || e.first == topo->leader ||
                               e.second == topo->leader;
    if (!touches_chain)
      cert.verdicts.push_back(LinkVerdict::unconditional(e, cert.rule));
    else if (premises)
      cert.verdicts.push_back(LinkVerdict::below(e, speed_cap, cert.rule));
    else
      cert.verdicts.push_back(LinkVerdict::none(e, cert.rule));
  }
  return detail::finalize(std::move(cert));
}

/// Convention form: the leader is the last agent.
inline SafetyCertificate chain_guarantee(std::span<const Vec2> positions, double radius, InfluenceModel model) {
  require(!positions.empty(), ErrorKind::InvalidInput, "at least one agent is required");
  const std::size_t n = positions.size();
  return chain_guarantee(positions, radius, model, LeaderSet(n, {n - 1}));
}

inline SafetyCertificate clustered_certificate(const VisibilityGraph& g, const LeaderSet& leaders, double radius) {
  SafetyCertificate cert;
  cert.rule = rules::kClusteredUniform;
  cert.assumptions.push_back("leaders form a complete subgraph; followers form a complete subgraph");
  for (const auto& e : g.edges()) cert.verdicts.push_back(subgraph_complete_case(g, leaders, e.first, e.second, radius));
  return detail::finalize(std::move(cert));
}

inline SafetyCertificate incomplete_uniform_certificate(const VisibilityGraph& g, const LeaderSet& leaders, double radius) {
  SafetyCertificate cert;
  cert.rule = rules::kIncompleteUniform;
  cert.assumptions.push_back("connected visibility graph");
  for (const auto& e : g.edges()) cert.verdicts.push_back(link_condition_uniform(g, leaders, e.first, e.second, radius));
  return detail::finalize(std::move(cert));
}

/// Dispatch over every rule whose structural premise holds and keep the
/// certificate with the largest guaranteed speed. Scaled influence on an
/// incomplete graph outside the chain case has no rule.
/// Positions are optional here; without them the chain rule, which needs
/// distances, is skipped.
inline SafetyCertificate certify(const VisibilityGraph& g, InfluenceModel model, const LeaderSet& leaders,
                                 std::span<const Vec2> positions = {}) {
  const double radius = g.radius();
  require(leaders.universe() == g.size(), ErrorKind::InvalidInput, "leader set size does not match agents");
  require(positions.empty() || positions.size() == g.size(), ErrorKind::InvalidInput,
          "positions do not match the graph");

  if (g.edge_count() == 0) {
    SafetyCertificate cert;
    cert.rule = rules::kNoLinks;
    cert.notes.push_back("no initial links to preserve");
    cert.max_speed = std::numeric_limits<double>::infinity();
    return cert;
  }

  std::vector<SafetyCertificate> candidates;
  if (is_complete(g)) candidates.push_back(complete_graph_certificate(g, leaders, radius, model));
  if (!positions.empty() && detail::match_chain(g, leaders))
    candidates.push_back(chain_guarantee(positions, radius, model, leaders));
  if (model == InfluenceModel::Uniform) {
    if (has_clustered_structure(g, leaders)) candidates.push_back(clustered_certificate(g, leaders, radius));
    candidates.push_back(incomplete_uniform_certificate(g, leaders, radius));
  }

  const SafetyCertificate* best = nullptr;
  for (const auto& c : candidates)
    if (c.max_speed && (!best || *c.max_speed > *best->max_speed)) best = &c;
  if (best) return *best;

  if (model == InfluenceModel::Uniform) return candidates.back();

  SafetyCertificate cert;
  cert.rule = rules::kScaledIncompleteOpen;
  cert.assumptions.push_back("scaled influence on an incomplete graph");
  cert.notes.push_back("informational only: for a leader-follower link d(δ²)/dt <= 4R² + 2|u|R at δ = R, which never certifies preservation");
  if (!candidates.empty())
    cert.notes.push_back("rule " + candidates.front().rule + " applies structurally but its premises failed");
  for (const auto& e : g.edges()) cert.verdicts.push_back(LinkVerdict::none(e, rules::kScaledIncompleteOpen));
  return detail::finalize(std::move(cert));
}

inline SafetyCertificate certify(std::span<const Vec2> positions, double radius, InfluenceModel model,
                                 const LeaderSet& leaders) {
  return certify(build_visibility_graph(positions, radius), model, leaders, positions);
}

}  // namespace swarmcast
