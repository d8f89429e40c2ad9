#pragma once

#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

#include "swarmcast/asymptotics.hpp"
#include "swarmcast/graph.hpp"
#include "swarmcast/rng.hpp"

namespace swarmcast {

inline std::size_t uniform_index(CounterRng& rng, std::size_t bound) {
  return static_cast<std::size_t>(rng.uniform() * static_cast<double>(bound)) % bound;
}

/// Random spanning tree plus each remaining pair with probability p.
inline VisibilityGraph random_connected_graph(std::size_t n, double p, CounterRng& rng) {
  std::vector<Edge> edges;
  for (std::size_t i = 1; i < n; ++i) edges.push_back({uniform_index(rng, i), i});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (rng.uniform() < p) edges.push_back({i, j});
  return VisibilityGraph(n, std::move(edges));
}

/// Non-empty subset, each agent with probability p.
inline LeaderSet random_leaders(std::size_t n, double p, CounterRng& rng) {
  std::vector<bool> flags(n);
  bool any = false;
  for (std::size_t i = 0; i < n; ++i) any |= (flags[i] = rng.uniform() < p);
  if (!any) flags[uniform_index(rng, n)] = true;
  return LeaderSet::from_flags(std::move(flags));
}

/// Uniform in a disc of the given radius around c.
inline Positions random_disc_positions(std::size_t n, double disc_radius, CounterRng& rng, Vec2 c = {}) {
  Positions out(n);
  for (auto& p : out) {
    const double r = disc_radius * std::sqrt(rng.uniform());
    const double a = 2.0 * std::numbers::pi * rng.uniform();
    p = {c.x + r * std::cos(a), c.y + r * std::sin(a)};
  }
  return out;
}

inline Vec2 random_direction(CounterRng& rng) {
  const double a = 2.0 * std::numbers::pi * rng.uniform();
  return {std::cos(a), std::sin(a)};
}

}  // namespace swarmcast
