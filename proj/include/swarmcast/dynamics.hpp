#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "swarmcast/asymptotics.hpp"
#include "swarmcast/error.hpp"
#include "swarmcast/geometry.hpp"
#include "swarmcast/graph.hpp"
#include "swarmcast/rng.hpp"
#include "swarmcast/spectral.hpp"

namespace swarmcast {

struct SwarmState {
  double t = 0.0;
  Eigen::VectorXd x;
  Eigen::VectorXd y;
  LeaderSet leaders;
  Vec2 u;

  std::size_t size() const noexcept { return static_cast<std::size_t>(x.size()); }
  Vec2 position(std::size_t i) const { return {x(static_cast<Eigen::Index>(i)), y(static_cast<Eigen::Index>(i))}; }

  Positions positions() const {
    Positions p(size());
    for (std::size_t i = 0; i < size(); ++i) p[i] = position(i);
    return p;
  }

  static SwarmState from_positions(std::span<const Vec2> p, double t = 0.0) {
    SwarmState s;
    s.t = t;
    s.x.resize(static_cast<Eigen::Index>(p.size()));
    s.y.resize(static_cast<Eigen::Index>(p.size()));
    for (std::size_t i = 0; i < p.size(); ++i) {
      s.x(static_cast<Eigen::Index>(i)) = p[i].x;
      s.y(static_cast<Eigen::Index>(i)) = p[i].y;
    }
    s.leaders = LeaderSet(p.size());
    return s;
  }
};

/// One piecewise-constant stretch: graph, leaders and broadcast held fixed.
struct IntervalSpec {
  double start = 0.0;
  Vec2 u;
  LeaderSet leaders;
  VisibilityGraph graph;
  InfluenceModel model = InfluenceModel::Uniform;
};

/// Closed-form propagator for one interval.
///
/// Per connected component c with spectrum (λ, V, Wᵀ), each axis evolves as
///   x(τ) = Σ_k e^{-λ_k τ} (W_kᵀ x0) V_k + Σ_k g_k(τ) (W_kᵀ B u) V_k,
/// g_1(τ) = τ for the zero eigenvalue and g_k(τ) = (1 - e^{-λ_k τ}) / λ_k
/// otherwise. Isolated agents are 1x1 components with λ = 0.
class IntervalPropagator {
 public:
  IntervalPropagator(const IntervalSpec& spec, const Eigen::VectorXd& x0, const Eigen::VectorXd& y0)
      : n_(spec.graph.size()) {
    require(static_cast<std::size_t>(x0.size()) == n_ && static_cast<std::size_t>(y0.size()) == n_,
            ErrorKind::InvalidInput, "state size does not match interval graph");
    require(spec.leaders.universe() == n_, ErrorKind::InvalidInput, "leader set size does not match interval graph");
    const Eigen::VectorXd b = spec.leaders.indicator();
    for (auto& members : connected_components(spec.graph)) {
      Block blk;
      const auto m = static_cast<Eigen::Index>(members.size());
      if (m == 1) {
        blk.eigenvalues = Eigen::VectorXd::Zero(1);
        blk.right = Eigen::MatrixXd::Ones(1, 1);
        blk.left_t = Eigen::MatrixXd::Ones(1, 1);
      } else {
        auto dec = spectrum(induced_subgraph(spec.graph, members), spec.model);
        blk.eigenvalues = std::move(dec.eigenvalues);
        blk.right = std::move(dec.right);
        blk.left_t = std::move(dec.left_t);
      }
      Eigen::VectorXd xs(m), ys(m), bs(m);
      for (Eigen::Index k = 0; k < m; ++k) {
        const auto i = static_cast<Eigen::Index>(members[static_cast<std::size_t>(k)]);
        xs(k) = x0(i);
        ys(k) = y0(i);
        bs(k) = b(i);
      }
      blk.hx = blk.left_t * xs;
      blk.hy = blk.left_t * ys;
      const Eigen::VectorXd wb = blk.left_t * bs;
      blk.fx = wb * spec.u.x;
      blk.fy = wb * spec.u.y;
      blk.lambda_max = blk.eigenvalues.maxCoeff();
      blk.members = std::move(members);
      blocks_.push_back(std::move(blk));
    }
  }

  /// Positions τ time units after the interval start.
  std::pair<Eigen::VectorXd, Eigen::VectorXd> at(double tau) const {
    Eigen::VectorXd x(static_cast<Eigen::Index>(n_)), y(static_cast<Eigen::Index>(n_));
    for (const auto& blk : blocks_) {
      const Eigen::Index m = blk.eigenvalues.size();
      Eigen::VectorXd decay(m), gain(m);
      for (Eigen::Index k = 0; k < m; ++k) {
        const double lam = blk.eigenvalues(k);
        // The first eigenpair of each component is the agreement direction.
        if (k == 0) {
          decay(k) = 1.0;
          gain(k) = tau;
        } else {
          decay(k) = std::exp(-lam * tau);
          gain(k) = -std::expm1(-lam * tau) / lam;
        }
      }
      const Eigen::VectorXd xc = blk.right * (decay.cwiseProduct(blk.hx) + gain.cwiseProduct(blk.fx));
      const Eigen::VectorXd yc = blk.right * (decay.cwiseProduct(blk.hy) + gain.cwiseProduct(blk.fy));
      for (std::size_t k = 0; k < blk.members.size(); ++k) {
        x(static_cast<Eigen::Index>(blk.members[k])) = xc(static_cast<Eigen::Index>(k));
        y(static_cast<Eigen::Index>(blk.members[k])) = yc(static_cast<Eigen::Index>(k));
      }
    }
    return {std::move(x), std::move(y)};
  }

  double max_eigenvalue() const noexcept {
    double out = 0.0;
    for (const auto& blk : blocks_) out = std::max(out, blk.lambda_max);
    return out;
  }

  std::size_t component_count() const noexcept { return blocks_.size(); }

 private:
  struct Block {
    std::vector<std::size_t> members;
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXd right;
    Eigen::MatrixXd left_t;
    Eigen::VectorXd hx, hy;  // Wᵀ x0, Wᵀ y0
    Eigen::VectorXd fx, fy;  // Wᵀ B u
    double lambda_max = 0.0;
  };

  std::size_t n_;
  std::vector<Block> blocks_;
};

/// Exact state after τ time units of one connected interval.
inline SwarmState exact_state(const IntervalSpec& spec, const Eigen::VectorXd& x0, const Eigen::VectorXd& y0,
                              double tau) {
  require(tau >= 0.0, ErrorKind::InvalidInput, "elapsed time must be non-negative");
  require(spec.graph.size() > 0 && is_connected(spec.graph), ErrorKind::Disconnected,
          "exact propagation needs a connected interval graph");
  auto [x, y] = IntervalPropagator(spec, x0, y0).at(tau);
  SwarmState s;
  s.t = spec.start + tau;
  s.x = std::move(x);
  s.y = std::move(y);
  s.leaders = spec.leaders;
  s.u = spec.u;
  return s;
}

/// Classical RK4 step of ẋ = -L x + B u_x, ẏ = -L y + B u_y.
inline SwarmState integrate_step(const SwarmState& state, const IntervalSpec& spec, double dt) {
  require(dt > 0.0, ErrorKind::InvalidInput, "time step must be positive");
  const Eigen::MatrixXd l = dynamics_matrix(spec.graph, spec.model);
  const Eigen::VectorXd b = spec.leaders.indicator();
  auto rk4 = [&](const Eigen::VectorXd& v, double drive) {
    auto f = [&](const Eigen::VectorXd& s) -> Eigen::VectorXd { return -l * s + b * drive; };
    const Eigen::VectorXd k1 = f(v);
    const Eigen::VectorXd k2 = f(v + 0.5 * dt * k1);
    const Eigen::VectorXd k3 = f(v + 0.5 * dt * k2);
    const Eigen::VectorXd k4 = f(v + dt * k3);
    return Eigen::VectorXd(v + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
  };
  SwarmState next = state;
  next.t = state.t + dt;
  next.x = rk4(state.x, spec.u.x);
  next.y = rk4(state.y, spec.u.y);
  next.leaders = spec.leaders;
  next.u = spec.u;
  return next;
}

enum class CrossingKind { LinkLost, LinkGained };

struct EdgeCrossing {
  Edge edge;
  CrossingKind kind = CrossingKind::LinkLost;
  double t = 0.0;  // first time at which the new link status holds, within `time_tol`
};

inline constexpr double kCrossingTimeTolerance = 1e-9;

/// Pairs whose "within R" status differs between `ta` and `tb`, each
/// localised by bisection on δ² - R² along `trajectory`, sorted by time.
/// `trajectory(t)` returns the (x, y) vectors at absolute time t.
template <typename Trajectory>
std::vector<EdgeCrossing> detect_edge_crossings(const Trajectory& trajectory, double ta, double tb, double radius,
                                                double time_tol = kCrossingTimeTolerance) {
  const auto [xa, ya] = trajectory(ta);
  const auto [xb, yb] = trajectory(tb);
  const double r2 = radius * radius;
  const auto n = xa.size();
  auto within = [r2](const Eigen::VectorXd& x, const Eigen::VectorXd& y, Eigen::Index i, Eigen::Index j) {
    const double dx = x(i) - x(j), dy = y(i) - y(j);
    return dx * dx + dy * dy <= r2;
  };
  std::vector<EdgeCrossing> out;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const bool before = within(xa, ya, i, j);
      if (before == within(xb, yb, i, j)) continue;
      double lo = ta, hi = tb;
      while (hi - lo > time_tol) {
        const double mid = 0.5 * (lo + hi);
        const auto [xm, ym] = trajectory(mid);
        (within(xm, ym, i, j) == before ? lo : hi) = mid;
      }
      out.push_back({Edge{static_cast<std::size_t>(i), static_cast<std::size_t>(j)},
                     before ? CrossingKind::LinkLost : CrossingKind::LinkGained, hi});
    }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.t < b.t; });
  return out;
}

/// Two-state form: positions are interpolated linearly between the states,
/// which is exact for straight-line motion and O(dt²) otherwise.
inline std::vector<EdgeCrossing> detect_edge_crossings(const SwarmState& a, const SwarmState& b, double radius) {
  require(b.t >= a.t, ErrorKind::InvalidInput, "states must be in time order");
  if (b.t == a.t) return {};
  auto lerp = [&](double t) {
    const double w = (t - a.t) / (b.t - a.t);
    return std::pair<Eigen::VectorXd, Eigen::VectorXd>{(1.0 - w) * a.x + w * b.x, (1.0 - w) * a.y + w * b.y};
  };
  return detect_edge_crossings(lerp, a.t, b.t, radius);
}

/// Each agent detects the broadcast independently with probability p; an
/// empty draw is redrawn so at least one agent leads.
inline LeaderSet sample_leaders(std::size_t n, double p, CounterRng& rng) {
  require(p > 0.0 && p <= 1.0 && std::isfinite(p), ErrorKind::InvalidInput, "detection probability must be in (0, 1]");
  require(n >= 1, ErrorKind::InvalidInput, "need at least one agent");
  for (;;) {
    std::vector<bool> flags(n);
    bool any = false;
    for (std::size_t i = 0; i < n; ++i) {
      flags[i] = rng.uniform() < p;
      any = any || flags[i];
    }
    if (any) return LeaderSet::from_flags(std::move(flags));
  }
}

inline LeaderSet sample_leaders(std::size_t n, double p, std::uint64_t seed) {
  CounterRng rng(seed);
  return sample_leaders(n, p, rng);
}

}  // namespace swarmcast
