#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "swarmcast/error.hpp"
#include "swarmcast/geometry.hpp"
#include "swarmcast/graph.hpp"
#include "swarmcast/spectral.hpp"

namespace swarmcast {

/// Agents that currently detect the broadcast.
class LeaderSet {
 public:
  LeaderSet() = default;

  explicit LeaderSet(std::size_t n) : flags_(n, false) {}

  LeaderSet(std::size_t n, std::span<const std::size_t> members) : flags_(n, false) {
    for (auto i : members) {
      require(i < n, ErrorKind::InvalidInput, "leader index out of range");
      flags_[i] = true;
    }
  }

  LeaderSet(std::size_t n, std::initializer_list<std::size_t> members)
      : LeaderSet(n, std::span<const std::size_t>(members.begin(), members.size())) {}

  static LeaderSet all(std::size_t n) {
    LeaderSet s(n);
    std::fill(s.flags_.begin(), s.flags_.end(), true);
    return s;
  }

  static LeaderSet from_flags(std::vector<bool> flags) {
    LeaderSet s;
    s.flags_ = std::move(flags);
    return s;
  }

  std::size_t universe() const noexcept { return flags_.size(); }
  bool contains(std::size_t i) const { return flags_.at(i); }
  std::size_t count() const noexcept { return static_cast<std::size_t>(std::count(flags_.begin(), flags_.end(), true)); }
  bool empty() const noexcept { return count() == 0; }
  const std::vector<bool>& flags() const noexcept { return flags_; }

  std::vector<std::size_t> members() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < flags_.size(); ++i)
      if (flags_[i]) out.push_back(i);
    return out;
  }

  /// The 0/1 vector B.
  Eigen::VectorXd indicator() const {
    Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(flags_.size()));
    for (std::size_t i = 0; i < flags_.size(); ++i)
      if (flags_[i]) b(static_cast<Eigen::Index>(i)) = 1.0;
    return b;
  }

  friend bool operator==(const LeaderSet&, const LeaderSet&) = default;

 private:
  std::vector<bool> flags_;
};

/// Long-run motion of one interval: p_i(t) ≈ α + β u t + γ_i u.
struct AsymptoticPrediction {
  Vec2 alpha;
  double beta = 0.0;
  Eigen::VectorXd gamma;
  Vec2 u;
  InfluenceModel model = InfluenceModel::Uniform;
  double lambda2 = 0.0;  // convergence rate of the model's Laplacian

  Vec2 deviation(std::size_t i) const { return gamma(static_cast<Eigen::Index>(i)) * u; }

  Vec2 position(std::size_t i, double t) const { return alpha + (beta * t) * u + deviation(i); }

  /// Agents sorted by their offset along the alignment line.
  std::vector<std::size_t> order_along_line() const {
    std::vector<std::size_t> idx(static_cast<std::size_t>(gamma.size()));
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return gamma(a) < gamma(b); });
    return idx;
  }
};

namespace detail {

inline void require_connected(const VisibilityGraph& g, const char* what) {
  require(g.size() > 0 && is_connected(g), ErrorKind::Disconnected, what);
}

inline Eigen::VectorXd degree_weights(const VisibilityGraph& g) {
  Eigen::VectorXd d(static_cast<Eigen::Index>(g.size()));
  for (std::size_t i = 0; i < g.size(); ++i) d(static_cast<Eigen::Index>(i)) = static_cast<double>(g.degree(i));
  return d;
}

inline void check_leaders(const VisibilityGraph& g, const LeaderSet& leaders) {
  require(leaders.universe() == g.size(), ErrorKind::InvalidInput, "leader set size does not match graph");
}

}  // namespace detail

/// Zero-input gathering point: the mean (Uniform) or the degree-weighted
/// mean dᵀx / Σd (Scaled) of the initial positions.
inline Vec2 consensus_alpha(const VisibilityGraph& g, InfluenceModel model, std::span<const double> x0,
                            std::span<const double> y0) {
  detail::require_connected(g, "no single consensus: graph is disconnected");
  require(x0.size() == g.size() && y0.size() == g.size(), ErrorKind::InvalidInput, "state size does not match graph");
  const auto n = static_cast<Eigen::Index>(g.size());
  Eigen::Map<const Eigen::VectorXd> x(x0.data(), n), y(y0.data(), n);
  if (model == InfluenceModel::Uniform || n == 1) return {x.mean(), y.mean()};
  const Eigen::VectorXd d = detail::degree_weights(g);
  return {d.dot(x) / d.sum(), d.dot(y) / d.sum()};
}

/// Fraction of the commanded speed the group achieves: n_l/n (Uniform) or
/// Σ_{leaders} d_i / Σ d_i (Scaled). Zero when nobody detects the broadcast.
inline double collective_speed_beta(const VisibilityGraph& g, InfluenceModel model, const LeaderSet& leaders) {
  detail::check_leaders(g, leaders);
  if (leaders.empty()) return 0.0;
  detail::require_connected(g, "collective speed undefined: graph is disconnected");
  const auto n = static_cast<double>(g.size());
  if (model == InfluenceModel::Uniform || g.size() == 1) return static_cast<double>(leaders.count()) / n;
  const Eigen::VectorXd d = detail::degree_weights(g);
  return d.dot(leaders.indicator()) / d.sum();
}

/// γ = Σ_{k>=2} (1/λ_k) V_k W_kᵀ B for an already computed spectrum.
inline Eigen::VectorXd deviation_gamma(const SpectralDecomposition& spec, const LeaderSet& leaders) {
  const Eigen::VectorXd b = leaders.indicator();
  Eigen::VectorXd gamma = Eigen::VectorXd::Zero(b.size());
  for (Eigen::Index k = 1; k < spec.eigenvalues.size(); ++k)
    gamma += (spec.left_t.row(k).dot(b) / spec.eigenvalues(k)) * spec.right.col(k);
  return gamma;
}

/// Per-agent deviation factor: agent i settles at γ_i·u from the moving
/// consensus point.
inline Eigen::VectorXd deviation_gamma(const VisibilityGraph& g, InfluenceModel model, const LeaderSet& leaders) {
  detail::check_leaders(g, leaders);
  detail::require_connected(g, "deviations undefined: graph is disconnected");
  if (g.size() == 1) return Eigen::VectorXd::Zero(1);
  return deviation_gamma(spectrum(g, model), leaders);
}

/// Same spectral sum but with the left eigenvectors rescaled to unit length
/// instead of W_kᵀV_k = 1, i.e. what one gets by pairing independently
/// normalised eigenvectors of L and Lᵀ. For symmetric L^U this equals
/// deviation_gamma; for L^S every term is shrunk by 1/|W_k| and the result
/// is NOT the asymptotic deviation. Kept only to reproduce tables computed
/// that way.
inline Eigen::VectorXd deviation_gamma_unit_eigvecs(const VisibilityGraph& g, InfluenceModel model,
                                                    const LeaderSet& leaders) {
  detail::check_leaders(g, leaders);
  detail::require_connected(g, "deviations undefined: graph is disconnected");
  if (g.size() == 1) return Eigen::VectorXd::Zero(1);
  const auto spec = spectrum(g, model);
  const Eigen::VectorXd b = leaders.indicator();
  Eigen::VectorXd gamma = Eigen::VectorXd::Zero(b.size());
  for (Eigen::Index k = 1; k < spec.eigenvalues.size(); ++k) {
    const Eigen::VectorXd w = spec.left_t.row(k).transpose();
    gamma += (w.normalized().dot(b) / spec.eigenvalues(k)) * spec.right.col(k);
  }
  return gamma;
}

inline AsymptoticPrediction predict(const VisibilityGraph& g, InfluenceModel model, const LeaderSet& leaders,
                                    std::span<const double> x0, std::span<const double> y0, Vec2 u) {
  detail::check_leaders(g, leaders);
  AsymptoticPrediction p;
  p.alpha = consensus_alpha(g, model, x0, y0);
  p.beta = collective_speed_beta(g, model, leaders);
  p.u = u;
  p.model = model;
  if (g.size() == 1) {
    p.gamma = Eigen::VectorXd::Zero(1);
    return p;
  }
  const auto spec = spectrum(g, model);
  p.gamma = deviation_gamma(spec, leaders);
  p.lambda2 = spec.eigenvalues(1);
  return p;
}

inline AsymptoticPrediction predict(const VisibilityGraph& g, InfluenceModel model, const LeaderSet& leaders,
                                    std::span<const Vec2> positions, Vec2 u) {
  std::vector<double> x, y;
  for (const auto& p : positions) {
    x.push_back(p.x);
    y.push_back(p.y);
  }
  return predict(g, model, leaders, x, y, u);
}

namespace detail {

// Backtracking search for an adjacency- and role-preserving permutation
// that swaps a and b.
class SwapAutomorphismSearch {
 public:
  SwapAutomorphismSearch(const VisibilityGraph& g, const LeaderSet& leaders) : g_(g), leaders_(leaders) {}

  bool exists(std::size_t a, std::size_t b) {
    const std::size_t n = g_.size();
    image_.assign(n, kUnset);
    used_.assign(n, false);
    image_[a] = b;
    image_[b] = a;
    used_[a] = used_[b] = true;
    if (!consistent(a) || !consistent(b)) return false;
    return extend(0);
  }

 private:
  static constexpr std::size_t kUnset = static_cast<std::size_t>(-1);

  bool same_signature(std::size_t v, std::size_t w) const {
    return g_.degree(v) == g_.degree(w) && leaders_.contains(v) == leaders_.contains(w);
  }

  // Edges between v and every already-mapped vertex are preserved.
  bool consistent(std::size_t v) const {
    if (!same_signature(v, image_[v])) return false;
    for (std::size_t u = 0; u < g_.size(); ++u)
      if (image_[u] != kUnset && g_.has_edge(u, v) != g_.has_edge(image_[u], image_[v])) return false;
    return true;
  }

  bool extend(std::size_t v) {
    const std::size_t n = g_.size();
    while (v < n && image_[v] != kUnset) ++v;
    if (v == n) return true;
    for (std::size_t w = 0; w < n; ++w) {
      if (used_[w] || !same_signature(v, w)) continue;
      image_[v] = w;
      used_[w] = true;
      if (consistent(v) && extend(v + 1)) return true;
      image_[v] = kUnset;
      used_[w] = false;
    }
    return false;
  }

  const VisibilityGraph& g_;
  const LeaderSet& leaders_;
  std::vector<std::size_t> image_;
  std::vector<bool> used_;
};

}  // namespace detail

inline constexpr std::size_t kMaxEquivalenceSearchSize = 10;

/// Classes of agents related by leader/follower-preserving automorphisms
/// that swap them, closed transitively. Exhaustive; n <= 10.
inline std::vector<std::vector<std::size_t>> find_equivalent_agents(const VisibilityGraph& g, const LeaderSet& leaders) {
  detail::check_leaders(g, leaders);
  const std::size_t n = g.size();
  require(n <= kMaxEquivalenceSearchSize, ErrorKind::SizeLimit, "equivalence search is limited to 10 agents");
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  detail::SwapAutomorphismSearch search(g, leaders);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (find(i) != find(j) && search.exists(i, j)) parent[find(j)] = find(i);

  std::vector<std::vector<std::size_t>> classes;
  std::vector<std::size_t> slot(n, n);
  for (std::size_t v = 0; v < n; ++v) {
    const auto root = find(v);
    if (slot[root] == n) {
      slot[root] = classes.size();
      classes.emplace_back();
    }
    classes[slot[root]].push_back(v);
  }
  return classes;
}

}  // namespace swarmcast
