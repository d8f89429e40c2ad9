#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "swarmcast/error.hpp"
#include "swarmcast/geometry.hpp"

namespace swarmcast {

/// How a follower weighs its neighbours: every neighbour with weight 1
/// (Uniform, symmetric Laplacian) or with weight 1/|N_i| (Scaled,
/// row-normalised Laplacian).
enum class InfluenceModel { Uniform, Scaled };

inline constexpr std::string_view to_string(InfluenceModel m) noexcept {
  return m == InfluenceModel::Uniform ? "uniform" : "scaled";
}

inline InfluenceModel parse_influence_model(std::string_view text) {
  if (text == "uniform" || text == "u") return InfluenceModel::Uniform;
  if (text == "scaled" || text == "s") return InfluenceModel::Scaled;
  fail(ErrorKind::Validation, "unknown influence model '" + std::string(text) + "'");
}

/// Undirected edge, always stored with first < second.
struct Edge {
  std::size_t first = 0;
  std::size_t second = 0;

  static Edge make(std::size_t a, std::size_t b) noexcept { return a < b ? Edge{a, b} : Edge{b, a}; }

  friend constexpr auto operator<=>(const Edge&, const Edge&) = default;
};

/// R-disc proximity graph snapshot. Immutable once built.
class VisibilityGraph {
 public:
  VisibilityGraph() = default;

  /// Builds from an arbitrary edge list; duplicates and orientation are
  /// normalised, self-loops and out-of-range indices are rejected.
  VisibilityGraph(std::size_t n, std::vector<Edge> edges, double radius = 1.0)
      : n_(n), radius_(radius), neighbors_(n), degree_(n, 0) {
    for (auto& e : edges) {
      require(e.first < n && e.second < n, ErrorKind::InvalidInput, "edge index out of range");
      require(e.first != e.second, ErrorKind::InvalidInput, "self-loop in edge list");
      e = Edge::make(e.first, e.second);
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    edges_ = std::move(edges);
    for (const auto& e : edges_) {
      neighbors_[e.first].push_back(e.second);
      neighbors_[e.second].push_back(e.first);
      ++degree_[e.first];
      ++degree_[e.second];
    }
    for (auto& nb : neighbors_) std::sort(nb.begin(), nb.end());
  }

  std::size_t size() const noexcept { return n_; }
  double radius() const noexcept { return radius_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  const std::vector<std::size_t>& neighbors(std::size_t i) const { return neighbors_.at(i); }
  std::size_t degree(std::size_t i) const { return degree_.at(i); }
  const std::vector<std::size_t>& degrees() const noexcept { return degree_; }

  bool has_edge(std::size_t i, std::size_t j) const {
    if (i == j || i >= n_ || j >= n_) return false;
    const auto& nb = neighbors_[i];
    return std::binary_search(nb.begin(), nb.end(), j);
  }

  bool has_isolated_vertex() const noexcept {
    return std::any_of(degree_.begin(), degree_.end(), [](std::size_t d) { return d == 0; });
  }

  Eigen::MatrixXd adjacency_matrix() const {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(n_));
    for (const auto& e : edges_) {
      a(e.first, e.second) = 1.0;
      a(e.second, e.first) = 1.0;
    }
    return a;
  }

  friend bool operator==(const VisibilityGraph& a, const VisibilityGraph& b) {
    return a.n_ == b.n_ && a.edges_ == b.edges_;
  }

 private:
  std::size_t n_ = 0;
  double radius_ = 1.0;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::size_t>> neighbors_;
  std::vector<std::size_t> degree_;
};

/// Edge (i,j) exists iff |p_i - p_j| <= R (boundary inclusive).
inline VisibilityGraph build_visibility_graph(std::span<const Vec2> positions, double radius) {
  require(!positions.empty(), ErrorKind::InvalidInput, "at least one agent is required");
  require(std::isfinite(radius) && radius > 0.0, ErrorKind::InvalidInput, "sensing radius must be positive");
  for (const auto& p : positions) require(p.finite(), ErrorKind::InvalidInput, "non-finite agent coordinate");
  const double r2 = radius * radius;
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < positions.size(); ++i)
    for (std::size_t j = i + 1; j < positions.size(); ++j)
      if ((positions[i] - positions[j]).norm2() <= r2) edges.push_back({i, j});
  return VisibilityGraph(positions.size(), std::move(edges), radius);
}

inline VisibilityGraph graph_from_adjacency(const Eigen::MatrixXd& a, double radius = 1.0) {
  require(a.rows() == a.cols(), ErrorKind::InvalidInput, "adjacency matrix must be square");
  std::vector<Edge> edges;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = i + 1; j < a.cols(); ++j) {
      require(a(i, j) == a(j, i), ErrorKind::InvalidInput, "adjacency matrix must be symmetric");
      if (a(i, j) != 0.0) edges.push_back({static_cast<std::size_t>(i), static_cast<std::size_t>(j)});
    }
  return VisibilityGraph(static_cast<std::size_t>(a.rows()), std::move(edges), radius);
}

inline VisibilityGraph complete_graph(std::size_t n, double radius = 1.0) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) edges.push_back({i, j});
  return VisibilityGraph(n, std::move(edges), radius);
}

inline VisibilityGraph without_edge(const VisibilityGraph& g, Edge e) {
  e = Edge::make(e.first, e.second);
  require(g.has_edge(e.first, e.second), ErrorKind::InvalidInput, "edge not present in graph");
  std::vector<Edge> edges;
  edges.reserve(g.edge_count() - 1);
  for (const auto& f : g.edges())
    if (f != e) edges.push_back(f);
  return VisibilityGraph(g.size(), std::move(edges), g.radius());
}

/// Subgraph induced by `vertices`; vertex k of the result is vertices[k].
inline VisibilityGraph induced_subgraph(const VisibilityGraph& g, std::span<const std::size_t> vertices) {
  std::vector<std::size_t> local(g.size(), g.size());
  for (std::size_t k = 0; k < vertices.size(); ++k) local.at(vertices[k]) = k;
  std::vector<Edge> edges;
  for (const auto& e : g.edges())
    if (local[e.first] < g.size() && local[e.second] < g.size()) edges.push_back(Edge::make(local[e.first], local[e.second]));
  return VisibilityGraph(vertices.size(), std::move(edges), g.radius());
}

inline std::vector<std::size_t> degree_vector(const VisibilityGraph& g) { return g.degrees(); }

inline bool is_complete(const VisibilityGraph& g) noexcept {
  const std::size_t n = g.size();
  return g.edge_count() == n * (n > 0 ? n - 1 : 0) / 2;
}

/// Maximal connected vertex sets, each sorted, ordered by smallest member.
inline std::vector<std::vector<std::size_t>> connected_components(const VisibilityGraph& g) {
  std::vector<std::size_t> label(g.size(), g.size());
  std::vector<std::vector<std::size_t>> components;
  for (std::size_t root = 0; root < g.size(); ++root) {
    if (label[root] != g.size()) continue;
    std::vector<std::size_t> members{root};
    label[root] = components.size();
    for (std::size_t head = 0; head < members.size(); ++head)
      for (auto nb : g.neighbors(members[head]))
        if (label[nb] == g.size()) {
          label[nb] = components.size();
          members.push_back(nb);
        }
    std::sort(members.begin(), members.end());
    components.push_back(std::move(members));
  }
  return components;
}

inline bool is_connected(const VisibilityGraph& g) { return g.size() > 0 && connected_components(g).size() == 1; }

enum class LaplacianKind { Uniform, Scaled, Normalized };

struct LaplacianMatrix {
  LaplacianKind kind = LaplacianKind::Uniform;
  Eigen::MatrixXd entries;
};

inline Eigen::MatrixXd uniform_laplacian_entries(const VisibilityGraph& g) {
  Eigen::MatrixXd l = -g.adjacency_matrix();
  for (std::size_t i = 0; i < g.size(); ++i) l(i, i) = static_cast<double>(g.degree(i));
  return l;
}

/// L^U = Δ - A, or L^S = Δ^{-1} L^U. Scaled needs every degree >= 1.
inline LaplacianMatrix laplacian(const VisibilityGraph& g, InfluenceModel model) {
  Eigen::MatrixXd l = uniform_laplacian_entries(g);
  if (model == InfluenceModel::Uniform) return {LaplacianKind::Uniform, std::move(l)};
  require(!g.has_isolated_vertex(), ErrorKind::DegenerateGraph, "scaled Laplacian undefined: graph has an isolated vertex");
  for (std::size_t i = 0; i < g.size(); ++i) l.row(i) /= static_cast<double>(g.degree(i));
  return {LaplacianKind::Scaled, std::move(l)};
}

/// Γ = Δ^{-1/2} L^U Δ^{-1/2}.
inline LaplacianMatrix normalized_laplacian(const VisibilityGraph& g) {
  require(!g.has_isolated_vertex(), ErrorKind::DegenerateGraph, "normalized Laplacian undefined: graph has an isolated vertex");
  const auto n = static_cast<Eigen::Index>(g.size());
  Eigen::MatrixXd gamma = Eigen::MatrixXd::Identity(n, n);
  for (const auto& e : g.edges()) {
    const double w = -1.0 / std::sqrt(static_cast<double>(g.degree(e.first)) * static_cast<double>(g.degree(e.second)));
    gamma(e.first, e.second) = w;
    gamma(e.second, e.first) = w;
  }
  return {LaplacianKind::Normalized, std::move(gamma)};
}

/// Right-hand-side matrix of the gathering dynamics. Unlike laplacian(),
/// an isolated agent simply gets a zero row (it has nobody to move toward).
inline Eigen::MatrixXd dynamics_matrix(const VisibilityGraph& g, InfluenceModel model) {
  Eigen::MatrixXd l = uniform_laplacian_entries(g);
  if (model == InfluenceModel::Scaled)
    for (std::size_t i = 0; i < g.size(); ++i)
      if (g.degree(i) > 0) l.row(i) /= static_cast<double>(g.degree(i));
  return l;
}

}  // namespace swarmcast
