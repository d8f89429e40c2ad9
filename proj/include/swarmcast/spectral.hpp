#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "swarmcast/error.hpp"
#include "swarmcast/graph.hpp"

namespace swarmcast {

/// Eigenvalues ascending, right eigenvectors as columns of `right`, left
/// eigenvectors as rows of `left_t`, normalised so that left_t * right = I.
struct SpectralDecomposition {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd right;
  Eigen::MatrixXd left_t;

  std::size_t size() const noexcept { return static_cast<std::size_t>(eigenvalues.size()); }
};

namespace detail {

inline void make_first_nonzero_positive(Eigen::MatrixXd& vectors, Eigen::MatrixXd* paired_rows = nullptr) {
  for (Eigen::Index k = 0; k < vectors.cols(); ++k) {
    const double scale = vectors.col(k).cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < vectors.rows(); ++i) {
      if (std::abs(vectors(i, k)) <= 1e-10 * scale) continue;
      if (vectors(i, k) < 0.0) {
        vectors.col(k) *= -1.0;
        if (paired_rows) paired_rows->row(k) *= -1.0;
      }
      break;
    }
  }
}

// One Jacobi rotation zeroing a(p,q); updates a in place and accumulates into v.
inline void jacobi_rotate(Eigen::MatrixXd& a, Eigen::MatrixXd& v, Eigen::Index p, Eigen::Index q) {
  const double apq = a(p, q);
  const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
  const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
  const double c = 1.0 / std::sqrt(t * t + 1.0);
  const double s = t * c;
  const Eigen::Index n = a.rows();
  for (Eigen::Index k = 0; k < n; ++k) {
    const double akp = a(k, p);
    const double akq = a(k, q);
    a(k, p) = c * akp - s * akq;
    a(k, q) = s * akp + c * akq;
  }
  for (Eigen::Index k = 0; k < n; ++k) {
    const double apk = a(p, k);
    const double aqk = a(q, k);
    a(p, k) = c * apk - s * aqk;
    a(q, k) = s * apk + c * aqk;
  }
  a(p, q) = 0.0;
  a(q, p) = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double vkp = v(k, p);
    const double vkq = v(k, q);
    v(k, p) = c * vkp - s * vkq;
    v(k, q) = s * vkp + c * vkq;
  }
}

inline double off_diagonal_norm(const Eigen::MatrixXd& a) {
  double sum = 0.0;
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      if (i != j) sum += a(i, j) * a(i, j);
  return std::sqrt(sum);
}

}  // namespace detail

/// Cyclic Jacobi eigensolver for a dense symmetric matrix.
///
/// Sweeps over all (p,q) pairs until the off-diagonal Frobenius mass drops
/// below 1e-14 * ||M||_F. Eigenvalues come back ascending, eigenvectors
/// orthonormal, each with its first non-negligible entry positive.
inline SpectralDecomposition symmetric_eig(const Eigen::MatrixXd& m) {
  require(m.rows() == m.cols(), ErrorKind::InvalidInput, "matrix must be square");
  require((m - m.transpose()).cwiseAbs().maxCoeff() < 1e-10 || m.size() == 0, ErrorKind::InvalidInput,
          "matrix is not symmetric");
  const Eigen::Index n = m.rows();
  Eigen::MatrixXd a = 0.5 * (m + m.transpose());
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
  const double scale = a.norm();
  if (scale > 0.0) {
    constexpr int kMaxSweeps = 100;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
      if (detail::off_diagonal_norm(a) < 1e-14 * scale) break;
      for (Eigen::Index p = 0; p < n - 1; ++p)
        for (Eigen::Index q = p + 1; q < n; ++q)
          if (a(p, q) != 0.0) detail::jacobi_rotate(a, v, p, q);
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) { return a(i, i) < a(j, j); });

  SpectralDecomposition out;
  out.eigenvalues.resize(n);
  out.right.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out.eigenvalues(k) = a(order[k], order[k]);
    out.right.col(k) = v.col(order[k]);
  }
  detail::make_first_nonzero_positive(out.right);
  out.left_t = out.right.transpose();
  return out;
}

/// Spectrum of L^U. On a connected graph the first column is exactly
/// (1/sqrt(n)) 1 and the first eigenvalue exactly 0.
inline SpectralDecomposition uniform_spectrum(const VisibilityGraph& g) {
  auto dec = symmetric_eig(laplacian(g, InfluenceModel::Uniform).entries);
  if (g.size() > 0 && is_connected(g)) {
    const auto n = static_cast<Eigen::Index>(g.size());
    dec.eigenvalues(0) = 0.0;
    dec.right.col(0).setConstant(1.0 / std::sqrt(static_cast<double>(n)));
    dec.left_t = dec.right.transpose();
  }
  return dec;
}

/// Right/left eigenstructure of the non-symmetric L^S via the similarity
/// L^S = Δ^{-1/2} Γ Δ^{1/2}: V = Δ^{-1/2} G, W^T = (Δ^{1/2} G)^T where G are
/// the orthonormal eigenvectors of Γ. Columns of V are unit length, the
/// first one is (1/sqrt(n)) 1, and the first row of W^T is sqrt(n) d^T / Σd.
inline SpectralDecomposition scaled_spectrum(const VisibilityGraph& g) {
  require(!g.has_isolated_vertex(), ErrorKind::DegenerateGraph, "scaled spectrum undefined: graph has an isolated vertex");
  require(is_connected(g), ErrorKind::Disconnected, "scaled spectrum requires a connected graph (zero eigenvalue is repeated)");
  const auto n = static_cast<Eigen::Index>(g.size());
  const auto gamma = symmetric_eig(normalized_laplacian(g).entries);

  Eigen::VectorXd d(n);
  for (Eigen::Index i = 0; i < n; ++i) d(i) = static_cast<double>(g.degree(static_cast<std::size_t>(i)));
  const Eigen::VectorXd sqrt_d = d.cwiseSqrt();
  const double total = d.sum();

  SpectralDecomposition out;
  out.eigenvalues = gamma.eigenvalues;
  out.eigenvalues(0) = 0.0;
  out.right = sqrt_d.cwiseInverse().asDiagonal() * gamma.right;
  out.left_t = (sqrt_d.asDiagonal() * gamma.right).transpose();

  const double root_n = std::sqrt(static_cast<double>(n));
  out.right.col(0).setConstant(1.0 / root_n);
  out.left_t.row(0) = (root_n / total) * d.transpose();
  for (Eigen::Index k = 1; k < n; ++k) {
    const double s = out.right.col(k).norm();
    out.right.col(k) /= s;
    out.left_t.row(k) *= s;
  }
  detail::make_first_nonzero_positive(out.right, &out.left_t);
  return out;
}

inline SpectralDecomposition spectrum(const VisibilityGraph& g, InfluenceModel model) {
  return model == InfluenceModel::Uniform ? uniform_spectrum(g) : scaled_spectrum(g);
}

/// λ₂ of L^U; exactly 0 when the graph is disconnected.
inline double algebraic_connectivity(const VisibilityGraph& g) {
  require(g.size() >= 2, ErrorKind::InvalidInput, "algebraic connectivity needs at least two agents");
  if (!is_connected(g)) return 0.0;
  return uniform_spectrum(g).eigenvalues(1);
}

struct InterlacingReport {
  Eigen::VectorXd standard_before;    // eig L(g)
  Eigen::VectorXd standard_after;     // eig L(g - e)
  Eigen::VectorXd normalized_before;  // eig Γ(g)
  Eigen::VectorXd normalized_after;   // eig Γ(g - e)
  bool standard_interlacing = false;  // λ_n >= θ_n >= λ_{n-1} >= ... >= λ_2 >= θ_2
  bool trace_identity = false;        // Σλ = 2 + Σθ
  bool normalized_bounds = false;     // λΓ_{i-1} <= φ_i <= λΓ_{i+1}, λΓ_0 = 0, λΓ_{n+1} = 2

  bool all() const noexcept { return standard_interlacing && trace_identity && normalized_bounds; }
};

inline InterlacingReport interlacing_check(const VisibilityGraph& g, Edge e, double tol = 1e-9) {
  const auto reduced = without_edge(g, e);
  InterlacingReport r;
  r.standard_before = symmetric_eig(laplacian(g, InfluenceModel::Uniform).entries).eigenvalues;
  r.standard_after = symmetric_eig(laplacian(reduced, InfluenceModel::Uniform).entries).eigenvalues;
  r.normalized_before = symmetric_eig(normalized_laplacian(g).entries).eigenvalues;
  r.normalized_after = symmetric_eig(normalized_laplacian(reduced).entries).eigenvalues;

  const Eigen::Index n = r.standard_before.size();
  const auto& lam = r.standard_before;
  const auto& theta = r.standard_after;
  // Chain λ_n ≥ θ_n ≥ λ_{n-1} ≥ θ_{n-1} ≥ ... ≥ λ_2 ≥ θ_2.
  bool ok = true;
  for (Eigen::Index i = n - 1; i >= 1; --i) {
    ok = ok && lam(i) + tol >= theta(i);
    if (i >= 2) ok = ok && theta(i) + tol >= lam(i - 1);
  }
  r.standard_interlacing = ok;
  r.trace_identity = std::abs(lam.sum() - (2.0 + theta.sum())) <= tol * (1.0 + std::abs(lam.sum()));

  const auto& lg = r.normalized_before;
  const auto& phi = r.normalized_after;
  auto lg_at = [&](Eigen::Index k) {  // 1-based with sentinels λ_0 = 0, λ_{n+1} = 2
    if (k <= 0) return 0.0;
    if (k > n) return 2.0;
    return lg(k - 1);
  };
  bool bounds = true;
  for (Eigen::Index i = 1; i <= n; ++i) bounds = bounds && lg_at(i - 1) <= phi(i - 1) + tol && phi(i - 1) <= lg_at(i + 1) + tol;
  r.normalized_bounds = bounds;
  return r;
}

/// (1/d_max) λ^U_i <= λ^Γ_i <= (1/d_min) λ^U_i for every i, with slack `tol`.
inline bool butler_bound_check(const VisibilityGraph& g, double tol = 1e-9) {
  const auto lam = symmetric_eig(laplacian(g, InfluenceModel::Uniform).entries).eigenvalues;
  const auto phi = symmetric_eig(normalized_laplacian(g).entries).eigenvalues;
  const auto [dmin, dmax] = std::minmax_element(g.degrees().begin(), g.degrees().end());
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    if (lam(i) / static_cast<double>(*dmax) > phi(i) + tol) return false;
    if (phi(i) > lam(i) / static_cast<double>(*dmin) + tol) return false;
  }
  return true;
}

}  // namespace swarmcast
