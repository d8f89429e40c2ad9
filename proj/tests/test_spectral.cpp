#include <gtest/gtest.h>

#include "oracles.hpp"
#include "swarmcast/random_graphs.hpp"
#include "swarmcast/spectral.hpp"

using namespace swarmcast;

namespace {

void expect_values(const Eigen::VectorXd& got, std::initializer_list<double> want, double tol = 1e-10) {
  ASSERT_EQ(static_cast<std::size_t>(got.size()), want.size());
  Eigen::Index i = 0;
  for (double w : want) EXPECT_NEAR(got(i++), w, tol);
}

// K_{2,3}: {0, 1} on one side, {2, 3, 4} on the other.
VisibilityGraph k23() { return VisibilityGraph(5, {{0, 2}, {0, 3}, {0, 4}, {1, 2}, {1, 3}, {1, 4}}); }

}  // namespace

TEST(SymmetricEig, MatchesReferenceOnRandomLaplacians) {
  CounterRng rng(21);
  for (int trial = 0; trial < 40; ++trial) {
    const auto n = 2 + uniform_index(rng, 11);
    const auto g = random_connected_graph(n, 0.35, rng);
    const auto m = laplacian(g, InfluenceModel::Uniform).entries;
    const auto dec = symmetric_eig(m);
    EXPECT_LT((dec.eigenvalues - oracle::sorted_eigenvalues_symmetric(m)).cwiseAbs().maxCoeff(), 1e-10);
    const Eigen::MatrixXd recon = dec.right * dec.eigenvalues.asDiagonal() * dec.left_t;
    EXPECT_LT((recon - m).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT((dec.left_t * dec.right - Eigen::MatrixXd::Identity(m.rows(), m.cols())).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(SymmetricEig, RejectsNonSymmetric) {
  Eigen::MatrixXd m(2, 2);
  m << 1, 2, 3, 4;
  EXPECT_THROW(symmetric_eig(m), Error);
  EXPECT_THROW(symmetric_eig(Eigen::MatrixXd::Zero(2, 3)), Error);
}

TEST(SymmetricEig, FirstNonzeroEntryIsPositive) {
  const auto dec = uniform_spectrum(oracle::example_a());
  for (Eigen::Index k = 0; k < dec.right.cols(); ++k) {
    Eigen::Index i = 0;
    while (std::abs(dec.right(i, k)) < 1e-10) ++i;
    EXPECT_GT(dec.right(i, k), 0.0);
  }
}

TEST(UniformSpectrum, KnownGraphs) {
  expect_values(uniform_spectrum(complete_graph(5)).eigenvalues, {0, 5, 5, 5, 5});
  expect_values(uniform_spectrum(k23()).eigenvalues, {0, 2, 2, 3, 5});
  expect_values(uniform_spectrum(VisibilityGraph(3, {{0, 1}, {1, 2}})).eigenvalues, {0, 1, 3});
}

TEST(UniformSpectrum, ConsensusVectorIsExact) {
  const auto dec = uniform_spectrum(oracle::example_b());
  EXPECT_EQ(dec.eigenvalues(0), 0.0);
  for (Eigen::Index i = 0; i < 5; ++i) EXPECT_EQ(dec.right(i, 0), 1.0 / std::sqrt(5.0));
}

TEST(ScaledSpectrum, MatchesGeneralEigensolver) {
  CounterRng rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const auto n = 2 + uniform_index(rng, 9);
    const auto g = random_connected_graph(n, 0.3, rng);
    const auto dec = scaled_spectrum(g);
    const Eigen::MatrixXd ls = laplacian(g, InfluenceModel::Scaled).entries;
    EXPECT_LT((dec.eigenvalues - oracle::sorted_eigenvalues_general(ls)).cwiseAbs().maxCoeff(), 1e-9);
    // Right and left eigenvectors, and biorthonormality.
    EXPECT_LT((ls * dec.right - dec.right * dec.eigenvalues.asDiagonal()).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LT((dec.left_t * ls - dec.eigenvalues.asDiagonal() * dec.left_t).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LT((dec.left_t * dec.right - Eigen::MatrixXd::Identity(ls.rows(), ls.cols())).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(ScaledSpectrum, ConsensusPairOnExampleA) {
  const auto dec = scaled_spectrum(oracle::example_a());
  const Eigen::VectorXd d = oracle::degrees(oracle::example_a());
  // W₁ᵀ = √n dᵀ / Σd once V₁ = 1/√n.
  const Eigen::VectorXd w1 = std::sqrt(5.0) * d / d.sum();
  EXPECT_LT((dec.left_t.row(0).transpose() - w1).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((dec.right.col(0) - Eigen::VectorXd::Constant(5, 1.0 / std::sqrt(5.0))).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((w1.transpose() * laplacian(oracle::example_a(), InfluenceModel::Scaled).entries).cwiseAbs().maxCoeff(),
            1e-12);
  for (Eigen::Index k = 0; k < 5; ++k) EXPECT_NEAR(dec.right.col(k).norm(), 1.0, 1e-12);
}

TEST(ScaledSpectrum, CompleteAndPath) {
  expect_values(scaled_spectrum(complete_graph(5)).eigenvalues, {0, 1.25, 1.25, 1.25, 1.25});
  expect_values(scaled_spectrum(VisibilityGraph(3, {{0, 1}, {1, 2}})).eigenvalues, {0, 1, 2});
}

TEST(ScaledSpectrum, Errors) {
  EXPECT_THROW(scaled_spectrum(VisibilityGraph(3, {{0, 1}})), Error);
  try {
    scaled_spectrum(VisibilityGraph(4, {{0, 1}, {2, 3}}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Disconnected);
  }
}

TEST(AlgebraicConnectivity, Values) {
  EXPECT_NEAR(algebraic_connectivity(complete_graph(4)), 4.0, 1e-12);
  EXPECT_EQ(algebraic_connectivity(VisibilityGraph(4, {{0, 1}})), 0.0);
  EXPECT_THROW(algebraic_connectivity(VisibilityGraph(1, {})), Error);
}

TEST(Interlacing, EdgeDeletionPair) {
  // K_{2,3} plus an edge inside the three-side; deleting it gives K_{2,3}.
  const VisibilityGraph g1(5, {{0, 2}, {0, 3}, {0, 4}, {1, 2}, {1, 3}, {1, 4}, {2, 3}});
  const auto r = interlacing_check(g1, {2, 3});
  expect_values(r.standard_before, {0, 2, 3, 4, 5});
  expect_values(r.standard_after, {0, 2, 2, 3, 5});
  EXPECT_TRUE(r.all());
}

TEST(Interlacing, RandomDeletions) {
  CounterRng rng(77);
  int checked = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const auto n = 3 + uniform_index(rng, 8);
    const auto g = random_connected_graph(n, 0.5, rng);
    std::vector<Edge> ok;
    for (const auto& e : g.edges())
      if (g.degree(e.first) > 1 && g.degree(e.second) > 1) ok.push_back(e);
    if (ok.empty()) continue;
    const auto e = ok[uniform_index(rng, ok.size())];
    const auto r = interlacing_check(g, e);
    EXPECT_TRUE(r.standard_interlacing);
    EXPECT_TRUE(r.trace_identity);
    EXPECT_TRUE(r.normalized_bounds);
    // Independent trace check.
    EXPECT_NEAR(oracle::sorted_eigenvalues_symmetric(oracle::dynamics(g, false)).sum(),
                2.0 + oracle::sorted_eigenvalues_symmetric(oracle::dynamics(without_edge(g, e), false)).sum(), 1e-9);
    ++checked;
  }
  EXPECT_GT(checked, 30);
}

TEST(NormalizedSpectrum, SumAndBounds) {
  CounterRng rng(3);
  for (int trial = 0; trial < 40; ++trial) {
    const auto n = 2 + uniform_index(rng, 11);
    const auto g = random_connected_graph(n, 0.3, rng);
    const auto phi = symmetric_eig(normalized_laplacian(g).entries).eigenvalues;
    EXPECT_NEAR(phi.sum(), static_cast<double>(n), 1e-9);
    EXPECT_LE(phi.maxCoeff(), 2.0 + 1e-9);
    EXPECT_TRUE(butler_bound_check(g));
  }
}

TEST(NormalizedSpectrum, BipartiteReachesTwo) {
  const auto phi = symmetric_eig(normalized_laplacian(k23()).entries).eigenvalues;
  EXPECT_NEAR(phi.maxCoeff(), 2.0, 1e-10);
}
