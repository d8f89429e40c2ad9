#include <gtest/gtest.h>

#include "oracles.hpp"
#include "swarmcast/asymptotics.hpp"
#include "swarmcast/random_graphs.hpp"

using namespace swarmcast;

namespace {

void expect_vector(const Eigen::VectorXd& got, std::initializer_list<double> want, double tol) {
  ASSERT_EQ(static_cast<std::size_t>(got.size()), want.size());
  Eigen::Index i = 0;
  for (double w : want) EXPECT_NEAR(got(i++), w, tol) << "entry " << i - 1;
}

Eigen::VectorXd weights(const VisibilityGraph& g, InfluenceModel m) {
  return m == InfluenceModel::Uniform ? Eigen::VectorXd(Eigen::VectorXd::Ones(static_cast<Eigen::Index>(g.size())))
                                      : oracle::degrees(g);
}

}  // namespace

TEST(LeaderSet, Basics) {
  const LeaderSet s(5, {4, 1});
  EXPECT_EQ(s.count(), 2u);
  EXPECT_EQ(s.members(), (std::vector<std::size_t>{1, 4}));
  EXPECT_TRUE(s.contains(4));
  EXPECT_FALSE(s.contains(0));
  EXPECT_EQ(s.indicator().sum(), 2.0);
  EXPECT_THROW(LeaderSet(3, {3}), Error);
  EXPECT_EQ(LeaderSet::all(3).count(), 3u);
}

TEST(ConsensusAlpha, UniformIsTheMean) {
  const std::vector<double> x{1, 2, 3, 4, 5}, y{0, 0, 0, 0, 10};
  const auto a = consensus_alpha(oracle::example_a(), InfluenceModel::Uniform, x, y);
  EXPECT_DOUBLE_EQ(a.x, 3.0);
  EXPECT_DOUBLE_EQ(a.y, 2.0);
}

TEST(ConsensusAlpha, ScaledIsDegreeWeighted) {
  const std::vector<double> x{1, 2, 3, 4, 5}, y(5, 0.0);
  const auto a = consensus_alpha(oracle::example_a(), InfluenceModel::Scaled, x, y);
  EXPECT_NEAR(a.x, 31.0 / 10.0, 1e-14);  // (2 + 4 + 6 + 4 + 15) / 10
}

TEST(ConsensusAlpha, MatchesLongHorizonIntegration) {
  const auto g = oracle::example_a();
  Eigen::VectorXd x0(5);
  x0 << 1, 2, 3, 4, 5;
  const std::vector<double> xs(x0.data(), x0.data() + 5), zeros(5, 0.0);
  for (bool scaled : {false, true}) {
    const auto model = scaled ? InfluenceModel::Scaled : InfluenceModel::Uniform;
    const Eigen::VectorXd xt = oracle::propagate(oracle::dynamics(g, scaled), Eigen::VectorXd::Zero(5), 0.0, x0, 80.0);
    const double alpha = consensus_alpha(g, model, xs, zeros).x;
    EXPECT_LT((xt.array() - alpha).abs().maxCoeff(), 1e-9);
  }
}

TEST(ConsensusAlpha, DisconnectedHasNoSingleConsensus) {
  const std::vector<double> x{0, 1, 2, 3}, y(4, 0.0);
  EXPECT_THROW(consensus_alpha(VisibilityGraph(4, {{0, 1}, {2, 3}}), InfluenceModel::Uniform, x, y), Error);
}

TEST(CollectiveSpeed, Formulas) {
  const auto g = oracle::example_a();
  EXPECT_DOUBLE_EQ(collective_speed_beta(g, InfluenceModel::Uniform, LeaderSet(5, {4})), 0.2);
  EXPECT_DOUBLE_EQ(collective_speed_beta(g, InfluenceModel::Scaled, LeaderSet(5, {4})), 0.3);
  EXPECT_DOUBLE_EQ(collective_speed_beta(g, InfluenceModel::Scaled, LeaderSet(5)), 0.0);
  EXPECT_DOUBLE_EQ(collective_speed_beta(g, InfluenceModel::Scaled, LeaderSet::all(5)), 1.0);
}

TEST(CollectiveSpeed, MatchesIntegratedSlope) {
  CounterRng rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const auto n = 2 + uniform_index(rng, 7);
    const auto g = random_connected_graph(n, 0.3, rng);
    const auto leaders = random_leaders(n, 0.4, rng);
    for (bool scaled : {false, true}) {
      const auto model = scaled ? InfluenceModel::Scaled : InfluenceModel::Uniform;
      const Eigen::MatrixXd l = oracle::dynamics(g, scaled);
      const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
      const double lam2 = oracle::sorted_eigenvalues_general(l)(1);
      const double t1 = 30.0 / lam2, t2 = 60.0 / lam2;
      const double slope = (oracle::propagate(l, leaders.indicator(), 1.0, x0, t2).mean() -
                            oracle::propagate(l, leaders.indicator(), 1.0, x0, t1).mean()) /
                           (t2 - t1);
      EXPECT_NEAR(slope, collective_speed_beta(g, model, leaders), 1e-6);
    }
  }
}

TEST(DeviationGamma, WorkedUniformExamples) {
  expect_vector(deviation_gamma(oracle::example_a(), InfluenceModel::Uniform, LeaderSet(5, {4})),
                {-0.06, -0.16, -0.06, 0.04, 0.24}, 5e-4);
  expect_vector(deviation_gamma(oracle::example_b(), InfluenceModel::Uniform, LeaderSet(5, {3, 4})),
                {-0.52, -0.12, 0.08, 0.28, 0.28}, 5e-4);
  expect_vector(deviation_gamma(oracle::example_c(), InfluenceModel::Uniform, LeaderSet(5, {3, 4})),
                {-0.08, -0.08, -0.08, 0.12, 0.12}, 5e-4);
}

TEST(DeviationGamma, ScaledCompleteIsNMinusOneTimesUniform) {
  const auto u = deviation_gamma(oracle::example_c(), InfluenceModel::Uniform, LeaderSet(5, {3, 4}));
  const auto s = deviation_gamma(oracle::example_c(), InfluenceModel::Scaled, LeaderSet(5, {3, 4}));
  for (Eigen::Index i = 0; i < 5; ++i) EXPECT_NEAR(s(i) / u(i), 4.0, 1e-9);
}

TEST(DeviationGamma, ScaledExamplesAgreeWithSteadyStateOracles) {
  struct Case {
    VisibilityGraph g;
    LeaderSet leaders;
  };
  const std::vector<Case> cases{{oracle::example_a(), LeaderSet(5, {4})}, {oracle::example_b(), LeaderSet(5, {3, 4})}};
  for (const auto& c : cases) {
    const Eigen::MatrixXd l = oracle::dynamics(c.g, true);
    const Eigen::VectorXd d = oracle::degrees(c.g);
    const Eigen::VectorXd ls = oracle::gamma_least_squares(l, c.leaders.indicator(), d);
    const Eigen::VectorXd got = deviation_gamma(c.g, InfluenceModel::Scaled, c.leaders);
    EXPECT_LT((got - ls).cwiseAbs().maxCoeff(), 1e-10);

    // From x0 = 0 the consensus point is 0, so x(T) - βT tends to γ.
    const double beta = d.dot(c.leaders.indicator()) / d.sum();
    const double t = 60.0;
    const Eigen::VectorXd xt = oracle::propagate(l, c.leaders.indicator(), 1.0, Eigen::VectorXd::Zero(5), t);
    EXPECT_LT(((xt.array() - beta * t).matrix() - got).cwiseAbs().maxCoeff(), 1e-8);
  }
  expect_vector(deviation_gamma(oracle::example_a(), InfluenceModel::Scaled, LeaderSet(5, {4})),
                {-0.27, -0.57, -0.27, 0.33, 0.63}, 1e-12);
  expect_vector(deviation_gamma(oracle::example_b(), InfluenceModel::Scaled, LeaderSet(5, {3, 4})),
                {-0.76, -0.36, 0.04, 0.44, 0.44}, 1e-12);
}

TEST(DeviationGamma, UnitLengthLeftEigenvectorConvention) {
  expect_vector(deviation_gamma_unit_eigvecs(oracle::example_a(), InfluenceModel::Scaled, LeaderSet(5, {4})),
                {-0.2526, -0.5142, -0.2526, 0.2952, 0.5812}, 5e-4);
  expect_vector(deviation_gamma_unit_eigvecs(oracle::example_b(), InfluenceModel::Scaled, LeaderSet(5, {3, 4})),
                {-0.6857, -0.3368, 0.0284, 0.4098, 0.4098}, 5e-4);
  // Both conventions coincide for symmetric Laplacians.
  const auto g = oracle::example_b();
  EXPECT_LT((deviation_gamma_unit_eigvecs(g, InfluenceModel::Uniform, LeaderSet(5, {3, 4})) -
             deviation_gamma(g, InfluenceModel::Uniform, LeaderSet(5, {3, 4})))
                .cwiseAbs()
                .maxCoeff(),
            1e-12);
}

TEST(DeviationGamma, IdentitiesAndLeastSquaresOnRandomGraphs) {
  CounterRng rng(2024);
  for (int trial = 0; trial < 50; ++trial) {
    const auto n = 2 + uniform_index(rng, 11);
    const auto g = random_connected_graph(n, 0.3, rng);
    const auto leaders = random_leaders(n, 0.4, rng);
    for (bool scaled : {false, true}) {
      const auto model = scaled ? InfluenceModel::Scaled : InfluenceModel::Uniform;
      const auto gamma = deviation_gamma(g, model, leaders);
      const Eigen::VectorXd w = weights(g, model);
      EXPECT_NEAR(w.dot(gamma), 0.0, 1e-9);
      const Eigen::VectorXd ls = oracle::gamma_least_squares(oracle::dynamics(g, scaled), leaders.indicator(), w);
      EXPECT_LT((gamma - ls).cwiseAbs().maxCoeff(), 1e-8);
    }
  }
}

TEST(DeviationGamma, EmptyOrFullLeaderSetGivesZero) {
  const auto g = oracle::example_b();
  EXPECT_LT(deviation_gamma(g, InfluenceModel::Uniform, LeaderSet(5)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT(deviation_gamma(g, InfluenceModel::Scaled, LeaderSet::all(5)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Predict, AlignmentLine) {
  const Positions p{{0, 0}, {1, 0}, {2, 0}, {3, 0}, {4, 0}};
  const auto pred = predict(oracle::example_a(), InfluenceModel::Uniform, LeaderSet::all(5), p, {10, 2});
  EXPECT_DOUBLE_EQ(pred.beta, 1.0);
  EXPECT_NEAR(pred.u.y / pred.u.x, 0.2, 1e-15);
  EXPECT_GT(pred.lambda2, 0.0);
  const auto at = pred.position(2, 3.0);
  EXPECT_NEAR(at.x, 2.0 + 30.0, 1e-12);
}

TEST(EquivalentAgents, WorkedExamples) {
  using Classes = std::vector<std::vector<std::size_t>>;
  EXPECT_EQ(find_equivalent_agents(oracle::example_a(), LeaderSet(5, {4})), (Classes{{0, 2}, {1}, {3}, {4}}));
  EXPECT_EQ(find_equivalent_agents(oracle::example_b(), LeaderSet(5, {3, 4})), (Classes{{0}, {1}, {2}, {3, 4}}));
  EXPECT_EQ(find_equivalent_agents(oracle::example_c(), LeaderSet(5, {3, 4})), (Classes{{0, 1, 2}, {3, 4}}));
}

TEST(EquivalentAgents, EquivalentAgentsShareDeviation) {
  const auto g = oracle::example_a();
  const auto gamma = deviation_gamma(g, InfluenceModel::Scaled, LeaderSet(5, {4}));
  EXPECT_NEAR(gamma(0), gamma(2), 1e-12);
}

TEST(EquivalentAgents, MatchesBruteForceOnRandomGraphs) {
  CounterRng rng(99);
  for (int trial = 0; trial < 40; ++trial) {
    const auto n = 2 + uniform_index(rng, 6);
    const auto g = random_connected_graph(n, 0.45, rng);
    const auto leaders = random_leaders(n, 0.4, rng);
    auto got = find_equivalent_agents(g, leaders);
    std::sort(got.begin(), got.end());
    EXPECT_EQ(got, oracle::brute_force_equivalence(g, leaders.flags()));
  }
}

TEST(EquivalentAgents, SizeLimit) {
  try {
    find_equivalent_agents(complete_graph(11), LeaderSet(11, {0}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SizeLimit);
  }
}
