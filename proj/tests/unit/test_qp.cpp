#include <random>

#include <gtest/gtest.h>

#include "error_matchers.hpp"
#include "oracles.hpp"
#include "orthant/qp.hpp"

using namespace orthant;
using orthant::testing::qp_oracle;
using orthant::testing::random_spd;
using orthant::testing::random_vector;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

Eigen::VectorXd random_b(int d, std::mt19937_64& gen) {
  Eigen::VectorXd b = random_vector(d, gen, -2.0, 2.0);
  if (b.maxCoeff() <= 0.0) b(0) = 0.5;
  return b;
}

}  // namespace

TEST(Qp, IdentityBothActive) {
  const QpSolution s = solve_qp(Eigen::MatrixXd::Identity(2, 2), vec({1, 1}));
  EXPECT_EQ(s.essential, (IndexSet{0, 1}));
  EXPECT_EQ(s.b_tilde, vec({1, 1}));
  EXPECT_EQ(s.w, vec({1, 1}));
  EXPECT_DOUBLE_EQ(s.value, 2.0);
  EXPECT_FALSE(s.boundary);
}

TEST(Qp, NegativeCoordinateInactive) {
  const QpSolution s = solve_qp(Eigen::MatrixXd::Identity(2, 2), vec({1, -1}));
  EXPECT_EQ(s.essential, (IndexSet{0}));
  EXPECT_EQ(s.b_tilde, vec({1, 0}));
  EXPECT_EQ(s.w, vec({1, 0}));
  EXPECT_DOUBLE_EQ(s.value, 1.0);
}

TEST(Qp, CorrelatedSecondCoordinateInactive) {
  Eigen::MatrixXd sigma(2, 2);
  sigma << 1.0, 0.5, 0.5, 1.0;
  const Eigen::VectorXd b = vec({1, 0.2});
  const QpSolution s = solve_qp(sigma, b);
  EXPECT_EQ(s.essential, (IndexSet{0}));
  EXPECT_NEAR(s.b_tilde(1), 0.5, 1e-15);
  EXPECT_NEAR(s.value, 1.0, 1e-15);
  EXPECT_NEAR(qp_oracle(sigma, b), 1.0, 1e-6);
  // the full set fails certification through a negative dual weight
  const Eigen::VectorXd full = sigma.llt().solve(b);
  EXPECT_LT(full(1), 0.0);
}

TEST(Qp, OracleSanity) {
  EXPECT_NEAR(qp_oracle(Eigen::MatrixXd::Identity(2, 2), vec({1, 1})), 2.0, 1e-6);
}

TEST(Qp, Errors) {
  EXPECT_ORTHANT_ERROR(solve_qp(Eigen::MatrixXd::Identity(2, 2), vec({-1, 0})),
                       ErrorKind::DegenerateProblem);
  EXPECT_ORTHANT_ERROR(solve_qp(Eigen::MatrixXd::Identity(2, 2), vec({1, 1, 1})),
                       ErrorKind::InvalidModel);
  EXPECT_ORTHANT_ERROR(solve_qp(Eigen::MatrixXd::Identity(16, 16), Eigen::VectorXd::Ones(16)),
                       ErrorKind::Unsupported);
}

TEST(Qp, MaximumDimensionSolves) {
  const QpSolution s = solve_qp(Eigen::MatrixXd::Identity(15, 15), Eigen::VectorXd::Ones(15));
  EXPECT_EQ(s.essential.size(), 15u);
  EXPECT_NEAR(s.value, 15.0, 1e-12);
}

TEST(Qp, MatchesOracleOnRandomInstances) {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 150; ++trial) {
    const int d = 2 + trial % 3;
    const Eigen::MatrixXd sigma = random_spd(d, gen);
    const Eigen::VectorXd b = random_b(d, gen);
    const QpSolution s = solve_qp(sigma, b);
    EXPECT_NEAR(s.value, qp_oracle(sigma, b), 1e-6 * s.value) << "trial " << trial;
  }
}

TEST(Qp, ExactlyOneSubsetCertifies) {
  std::mt19937_64 gen(12);
  for (int trial = 0; trial < 200; ++trial) {
    const int d = 2 + trial % 7;  // up to 8
    const Eigen::MatrixXd sigma = random_spd(d, gen);
    const Eigen::VectorXd b = random_b(d, gen);
    const auto sets = certifying_subsets(sigma, b);
    ASSERT_EQ(sets.size(), 1u) << "trial " << trial;
    EXPECT_EQ(sets.front(), solve_qp(sigma, b).essential);
  }
}

TEST(Qp, KktConditions) {
  std::mt19937_64 gen(13);
  for (int trial = 0; trial < 200; ++trial) {
    const int d = 1 + trial % 6;
    const Eigen::MatrixXd sigma = random_spd(d, gen);
    const Eigen::VectorXd b = random_b(d, gen);
    const QpSolution s = solve_qp(sigma, b);
    EXPECT_GE(s.w.minCoeff(), 0.0);
    EXPECT_GE((s.b_tilde - b).minCoeff(), -kCertTol);
    EXPECT_NEAR((s.b_tilde - b).dot(s.w), 0.0, 1e-10);
    EXPECT_GT(s.value, 0.0);
    EXPECT_NEAR(s.b_tilde.dot(sigma.llt().solve(s.b_tilde)), s.value, 1e-10 * s.value);
    EXPECT_LT((sigma * s.w - s.b_tilde).norm(), 1e-10 * (1.0 + s.b_tilde.norm()));
    for (int i : s.essential) {
      EXPECT_EQ(s.b_tilde(i), b(i));  // copied, not recomputed
      EXPECT_GT(s.w(i), 0.0);
    }
    for (int j : s.essential.complement(d)) EXPECT_EQ(s.w(j), 0.0);
  }
}

TEST(Qp, Homogeneity) {
  std::mt19937_64 gen(14);
  for (int trial = 0; trial < 100; ++trial) {
    const int d = 2 + trial % 4;
    const Eigen::MatrixXd sigma = random_spd(d, gen);
    const Eigen::VectorXd b = random_b(d, gen);
    const double c = 0.1 + 3.0 * (trial % 7) / 7.0;
    const QpSolution s = solve_qp(sigma, b);
    const QpSolution t = solve_qp(sigma, c * b);
    EXPECT_EQ(s.essential, t.essential);
    EXPECT_LT((t.b_tilde - c * s.b_tilde).norm(), 1e-12 * c * (1.0 + s.b_tilde.norm()));
    EXPECT_LT((t.w - c * s.w).norm(), 1e-10 * c * (1.0 + s.w.norm()));
    EXPECT_NEAR(t.value, c * c * s.value, 1e-12 * c * c * s.value);
  }
}

TEST(Qp, TieIsAcceptedAndFlagged) {
  // b_2 equals the projected value exactly: coordinate 2 sits on the boundary.
  const QpSolution s = solve_qp(Eigen::MatrixXd::Identity(2, 2), vec({1, 0}));
  EXPECT_EQ(s.essential, (IndexSet{0}));
  EXPECT_TRUE(s.boundary);
}
