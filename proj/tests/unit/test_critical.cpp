#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "error_matchers.hpp"
#include "oracles.hpp"
#include "orthant/critical.hpp"
#include "orthant/qp.hpp"
#include "orthant/scenarios.hpp"

using namespace orthant;
using orthant::testing::central_difference;
using orthant::testing::second_difference;

namespace {

ModelSpec scalar(double h, double mu, double nu, double sigma = 1.0) {
  return ModelSpec::from_sigma(h, Eigen::MatrixXd::Constant(1, 1, sigma), Eigen::VectorXd::Constant(1, mu),
                               Eigen::VectorXd::Constant(1, nu));
}

ModelSpec symmetric(double h, int d) {
  return ModelSpec::from_sigma(h, Eigen::MatrixXd::Identity(d, d), Eigen::VectorXd::Ones(d),
                               Eigen::VectorXd::Ones(d));
}

// Random model with at least one coordinate where mu_i, nu_i > 0.
ModelSpec random_model(std::mt19937_64& gen, int d, double h) {
  Eigen::VectorXd mu = orthant::testing::random_vector(d, gen, -1.0, 2.0);
  Eigen::VectorXd nu = orthant::testing::random_vector(d, gen, -0.5, 2.0);
  mu(0) = std::abs(mu(0)) + 0.2;
  nu(0) = std::abs(nu(0)) + 0.2;
  return ModelSpec::from_sigma(h, orthant::testing::random_spd(d, gen), mu, nu);
}

double random_hurst(std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(0.05, 0.95);
  double h = u(gen);
  if (std::abs(h - 0.5) < 0.02) h += 0.05;
  return h;
}

}  // namespace

TEST(Critical, ScalarG) {
  EXPECT_DOUBLE_EQ(g_of_t(scalar(0.3, 1, 1), 1.0).value, 4.0);
  const double expected = (16.0 / 9.0) * std::sqrt(3.0);
  EXPECT_NEAR(g_of_t(scalar(0.25, 1, 1), 1.0 / 3.0).value, expected, 1e-14);
  EXPECT_NEAR(expected, 3.0792, 1e-4);
}

TEST(Critical, SymmetricModelDoublesScalarG) {
  for (double t : {0.1, 0.7, 2.0, 9.0}) {
    EXPECT_NEAR(g_of_t(symmetric(0.3, 2), t).value, 2.0 * g_of_t(scalar(0.3, 1, 1), t).value, 1e-13);
  }
}

TEST(Critical, ScalarDerivatives) {
  const ModelSpec m = scalar(0.25, 1, 1);
  const GDerivatives d = g_derivatives(m, IndexSet{0}, 1.0 / 3.0);
  EXPECT_NEAR(d.dg, 0.0, 1e-13);
  EXPECT_NEAR(d.d2g, 2.0 * std::pow(3.0, 1.5), 1e-12);
  EXPECT_NEAR(d.d2g, 10.392, 1e-3);
}

TEST(Critical, DerivativesMatchFiniteDifferences) {
  std::mt19937_64 gen(21);
  std::uniform_real_distribution<double> log_t(-2.0, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int d = 1 + trial % 4;
    const ModelSpec m = random_model(gen, d, random_hurst(gen));
    const IndexSet set = IndexSet::from_mask(1u + static_cast<unsigned>(trial) % ((1u << d) - 1u), d);
    const double t = std::exp(log_t(gen));
    const GDerivatives g = g_derivatives(m, set, t);
    auto gi = [&](double s) { return g_derivatives(m, set, s).g; };
    auto dgi = [&](double s) { return g_derivatives(m, set, s).dg; };
    const double h = 1e-5 * t;
    EXPECT_NEAR(g.dg, central_difference(gi, t, h), 1e-5 * std::abs(g.dg) + 1e-8 * (1.0 + g.g));
    EXPECT_NEAR(g.d2g, central_difference(dgi, t, h), 1e-5 * std::abs(g.d2g) + 1e-8 * (1.0 + g.g));
  }
}

TEST(Critical, ScalarT0Formula) {
  std::mt19937_64 gen(22);
  std::uniform_real_distribution<double> pos(0.1, 5.0);
  for (int trial = 0; trial < 100; ++trial) {
    const double h = random_hurst(gen);
    const double mu = pos(gen);
    const double nu = pos(gen);
    const CriticalPoint cp = find_t0(scalar(h, mu, nu));
    const double expected = h * nu / ((1.0 - h) * mu);
    EXPECT_NEAR(cp.t0, expected, 1e-10 * expected);
    EXPECT_EQ(cp.essential, (IndexSet{0}));
    EXPECT_TRUE(cp.weak.empty());
    EXPECT_TRUE(cp.unessential.empty());
  }
}

TEST(Critical, SymmetricT0) {
  for (double h : {0.2, 0.4, 0.6, 0.8}) {
    for (int d : {1, 2, 3, 5}) {
      const CriticalPoint cp = find_t0(symmetric(h, d));
      EXPECT_NEAR(cp.t0, h / (1.0 - h), 1e-12 * h / (1.0 - h));
      EXPECT_EQ(cp.essential, IndexSet::all(d));
    }
  }
}

TEST(Critical, FourDimensionalScenario) {
  const ModelSpec m = example_four_dim(0.75);
  const CriticalPoint cp = find_t0(m);
  EXPECT_EQ(cp.essential, (IndexSet{0, 1}));
  EXPECT_EQ(cp.weak, (IndexSet{2}));
  EXPECT_EQ(cp.unessential, (IndexSet{3}));
  EXPECT_NEAR(cp.t0, m.nu()(2) / std::abs(m.mu()(2)), 1e-12 * cp.t0);
  // strictly between the scalar stationary times 3 and 6
  EXPECT_GT(cp.t0, 3.0);
  EXPECT_LT(cp.t0, 6.0);
  EXPECT_EQ(*cp.regime, Case::II);
  EXPECT_LT(cp.zeta_prime(0) * cp.zeta_prime(1), 0.0);        // opposite signs
}

TEST(Critical, ConstructedWeakIndex) {
  // mu_2 = -nu_2 / t0 makes b_2 = 0 at t0 = H/(1-H); with Sigma diagonal 2 is in K.
  const double h = 0.4;
  const double t0 = h / (1.0 - h);
  Eigen::VectorXd mu(2), nu(2);
  mu << 1.0, -1.0 / t0;
  nu << 1.0, 1.0;
  const ModelSpec m = ModelSpec::from_sigma(h, Eigen::MatrixXd::Identity(2, 2), mu, nu);
  const CriticalPoint cp = find_t0(m);
  EXPECT_NEAR(cp.t0, t0, 1e-12);
  EXPECT_EQ(cp.essential, (IndexSet{0}));
  EXPECT_EQ(cp.weak, (IndexSet{1}));
  const IndexPartition p = classify_indices(m, cp.t0);
  EXPECT_EQ(p.weak, (IndexSet{1}));
}

TEST(Critical, SymmetricClassification) {
  const IndexPartition p = classify_indices(symmetric(0.3, 2), 0.3 / 0.7);
  EXPECT_EQ(p.essential, (IndexSet{0, 1}));
  EXPECT_TRUE(p.weak.empty());
  EXPECT_TRUE(p.unessential.empty());
}

TEST(Critical, DetectCase) {
  std::mt19937_64 gen(23);
  for (int trial = 0; trial < 20; ++trial) {
    const ModelSpec m = random_model(gen, 1 + trial % 3, 0.3);
    EXPECT_EQ(detect_case(m, find_t0(m)), Case::I);
  }
  for (double h : {0.55, 0.75, 0.9}) {
    const ModelSpec m = scalar(h, 0.7, 1.3);
    EXPECT_EQ(detect_case(m, find_t0(m)), Case::I);
  }
  const ModelSpec brownian = scalar(0.5, 1, 1);
  EXPECT_ORTHANT_ERROR(detect_case(brownian, find_t0(brownian)), ErrorKind::Unsupported);
  EXPECT_FALSE(find_t0(brownian).regime.has_value());
}

TEST(Critical, CaseAgreesWithZetaPrime) {
  std::mt19937_64 gen(24);
  for (int trial = 0; trial < 100; ++trial) {
    std::uniform_real_distribution<double> hs(0.55, 0.95);
    const ModelSpec m = random_model(gen, 1 + trial % 4, hs(gen));
    const CriticalPoint cp = find_t0(m);
    const bool zero = cp.zeta_prime.cwiseAbs().maxCoeff() <= 1e-7 * (1.0 + cp.zeta_prime.cwiseAbs().maxCoeff());
    EXPECT_EQ(*cp.regime == Case::I, zero) << "trial " << trial;
  }
}

TEST(Critical, CertifiedSetAndInvariants) {
  std::mt19937_64 gen(25);
  for (int trial = 0; trial < 100; ++trial) {
    const int d = 1 + trial % 5;
    const ModelSpec m = random_model(gen, d, random_hurst(gen));
    const CriticalPoint cp = find_t0(m);
    EXPECT_EQ(cp.essential, solve_qp(m.sigma(), m.threshold(cp.t0)).essential);
    // partition
    std::vector<int> all;
    for (const IndexSet* s : {&cp.essential, &cp.weak, &cp.unessential}) {
      all.insert(all.end(), s->begin(), s->end());
    }
    std::sort(all.begin(), all.end());
    EXPECT_EQ(IndexSet(all), IndexSet::all(d));
    EXPECT_EQ(all.size(), static_cast<std::size_t>(d));
    EXPECT_GT(cp.g_dd, 0.0);
    EXPECT_GT(cp.g_dd_plus, 0.0);
    EXPECT_GT(cp.g_dd_minus, 0.0);
    EXPECT_NEAR(cp.g_value, g_of_t(m, cp.t0).value, 1e-12 * cp.g_value);
    // minimality on a log grid
    for (int k = 0; k < 200; ++k) {
      const double t = cp.t0 * std::pow(10.0, -2.0 + 4.0 * k / 199.0);
      EXPECT_GE(g_of_t(m, t).value, cp.g_value * (1.0 - 1e-12));
    }
    // one-sided slopes of g bracket zero
    auto g = [&](double t) { return g_of_t(m, t).value; };
    const double h = 1e-4 * cp.t0;
    EXPECT_LE((g(cp.t0) - g(cp.t0 - h)) / h, 1e-9 * cp.g_value);
    EXPECT_GE((g(cp.t0 + h) - g(cp.t0)) / h, -1e-9 * cp.g_value);
  }
}

TEST(Critical, GContinuityAcrossSwitches) {
  // g_of_t equals the closed form with the certified set everywhere.
  std::mt19937_64 gen(26);
  for (int trial = 0; trial < 20; ++trial) {
    const ModelSpec m = random_model(gen, 3, random_hurst(gen));
    const CriticalPoint cp = find_t0(m);
    double previous = g_of_t(m, cp.t0 / 20.0).value;
    for (int k = 1; k <= 2000; ++k) {
      const double t = cp.t0 / 20.0 * std::pow(400.0, k / 2000.0);
      const GValue gv = g_of_t(m, t);
      EXPECT_NEAR(gv.value, g_derivatives(m, gv.essential, t).g, 1e-11 * gv.value);
      // no jumps: the step is small, so neighbouring values are close
      EXPECT_NEAR(gv.value, previous, 0.05 * previous);
      previous = gv.value;
    }
  }
}

TEST(Critical, Homogeneity) {
  std::mt19937_64 gen(27);
  for (int trial = 0; trial < 50; ++trial) {
    const ModelSpec m = random_model(gen, 1 + trial % 4, random_hurst(gen));
    const double c = 0.3 + 0.5 * (trial % 5);
    const ModelSpec scaled = ModelSpec::from_sigma(m.hurst(), m.sigma(), c * m.mu(), c * m.nu());
    const CriticalPoint a = find_t0(m);
    const CriticalPoint b = find_t0(scaled);
    EXPECT_NEAR(b.t0, a.t0, 1e-10 * a.t0);
    EXPECT_NEAR(b.g_value, c * c * a.g_value, 1e-10 * c * c * a.g_value);
    EXPECT_EQ(a.essential, b.essential);
    EXPECT_EQ(a.weak, b.weak);
    EXPECT_EQ(a.unessential, b.unessential);
    EXPECT_EQ(a.regime, b.regime);
  }
}

TEST(Critical, StationaryTimeInfiniteWithoutDrift) {
  const ModelSpec m = ModelSpec::from_sigma(0.3, Eigen::MatrixXd::Identity(2, 2),
                                            (Eigen::VectorXd(2) << 1.0, 0.0).finished(),
                                            Eigen::VectorXd::Ones(2));
  EXPECT_TRUE(std::isinf(stationary_time(m, IndexSet{1})));
}

TEST(Critical, RejectsNonpositiveTime) {
  EXPECT_ORTHANT_ERROR(g_of_t(scalar(0.3, 1, 1), 0.0), ErrorKind::DegenerateProblem);
}
