#include <cmath>
#include <numbers>
#include <random>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <gtest/gtest.h>

#include "error_matchers.hpp"
#include "oracles.hpp"
#include "orthant/constants.hpp"
#include "orthant/normal.hpp"
#include "orthant/pickands.hpp"
#include "orthant/scenarios.hpp"

using namespace orthant;

namespace {

constexpr double kPi = std::numbers::pi;

// Independent closed form: (2 pi t0^{2H})^{-|I|/2} |Sigma_II|^{-1/2} sqrt(4 pi / g''),
// with g'' taken from second differences of g itself.
double closed_form_oracle(const ModelSpec& m, const CriticalPoint& cp) {
  const Eigen::MatrixXd s = select(m.sigma(), cp.essential, cp.essential);
  const double n = static_cast<double>(cp.essential.size());
  auto g = [&](double t) { return g_derivatives(m, cp.essential, t).g; };
  const double gdd = orthant::testing::second_difference(g, cp.t0, 1e-3 * cp.t0);
  return std::pow(2.0 * kPi * std::pow(cp.t0, 2.0 * m.hurst()), -n / 2.0) / std::sqrt(s.determinant()) *
         std::sqrt(4.0 * kPi / gdd);
}

// Model with I = {0} at t0 = H/(1-H) and the listed coordinates placed exactly on
// the QP solution (weak), the rest strictly inside.
ModelSpec weak_model(double h, const Eigen::MatrixXd& sigma, const std::vector<int>& weak,
                     const Eigen::VectorXd& slopes) {
  const int d = static_cast<int>(sigma.rows());
  const double t0 = h / (1.0 - h);
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd nu = Eigen::VectorXd::Zero(d);
  mu(0) = 1.0;
  nu(0) = 1.0;
  const double b0 = nu(0) + mu(0) * t0;
  for (int i = 1; i < d; ++i) {
    const double tight = sigma(i, 0) / sigma(0, 0) * b0;
    const bool on = std::find(weak.begin(), weak.end(), i) != weak.end();
    const double target = on ? tight : tight - 0.5;
    mu(i) = slopes(i);
    nu(i) = target - mu(i) * t0;
  }
  return ModelSpec::from_sigma(h, sigma, mu, nu);
}

// P(N(0, S) < 0) for k <= 3 by the orthant formulas.
double orthant_probability(const Eigen::MatrixXd& s) {
  const Eigen::VectorXd sd = s.diagonal().cwiseSqrt();
  auto rho = [&](int i, int j) { return s(i, j) / (sd(i) * sd(j)); };
  switch (s.rows()) {
    case 1: return 0.5;
    case 2: return 0.25 + std::asin(rho(0, 1)) / (2.0 * kPi);
    case 3: return 0.125 + (std::asin(rho(0, 1)) + std::asin(rho(0, 2)) + std::asin(rho(1, 2))) / (4.0 * kPi);
    default: return std::nan("");
  }
}

}  // namespace

TEST(Constants, ClosedFormMatchesOracle) {
  std::mt19937_64 gen(41);
  for (int trial = 0; trial < 40; ++trial) {
    const int d = 1 + trial % 4;
    Eigen::VectorXd mu = orthant::testing::random_vector(d, gen, 0.2, 2.0);
    Eigen::VectorXd nu = orthant::testing::random_vector(d, gen, 0.2, 2.0);
    const double h = 0.2 + 0.15 * (trial % 5);
    const ModelSpec m = ModelSpec::from_sigma(h, orthant::testing::random_spd(d, gen), mu, nu);
    const CriticalPoint cp = find_t0(m);
    if (!cp.weak.empty()) continue;
    const CkValue c = c_K(m, cp);
    EXPECT_TRUE(c.closed_form);
    EXPECT_NEAR(c.value, closed_form_oracle(m, cp), 1e-5 * c.value);
    EXPECT_DOUBLE_EQ(c.value, c_K_closed_form(m, cp));
  }
}

TEST(Constants, ScalarClosedForm) {
  const ModelSpec m = ModelSpec::from_sigma(0.25, Eigen::MatrixXd::Ones(1, 1), Eigen::VectorXd::Ones(1),
                                            Eigen::VectorXd::Ones(1));
  const CriticalPoint cp = find_t0(m);
  const double expected = std::pow(2.0 * kPi * std::sqrt(cp.t0), -0.5) * std::sqrt(4.0 * kPi / (2.0 * std::pow(3.0, 1.5)));
  EXPECT_NEAR(c_K(m, cp).value, expected, 1e-13);
}

TEST(Constants, SingleWeakIndexHalvesClosedForm) {
  // Phi(a y) + Phi(-a y) = 1 makes the symmetric integral exactly half.
  std::mt19937_64 gen(42);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::MatrixXd s = orthant::testing::random_spd(2, gen);
    Eigen::VectorXd slopes(2);
    slopes << 0.0, -0.3 - 0.2 * trial;
    const ModelSpec m = weak_model(0.3 + 0.05 * (trial % 4), s, {1}, slopes);
    const CriticalPoint cp = find_t0(m);
    ASSERT_EQ(cp.weak, (IndexSet{1}));
    const CkValue c = c_K(m, cp);
    EXPECT_FALSE(c.closed_form);
    EXPECT_NEAR(c.value, 0.5 * c_K_closed_form(m, cp), 1e-9 * c.value);
  }
}

TEST(Constants, WeakBlockMatchesOrthantFormula) {
  // With Y ~ N(0, 2/g''), the y-integral is the closed form times
  // P(Z - s Y < 0) for Z ~ N(0, Sigma_K|I): an orthant probability.
  std::mt19937_64 gen(43);
  for (int k : {2, 3}) {
    for (int trial = 0; trial < 6; ++trial) {
      const Eigen::MatrixXd s = orthant::testing::random_spd(k + 1, gen);
      Eigen::VectorXd slopes = orthant::testing::random_vector(k + 1, gen, -2.0, 2.0);
      std::vector<int> weak;
      for (int i = 1; i <= k; ++i) weak.push_back(i);
      const ModelSpec m = weak_model(0.35, s, weak, slopes);
      const CriticalPoint cp = find_t0(m);
      ASSERT_EQ(cp.weak.size(), static_cast<std::size_t>(k));
      const Eigen::MatrixXd sii = select(m.sigma(), cp.essential, cp.essential);
      const Eigen::MatrixXd ski = select(m.sigma(), cp.weak, cp.essential);
      const Eigen::MatrixXd cond = select(m.sigma(), cp.weak, cp.weak) - ski * sii.inverse() * ski.transpose();
      const Eigen::VectorXd slope =
          (select(m.mu(), cp.weak) - ski * sii.inverse() * select(m.mu(), cp.essential)) /
          std::pow(cp.t0, m.hurst());
      const Eigen::MatrixXd total = cond + (2.0 / cp.g_dd) * slope * slope.transpose();
      const double expected = c_K_closed_form(m, cp) * orthant_probability(total);
      const CkValue c = c_K(m, cp);
      const double tol = k == 2 ? 1e-8 : 4.0 * c.error / c.value;
      EXPECT_NEAR(c.value, expected, tol * expected) << "k=" << k << " trial " << trial;
    }
  }
}

TEST(Constants, FourDimensionalScenarioAgainstTanhSinh) {
  const ModelSpec m = example_four_dim(0.75);
  const CriticalPoint cp = find_t0(m);
  ASSERT_EQ(cp.weak, (IndexSet{2}));
  // Direct one-dimensional integral with Boost's tanh-sinh rule.
  const Eigen::MatrixXd sii = select(m.sigma(), cp.essential, cp.essential);
  const Eigen::MatrixXd ski = select(m.sigma(), cp.weak, cp.essential);
  const double cond = m.sigma()(2, 2) - (ski * sii.inverse() * ski.transpose())(0, 0);
  const double slope = (m.mu()(2) - (ski * sii.inverse() * select(m.mu(), cp.essential))(0)) /
                       std::pow(cp.t0, m.hurst());
  boost::math::quadrature::tanh_sinh<double> ts;
  const double inf = std::numeric_limits<double>::infinity();
  const double integral = ts.integrate(
      [&](double y) { return std::exp(-0.25 * cp.g_dd * y * y) * normal_cdf(slope * y / std::sqrt(cond)); }, -inf,
      inf);
  const double norm = 1.0 / (2.0 * kPi * std::pow(cp.t0, 1.5) * std::sqrt(sii.determinant()));
  const CkValue c = c_K(m, cp);
  EXPECT_NEAR(c.value, norm * integral, 1e-9 * c.value);
  EXPECT_NEAR(c.value, 0.1151203790391309, 1e-9);
}

TEST(Constants, MonotoneInTruncation) {
  const ModelSpec m = example_four_dim(0.75);
  const CriticalPoint cp = find_t0(m);
  const CkValue full = c_K(m, cp);
  ASSERT_TRUE(std::isfinite(full.truncation));
  double previous = 0.0;
  for (double f : {0.05, 0.1, 0.3, 0.6, 1.0}) {
    const double v = c_K(m, cp, f * full.truncation).value;
    EXPECT_GE(v, previous);
    previous = v;
  }
  EXPECT_EQ(previous, full.value);
  for (double f : {1.5, 3.0}) {
    EXPECT_NEAR(c_K(m, cp, f * full.truncation).value, full.value, 1e-12 * full.value);
  }
}

TEST(Constants, IntegralBranchAgreesWithClosedFormInLimit) {
  // A weak index with enormous slope contributes Phi(+-inf), i.e. half the mass.
  // With a tiny conditional variance and zero slope it is Phi(0) = 1/2 as well;
  // both agree with the closed form through the factor 1/2.
  Eigen::MatrixXd s = Eigen::MatrixXd::Identity(2, 2);
  Eigen::VectorXd slopes(2);
  slopes << 0.0, -50.0;
  const ModelSpec m = weak_model(0.4, s, {1}, slopes);
  const CriticalPoint cp = find_t0(m);
  EXPECT_NEAR(c_K(m, cp).value / c_K_closed_form(m, cp), 0.5, 1e-9);
}

TEST(Constants, CaseTwoPrefactor) {
  const ModelSpec m = example_four_dim(0.75);
  const CriticalPoint cp = find_t0(m);
  const double h = m.hurst();
  const Eigen::MatrixXd sii = select(m.sigma(), cp.essential, cp.essential);
  const Eigen::VectorXd bi = select(m.threshold(cp.t0), cp.essential);
  const Eigen::VectorXd w = sii.inverse() * bi;
  double sum = 0.0;
  double product = 1.0;
  for (Eigen::Index k = 0; k < w.size(); ++k) {
    const int i = cp.essential[static_cast<std::size_t>(k)];
    sum += std::max(0.0, -(w(k) * m.mu()(i) - h / cp.t0 * w(k) * bi(k)));
    product *= w(k);
  }
  const double expected = std::pow(cp.t0, 2.0 * h) / product * sum;
  EXPECT_NEAR(case_ii_prefactor(m, cp), expected, 1e-12 * expected);
  EXPECT_NEAR(case_ii_drift_sum(m, cp), sum, 1e-12 * sum);

  const AsymptoticResult a = assemble_asymptotics(m, cp, nullptr);
  EXPECT_EQ(a.regime, Case::II);
  EXPECT_DOUBLE_EQ(a.rate, cp.g_value / 2.0);
  EXPECT_DOUBLE_EQ(a.gamma, -2.0 * 0.25 + 0.25);
  EXPECT_NEAR(a.prefactor, expected * c_K(m, cp).value, 1e-12 * a.prefactor);
  EXPECT_NEAR(a.log_evaluate(3.0), std::log(a.evaluate(3.0)), 1e-12);
}

TEST(Constants, CaseTwoPrefactorRejectsCaseOne) {
  const ModelSpec m = ModelSpec::from_sigma(0.7, Eigen::MatrixXd::Identity(2, 2), Eigen::VectorXd::Ones(2),
                                            Eigen::VectorXd::Ones(2));
  const CriticalPoint cp = find_t0(m);
  ASSERT_EQ(*cp.regime, Case::I);
  EXPECT_ORTHANT_ERROR(case_ii_prefactor(m, cp), ErrorKind::DegenerateProblem);
}

TEST(Constants, Exponents) {
  EXPECT_DOUBLE_EQ(power_exponent(Case::I, 1, 0.25), -0.75 + 4.0 + 0.25 - 2.0);
  EXPECT_DOUBLE_EQ(power_exponent(Case::II, 2, 0.75), -0.5 + 0.25);
  for (int n = 1; n <= 6; ++n) {
    // the two regimes meet at H = 1/2
    EXPECT_DOUBLE_EQ(power_exponent(Case::I, n, 0.5), power_exponent(Case::II, n, 0.5));
  }
}

TEST(Constants, CaseOneNeedsPickands) {
  const ModelSpec m = ModelSpec::from_sigma(0.3, Eigen::MatrixXd::Identity(1, 1), Eigen::VectorXd::Ones(1),
                                            Eigen::VectorXd::Ones(1));
  const CriticalPoint cp = find_t0(m);
  EXPECT_ORTHANT_ERROR(assemble_asymptotics(m, cp, nullptr), ErrorKind::Usage);
  PickandsEstimate p;
  p.value = 2.0;
  const AsymptoticResult a = assemble_asymptotics(m, cp, &p);
  EXPECT_DOUBLE_EQ(a.prefactor, 2.0 * c_K(m, cp).value);
  EXPECT_DOUBLE_EQ(a.gamma, power_exponent(Case::I, 1, 0.3));
}

TEST(Constants, BrownianUnsupported) {
  const ModelSpec m = ModelSpec::from_sigma(0.5, Eigen::MatrixXd::Identity(1, 1), Eigen::VectorXd::Ones(1),
                                            Eigen::VectorXd::Ones(1));
  EXPECT_ORTHANT_ERROR(assemble_asymptotics(m, find_t0(m), nullptr), ErrorKind::Unsupported);
}

TEST(Constants, UnessentialCoordinatesDoNotMatter) {
  const ModelSpec base = example_four_dim(0.75);
  const CriticalPoint cp = find_t0(base);
  ASSERT_EQ(cp.unessential, (IndexSet{3}));
  const AsymptoticResult a = assemble_asymptotics(base, cp, nullptr);
  for (double shift : {-0.3, 0.2, 1.0}) {
    Eigen::VectorXd nu = base.nu();
    Eigen::VectorXd mu = base.mu();
    nu(3) -= std::abs(shift);
    mu(3) += 0.1 * shift;
    const ModelSpec m = ModelSpec::from_sigma(base.hurst(), base.sigma(), mu, nu);
    const CriticalPoint cq = find_t0(m);
    ASSERT_EQ(cq.unessential, (IndexSet{3}));
    const AsymptoticResult b = assemble_asymptotics(m, cq, nullptr);
    EXPECT_EQ(b.rate, a.rate);
    EXPECT_EQ(b.gamma, a.gamma);
    EXPECT_NEAR(b.prefactor, a.prefactor, 1e-12 * a.prefactor);
  }
}
