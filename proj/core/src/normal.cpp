#include "orthant/normal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "orthant/error.hpp"
#include "orthant/parallel.hpp"
#include "orthant/quadrature.hpp"
#include "orthant/rng.hpp"

namespace orthant {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

double normal_quantile(double p) {
  if (p <= 0.0) return -std::numeric_limits<double>::infinity();
  if (p >= 1.0) return std::numeric_limits<double>::infinity();
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double low = 0.02425;
  double x;
  if (p < low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  // Halley refinement against the erfc-based CDF.
  const double e = normal_cdf(x) - p;
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

MvnResult bivariate(double a, double b, double rho) {
  if (a == -kInf || b == -kInf) return {0.0, 0.0};
  if (a == kInf) return {normal_cdf(b), 0.0};
  if (b == kInf) return {normal_cdf(a), 0.0};
  if (rho >= 1.0 - 1e-15) return {normal_cdf(std::min(a, b)), 0.0};
  if (rho <= -1.0 + 1e-15) return {std::max(0.0, normal_cdf(a) - normal_cdf(-b)), 0.0};
  // P(Z1 < a, Z2 < b) = int_{-inf}^{a} phi(x) Phi((b - rho x) / sqrt(1 - rho^2)) dx
  const double s = std::sqrt(1.0 - rho * rho);
  const double lower = std::min(-10.0, a - 10.0);
  const QuadratureResult q =
      integrate([&](double x) { return normal_pdf(x) * normal_cdf((b - rho * x) / s); }, lower, a,
                {.abs_tol = 1e-16, .rel_tol = 1e-13, .max_panels = 500});
  return {std::clamp(q.value, 0.0, 1.0), q.error};
}

constexpr double kLatticePrimes[] = {2.0, 3.0, 5.0, 7.0, 11.0, 13.0};

// Genz separation of variables, one randomly shifted Richtmyer rule.
double sov_lattice(const Eigen::MatrixXd& chol, const Eigen::VectorXd& upper, int points,
                   const std::vector<double>& shift, std::vector<double>& y) {
  const Eigen::Index k = upper.size();
  std::vector<double> terms(static_cast<std::size_t>(points));
  std::vector<double> alpha(static_cast<std::size_t>(k - 1));
  for (Eigen::Index j = 0; j + 1 < k; ++j) alpha[j] = std::sqrt(kLatticePrimes[j]);
  for (int n = 0; n < points; ++n) {
    double f = 1.0;
    for (Eigen::Index i = 0; i < k; ++i) {
      double mean = 0.0;
      for (Eigen::Index j = 0; j < i; ++j) mean += chol(i, j) * y[j];
      const double e = upper(i) == kInf ? 1.0 : normal_cdf((upper(i) - mean) / chol(i, i));
      f *= e;
      if (f == 0.0) break;
      if (i + 1 < k) {
        double frac = std::fmod((n + 1) * alpha[i] + shift[i], 1.0);
        const double w = std::abs(2.0 * frac - 1.0);  // baker's transform
        const double p = std::clamp(w * e, 1e-300, 1.0 - 1e-16);
        y[i] = normal_quantile(p);
      }
    }
    terms[n] = f;
  }
  return pairwise_sum(terms) / points;
}

}  // namespace

MvnResult mvn_cdf(const Eigen::MatrixXd& cov, const Eigen::VectorXd& upper, int points,
                  std::uint64_t seed) {
  const Eigen::Index k = upper.size();
  if (cov.rows() != k || cov.cols() != k) {
    throw Error(ErrorKind::InvalidModel, "mvn_cdf: covariance and limit dimensions differ");
  }
  if (k == 0) return {1.0, 0.0};
  if (k > kMaxMvnDim) throw Error(ErrorKind::Unsupported, "mvn_cdf: dimension above 6");
  for (Eigen::Index i = 0; i < k; ++i) {
    if (!(cov(i, i) > 0.0)) throw Error(ErrorKind::NumericalFailure, "mvn_cdf: nonpositive variance");
    if (upper(i) == -kInf) return {0.0, 0.0};
  }
  // Coordinates with an infinite limit marginalize out exactly.
  std::vector<Eigen::Index> finite;
  for (Eigen::Index i = 0; i < k; ++i) {
    if (upper(i) != kInf) finite.push_back(i);
  }
  if (static_cast<Eigen::Index>(finite.size()) < k) {
    const auto f = static_cast<Eigen::Index>(finite.size());
    Eigen::MatrixXd sub(f, f);
    Eigen::VectorXd sub_upper(f);
    for (Eigen::Index a = 0; a < f; ++a) {
      sub_upper(a) = upper(finite[a]);
      for (Eigen::Index b = 0; b < f; ++b) sub(a, b) = cov(finite[a], finite[b]);
    }
    return mvn_cdf(sub, sub_upper, points, seed);
  }
  if (k == 1) {
    const double z = upper(0) == kInf ? kInf : upper(0) / std::sqrt(cov(0, 0));
    return {normal_cdf(z), 0.0};
  }
  if (k == 2) {
    const double s1 = std::sqrt(cov(0, 0));
    const double s2 = std::sqrt(cov(1, 1));
    const double rho = std::clamp(cov(0, 1) / (s1 * s2), -1.0, 1.0);
    const double a = upper(0) == kInf ? kInf : upper(0) / s1;
    const double b = upper(1) == kInf ? kInf : upper(1) / s2;
    return bivariate(a, b, rho);
  }

  const Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorKind::NumericalFailure, "mvn_cdf: covariance is not positive definite");
  }
  const Eigen::MatrixXd chol = llt.matrixL();
  RandomStream rng(seed, 0);
  std::vector<double> estimates;
  std::vector<double> y(static_cast<std::size_t>(k), 0.0);
  std::vector<double> shift(static_cast<std::size_t>(k - 1));
  for (int s = 0; s < kMvnShifts; ++s) {
    for (double& v : shift) v = rng.uniform();
    estimates.push_back(sov_lattice(chol, upper, points, shift, y));
  }
  const SampleMoments m = sample_moments(estimates);
  return {std::clamp(m.mean, 0.0, 1.0), m.std_error};
}

}  // namespace orthant
