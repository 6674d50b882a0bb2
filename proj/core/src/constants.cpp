#include "orthant/constants.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "orthant/error.hpp"
#include "orthant/normal.hpp"
#include "orthant/pickands.hpp"
#include "orthant/quadrature.hpp"

namespace orthant {
namespace {

constexpr double kTailFraction = 1e-14;

struct EssentialBlock {
  Eigen::LLT<Eigen::MatrixXd> llt;
  double log_det = 0.0;
};

EssentialBlock essential_block(const ModelSpec& model, const CriticalPoint& cp) {
  EssentialBlock out{Eigen::LLT<Eigen::MatrixXd>(select(model.sigma(), cp.essential, cp.essential))};
  if (out.llt.info() != Eigen::Success) {
    throw Error(ErrorKind::NumericalFailure, "Sigma_II is not positive definite");
  }
  const Eigen::MatrixXd l = out.llt.matrixL();
  for (Eigen::Index i = 0; i < l.rows(); ++i) out.log_det += 2.0 * std::log(l(i, i));
  return out;
}

// 1 / sqrt((2 pi t0^{2H})^{|I|} |Sigma_II|)
double gaussian_normalizer(const ModelSpec& model, const CriticalPoint& cp, double log_det) {
  const double size = static_cast<double>(cp.essential.size());
  const double log_scale = size * std::log(2.0 * std::numbers::pi * std::pow(cp.t0, 2.0 * model.hurst()));
  return std::exp(-0.5 * (log_scale + log_det));
}

// 2 * int_M^inf exp(-c y^2 / 4) dy
double envelope_tail(double curvature, double truncation) {
  return 2.0 * std::sqrt(4.0 * std::numbers::pi / curvature) *
         normal_cdf(-truncation * std::sqrt(curvature / 2.0));
}

}  // namespace

double c_K_closed_form(const ModelSpec& model, const CriticalPoint& cp) {
  const EssentialBlock block = essential_block(model, cp);
  if (!(cp.g_dd > 0.0)) throw Error(ErrorKind::NumericalFailure, "g_I''(t0) is not positive");
  return gaussian_normalizer(model, cp, block.log_det) * std::sqrt(4.0 * std::numbers::pi / cp.g_dd);
}

CkValue c_K(const ModelSpec& model, const CriticalPoint& cp, double truncation) {
  if (!(cp.g_dd > 0.0)) throw Error(ErrorKind::NumericalFailure, "g_I''(t0) is not positive");
  CkValue out;
  if (cp.weak.empty()) {
    out.value = c_K_closed_form(model, cp);
    out.closed_form = true;
    return out;
  }

  const EssentialBlock block = essential_block(model, cp);
  const double normalizer = gaussian_normalizer(model, cp, block.log_det);
  const IndexSet& ess = cp.essential;
  const IndexSet& weak = cp.weak;
  const Eigen::MatrixXd cross = select(model.sigma(), weak, ess);  // Sigma_KI
  const Eigen::MatrixXd cov = select(model.sigma(), weak, weak) -
                              cross * block.llt.solve(cross.transpose());
  const Eigen::VectorXd slope =
      (select(model.mu(), weak) - cross * block.llt.solve(select(model.mu(), ess))) /
      std::pow(cp.t0, model.hurst());
  const double curvature = cp.g_dd;

  const bool lattice = weak.size() >= 3;
  const QuadratureOptions options = lattice
      ? QuadratureOptions{.abs_tol = 1e-12, .rel_tol = 1e-6, .max_panels = 200}
      : QuadratureOptions{.abs_tol = 1e-12, .rel_tol = 1e-10, .max_panels = 2000};
  double mvn_error = 0.0;  // largest lattice standard error seen
  auto integrand = [&](double y) {
    const MvnResult p = mvn_cdf(cov, slope * y);
    if (lattice) mvn_error = std::max(mvn_error, p.error);
    return std::exp(-0.25 * curvature * y * y) * p.value;
  };
  auto integral = [&](double m) {
    const QuadratureResult left = integrate(integrand, -m, 0.0, options);
    const QuadratureResult right = integrate(integrand, 0.0, m, options);
    if (!left.converged || !right.converged) {
      if (!lattice) throw Error(ErrorKind::NumericalFailure, "C_K quadrature did not converge");
    }
    return QuadratureResult{left.value + right.value, left.error + right.error,
                            left.evaluations + right.evaluations, true};
  };

  QuadratureResult q;
  double m = truncation;
  if (std::isfinite(truncation)) {
    q = integral(m);
  } else {
    // Start where the envelope tail is negligible against the full envelope.
    m = 8.3 / std::sqrt(curvature / 2.0);
    q = integral(m);
    for (int round = 0; round < 40 && envelope_tail(curvature, m) > kTailFraction * q.value; ++round) {
      m *= 1.25;
      q = integral(m);
    }
  }
  out.value = normalizer * q.value;
  out.error = normalizer * (q.error + mvn_error * std::sqrt(4.0 * std::numbers::pi / curvature));
  out.truncation = m;
  return out;
}

double case_ii_drift_sum(const ModelSpec& model, const CriticalPoint& cp) {
  const double h = model.hurst();
  double sum = 0.0;
  for (int i : cp.essential) {
    const double term = cp.w(i) * model.mu()(i) - (h / cp.t0) * cp.w(i) * cp.b(i);
    sum += std::max(0.0, -term);
  }
  return sum;
}

double case_ii_prefactor(const ModelSpec& model, const CriticalPoint& cp) {
  const double h = model.hurst();
  const double sum = case_ii_drift_sum(model, cp);
  double scale = 0.0;
  double weight_product = 1.0;
  for (int i : cp.essential) {
    scale += std::abs(cp.w(i) * model.mu()(i)) + (h / cp.t0) * std::abs(cp.w(i) * cp.b(i));
    weight_product *= cp.w(i);
  }
  if (!(sum > 1e-10 * scale)) {
    throw Error(ErrorKind::DegenerateProblem,
                "case (ii) drift sum is not positive; the case classification is inconsistent");
  }
  const double size = static_cast<double>(cp.essential.size());
  return std::pow(cp.t0, 2.0 * h * (size - 1.0)) / weight_product * sum;
}

double power_exponent(Case c, int essential_size, double hurst) {
  const double base = -static_cast<double>(essential_size) * (1.0 - hurst);
  return c == Case::I ? base + 1.0 / hurst + hurst - 2.0 : base + 1.0 - hurst;
}

double AsymptoticResult::log_evaluate(double u) const {
  return std::log(prefactor) + gamma * std::log(u) - rate * std::pow(u, 2.0 * (1.0 - hurst));
}

double AsymptoticResult::evaluate(double u) const { return std::exp(log_evaluate(u)); }

AsymptoticResult assemble_asymptotics(const ModelSpec& model, const CriticalPoint& cp,
                                      const PickandsEstimate* pickands) {
  return assemble_asymptotics(model, cp, c_K(model, cp), pickands);
}

AsymptoticResult assemble_asymptotics(const ModelSpec& model, const CriticalPoint& cp,
                                      const CkValue& c_k, const PickandsEstimate* pickands) {
  if (!cp.regime) {
    throw Error(ErrorKind::Unsupported, "no asymptotic regime for H = 1/2");
  }
  AsymptoticResult out;
  out.regime = *cp.regime;
  out.hurst = model.hurst();
  out.rate = cp.g_value / 2.0;
  out.gamma = power_exponent(out.regime, static_cast<int>(cp.essential.size()), model.hurst());
  out.components.c_k = c_k;
  if (out.regime == Case::I) {
    if (!pickands) {
      throw Error(ErrorKind::Usage, "case (i) needs a generalized Pickands constant estimate");
    }
    out.components.pickands = pickands->value;
    out.components.pickands_stderr = pickands->std_error;
    out.prefactor = pickands->value * c_k.value;
  } else {
    const double sum = case_ii_drift_sum(model, cp);
    const double full = case_ii_prefactor(model, cp);
    out.components.case_ii_sum = sum;
    out.components.case_ii_factor = full / sum;
    out.prefactor = full * c_k.value;
  }
  return out;
}

}  // namespace orthant
