#include "orthant/critical.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "orthant/error.hpp"
#include "orthant/qp.hpp"

namespace orthant {
namespace {

struct QuadForms {
  double mm = 0.0;  // mu_I^T Sigma_II^{-1} mu_I
  double nm = 0.0;  // nu_I^T Sigma_II^{-1} mu_I
  double nn = 0.0;  // nu_I^T Sigma_II^{-1} nu_I
};

QuadForms quad_forms(const ModelSpec& model, const IndexSet& set) {
  const Eigen::LLT<Eigen::MatrixXd> llt(select(model.sigma(), set, set));
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorKind::NumericalFailure, "Sigma_II factorization failed for " + set.to_string());
  }
  const Eigen::VectorXd mu = select(model.mu(), set);
  const Eigen::VectorXd nu = select(model.nu(), set);
  const Eigen::VectorXd inv_mu = llt.solve(mu);
  return {mu.dot(inv_mu), nu.dot(inv_mu), nu.dot(llt.solve(nu))};
}

// g_I'' at a stationary point of g_I.
double curvature_at_root(const QuadForms& q, double hurst, double t) {
  return (4.0 * q.mm * (1.0 - hurst) * t + 2.0 * (1.0 - 2.0 * hurst) * q.nm) /
         std::pow(t, 2.0 * hurst + 1.0);
}

constexpr double kSideStep = 1e-6;     // relative offset for the one-sided sets
constexpr double kCertifyStep = 1e-4;  // relative offset for the local-minimum check
constexpr double kTimeFloor = 1e-12;
constexpr double kTimeCeil = 1e12;

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double initial_time(const ModelSpec& model) {
  const double h = model.hurst();
  std::vector<double> scalar_roots;
  for (int i = 0; i < model.dim(); ++i) {
    if (model.mu()(i) > 0.0 && model.nu()(i) > 0.0) {
      scalar_roots.push_back(h * model.nu()(i) / ((1.0 - h) * model.mu()(i)));
    }
  }
  return median(std::move(scalar_roots));
}

// Golden-section search on log t after expanding a bracket around `start`.
double golden_section(const ModelSpec& model, double start) {
  auto f = [&](double x) { return g_of_t(model, std::exp(x)).value; };
  const double x_min = std::log(kTimeFloor);
  const double x_max = std::log(kTimeCeil);
  double step = 0.5;
  double xm = std::log(start);
  double fm = f(xm);
  double xa = xm - step;
  double fa = f(xa);
  while (fa < fm) {
    xm = xa;
    fm = fa;
    step *= 2.0;
    xa = xm - step;
    if (xa < x_min) throw Error(ErrorKind::NumericalFailure, "t0 bracket left [1e-12, 1e12]");
    fa = f(xa);
  }
  step = 0.5;
  double xc = xm + step;
  double fc = f(xc);
  while (fc < fm) {
    xa = xm;
    xm = xc;
    fm = fc;
    step *= 2.0;
    xc = xm + step;
    if (xc > x_max) throw Error(ErrorKind::NumericalFailure, "t0 bracket left [1e-12, 1e12]");
    fc = f(xc);
  }

  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = xa;
  double hi = xc;
  double x1 = hi - ratio * (hi - lo);
  double x2 = lo + ratio * (hi - lo);
  double f1 = f(x1);
  double f2 = f(x2);
  for (int iter = 0; iter < 200 && hi - lo > kTimeTol; ++iter) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - ratio * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + ratio * (hi - lo);
      f2 = f(x2);
    }
  }
  return std::exp(f1 <= f2 ? x1 : x2);
}

// Fixed point of t -> stationary_time(I(t)); nullopt when it cycles.
std::optional<double> alternate(const ModelSpec& model, double t) {
  IndexSet previous;
  for (int round = 0; round < kMaxFixedPointRounds; ++round) {
    const IndexSet set = solve_qp(model.sigma(), model.threshold(t)).essential;
    const double next = stationary_time(model, set);
    if (!std::isfinite(next) || next <= 0.0) return std::nullopt;
    const bool settled = set == previous && std::abs(next - t) <= kTimeTol * t;
    previous = set;
    t = next;
    if (settled) return t;
  }
  return std::nullopt;
}

// Best point of a log grid on [t/100, 100 t], used to detect a local fixed point.
double scan_minimum(const ModelSpec& model, double t, double* best_value) {
  double best_t = t;
  double best = g_of_t(model, t).value;
  constexpr int kPoints = 200;
  for (int k = 0; k < kPoints; ++k) {
    const double s = t * std::pow(10.0, -2.0 + 4.0 * k / (kPoints - 1));
    const double value = g_of_t(model, s).value;
    if (value < best) {
      best = value;
      best_t = s;
    }
  }
  *best_value = best;
  return best_t;
}

bool is_local_minimum(const ModelSpec& model, double t0) {
  const double here = g_of_t(model, t0).value;
  const double slack = 1e-13 * here;
  const double h = kCertifyStep * t0;
  return g_of_t(model, t0 - h).value >= here - slack && g_of_t(model, t0 + h).value >= here - slack;
}

}  // namespace

std::string_view to_string(Case c) noexcept { return c == Case::I ? "I" : "II"; }

GValue g_of_t(const ModelSpec& model, double t) {
  if (!(t > 0.0)) throw Error(ErrorKind::DegenerateProblem, "g(t) requires t > 0");
  QpSolution qp = solve_qp(model.sigma(), model.threshold(t));
  return {qp.value / std::pow(t, 2.0 * model.hurst()), std::move(qp.essential)};
}

GDerivatives g_derivatives(const ModelSpec& model, const IndexSet& set, double t) {
  const QuadForms q = quad_forms(model, set);
  const double h = model.hurst();
  // g_I = N(t) / t^{2H} with N quadratic in t.
  const double n0 = q.mm * t * t + 2.0 * q.nm * t + q.nn;
  const double n1 = 2.0 * q.mm * t + 2.0 * q.nm;
  const double n2 = 2.0 * q.mm;
  const double p = std::pow(t, -2.0 * h);
  GDerivatives out;
  out.g = n0 * p;
  out.dg = (2.0 * q.mm * (1.0 - h) * t * t + 2.0 * (1.0 - 2.0 * h) * q.nm * t - 2.0 * h * q.nn) * p / t;
  out.d2g = p * (n2 - 4.0 * h * n1 / t + 2.0 * h * (2.0 * h + 1.0) * n0 / (t * t));
  return out;
}

double stationary_time(const ModelSpec& model, const IndexSet& set) {
  const QuadForms q = quad_forms(model, set);
  const double h = model.hurst();
  if (!(q.mm > 0.0)) return std::numeric_limits<double>::infinity();
  // a t^2 + b t + c = 0 with c < 0: exactly one positive root.
  const double a = 2.0 * (1.0 - h) * q.mm;
  const double b = 2.0 * (1.0 - 2.0 * h) * q.nm;
  const double c = -2.0 * h * q.nn;
  const double disc = std::sqrt(b * b - 4.0 * a * c);
  return b >= 0.0 ? -2.0 * c / (b + disc) : (disc - b) / (2.0 * a);
}

Eigen::VectorXd zeta_prime(const ModelSpec& model, const IndexSet& set, double t) {
  const double h = model.hurst();
  Eigen::VectorXd out(set.size());
  for (std::size_t k = 0; k < set.size(); ++k) {
    const int i = set[k];
    const double b = model.nu()(i) + model.mu()(i) * t;
    out(static_cast<Eigen::Index>(k)) =
        (model.mu()(i) * std::pow(t, h) - h * std::pow(t, h - 1.0) * b) / std::pow(t, 2.0 * h);
  }
  return out;
}

IndexPartition classify_indices(const ModelSpec& model, double t0) {
  const Eigen::VectorXd b = model.threshold(t0);
  const QpSolution qp = solve_qp(model.sigma(), b);
  IndexPartition out;
  out.essential = qp.essential;
  std::vector<int> weak;
  std::vector<int> unessential;
  for (int j = 0; j < model.dim(); ++j) {
    if (qp.essential.contains(j)) continue;
    const double slack = qp.b_tilde(j) - b(j);
    if (std::abs(slack) <= kClassTol * (1.0 + std::abs(b(j)))) {
      weak.push_back(j);
    } else {
      unessential.push_back(j);
    }
  }
  out.weak = IndexSet(std::move(weak));
  out.unessential = IndexSet(std::move(unessential));
  return out;
}

Case detect_case(const ModelSpec& model, const CriticalPoint& cp, double case_tol) {
  const double h = model.hurst();
  if (model.is_brownian()) {
    throw Error(ErrorKind::Unsupported,
                "H = 1/2 is standard Brownian motion, which needs the separate Brownian "
                "orthant-ruin asymptotics; the fractional formulas here require H != 1/2");
  }
  if (h < 0.5) return Case::I;
  for (int i : cp.essential) {
    const double lhs = h * model.nu()(i);
    const double rhs = (1.0 - h) * cp.t0 * model.mu()(i);
    const double scale = h * std::abs(model.nu()(i)) + (1.0 - h) * cp.t0 * std::abs(model.mu()(i)) + 1.0;
    if (std::abs(lhs - rhs) > case_tol * scale) return Case::II;
  }
  return Case::I;
}

CriticalPoint find_t0(const ModelSpec& model) {
  const double start = initial_time(model);
  CriticalPoint cp;

  std::optional<double> fixed = alternate(model, start);
  double t0 = 0.0;
  bool need_search = !fixed.has_value();
  double search_start = start;
  if (fixed) {
    t0 = *fixed;
    double scanned = 0.0;
    const double best_t = scan_minimum(model, t0, &scanned);
    if (scanned < g_of_t(model, t0).value * (1.0 - 1e-12)) {
      need_search = true;
      search_start = best_t;
    }
  }
  if (need_search) {
    cp.used_fallback = true;
    t0 = golden_section(model, search_start);
    // Polish onto the closed-form root when it belongs to the same set. g is
    // flat there, so the comparison allows for rounding.
    const IndexSet set = g_of_t(model, t0).essential;
    const double root = stationary_time(model, set);
    if (std::isfinite(root) && root > 0.0 && g_of_t(model, root).essential == set &&
        g_of_t(model, root).value <= g_of_t(model, t0).value * (1.0 + 1e-12)) {
      t0 = root;
    }
  }
  if (!is_local_minimum(model, t0)) {
    throw Error(ErrorKind::NumericalFailure, "t0 failed the local minimum certification");
  }

  cp.t0 = t0;
  cp.b = model.threshold(t0);
  const QpSolution qp = solve_qp(model.sigma(), cp.b);
  const IndexPartition parts = classify_indices(model, t0);
  cp.essential = parts.essential;
  cp.weak = parts.weak;
  cp.unessential = parts.unessential;
  cp.b_tilde = qp.b_tilde;
  cp.w = qp.w;
  cp.qp_boundary = qp.boundary;
  cp.g_value = qp.value / std::pow(t0, 2.0 * model.hurst());
  cp.g_dd = curvature_at_root(quad_forms(model, cp.essential), model.hurst(), t0);

  const IndexSet right = g_of_t(model, t0 * (1.0 + kSideStep)).essential;
  const IndexSet left = g_of_t(model, t0 * (1.0 - kSideStep)).essential;
  cp.g_dd_plus = g_derivatives(model, right, t0).d2g;
  cp.g_dd_minus = g_derivatives(model, left, t0).d2g;
  cp.switch_point = right != cp.essential || left != cp.essential;
  cp.zeta_prime = zeta_prime(model, cp.essential, t0);
  if (!model.is_brownian()) cp.regime = detect_case(model, cp);
  return cp;
}

}  // namespace orthant
