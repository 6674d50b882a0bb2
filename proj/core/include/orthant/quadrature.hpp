#pragma once

#include <functional>

namespace orthant {

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;  // Kronrod-minus-Gauss estimate, summed over panels
  int evaluations = 0;
  bool converged = false;
};

struct QuadratureOptions {
  double abs_tol = 1e-12;
  double rel_tol = 1e-10;
  int max_panels = 2000;
};

/// Adaptive 10/21-point Gauss-Kronrod on a finite interval. Panels with the
/// largest error estimate are bisected until the tolerance is met.
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           const QuadratureOptions& options = {});

}  // namespace orthant
