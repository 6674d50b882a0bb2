#include "orthant/scenarios.hpp"

#include <cmath>

namespace orthant {

double example_four_dim_t0(double hurst) {
  // q_mm = 1 + 0.25, q_nm = 1 + 0.5, q_nn = 2 for nu = (1,1), mu = (1,0.5).
  const double a = 2.0 * (1.0 - hurst) * 1.25;
  const double b = 2.0 * (1.0 - 2.0 * hurst) * 1.5;
  const double c = -2.0 * hurst * 2.0;
  const double disc = std::sqrt(b * b - 4.0 * a * c);
  // Cancellation-free root of a t^2 + b t + c with c < 0.
  return b >= 0.0 ? (2.0 * -c) / (b + disc) : (disc - b) / (2.0 * a);
}

ModelSpec example_four_dim(double hurst) {
  const double t0 = example_four_dim_t0(hurst);
  Eigen::VectorXd nu(4), mu(4);
  nu << 1.0, 1.0, t0, 1.0;
  mu << 1.0, 0.5, -1.0, -2.0 / t0;
  return ModelSpec::from_sigma(hurst, Eigen::MatrixXd::Identity(4, 4), mu, nu);
}

}  // namespace orthant
