#pragma once

#include <cstdint>

#include <Eigen/Dense>

namespace orthant {

double normal_cdf(double x);
double normal_pdf(double x);
/// Acklam's rational approximation refined by one Halley step.
double normal_quantile(double p);

struct MvnResult {
  double value = 0.0;
  double error = 0.0;  // quadrature bound (k<=2) or standard error (k>=3)
};

inline constexpr int kMaxMvnDim = 6;
inline constexpr int kMvnLatticePoints = 1 << 13;
inline constexpr int kMvnShifts = 8;

/// P(Z < upper) for Z ~ N(0, cov). Upper limits may be +-infinity.
///   k = 1: erfc;  k = 2: conditioned 1-D Gauss-Kronrod;
///   k >= 3: separation of variables with a randomly shifted Richtmyer
///   lattice (`points` per shift, kMvnShifts shifts, fixed `seed`).
MvnResult mvn_cdf(const Eigen::MatrixXd& cov, const Eigen::VectorXd& upper,
                  int points = kMvnLatticePoints, std::uint64_t seed = 0x5eed);

}  // namespace orthant
