#pragma once

#include <vector>

#include <Eigen/Dense>

#include "orthant/index_set.hpp"

namespace orthant {

/// Absolute slack on the certification inequalities.
inline constexpr double kCertTol = 1e-9;
/// Subset enumeration is exponential in d.
inline constexpr int kMaxQpDim = 15;

/// Solution of  minimize x^T Sigma^{-1} x  subject to  x >= b.
struct QpSolution {
  Eigen::VectorXd b_tilde;  // minimizer; equals b on the essential set
  IndexSet essential;       // I
  Eigen::VectorXd w;        // Sigma^{-1} b_tilde, zero off I
  double value = 0.0;       // b_I^T Sigma_II^{-1} b_I
  bool boundary = false;    // some certification inequality was within kCertTol of zero
};

/// Unique solution via certified subset enumeration (increasing cardinality).
/// Throws DegenerateProblem when b <= 0, NumericalFailure if nothing certifies.
QpSolution solve_qp(const Eigen::MatrixXd& sigma, const Eigen::VectorXd& b);

/// Every non-empty subset passing the certification test, without the
/// early exit. Used to check uniqueness.
std::vector<IndexSet> certifying_subsets(const Eigen::MatrixXd& sigma, const Eigen::VectorXd& b,
                                         double tol = kCertTol);

}  // namespace orthant
