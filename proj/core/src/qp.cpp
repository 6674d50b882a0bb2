#include "orthant/qp.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <optional>
#include <string>

#include "orthant/error.hpp"

namespace orthant {
namespace {

struct Candidate {
  QpSolution solution;
  bool certified = false;
};

// Solve Sigma_II w_I = b_I and test w_I > 0, Sigma_{I^c I} w_I >= b_{I^c}.
Candidate try_subset(const Eigen::MatrixXd& sigma, const Eigen::VectorXd& b, const IndexSet& set,
                     double tol) {
  const int d = static_cast<int>(b.size());
  Candidate out;
  const Eigen::LLT<Eigen::MatrixXd> llt(select(sigma, set, set));
  if (llt.info() != Eigen::Success) return out;
  const Eigen::VectorXd b_set = select(b, set);
  const Eigen::VectorXd w_set = llt.solve(b_set);

  bool boundary = false;
  for (Eigen::Index k = 0; k < w_set.size(); ++k) {
    if (w_set(k) < -tol) return out;
    if (w_set(k) <= tol) boundary = true;
  }

  QpSolution& sol = out.solution;
  sol.w = Eigen::VectorXd::Zero(d);
  sol.b_tilde = Eigen::VectorXd::Zero(d);
  for (std::size_t k = 0; k < set.size(); ++k) {
    sol.w(set[k]) = w_set(static_cast<Eigen::Index>(k));
    sol.b_tilde(set[k]) = b(set[k]);
  }
  for (int j = 0; j < d; ++j) {
    if (set.contains(j)) continue;
    double projected = 0.0;
    for (std::size_t k = 0; k < set.size(); ++k) {
      projected += sigma(j, set[k]) * w_set(static_cast<Eigen::Index>(k));
    }
    const double slack = projected - b(j);
    const double scale = tol * (1.0 + std::abs(b(j)));
    if (slack < -scale) return out;
    if (slack <= scale) boundary = true;
    sol.b_tilde(j) = projected;
  }
  sol.essential = set;
  sol.value = b_set.dot(w_set);
  sol.boundary = boundary;
  out.certified = true;
  return out;
}

void check_inputs(const Eigen::MatrixXd& sigma, const Eigen::VectorXd& b) {
  const Eigen::Index d = b.size();
  if (sigma.rows() != d || sigma.cols() != d) {
    throw Error(ErrorKind::InvalidModel, "QP: Sigma and b dimensions differ");
  }
  if (d > kMaxQpDim) {
    throw Error(ErrorKind::Unsupported,
                "QP: dimension " + std::to_string(d) + " exceeds the enumeration cap of " +
                    std::to_string(kMaxQpDim));
  }
  if (!(b.maxCoeff() > 0.0)) {
    throw Error(ErrorKind::DegenerateProblem,
                "QP: all b_i <= 0, the minimum is 0 at x = 0 and no essential set exists");
  }
}

// Non-empty masks ordered by popcount, then numerically.
std::vector<unsigned> masks_by_cardinality(int d) {
  std::vector<unsigned> masks;
  masks.reserve((1u << d) - 1u);
  for (unsigned m = 1; m < (1u << d); ++m) masks.push_back(m);
  std::stable_sort(masks.begin(), masks.end(), [](unsigned a, unsigned b) {
    return std::popcount(a) < std::popcount(b);
  });
  return masks;
}

}  // namespace

QpSolution solve_qp(const Eigen::MatrixXd& sigma, const Eigen::VectorXd& b) {
  check_inputs(sigma, b);
  const int d = static_cast<int>(b.size());
  for (unsigned mask : masks_by_cardinality(d)) {
    const IndexSet set = IndexSet::from_mask(mask, d);
    // b_I <= 0 together with w_I > 0 would make b_I^T w_I = w^T Sigma_II w <= 0.
    bool any_positive = false;
    for (int i : set) any_positive = any_positive || b(i) > 0.0;
    if (!any_positive) continue;
    Candidate c = try_subset(sigma, b, set, kCertTol);
    if (c.certified) return std::move(c.solution);
  }
  throw Error(ErrorKind::NumericalFailure, "QP: no index subset passed certification");
}

std::vector<IndexSet> certifying_subsets(const Eigen::MatrixXd& sigma, const Eigen::VectorXd& b,
                                         double tol) {
  check_inputs(sigma, b);
  const int d = static_cast<int>(b.size());
  std::vector<IndexSet> out;
  for (unsigned mask : masks_by_cardinality(d)) {
    const IndexSet set = IndexSet::from_mask(mask, d);
    if (try_subset(sigma, b, set, tol).certified) out.push_back(set);
  }
  return out;
}

}  // namespace orthant
