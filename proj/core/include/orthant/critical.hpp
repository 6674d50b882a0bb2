#pragma once

#include <optional>
#include <string_view>

#include <Eigen/Dense>

#include "orthant/index_set.hpp"
#include "orthant/model.hpp"

namespace orthant {

inline constexpr double kTimeTol = 1e-12;   // relative, on t0
inline constexpr double kClassTol = 1e-9;   // K versus J split
inline constexpr double kCaseTol = 1e-7;    // H nu_I == (1-H) t0 mu_I test
inline constexpr int kMaxFixedPointRounds = 64;

enum class Case { I, II };
std::string_view to_string(Case c) noexcept;

struct GValue {
  double value = 0.0;
  IndexSet essential;
};

/// g(t) = inf_{v >= nu + mu t} v^T Sigma^{-1} v / t^{2H}, with I(t).
GValue g_of_t(const ModelSpec& model, double t);

struct GDerivatives {
  double g = 0.0;
  double dg = 0.0;
  double d2g = 0.0;
};

/// Closed-form g_I and its first two derivatives for a fixed index set.
GDerivatives g_derivatives(const ModelSpec& model, const IndexSet& set, double t);

/// Positive root of g_I'(t) = 0; +inf when mu_I = 0.
double stationary_time(const ModelSpec& model, const IndexSet& set);

struct CriticalPoint {
  double t0 = 0.0;
  IndexSet essential;        // I
  IndexSet weak;             // K
  IndexSet unessential;      // J
  Eigen::VectorXd b;         // nu + mu t0
  Eigen::VectorXd b_tilde;
  Eigen::VectorXd w;         // zero off I
  double g_value = 0.0;      // g_I(t0)
  double g_dd = 0.0;         // g_I''(t0) with I = I(t0); enters C_K
  double g_dd_plus = 0.0;    // from the set certified just right of t0
  double g_dd_minus = 0.0;   // ... and just left of t0
  bool switch_point = false; // I(t0-) != I(t0) or I(t0+) != I(t0)
  bool used_fallback = false;
  bool qp_boundary = false;
  Eigen::VectorXd zeta_prime; // over I
  std::optional<Case> regime; // unset for H = 1/2
};

/// Locate the unique minimizer t0 of g and everything attached to it.
CriticalPoint find_t0(const ModelSpec& model);

struct IndexPartition {
  IndexSet essential;
  IndexSet weak;
  IndexSet unessential;
};

IndexPartition classify_indices(const ModelSpec& model, double t0);

/// zeta_i'(t) for i in `set`, zeta(t) = (nu + mu t) / t^H.
Eigen::VectorXd zeta_prime(const ModelSpec& model, const IndexSet& set, double t);

/// Case (i) / (ii) split. Throws Unsupported for H = 1/2.
Case detect_case(const ModelSpec& model, const CriticalPoint& cp, double case_tol = kCaseTol);

}  // namespace orthant
