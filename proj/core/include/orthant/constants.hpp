#pragma once

#include <limits>
#include <optional>

#include "orthant/critical.hpp"
#include "orthant/model.hpp"

namespace orthant {

struct PickandsEstimate;

struct CkValue {
  double value = 0.0;
  double truncation = std::numeric_limits<double>::infinity();  // M actually used
  double error = 0.0;
  bool closed_form = false;
};

/// C_K with the y-integral truncated to [-M, M]. M = +inf picks M* where the
/// Gaussian envelope tail drops below 1e-14 of the integral.
CkValue c_K(const ModelSpec& model, const CriticalPoint& cp,
            double truncation = std::numeric_limits<double>::infinity());

/// The K = {} closed form, whatever K actually is.
double c_K_closed_form(const ModelSpec& model, const CriticalPoint& cp);

/// t0^{2H(|I|-1)} / prod w_i * sum_i (w_i mu_i - (H/t0) w_i b_i)_-.
/// Throws DegenerateProblem if the sum is not positive.
double case_ii_prefactor(const ModelSpec& model, const CriticalPoint& cp);

/// sum_i (w_i mu_i - (H/t0) w_i b_i)_- alone.
double case_ii_drift_sum(const ModelSpec& model, const CriticalPoint& cp);

double power_exponent(Case c, int essential_size, double hurst);

struct AsymptoticComponents {
  CkValue c_k;
  std::optional<double> pickands;         // H_I, case (i)
  std::optional<double> pickands_stderr;
  std::optional<double> case_ii_factor;   // t0^{2H(|I|-1)}/prod w
  std::optional<double> case_ii_sum;      // sum of negative parts
};

/// P(u) ~ prefactor * u^gamma * exp(-rate * u^{2(1-H)}).
struct AsymptoticResult {
  Case regime = Case::I;
  double prefactor = 0.0;
  double gamma = 0.0;
  double rate = 0.0;
  double hurst = 0.0;
  AsymptoticComponents components;

  double evaluate(double u) const;
  double log_evaluate(double u) const;
};

/// Assemble the final approximation. Case (i) requires a Pickands estimate.
AsymptoticResult assemble_asymptotics(const ModelSpec& model, const CriticalPoint& cp,
                                      const PickandsEstimate* pickands);
AsymptoticResult assemble_asymptotics(const ModelSpec& model, const CriticalPoint& cp,
                                      const CkValue& c_k, const PickandsEstimate* pickands);

}  // namespace orthant
