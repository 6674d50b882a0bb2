#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "orthant/constants.hpp"
#include "orthant/critical.hpp"
#include "orthant/model.hpp"

namespace orthant {

/// Crude: plain simulation. MeanShiftIS: rank-one Cameron-Martin shift anchored
/// at t0. MixtureIS: equal-structure shifts anchored at nodes around t0, mixed.
enum class Method { Crude, MeanShiftIS, MixtureIS };
std::string_view to_string(Method m) noexcept;
Method parse_method(std::string_view name);

struct McConfig {
  double horizon_mult = 4.0;    // simulate rescaled time [0, horizon_mult * t0]
  std::size_t grid_n = 4096;    // coarse grid points
  int refine = 4;               // refinement factor inside the window around t0
  double window_mult = 3.0;     // half-width window_mult * t0 / u^{1-H}
  std::size_t samples = 10000;
  Method method = Method::MixtureIS;
  std::uint64_t seed = 1;
  int threads = 0;
};

struct MCEstimate {
  double u = 0.0;
  double p_hat = 0.0;
  double std_error = 0.0;
  Method method = Method::Crude;
  double horizon = 0.0;       // rescaled
  double fine_step = 0.0;
  std::size_t grid_points = 0;  // monitored grid points
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  std::size_t hits = 0;
  double effective_samples = 0.0;  // Kish ESS of the nonzero weights
  bool degenerate = false;         // IS with ESS < 10
};

inline constexpr double kMinEffectiveSamples = 10.0;

/// Monte Carlo P(u) for each u on common random numbers.
std::vector<MCEstimate> estimate_p(const ModelSpec& model, const CriticalPoint& cp,
                                   const std::vector<double>& u_values, const McConfig& config);
MCEstimate estimate_p(const ModelSpec& model, double u, const McConfig& config);

struct ComparisonRow {
  double u = 0.0;
  double p_hat = 0.0;
  double std_error = 0.0;
  double asymptotic = 0.0;
  double log_rate = 0.0;  // -ln p_hat / u^{2(1-H)}
  double target = 0.0;    // g(t0) / 2
  bool degenerate = false;
};

std::vector<ComparisonRow> compare_asymptotics(const ModelSpec& model, const CriticalPoint& cp,
                                               const std::vector<double>& u_values,
                                               const AsymptoticResult& asym,
                                               const McConfig& config);

}  // namespace orthant
