#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "orthant/critical.hpp"
#include "orthant/model.hpp"

namespace orthant {

/// How the per-path integral of exp(c.x) over the excursion region is done.
enum class RegionIntegration {
  Auto,             // exact for |I| <= 2, inner Monte Carlo above
  Exact,            // closed form (|I| = 1) or staircase (|I| = 2)
  InnerMonteCarlo,  // exponential draws below the running maxima
};

/// Direct: average of the per-path integral over the excursion region. Unbiased
/// but its variance grows like exp(Var c^T Y(T)), so only usable for small T.
/// Tilted: pick a grid time t_J uniformly, shift the path by the mean-one
/// tilt exp(c^T Y(t_J)) and average (n+1) int_{z>0} exp(-c^T z) / N(Y(t_J) - z) dz,
/// N counting grid points above the level. Each term is bounded by prod 1/c_i.
enum class PickandsEstimator { Direct, Tilted };

inline constexpr int kInnerDraws = 64;
inline constexpr int kTiltPoints = 4;

/// Shared simulation settings for the H_I(T) estimators.
struct PickandsSimulation {
  std::size_t samples = 10000;
  std::uint64_t seed = 1;
  int threads = 0;
  PickandsEstimator estimator = PickandsEstimator::Tilted;
  RegionIntegration integration = RegionIntegration::Auto;
  int inner_draws = kInnerDraws;
  /// Stratified tilt times per path for the tilted estimator.
  int tilt_points = kTiltPoints;
  /// D with D D^T = Sigma_II; Cholesky factor when unset.
  std::optional<Eigen::MatrixXd> factor;
  /// Cap on samples * grid points * |I|.
  double max_work = 2e11;
};

struct MeanEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

/// Integration constants fixed by the critical point.
struct PickandsProblem {
  double hurst = 0.0;
  double t0 = 0.0;
  Eigen::VectorXd b;     // b_I
  Eigen::VectorXd rate;  // c = w_I / t0^{2H}
  Eigen::MatrixXd factor;

  static PickandsProblem from(const ModelSpec& model, const CriticalPoint& cp,
                              const std::optional<Eigen::MatrixXd>& factor = std::nullopt);
};

/// lim_{T -> 0} H_I(T) = t0^{2H|I|} / prod_{i in I} w_i.
double pickands_small_horizon_limit(const CriticalPoint& cp, double hurst);

/// Per-path H_I(T) values for every T in `horizons` (common paths, grid
/// step `step`, every horizon a multiple of it). Result is
/// [horizon index][path index].
std::vector<std::vector<double>> pickands_path_values(const PickandsProblem& problem,
                                                      const std::vector<double>& horizons,
                                                      double step,
                                                      const PickandsSimulation& sim);

/// Monte Carlo H_I(T) (not divided by T).
MeanEstimate estimate_pickands_T(const ModelSpec& model, const CriticalPoint& cp, double horizon,
                                 double step, const PickandsSimulation& sim);

struct PickandsRow {
  double horizon = 0.0;
  double value = 0.0;        // H_I(T) / T
  double std_error = 0.0;
  std::optional<double> step_sensitivity;  // finest minus next-coarser step
};

struct PickandsEstimate {
  double value = 0.0;        // H_I(T_max) / T_max at the finest step
  double std_error = 0.0;
  std::vector<PickandsRow> table;
  double step = 0.0;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  bool converged = false;    // last two rows within 2 combined standard errors
  std::string note;
};

struct PickandsConfig {
  std::vector<double> horizons{1.0, 2.0, 4.0, 8.0, 16.0, 32.0};
  /// Decreasing grid steps; empty means horizons.back() / 1024.
  std::vector<double> steps;
  PickandsSimulation sim;
};

PickandsEstimate estimate_pickands(const ModelSpec& model, const CriticalPoint& cp,
                                   const PickandsConfig& config);

}  // namespace orthant
