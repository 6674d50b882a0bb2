#include "orthant/pickands.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "orthant/error.hpp"
#include "orthant/fbm.hpp"
#include "orthant/parallel.hpp"
#include "orthant/rng.hpp"

namespace orthant {
namespace {

constexpr std::uint64_t kInnerStreamTag = 0x1A;
constexpr std::uint64_t kTiltStreamTag = 0x2B;

std::vector<std::size_t> steps_per_horizon(const std::vector<double>& horizons, double step) {
  if (horizons.empty()) throw Error(ErrorKind::Usage, "Pickands: empty horizon grid");
  if (!(step > 0.0)) throw Error(ErrorKind::Usage, "Pickands: grid step must be positive");
  std::vector<std::size_t> counts;
  double previous = 0.0;
  for (double horizon : horizons) {
    if (!(horizon > previous)) throw Error(ErrorKind::Usage, "Pickands: horizons must increase");
    const double ratio = horizon / step;
    const double rounded = std::round(ratio);
    if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * ratio) {
      throw Error(ErrorKind::Usage, "Pickands: grid step must divide every horizon");
    }
    counts.push_back(static_cast<std::size_t>(rounded));
    previous = horizon;
  }
  return counts;
}

// int over the union of quadrants {x < p} for p in `points`, of exp(c1 x1 + c2 x2).
double staircase_integral(std::vector<std::pair<double, double>>& points, double c1, double c2) {
  std::sort(points.begin(), points.end(), [](const auto& a, const auto& b) {
    return a.first > b.first || (a.first == b.first && a.second > b.second);
  });
  double total = 0.0;
  double best_second = -std::numeric_limits<double>::infinity();
  double pending_first = 0.0;
  double pending_second = 0.0;
  bool have_pending = false;
  for (const auto& [x1, x2] : points) {
    if (x2 <= best_second) continue;  // dominated
    if (have_pending) {
      total += (std::exp(c1 * pending_first) - std::exp(c1 * x1)) / c1 * std::exp(c2 * pending_second) / c2;
    }
    pending_first = x1;
    pending_second = x2;
    have_pending = true;
    best_second = x2;
  }
  total += std::exp(c1 * pending_first) / c1 * std::exp(c2 * pending_second) / c2;
  return total;
}

// H_I(T) integrand for one path restricted to its first `upto` grid points.
double path_value(const PickandsProblem& problem, const Eigen::MatrixXd& y, Eigen::Index upto,
                  RegionIntegration method, const PickandsSimulation& sim, std::size_t path,
                  std::vector<std::pair<double, double>>& points, std::vector<double>& x) {
  const Eigen::Index dim = y.rows();
  // Running maxima include t = 0 where Y = 0.
  const Eigen::VectorXd top = y.leftCols(upto).rowwise().maxCoeff().cwiseMax(0.0);
  if (method == RegionIntegration::Exact && dim == 1) {
    return std::exp(problem.rate(0) * top(0)) / problem.rate(0);
  }
  if (method == RegionIntegration::Exact) {
    points.clear();
    points.emplace_back(0.0, 0.0);
    for (Eigen::Index j = 0; j < upto; ++j) points.emplace_back(y(0, j), y(1, j));
    return staircase_integral(points, problem.rate(0), problem.rate(1));
  }
  // x_i = M_i - E_i / c_i has density c_i exp(c_i (x_i - M_i)) on x_i < M_i.
  double box = 1.0;
  for (Eigen::Index i = 0; i < dim; ++i) box *= std::exp(problem.rate(i) * top(i)) / problem.rate(i);
  RandomStream inner(derive_seed(sim.seed, kInnerStreamTag), path);
  int hits = 0;
  for (int draw = 0; draw < sim.inner_draws; ++draw) {
    for (Eigen::Index i = 0; i < dim; ++i) {
      x[static_cast<std::size_t>(i)] = top(i) - inner.exponential() / problem.rate(i);
    }
    bool inside = true;  // the t = 0 point covers x < 0
    for (Eigen::Index i = 0; i < dim && inside; ++i) inside = x[static_cast<std::size_t>(i)] < 0.0;
    for (Eigen::Index j = 0; j < upto && !inside; ++j) {
      bool below = true;
      for (Eigen::Index i = 0; i < dim && below; ++i) below = x[static_cast<std::size_t>(i)] < y(i, j);
      inside = below;
    }
    hits += inside ? 1 : 0;
  }
  return box * hits / static_cast<double>(sim.inner_draws);
}

// (n+1) int_{z>0} exp(-c^T z) / N(Y_J - z) dz on grid points 0..upto, where
// column m-1 of `y` holds t_m and t_0 = 0 has Y = 0.
double tilted_value(const PickandsProblem& problem, const Eigen::MatrixXd& y, Eigen::Index upto,
                    Eigen::Index chosen, RegionIntegration method, const PickandsSimulation& sim,
                    std::size_t path, std::vector<double>& gaps, Eigen::MatrixXd& cand) {
  const Eigen::Index dim = y.rows();
  auto value_at = [&](Eigen::Index i, Eigen::Index m) { return m == 0 ? 0.0 : y(i, m - 1); };
  const double points = static_cast<double>(upto + 1);
  if (method == RegionIntegration::Exact) {
    // N(z) = 1 + #{m != J : s_m < z}, s_m = Y_J - Y_m.
    const double c = problem.rate(0);
    const double top = value_at(0, chosen);
    gaps.clear();
    double base = 1.0;
    for (Eigen::Index m = 0; m <= upto; ++m) {
      if (m == chosen) continue;
      const double gap = top - value_at(0, m);
      if (gap <= 0.0) {
        base += 1.0;
      } else {
        gaps.push_back(gap);
      }
    }
    std::sort(gaps.begin(), gaps.end());
    double total = 0.0;
    double lower = 0.0;
    double count = base;
    for (double gap : gaps) {
      total += (std::exp(-c * lower) - std::exp(-c * gap)) / (c * count);
      lower = gap;
      count += 1.0;
    }
    total += std::exp(-c * lower) / (c * count);
    return points * total;
  }
  // Z_i ~ Exp(c_i); N = #{m : Y_J - Y_m < Z componentwise}.
  RandomStream inner(derive_seed(sim.seed, kInnerStreamTag), path);
  Eigen::MatrixXd draws(dim, sim.inner_draws);
  for (int k = 0; k < sim.inner_draws; ++k) {
    for (Eigen::Index i = 0; i < dim; ++i) draws(i, k) = inner.exponential() / problem.rate(i);
  }
  const Eigen::VectorXd reach = draws.rowwise().maxCoeff();
  // Only points within reach of some draw can be counted.
  Eigen::Index kept = 0;
  cand.resize(dim, upto + 1);
  for (Eigen::Index m = 0; m <= upto; ++m) {
    bool near = true;
    for (Eigen::Index i = 0; i < dim && near; ++i) {
      cand(i, kept) = value_at(i, chosen) - value_at(i, m);
      near = cand(i, kept) < reach(i);
    }
    if (near) ++kept;
  }
  double sum = 0.0;
  for (int k = 0; k < sim.inner_draws; ++k) {
    int count = 0;
    for (Eigen::Index m = 0; m < kept; ++m) {
      bool below = true;
      for (Eigen::Index i = 0; i < dim && below; ++i) below = cand(i, m) < draws(i, k);
      count += below ? 1 : 0;
    }
    sum += 1.0 / std::max(count, 1);
  }
  double box = 1.0;
  for (Eigen::Index i = 0; i < dim; ++i) box /= problem.rate(i);
  return points * box * sum / static_cast<double>(sim.inner_draws);
}

}  // namespace

PickandsProblem PickandsProblem::from(const ModelSpec& model, const CriticalPoint& cp,
                                      const std::optional<Eigen::MatrixXd>& factor) {
  PickandsProblem p;
  p.hurst = model.hurst();
  p.t0 = cp.t0;
  p.b = select(cp.b, cp.essential);
  p.rate = select(cp.w, cp.essential) / std::pow(cp.t0, 2.0 * model.hurst());
  for (Eigen::Index i = 0; i < p.rate.size(); ++i) {
    if (!(p.rate(i) > 0.0)) {
      throw Error(ErrorKind::NumericalFailure, "Pickands: nonpositive weight on the essential set");
    }
  }
  const Eigen::MatrixXd block = select(model.sigma(), cp.essential, cp.essential);
  if (factor) {
    if (factor->rows() != block.rows() ||
        !(*factor * factor->transpose()).isApprox(block, 1e-10)) {
      throw Error(ErrorKind::InvalidModel, "Pickands: D D^T does not reproduce Sigma_II");
    }
    p.factor = *factor;
  } else {
    p.factor = block.llt().matrixL();
  }
  return p;
}

double pickands_small_horizon_limit(const CriticalPoint& cp, double hurst) {
  double product = 1.0;
  for (int i : cp.essential) product *= cp.w(i);
  return std::pow(cp.t0, 2.0 * hurst * static_cast<double>(cp.essential.size())) / product;
}

std::vector<std::vector<double>> pickands_path_values(const PickandsProblem& problem,
                                                      const std::vector<double>& horizons,
                                                      double step,
                                                      const PickandsSimulation& sim) {
  const std::vector<std::size_t> counts = steps_per_horizon(horizons, step);
  const std::size_t n = counts.back();
  const Eigen::Index dim = problem.rate.size();
  const double work = static_cast<double>(sim.samples) * static_cast<double>(n) * static_cast<double>(dim);
  if (work > sim.max_work) {
    std::ostringstream msg;
    msg << "Pickands: " << work << " path-points exceed the budget of " << sim.max_work;
    throw Error(ErrorKind::BudgetExceeded, msg.str());
  }
  if (sim.samples == 0) throw Error(ErrorKind::Usage, "Pickands: need at least one sample");

  const bool tilted = sim.estimator == PickandsEstimator::Tilted;
  const Eigen::Index exact_limit = tilted ? 1 : 2;
  RegionIntegration method = sim.integration;
  if (method == RegionIntegration::Auto) {
    method = dim <= exact_limit ? RegionIntegration::Exact : RegionIntegration::InnerMonteCarlo;
  }
  if (method == RegionIntegration::Exact && dim > exact_limit) {
    throw Error(ErrorKind::Unsupported, tilted ? "Pickands: exact tilted integration needs |I| = 1"
                                               : "Pickands: exact region integration needs |I| <= 2");
  }

  const FbmSampler sampler(problem.hurst, n, step);
  // Drift b_i t^{2H} / (2 t0^{2H}) on the grid.
  std::vector<double> drift(n);
  const double scale = 0.5 / std::pow(problem.t0, 2.0 * problem.hurst);
  for (std::size_t j = 0; j < n; ++j) {
    drift[j] = scale * std::pow(step * static_cast<double>(j + 1), 2.0 * problem.hurst);
  }

  // (k delta)^{2H} for the tilt covariance R(t_m, t_J).
  std::vector<double> powers(n + 1);
  for (std::size_t k = 0; k <= n; ++k) powers[k] = std::pow(step * static_cast<double>(k), 2.0 * problem.hurst);
  // Sigma_II c = D D^T c.
  const Eigen::VectorXd tilt = problem.factor * (problem.factor.transpose() * problem.rate);

  std::vector<std::vector<double>> values(horizons.size(), std::vector<double>(sim.samples));
  // Paths 2k and 2k+1 share stream k (one FFT per component yields both).
  const std::size_t blocks = (sim.samples + 1) / 2;
  parallel_for(blocks, sim.threads, [&](std::size_t begin, std::size_t end, int) {
    auto work_space = sampler.make_workspace();
    std::vector<std::pair<double, double>> points;
    std::vector<double> draw_point(static_cast<std::size_t>(dim));
    std::vector<double> gaps;
    Eigen::MatrixXd cand;
    Eigen::MatrixXd shifted(dim, static_cast<Eigen::Index>(n));
    for (std::size_t block = begin; block < end; ++block) {
      RandomStream rng(sim.seed, block);
      auto pair = sample_correlated_fbm_pair(sampler, problem.factor, rng, work_space);
      for (int half = 0; half < 2; ++half) {
        const std::size_t path = 2 * block + static_cast<std::size_t>(half);
        if (path >= sim.samples) break;
        Eigen::MatrixXd& y = half == 0 ? pair.first : pair.second;
        for (Eigen::Index i = 0; i < dim; ++i) {
          for (std::size_t j = 0; j < n; ++j) y(i, static_cast<Eigen::Index>(j)) -= problem.b(i) * drift[j];
        }
        if (!tilted) {
          for (std::size_t k = 0; k < counts.size(); ++k) {
            values[k][path] = path_value(problem, y, static_cast<Eigen::Index>(counts[k]), method,
                                         sim, path, points, draw_point);
          }
          continue;
        }
        // One uniform per path stratifies the tilt times on every horizon
        // (common random numbers across horizons).
        RandomStream choice(derive_seed(sim.seed, kTiltStreamTag), path);
        const double pick = choice.uniform();
        const int strata = std::max(1, sim.tilt_points);
        for (std::size_t k = 0; k < counts.size(); ++k) {
          const auto upto = static_cast<Eigen::Index>(counts[k]);
          double sum = 0.0;
          for (int q = 0; q < strata; ++q) {
            const double position = (pick + q) / strata * static_cast<double>(upto + 1);
            const auto chosen = std::min(upto, static_cast<Eigen::Index>(position));
            const auto cj = static_cast<std::size_t>(chosen);
            for (Eigen::Index m = 0; m < upto; ++m) {
              const auto mm = static_cast<std::size_t>(m + 1);
              const double r = 0.5 * (powers[mm] + powers[cj] - powers[mm > cj ? mm - cj : cj - mm]);
              shifted.col(m) = y.col(m) + tilt * r;
            }
            sum += tilted_value(problem, shifted, upto, chosen, method, sim, path, gaps, cand);
          }
          values[k][path] = sum / strata;
        }
      }
    }
  });
  return values;
}

MeanEstimate estimate_pickands_T(const ModelSpec& model, const CriticalPoint& cp, double horizon,
                                 double step, const PickandsSimulation& sim) {
  const PickandsProblem problem = PickandsProblem::from(model, cp, sim.factor);
  const auto values = pickands_path_values(problem, {horizon}, step, sim);
  const SampleMoments m = sample_moments(values.front());
  return {m.mean, m.std_error};
}

PickandsEstimate estimate_pickands(const ModelSpec& model, const CriticalPoint& cp,
                                   const PickandsConfig& config) {
  std::vector<double> steps = config.steps;
  if (steps.empty()) steps.push_back(config.horizons.back() / 1024.0);
  for (std::size_t s = 1; s < steps.size(); ++s) {
    if (!(steps[s] < steps[s - 1])) throw Error(ErrorKind::Usage, "Pickands: steps must decrease");
  }
  const PickandsProblem problem = PickandsProblem::from(model, cp, config.sim.factor);

  std::vector<std::vector<PickandsRow>> tables;
  for (double step : steps) {
    const auto values = pickands_path_values(problem, config.horizons, step, config.sim);
    std::vector<PickandsRow> rows;
    for (std::size_t k = 0; k < config.horizons.size(); ++k) {
      const SampleMoments m = sample_moments(values[k]);
      const double horizon = config.horizons[k];
      rows.push_back({horizon, m.mean / horizon, m.std_error / horizon, std::nullopt});
    }
    tables.push_back(std::move(rows));
  }

  PickandsEstimate out;
  out.table = tables.back();
  if (tables.size() >= 2) {
    const auto& coarser = tables[tables.size() - 2];
    for (std::size_t k = 0; k < out.table.size(); ++k) {
      out.table[k].step_sensitivity = out.table[k].value - coarser[k].value;
    }
  }
  out.value = out.table.back().value;
  out.std_error = out.table.back().std_error;
  out.step = steps.back();
  out.samples = config.sim.samples;
  out.seed = config.sim.seed;
  std::ostringstream note;
  if (out.table.size() >= 2) {
    const PickandsRow& last = out.table.back();
    const PickandsRow& prev = out.table[out.table.size() - 2];
    const double combined = std::hypot(last.std_error, prev.std_error);
    out.converged = std::abs(last.value - prev.value) <= 2.0 * combined;
    note << "last two horizons differ by " << std::abs(last.value - prev.value) << " (" 
         << (combined > 0 ? std::abs(last.value - prev.value) / combined : 0.0)
         << " combined standard errors)";
    if (!out.converged) note << "; not converged, increase the horizon grid";
  } else {
    note << "single horizon, convergence not assessed";
  }
  note << "; discretization step " << out.step;
  out.note = note.str();
  return out;
}

}  // namespace orthant
