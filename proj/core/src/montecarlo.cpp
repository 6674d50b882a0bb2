#include "orthant/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "orthant/error.hpp"
#include "orthant/fbm.hpp"
#include "orthant/parallel.hpp"
#include "orthant/qp.hpp"
#include "orthant/rng.hpp"

namespace orthant {

std::string_view to_string(Method m) noexcept {
  switch (m) {
    case Method::Crude: return "crude";
    case Method::MeanShiftIS: return "is";
    case Method::MixtureIS: return "mixture";
  }
  return "crude";
}

Method parse_method(std::string_view name) {
  if (name == "crude") return Method::Crude;
  if (name == "is" || name == "mean-shift-is") return Method::MeanShiftIS;
  if (name == "mixture") return Method::MixtureIS;
  throw Error(ErrorKind::Usage, "unknown Monte Carlo method '" + std::string(name) + "'");
}

namespace {

// Rank-one Cameron-Martin shift anchored at one grid node: the path mean moves
// by R(t, t_k) R(t_k, t_k)^{-1} b_tilde(t_k) v.
struct Anchor {
  Eigen::Index node = 0;
  Eigen::VectorXd target;        // b_tilde(t_k) v
  Eigen::RowVectorXd profile;    // R(t, t_k) / R(t_k, t_k) on the grid
  Eigen::VectorXd theta;         // w(t_k) v / t_k^{2H}
  double log_norm = 0.0;         // v^2 g(t_k) / 2
  double log_weight = 0.0;       // log mixture probability
  double cumulative = 0.0;
};

struct Level {
  double u = 0.0;
  double v = 0.0;  // u^{1-H}
  std::vector<Eigen::Index> monitored;
  std::vector<Anchor> anchors;
};

Anchor make_anchor(const ModelSpec& model, const std::vector<double>& times, Eigen::Index node,
                   double v) {
  const double h = model.hurst();
  const double t = times[static_cast<std::size_t>(node)];
  const double var = std::pow(t, 2.0 * h);
  const QpSolution qp = solve_qp(model.sigma(), model.threshold(t));
  Anchor a;
  a.node = node;
  a.target = qp.b_tilde * v;
  a.profile.resize(static_cast<Eigen::Index>(times.size()));
  for (std::size_t j = 0; j < times.size(); ++j) {
    a.profile(static_cast<Eigen::Index>(j)) = fbm_covariance(h, times[j], t) / var;
  }
  a.theta = qp.w * v / var;
  a.log_norm = 0.5 * v * v * qp.value / var;
  return a;
}

// Anchor nodes for one level. Single-anchor IS uses t0 only; the mixture
// spreads anchors at half the crossing-time scale sqrt(2 / g'') / v over
// +-window_mult of that scale, weighted like exp(-v^2 (g(t_k) - g(t0)) / 2).
std::vector<Anchor> make_anchors(const ModelSpec& model, const CriticalPoint& cp,
                                 const std::vector<double>& times, double step, Eigen::Index t0_node,
                                 double v, const McConfig& config) {
  std::vector<Eigen::Index> nodes{t0_node};
  if (config.method == Method::MixtureIS && v > 0.0) {
    const double scale = std::sqrt(2.0 / cp.g_dd) / v;
    const int reach = static_cast<int>(std::ceil(2.0 * config.window_mult));
    const auto last = static_cast<Eigen::Index>(times.size()) - 1;
    for (int k = -reach; k <= reach; ++k) {
      const double t = cp.t0 + 0.5 * scale * k;
      const auto node = std::clamp(static_cast<Eigen::Index>(std::llround(t / step)) - 1, Eigen::Index{0}, last);
      if (std::find(nodes.begin(), nodes.end(), node) == nodes.end()) nodes.push_back(node);
    }
    std::sort(nodes.begin(), nodes.end());
  }
  std::vector<Anchor> anchors;
  for (Eigen::Index node : nodes) anchors.push_back(make_anchor(model, times, node, v));
  const double base = anchors.front().log_norm;
  double best = -std::numeric_limits<double>::infinity();
  for (Anchor& a : anchors) {
    a.log_weight = -(a.log_norm - base);
    best = std::max(best, a.log_weight);
  }
  double total = 0.0;
  for (Anchor& a : anchors) total += std::exp(a.log_weight - best);
  double running = 0.0;
  for (Anchor& a : anchors) {
    a.log_weight = a.log_weight - best - std::log(total);
    running += std::exp(a.log_weight);
    a.cumulative = running;
  }
  anchors.back().cumulative = 1.0;
  return anchors;
}

// dP/dQ for the mixture Q = sum_k pi_k Q_k evaluated on the sampled path.
double likelihood_ratio(const std::vector<Anchor>& anchors, const Eigen::MatrixXd& path) {
  double best = -std::numeric_limits<double>::infinity();
  std::vector<double> terms(anchors.size());
  for (std::size_t k = 0; k < anchors.size(); ++k) {
    const Anchor& a = anchors[k];
    terms[k] = a.log_weight + a.theta.dot(path.col(a.node)) - a.log_norm;
    best = std::max(best, terms[k]);
  }
  double total = 0.0;
  for (double t : terms) total += std::exp(t - best);
  return std::exp(-(best + std::log(total)));
}

}  // namespace

std::vector<MCEstimate> estimate_p(const ModelSpec& model, const CriticalPoint& cp,
                                   const std::vector<double>& u_values, const McConfig& config) {
  if (!(config.horizon_mult > 1.0)) throw Error(ErrorKind::Usage, "horizon multiplier must exceed 1");
  if (config.grid_n == 0 || config.refine < 1 || config.samples == 0) {
    throw Error(ErrorKind::Usage, "grid, refinement and sample counts must be positive");
  }
  for (double u : u_values) {
    if (!(u >= 0.0)) throw Error(ErrorKind::Usage, "u must be nonnegative");
  }

  const double h = model.hurst();
  const double t0 = cp.t0;
  const int d = model.dim();
  const int refine = config.refine;
  // Fine grid with t0 on a node: step = t0 / k0.
  const double fine_points = static_cast<double>(config.grid_n) * refine;
  const auto k0 = static_cast<std::size_t>(std::max(1.0, std::round(fine_points / config.horizon_mult)));
  const double step = t0 / static_cast<double>(k0);
  const auto n = static_cast<std::size_t>(std::round(config.horizon_mult * static_cast<double>(k0)));
  const Eigen::Index anchor = static_cast<Eigen::Index>(k0) - 1;  // grid index of t0

  const FbmSampler sampler(h, n, step);
  const Eigen::MatrixXd mixing = model.factor();

  std::vector<double> times(n);
  for (std::size_t j = 0; j < n; ++j) times[j] = step * static_cast<double>(j + 1);

  const bool importance = config.method != Method::Crude;
  std::vector<Level> levels;
  for (double u : u_values) {
    Level level;
    level.u = u;
    level.v = std::pow(u, 1.0 - h);
    const double half_width = level.v > 0.0 ? config.window_mult * t0 / level.v
                                            : std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      if ((j + 1) % static_cast<std::size_t>(refine) == 0 || std::abs(times[j] - t0) <= half_width) {
        level.monitored.push_back(static_cast<Eigen::Index>(j));
      }
    }
    if (importance) level.anchors = make_anchors(model, cp, times, step, anchor, level.v, config);
    levels.push_back(std::move(level));
  }

  // Thresholds (nu + mu t) on the grid.
  Eigen::MatrixXd boundary(d, static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < n; ++j) boundary.col(static_cast<Eigen::Index>(j)) = model.threshold(times[j]);

  const std::uint64_t choice_seed = derive_seed(config.seed, 0x15);
  std::vector<std::vector<double>> values(levels.size(), std::vector<double>(config.samples, 0.0));
  const std::size_t blocks = (config.samples + 1) / 2;
  parallel_for(blocks, config.threads, [&](std::size_t begin, std::size_t end, int) {
    auto work = sampler.make_workspace();
    Eigen::MatrixXd shifted(d, static_cast<Eigen::Index>(n));
    for (std::size_t block = begin; block < end; ++block) {
      RandomStream rng(config.seed, block);
      RandomStream choice(choice_seed, block);
      auto pair = sample_correlated_fbm_pair(sampler, mixing, rng, work);
      for (int half = 0; half < 2; ++half) {
        const std::size_t sample = 2 * block + static_cast<std::size_t>(half);
        if (sample >= config.samples) break;
        const Eigen::MatrixXd& x = half == 0 ? pair.first : pair.second;
        for (std::size_t l = 0; l < levels.size(); ++l) {
          const Level& level = levels[l];
          const Eigen::MatrixXd* path = &x;
          if (importance) {
            const double pick = level.anchors.size() > 1 ? choice.uniform() : 0.0;
            std::size_t k = 0;
            while (k + 1 < level.anchors.size() && level.anchors[k].cumulative < pick) ++k;
            shifted = x + level.anchors[k].target * level.anchors[k].profile;
            path = &shifted;
          }
          bool hit = false;
          for (Eigen::Index j : level.monitored) {
            bool all = true;
            for (int i = 0; i < d && all; ++i) all = (*path)(i, j) > boundary(i, j) * level.v;
            if (all) {
              hit = true;
              break;
            }
          }
          if (!hit) continue;
          values[l][sample] = importance ? likelihood_ratio(level.anchors, *path) : 1.0;
        }
      }
    }
  });

  std::vector<MCEstimate> out;
  for (std::size_t l = 0; l < levels.size(); ++l) {
    MCEstimate e;
    e.u = levels[l].u;
    e.method = config.method;
    e.horizon = step * static_cast<double>(n);
    e.fine_step = step;
    e.grid_points = levels[l].monitored.size();
    e.samples = config.samples;
    e.seed = config.seed;
    const SampleMoments m = sample_moments(values[l]);
    e.p_hat = m.mean;
    e.std_error = m.std_error;
    double sum = 0.0;
    double sum_sq = 0.0;
    for (double w : values[l]) {
      if (w > 0.0) {
        ++e.hits;
        sum += w;
        sum_sq += w * w;
      }
    }
    e.effective_samples = sum_sq > 0.0 ? sum * sum / sum_sq : 0.0;
    e.degenerate = importance && e.effective_samples < kMinEffectiveSamples;
    out.push_back(e);
  }
  return out;
}

MCEstimate estimate_p(const ModelSpec& model, double u, const McConfig& config) {
  const CriticalPoint cp = find_t0(model);
  return estimate_p(model, cp, std::vector<double>{u}, config).front();
}

std::vector<ComparisonRow> compare_asymptotics(const ModelSpec& model, const CriticalPoint& cp,
                                               const std::vector<double>& u_values,
                                               const AsymptoticResult& asym,
                                               const McConfig& config) {
  const std::vector<MCEstimate> estimates = estimate_p(model, cp, u_values, config);
  std::vector<ComparisonRow> rows;
  for (const MCEstimate& e : estimates) {
    ComparisonRow row;
    row.u = e.u;
    row.p_hat = e.p_hat;
    row.std_error = e.std_error;
    row.asymptotic = asym.evaluate(e.u);
    row.log_rate = -std::log(e.p_hat) / std::pow(e.u, 2.0 * (1.0 - model.hurst()));
    row.target = cp.g_value / 2.0;
    row.degenerate = e.degenerate;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace orthant
