// orthant: exact orthant-entry asymptotics for drifted correlated fBm.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "orthant/constants.hpp"
#include "orthant/critical.hpp"
#include "orthant/error.hpp"
#include "orthant/fbm.hpp"
#include "orthant/model.hpp"
#include "orthant/montecarlo.hpp"
#include "orthant/parallel.hpp"
#include "orthant/pickands.hpp"
#include "orthant/scenarios.hpp"
#include "orthant/version.hpp"

namespace {

using nlohmann::json;
using namespace orthant;

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Usage: return 2;
    case ErrorKind::InvalidModel: return 3;
    case ErrorKind::DegenerateProblem: return 4;
    case ErrorKind::Unsupported: return 5;
    case ErrorKind::NumericalFailure: return 6;
    case ErrorKind::BudgetExceeded: return 7;
  }
  return 1;
}

json to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json to_json(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(row);
  }
  return out;
}

json model_json(const ModelSpec& model) { return json::parse(serialize_model(model)); }

json critical_json(const CriticalPoint& cp, bool forced) {
  json j;
  j["t0"] = cp.t0;
  j["I"] = cp.essential.one_based();
  j["K"] = cp.weak.one_based();
  j["J"] = cp.unessential.one_based();
  j["b"] = to_json(cp.b);
  j["b_tilde"] = to_json(cp.b_tilde);
  j["w"] = to_json(cp.w);
  j["g_value"] = cp.g_value;
  j["g_dd"] = cp.g_dd;
  j["g_dd_plus"] = cp.g_dd_plus;
  j["g_dd_minus"] = cp.g_dd_minus;
  j["switch_point"] = cp.switch_point;
  j["used_fallback"] = cp.used_fallback;
  j["qp_boundary"] = cp.qp_boundary;
  j["zeta_prime_I"] = to_json(cp.zeta_prime);
  j["case"] = cp.regime ? json(std::string(to_string(*cp.regime))) : json(nullptr);
  j["case_forced"] = forced;
  return j;
}

json pickands_json(const PickandsEstimate& p) {
  json j;
  j["value"] = p.value;
  j["std_error"] = p.std_error;
  j["step"] = p.step;
  j["samples"] = p.samples;
  j["seed"] = p.seed;
  j["converged"] = p.converged;
  j["note"] = p.note;
  json rows = json::array();
  for (const auto& r : p.table) {
    json row{{"T", r.horizon}, {"value_per_T", r.value}, {"std_error", r.std_error}};
    row["step_sensitivity"] = r.step_sensitivity ? json(*r.step_sensitivity) : json(nullptr);
    rows.push_back(row);
  }
  j["table"] = rows;
  return j;
}

json asymptotics_json(const AsymptoticResult& a) {
  json j;
  j["case"] = std::string(to_string(a.regime));
  j["prefactor"] = a.prefactor;
  j["gamma"] = a.gamma;
  j["rate"] = a.rate;
  j["formula"] = "P(u) ~ prefactor * u^gamma * exp(-rate * u^(2(1-H)))";
  json c;
  c["C_K"] = {{"value", a.components.c_k.value},
              {"truncation", std::isfinite(a.components.c_k.truncation) ? json(a.components.c_k.truncation)
                                                                        : json("inf")},
              {"error", a.components.c_k.error},
              {"closed_form", a.components.c_k.closed_form}};
  if (a.components.pickands) {
    c["pickands"] = {{"value", *a.components.pickands}, {"std_error", *a.components.pickands_stderr}};
  }
  if (a.components.case_ii_factor) c["case_ii_factor"] = *a.components.case_ii_factor;
  if (a.components.case_ii_sum) c["case_ii_drift_sum"] = *a.components.case_ii_sum;
  j["components"] = c;
  return j;
}

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorKind::Usage, std::string("cannot parse ") + what + " entry '" + item + "'");
    }
  }
  if (out.empty()) throw Error(ErrorKind::Usage, std::string("empty ") + what + " list");
  return out;
}

RegionIntegration parse_integration(const std::string& s) {
  if (s == "auto") return RegionIntegration::Auto;
  if (s == "exact") return RegionIntegration::Exact;
  if (s == "inner") return RegionIntegration::InnerMonteCarlo;
  throw Error(ErrorKind::Usage, "unknown integration '" + s + "' (auto|exact|inner)");
}

struct Common {
  std::uint64_t seed = 1;
  int threads = 0;
  std::string format;
  std::string output;
  bool timing = false;
};

struct PickandsOptions {
  std::string horizons = "1,2,4,8,16";
  std::string steps;
  std::size_t samples = 4000;
  std::string integration = "auto";
  std::string estimator = "tilted";
};

struct McOptions {
  std::string u_list;
  std::size_t samples = 10000;
  std::string method = "mixture";
  double horizon_mult = 4.0;
  std::size_t grid_n = 4096;
  int refine = 4;
  double window_mult = 3.0;
};

struct AnalyzeOptions {
  std::string config;
  std::string force_case;
  double case_tol = kCaseTol;
};

void add_common(CLI::App* cmd, Common& c, const std::string& default_format) {
  c.format = default_format;
  cmd->add_option("--seed", c.seed, "Seed for every stochastic step");
  cmd->add_option("--threads", c.threads, "Worker threads (default: ORTHANT_THREADS or all cores)");
  cmd->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
  cmd->add_option("-o,--output", c.output, "Write to a file instead of stdout");
  cmd->add_flag("--timing", c.timing, "Include wall-clock time in JSON output");
}

// `--samples` names the Pickands paths, except in compare where it belongs to P(u).
void add_pickands(CLI::App* cmd, PickandsOptions& p, bool samples_alias = true) {
  cmd->add_option("--T", p.horizons, "Comma-separated increasing horizons T");
  cmd->add_option("--delta", p.steps, "Comma-separated decreasing grid steps (default T_max/1024)");
  cmd->add_option(samples_alias ? "--pickands-samples,--samples" : "--pickands-samples", p.samples,
                  "Paths per horizon table");
  cmd->add_option("--integration", p.integration, "Region integration: auto|exact|inner");
  cmd->add_option("--estimator", p.estimator, "Per-path estimator: tilted|direct")
      ->check(CLI::IsMember({"tilted", "direct"}));
}

void add_mc(CLI::App* cmd, McOptions& m) {
  cmd->add_option("--u", m.u_list, "Comma-separated u values")->required();
  cmd->add_option("--mc-samples,--samples", m.samples, "Monte Carlo paths");
  cmd->add_option("--method", m.method, "crude|is|mixture")->check(CLI::IsMember({"crude", "is", "mixture"}));
  cmd->add_option("--horizon-mult", m.horizon_mult, "Simulate rescaled time [0, mult * t0]");
  cmd->add_option("--grid-n", m.grid_n, "Coarse grid points");
  cmd->add_option("--refine", m.refine, "Refinement factor near t0");
  cmd->add_option("--window-mult", m.window_mult, "Refined window half-width in t0 / u^(1-H)");
}

PickandsConfig pickands_config(const PickandsOptions& p, const Common& c) {
  PickandsConfig cfg;
  cfg.horizons = parse_list(p.horizons, "--T");
  if (!p.steps.empty()) cfg.steps = parse_list(p.steps, "--delta");
  cfg.sim.samples = p.samples;
  cfg.sim.seed = c.seed;
  cfg.sim.threads = c.threads;
  cfg.sim.integration = parse_integration(p.integration);
  cfg.sim.estimator = p.estimator == "direct" ? PickandsEstimator::Direct : PickandsEstimator::Tilted;
  return cfg;
}

McConfig mc_config(const McOptions& m, const Common& c) {
  McConfig cfg;
  cfg.horizon_mult = m.horizon_mult;
  cfg.grid_n = m.grid_n;
  cfg.refine = m.refine;
  cfg.window_mult = m.window_mult;
  cfg.samples = m.samples;
  cfg.method = parse_method(m.method);
  cfg.seed = c.seed;
  cfg.threads = c.threads;
  return cfg;
}

json mc_config_json(const McConfig& cfg) {
  return {{"horizon_mult", cfg.horizon_mult}, {"grid_n", cfg.grid_n},       {"refine", cfg.refine},
          {"window_mult", cfg.window_mult},   {"samples", cfg.samples},     {"method", to_string(cfg.method)},
          {"seed", cfg.seed}};
}

class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw Error(ErrorKind::Usage, "cannot write '" + path + "'");
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

// Critical point with the optional case override applied.
CriticalPoint analyze_point(const ModelSpec& model, const AnalyzeOptions& a) {
  CriticalPoint cp = find_t0(model);
  if (model.is_brownian()) detect_case(model, cp);  // throws Unsupported
  cp.regime = detect_case(model, cp, a.case_tol);
  if (a.force_case == "i") cp.regime = Case::I;
  if (a.force_case == "ii") cp.regime = Case::II;
  return cp;
}

json run_analysis(const ModelSpec& model, const AnalyzeOptions& a, const PickandsOptions& p,
                  const Common& c, AsymptoticResult* result_out = nullptr) {
  const CriticalPoint cp = analyze_point(model, a);
  const CkValue ck = c_K(model, cp);
  json report;
  report["tool"] = {{"name", "orthant"}, {"version", kVersion}};
  report["config"] = model_json(model);
  report["seed"] = c.seed;
  report["critical_point"] = critical_json(cp, !a.force_case.empty());
  json warnings = json::array();
  if (cp.switch_point) {
    warnings.push_back("t0 is a switch point of I(t); C_K uses g_I''(t0) with I = I(t0), "
                       "one-sided values reported as g_dd_plus / g_dd_minus");
  }
  std::optional<PickandsEstimate> pickands;
  if (cp.regime == Case::I) {
    pickands = estimate_pickands(model, cp, pickands_config(p, c));
    report["pickands"] = pickands_json(*pickands);
    if (!pickands->converged) warnings.push_back("Pickands table not converged: " + pickands->note);
  }
  const AsymptoticResult asym = assemble_asymptotics(model, cp, ck, pickands ? &*pickands : nullptr);
  report["asymptotics"] = asymptotics_json(asym);
  report["warnings"] = warnings;
  if (result_out) *result_out = asym;
  return report;
}

void emit_json(const json& j, const Common& c) {
  Sink sink(c.output);
  sink.stream() << j.dump(2) << "\n";
}

void write_pickands_csv(std::ostream& out, const PickandsEstimate& p) {
  out << std::setprecision(17) << "T,value_per_T,std_error,step_sensitivity\n";
  for (const auto& r : p.table) {
    out << r.horizon << "," << r.value << "," << r.std_error << ",";
    if (r.step_sensitivity) out << *r.step_sensitivity;
    out << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact asymptotics of orthant entry by drifted correlated fractional Brownian motion"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(orthant::kVersion));

  Common common;
  AnalyzeOptions analyze_opts;
  PickandsOptions pickands_opts;
  McOptions mc_opts;

  auto* analyze = app.add_subcommand("analyze", "Critical point, constants and asymptotic formula (JSON)");
  analyze->add_option("config", analyze_opts.config, "Model config (JSON)")->required();
  analyze->add_option("--force-case", analyze_opts.force_case, "Override the case split")
      ->check(CLI::IsMember({"i", "ii"}));
  analyze->add_option("--case-tol", analyze_opts.case_tol, "Relative tolerance of the case test");
  add_common(analyze, common, "json");
  add_pickands(analyze, pickands_opts);

  auto* pickands = app.add_subcommand("pickands", "Monte Carlo H_I(T)/T table (CSV)");
  pickands->add_option("config", analyze_opts.config, "Model config (JSON)")->required();
  add_common(pickands, common, "csv");
  add_pickands(pickands, pickands_opts);

  auto* estimate = app.add_subcommand("estimate", "Monte Carlo estimate of P(u) (CSV)");
  estimate->add_option("config", analyze_opts.config, "Model config (JSON)")->required();
  add_common(estimate, common, "csv");
  add_mc(estimate, mc_opts);

  auto* compare = app.add_subcommand("compare", "Monte Carlo versus asymptotic formula (CSV)");
  compare->add_option("config", analyze_opts.config, "Model config (JSON)")->required();
  compare->add_option("--force-case", analyze_opts.force_case, "Override the case split")
      ->check(CLI::IsMember({"i", "ii"}));
  add_common(compare, common, "csv");
  add_mc(compare, mc_opts);
  add_pickands(compare, pickands_opts, false);

  double example_h = 0.75;
  auto* example1 = app.add_subcommand("example1", "Four-dimensional independent scenario with I={1,2}, K={3}, J={4}");
  example1->add_option("--H", example_h, "Hurst index (H > 1/2 gives case (ii))");
  add_common(example1, common, "json");
  add_pickands(example1, pickands_opts);

  double sample_h = 0.5;
  std::size_t sample_n = 256;
  double sample_dt = 1.0;
  std::size_t sample_paths = 1;
  std::string dump_file;
  auto* sample = app.add_subcommand("sample", "Dump fBm sample paths (CSV, or binary with --binary)");
  sample->add_option("--H", sample_h, "Hurst index")->required();
  sample->add_option("--n", sample_n, "Grid points");
  sample->add_option("--dt", sample_dt, "Grid step");
  sample->add_option("--paths", sample_paths, "Number of paths");
  sample->add_option("--binary", dump_file, "Write the columnar binary format to this file");
  add_common(sample, common, "csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_code(ErrorKind::Usage);
  }

  const auto started = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  };

  try {
    if (*analyze) {
      const ModelSpec model = load_model_file(analyze_opts.config);
      json report = run_analysis(model, analyze_opts, pickands_opts, common);
      if (common.timing) report["wall_clock_seconds"] = elapsed();
      emit_json(report, common);
    } else if (*example1) {
      const ModelSpec model = example_four_dim(example_h);
      json report = run_analysis(model, analyze_opts, pickands_opts, common);
      report["scenario"] = "d=4, Sigma=Id, nu=(1,1,t0,1), mu=(1,0.5,-1,-2/t0)";
      if (common.timing) report["wall_clock_seconds"] = elapsed();
      emit_json(report, common);
    } else if (*pickands) {
      const ModelSpec model = load_model_file(analyze_opts.config);
      const CriticalPoint cp = find_t0(model);
      const PickandsEstimate est = estimate_pickands(model, cp, pickands_config(pickands_opts, common));
      if (common.format == "json") {
        json j = pickands_json(est);
        if (common.timing) j["wall_clock_seconds"] = elapsed();
        emit_json(j, common);
      } else {
        Sink sink(common.output);
        write_pickands_csv(sink.stream(), est);
      }
    } else if (*estimate) {
      const ModelSpec model = load_model_file(analyze_opts.config);
      const CriticalPoint cp = find_t0(model);
      const McConfig cfg = mc_config(mc_opts, common);
      const auto rows = estimate_p(model, cp, parse_list(mc_opts.u_list, "--u"), cfg);
      if (common.format == "json") {
        json j;
        j["config"] = model_json(model);
        j["mc"] = mc_config_json(cfg);
        json arr = json::array();
        for (const auto& e : rows) {
          arr.push_back({{"u", e.u}, {"p_hat", e.p_hat}, {"std_error", e.std_error},
                         {"hits", e.hits}, {"effective_samples", e.effective_samples},
                         {"degenerate", e.degenerate}, {"monitored_points", e.grid_points},
                         {"horizon", e.horizon}, {"fine_step", e.fine_step}});
        }
        j["estimates"] = arr;
        if (common.timing) j["wall_clock_seconds"] = elapsed();
        emit_json(j, common);
      } else {
        Sink sink(common.output);
        auto& out = sink.stream();
        out << std::setprecision(17)
            << "u,p_hat,std_error,method,hits,effective_samples,degenerate,samples,seed\n";
        for (const auto& e : rows) {
          out << e.u << "," << e.p_hat << "," << e.std_error << "," << to_string(e.method) << ","
              << e.hits << "," << e.effective_samples << "," << (e.degenerate ? 1 : 0) << ","
              << e.samples << "," << e.seed << "\n";
        }
      }
      for (const auto& e : rows) {
        if (e.degenerate) std::cerr << "warning: importance weights degenerate at u=" << e.u << "\n";
      }
    } else if (*compare) {
      const ModelSpec model = load_model_file(analyze_opts.config);
      const std::vector<double> u_values = parse_list(mc_opts.u_list, "--u");
      AsymptoticResult asym;
      json report;
      CriticalPoint cp;
      if (model.is_brownian()) {
        // Simulator mode: no theorem applies, but for d = 1 the ruin probability
        // exp(-2 mu nu u) is exact and equals exp(-(g/2) u).
        cp = find_t0(model);
        asym.hurst = 0.5;
        asym.rate = cp.g_value / 2.0;
        asym.prefactor = model.dim() == 1 ? 1.0 : std::numeric_limits<double>::quiet_NaN();
        report["config"] = model_json(model);
        report["critical_point"] = critical_json(cp, false);
        report["warnings"] = json::array({"H = 1/2: asymptotic column is the exact d = 1 Brownian ruin "
                                          "probability (NaN for d > 1)"});
      } else {
        report = run_analysis(model, analyze_opts, pickands_opts, common, &asym);
        cp = analyze_point(model, analyze_opts);
      }
      const McConfig cfg = mc_config(mc_opts, common);
      const auto rows = compare_asymptotics(model, cp, u_values, asym, cfg);
      if (common.format == "json") {
        json arr = json::array();
        for (const auto& r : rows) {
          arr.push_back({{"u", r.u}, {"p_hat", r.p_hat}, {"std_error", r.std_error},
                         {"asymptotic", r.asymptotic}, {"log_rate", r.log_rate},
                         {"target", r.target}, {"degenerate", r.degenerate}});
        }
        report["mc"] = mc_config_json(cfg);
        report["comparison"] = arr;
        if (common.timing) report["wall_clock_seconds"] = elapsed();
        emit_json(report, common);
      } else {
        Sink sink(common.output);
        auto& out = sink.stream();
        out << std::setprecision(17) << "u,p_hat,std_error,asymptotic,ratio,log_rate,target,degenerate\n";
        for (const auto& r : rows) {
          out << r.u << "," << r.p_hat << "," << r.std_error << "," << r.asymptotic << ","
              << r.p_hat / r.asymptotic << "," << r.log_rate << "," << r.target << ","
              << (r.degenerate ? 1 : 0) << "\n";
        }
      }
    } else if (*sample) {
      const FbmSampler sampler(sample_h, sample_n, sample_dt);
      auto work = sampler.make_workspace();
      std::vector<std::vector<double>> paths(sample_paths, std::vector<double>(sample_n));
      for (std::size_t p = 0; p < sample_paths; ++p) {
        RandomStream rng(common.seed, p);
        sampler.sample(rng, paths[p], work);
      }
      if (!dump_file.empty()) {
        write_paths_binary(dump_file, sample_h, sample_dt, common.seed, paths);
      } else {
        Sink sink(common.output);
        write_paths_csv(sink.stream(), sample_dt, paths);
      }
    }
  } catch (const Error& e) {
    std::cerr << json{{"error", std::string(to_string(e.kind()))}, {"message", e.what()}}.dump() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << json{{"error", "internal"}, {"message", e.what()}}.dump() << "\n";
    return 1;
  }
  return 0;
}
