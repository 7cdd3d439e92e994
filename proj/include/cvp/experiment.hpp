#ifndef CVP_EXPERIMENT_HPP
#define CVP_EXPERIMENT_HPP

#include <chrono>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cvp/errors.hpp"
#include "cvp/field_operator.hpp"
#include "cvp/io.hpp"
#include "cvp/jets.hpp"
#include "cvp/kernels.hpp"
#include "cvp/measure.hpp"
#include "cvp/spectral.hpp"
#include "cvp/verify.hpp"

namespace cvp {

using json = nlohmann::ordered_json;

struct GridSpec {
  bool periodic = false;
  double a = -8.0, b = 8.0;   // truncated domain
  double period = 32.0;       // periodic length
  int n = 256;
  QuadratureRule rule = QuadratureRule::Trapezoid;
};

struct ExperimentConfig {
  std::string task;
  std::string kernel = "gauss1d";
  KernelSpec::Params params;
  GridSpec grid;
  std::string density;          // "" or "minimizer"
  double epsilon = -1.0;        // < 0: default relative cutoff
  int seed = 0;
  int threads = 1;
  std::vector<int> sobolev_orders = {0, 1, 2};
  json field;                   // inhomogeneity / input field spec
  std::string example_preset;   // for task = example
  std::string out_dir = ".";
  std::string dump_operator;    // path prefix, empty = no dump
  std::string report_path;      // empty = <out_dir>/report.json
};

inline ExperimentConfig parse_config(const json& j) {
  ExperimentConfig cfg;
  try {
    if (j.contains("task")) cfg.task = j.at("task").get<std::string>();
    if (j.contains("kernel")) cfg.kernel = j.at("kernel").get<std::string>();
    if (j.contains("params"))
      for (auto& [key, val] : j.at("params").items()) cfg.params[key] = val.get<double>();
    if (j.contains("grid")) {
      const json& g = j.at("grid");
      if (g.contains("periodic")) {
        cfg.grid.periodic = true;
        cfg.grid.period = g.at("periodic").get<double>();
      } else if (g.contains("domain")) {
        cfg.grid.periodic = false;
        cfg.grid.a = g.at("domain").at(0).get<double>();
        cfg.grid.b = g.at("domain").at(1).get<double>();
      }
      if (g.contains("n")) cfg.grid.n = g.at("n").get<int>();
      if (g.contains("rule")) {
        const std::string r = g.at("rule").get<std::string>();
        if (r == "trapezoid") cfg.grid.rule = QuadratureRule::Trapezoid;
        else if (r == "midpoint") cfg.grid.rule = QuadratureRule::Midpoint;
        else throw ConfigError("unknown quadrature rule '" + r + "'");
      }
    }
    if (j.contains("density")) cfg.density = j.at("density").get<std::string>();
    if (j.contains("epsilon")) cfg.epsilon = j.at("epsilon").get<double>();
    if (j.contains("seed")) cfg.seed = j.at("seed").get<int>();
    if (j.contains("threads")) cfg.threads = j.at("threads").get<int>();
    if (j.contains("sobolev_orders"))
      cfg.sobolev_orders = j.at("sobolev_orders").get<std::vector<int>>();
    if (j.contains("field")) cfg.field = j.at("field");
    if (j.contains("inhomogeneity")) cfg.field = j.at("inhomogeneity");
    if (j.contains("example")) cfg.example_preset = j.at("example").get<std::string>();
    if (j.contains("out_dir")) cfg.out_dir = j.at("out_dir").get<std::string>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  if (cfg.threads < 1) throw ConfigError("threads must be >= 1");
  return cfg;
}

inline json resolved_config_json(const ExperimentConfig& cfg) {
  json j;
  j["task"] = cfg.task;
  j["kernel"] = cfg.kernel;
  j["params"] = json::object();
  for (const auto& [k, v] : cfg.params) j["params"][k] = v;
  if (cfg.grid.periodic) {
    j["grid"] = {{"periodic", cfg.grid.period}, {"n", cfg.grid.n}};
  } else {
    j["grid"] = {{"domain", {cfg.grid.a, cfg.grid.b}},
                 {"n", cfg.grid.n},
                 {"rule", cfg.grid.rule == QuadratureRule::Trapezoid ? "trapezoid" : "midpoint"}};
  }
  if (!cfg.density.empty()) j["density"] = cfg.density;
  j["epsilon"] = cfg.epsilon;
  j["seed"] = cfg.seed;
  j["sobolev_orders"] = cfg.sobolev_orders;
  if (!cfg.field.is_null()) j["field"] = cfg.field;
  if (!cfg.example_preset.empty()) j["example"] = cfg.example_preset;
  // out_dir and threads are invocation details, not experiment parameters;
  // leaving them out keeps resolved configs byte-identical across runs
  return j;
}

inline KernelSpec make_kernel(const ExperimentConfig& cfg) {
  return KernelSpec::builtin(cfg.kernel, cfg.params);
}

inline DiscreteMeasure make_measure(const ExperimentConfig& cfg, const KernelSpec& k) {
  DiscreteMeasure m = cfg.grid.periodic
                          ? DiscreteMeasure::periodic_grid(cfg.grid.period, cfg.grid.n,
                                                           k.ambient_dim())
                          : DiscreteMeasure::line_grid(cfg.grid.a, cfg.grid.b, cfg.grid.n,
                                                       cfg.grid.rule, k.ambient_dim());
  if (cfg.density.empty()) return m;
  if (cfg.density != "minimizer")
    throw ConfigError("unknown density '" + cfg.density + "' (supported: minimizer)");
  if (k.family() != KernelFamily::Inhomogeneous1d)
    throw ConfigError("density 'minimizer' applies to the inhomogeneous1d kernel only");
  return m.with_density([&](double x) { return minimizer_density(k, x); }, "minimizer");
}

/// Center of the grid, used by preset fields so they sit away from
/// truncated boundaries (and away from the periodic seam).
inline double grid_center(const DiscreteMeasure& m) {
  return m.periodic() ? 0.5 * m.period() : 0.5 * (m.domain_a() + m.domain_b());
}

/// Builds the input dof-vector from the "field" config entry:
/// {"csv": path} with columns scalar[,vector], or
/// {"preset": "gaussian_scalar" | "gaussian_vector"} for a centered
/// Gaussian bump in the named component.
inline Eigen::VectorXd build_field(const json& spec, const DiscreteMeasure& m, int fiber_dim) {
  if (spec.is_null())
    throw ConfigError("this task requires a 'field' (or 'inhomogeneity') config entry");
  const int n = m.size();
  Jet jet = Jet::zero(n, fiber_dim);
  if (spec.contains("csv")) {
    const std::string path = spec.at("csv").get<std::string>();
    if (!std::filesystem::exists(path))
      throw ConfigError("field CSV not found: " + path);
    const CsvTable t = read_csv(path);
    if (t.rows() != n)
      throw ConfigError("field CSV has " + std::to_string(t.rows()) + " rows, grid has " +
                        std::to_string(n));
    const int cs = t.column_index("scalar");
    if (cs < 0) throw ConfigError("field CSV needs a 'scalar' column");
    for (int i = 0; i < n; ++i) jet.scalar[i] = t.columns[cs][i];
    const int cv = t.column_index("vector");
    if (fiber_dim == 2 && cv >= 0)
      for (int i = 0; i < n; ++i) jet.vector[i] = t.columns[cv][i];
  } else if (spec.contains("preset")) {
    const std::string p = spec.at("preset").get<std::string>();
    const double c = grid_center(m);
    auto bump = [&](double x) {
      const double t = m.separation(x, c);
      return std::exp(-0.5 * t * t);
    };
    if (p == "gaussian_scalar") {
      for (int i = 0; i < n; ++i) jet.scalar[i] = bump(m.coord(i));
    } else if (p == "gaussian_vector") {
      if (fiber_dim != 2)
        throw ConfigError("preset gaussian_vector needs a kernel with a vector fiber");
      for (int i = 0; i < n; ++i) jet.vector[i] = bump(m.coord(i));
    } else {
      throw ConfigError("unknown field preset '" + p + "'");
    }
  } else {
    throw ConfigError("field spec needs either 'csv' or 'preset'");
  }
  return jet.to_dof();
}

inline void dump_matrix_csv(const Eigen::MatrixXd& mat, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open output file: " + path);
  for (Eigen::Index i = 0; i < mat.rows(); ++i) {
    for (Eigen::Index j = 0; j < mat.cols(); ++j) {
      if (j) out << ',';
      out << format_double(mat(i, j));
    }
    out << '\n';
  }
}

namespace detail {

struct Pipeline {
  KernelSpec kernel;
  DiscreteMeasure measure;
  Eigen::VectorXd h;
  AdaptedSpace space;
  AssembledOperator op;
  SpectralDecomposition dec;
};

inline Pipeline build_pipeline(const ExperimentConfig& cfg, bool need_operator) {
  KernelSpec k = make_kernel(cfg);
  DiscreteMeasure m = make_measure(cfg, k);
  Pipeline p{std::move(k), std::move(m), {}, {}, {}, {}};
  p.h = compute_weight(p.kernel, p.measure);
  if (need_operator) {
    p.op = assemble_bilinear(p.kernel, p.measure, cfg.threads);
    p.space = assemble_gram(p.measure, p.h, FiberMetric::identity(p.measure.size()),
                            p.kernel.fiber_dim());
    p.dec = decompose(p.op, p.space, cfg.epsilon);
  }
  return p;
}

inline void run_el_check(const ExperimentConfig& cfg, json& report) {
  const KernelSpec k = make_kernel(cfg);
  const DiscreteMeasure m = make_measure(cfg, k);
  const ElResidual r = el_residual(k, m);
  CsvWriter csv({"x", "abs_ell", "interior"});
  int interior = 0;
  for (int i = 0; i < m.size(); ++i) {
    csv.add_row({m.coord(i), r.per_node[i], r.interior[i] ? 1.0 : 0.0});
    if (r.interior[i]) ++interior;
  }
  csv.write(cfg.out_dir + "/el_residual.csv");
  report["el_check"] = {{"max_abs", r.max_abs}, {"interior_nodes", interior}, {"n", m.size()}};
}

inline void run_weight(const ExperimentConfig& cfg, json& report) {
  const KernelSpec k = make_kernel(cfg);
  const DiscreteMeasure m = make_measure(cfg, k);
  const Eigen::VectorXd h = compute_weight(k, m);
  CsvWriter csv({"x", "h"});
  for (int i = 0; i < m.size(); ++i) csv.add_row({m.coord(i), h[i]});
  csv.write(cfg.out_dir + "/weight.csv");
  json entry = {{"h_min", h.minCoeff()}, {"h_max", h.maxCoeff()}};
  if (k.family() == KernelFamily::NontrivialWeight2d && !m.periodic() && m.domain_b() >= 6.0)
    entry["growth_slope"] = weight_growth_slope(h, m, 2.0, 6.0);
  report["weight"] = entry;
}

inline void run_spectrum(const ExperimentConfig& cfg, json& report) {
  const Pipeline p = build_pipeline(cfg, true);
  const bool with_oracle =
      p.measure.periodic() && p.kernel.translation_invariant() && p.kernel.fiber_dim() == 1;
  std::optional<FourierOracle> oracle;
  if (with_oracle) oracle = fourier_spectrum_oracle(p.kernel, p.measure);

  std::vector<std::string> header = {"index", "lambda", "is_kernel"};
  if (with_oracle) {
    header.push_back("oracle");
    header.push_back("rel_err");
  }
  CsvWriter csv(header);
  double max_rel = 0.0;
  // tiny eigenvalues are dominated by eigensolver noise, so errors are
  // measured relative to the top of the spectrum
  const double rel_scale =
      with_oracle ? std::max(oracle->eigenvalues[oracle->eigenvalues.size() - 1], 1e-300) : 1.0;
  for (int i = 0; i < p.dec.n_dof(); ++i) {
    std::vector<double> row = {static_cast<double>(i), p.dec.eigenvalues[i],
                               p.dec.is_kernel(i) ? 1.0 : 0.0};
    if (with_oracle) {
      const double o = oracle->eigenvalues[i];
      const double rel = std::abs(p.dec.eigenvalues[i] - o) / rel_scale;
      row.push_back(o);
      row.push_back(rel);
      max_rel = std::max(max_rel, rel);
    }
    csv.add_row(row);
  }
  csv.write(cfg.out_dir + "/spectrum.csv");
  json entry = {{"lambda_min", p.dec.eigenvalues[0]},
                {"lambda_max", p.dec.lambda_max()},
                {"retained_modes", p.dec.retained_modes()},
                {"epsilon", p.dec.epsilon}};
  if (with_oracle) entry["oracle_max_rel_err"] = max_rel;
  report["spectrum"] = entry;

  if (!cfg.dump_operator.empty()) {
    dump_matrix_csv(p.op.A, cfg.dump_operator + "_A.csv");
    dump_matrix_csv(Eigen::MatrixXd(p.space.H_diag.asDiagonal()), cfg.dump_operator + "_H.csv");
  }
}

inline void run_solve(const ExperimentConfig& cfg, json& report) {
  const Pipeline p = build_pipeline(cfg, true);
  const Eigen::VectorXd w = build_field(cfg.field, p.measure, p.kernel.fiber_dim());
  const SolveResult res = solve_linearized(p.dec, p.space, w);
  const Jet u = Jet::from_dof(res.solution, p.kernel.fiber_dim());
  std::vector<std::string> header = {"x", "scalar"};
  if (p.kernel.fiber_dim() == 2) header.push_back("vector");
  CsvWriter csv(header);
  for (int i = 0; i < p.measure.size(); ++i) {
    std::vector<double> row = {p.measure.coord(i), u.scalar[i]};
    if (p.kernel.fiber_dim() == 2) row.push_back(u.vector[i]);
    csv.add_row(row);
  }
  csv.write(cfg.out_dir + "/solution.csv");
  report["solve"] = {{"residual_rel", res.residual_rel},
                     {"discarded_fraction", res.discarded_fraction},
                     {"retained_modes", res.retained_modes}};

  if (!cfg.dump_operator.empty()) {
    dump_matrix_csv(p.op.A, cfg.dump_operator + "_A.csv");
    dump_matrix_csv(Eigen::MatrixXd(p.space.H_diag.asDiagonal()), cfg.dump_operator + "_H.csv");
  }
}

inline void run_sobolev(const ExperimentConfig& cfg, json& report) {
  const Pipeline p = build_pipeline(cfg, true);
  Eigen::VectorXd u = build_field(cfg.field, p.measure, p.kernel.fiber_dim());
  const double full = p.dec.norm(u);
  u -= kernel_projection(p.dec, u);
  json norms = json::object();
  for (int k : cfg.sobolev_orders)
    norms["h" + std::to_string(k)] = sobolev_norm(p.dec, u, k);
  const double kept = p.dec.norm(u);
  report["sobolev"] = {
      {"norms", norms},
      {"discarded_fraction", full > 0.0 ? std::sqrt(std::max(0.0, 1.0 - (kept * kept) / (full * full))) : 0.0}};
}

inline void run_oracle(const ExperimentConfig& cfg, json& report) {
  const KernelSpec k = make_kernel(cfg);
  if (k.family() == KernelFamily::Inhomogeneous1d) {
    // probe the minimizer identity against the base grid (density applied inside)
    DiscreteMeasure rho = cfg.grid.periodic
                              ? DiscreteMeasure::periodic_grid(cfg.grid.period, cfg.grid.n, 1)
                              : DiscreteMeasure::line_grid(cfg.grid.a, cfg.grid.b, cfg.grid.n,
                                                           cfg.grid.rule, 1);
    const OracleReport rep = minimizer_identity_check(k.param("alpha"), rho);
    report["oracle"] = {{"name", rep.name}, {"max_rel_err", rep.max_rel_err}};
    return;
  }
  if (k.translation_invariant() && cfg.grid.periodic && k.fiber_dim() == 1) {
    const DiscreteMeasure m = make_measure(cfg, k);
    const FourierOracle o = fourier_spectrum_oracle(k, m);
    CsvWriter csv({"index", "oracle_lambda", "continuum"});
    double max_gap = 0.0;
    for (int i = 0; i < m.size(); ++i) {
      csv.add_row({static_cast<double>(i), o.eigenvalues[i], o.continuum[i]});
      max_gap = std::max(max_gap, std::abs(o.eigenvalues[i] - o.continuum[i]));
    }
    csv.write(cfg.out_dir + "/oracle.csv");
    report["oracle"] = {{"name", "fourier_circulant"},
                        {"top_eigenvalue", o.eigenvalues[m.size() - 1]},
                        {"max_abs_gap_to_continuum", max_gap}};
    return;
  }
  // fall back to the positivity certificate
  const Pipeline p = build_pipeline(cfg, true);
  const OracleReport rep = positivity_report(p.op, p.space);
  report["oracle"] = {{"name", rep.name},
                      {"lambda_min", rep.probe_error[0]},
                      {"lambda_max", rep.probe_error[1]},
                      {"passed", rep.passed}};
}

inline void run_example(const ExperimentConfig& cfg, json& report) {
  ExperimentConfig sub = cfg;
  sub.field = json();
  const std::string& name = cfg.example_preset;
  if (name == "gauss1d") {
    sub.kernel = "gauss1d";
    sub.params.clear();
    sub.grid = GridSpec{true, -8.0, 8.0, 32.0, 256, QuadratureRule::Trapezoid};
    sub.field = json{{"preset", "gaussian_scalar"}};
  } else if (name == "hyperplane2d") {
    sub.kernel = "hyperplane2d";
    sub.params.clear();
    sub.grid = GridSpec{true, -8.0, 8.0, 32.0, 256, QuadratureRule::Trapezoid};
    sub.field = json{{"preset", "gaussian_vector"}};
  } else if (name == "nontrivial-weight") {
    sub.kernel = "nontrivial_weight2d";
    sub.params.clear();
    sub.grid = GridSpec{false, -8.0, 8.0, 32.0, 512, QuadratureRule::Trapezoid};
  } else if (name == "inhomogeneous") {
    sub.kernel = "inhomogeneous1d";
    if (!sub.params.count("alpha")) sub.params["alpha"] = 0.5;
    sub.grid = GridSpec{false, -8.0, 8.0, 32.0, 512, QuadratureRule::Trapezoid};
    sub.density = "minimizer";
    sub.field = json{{"preset", "gaussian_scalar"}};
  } else {
    throw ConfigError("unknown example preset '" + name +
                      "' (gauss1d, hyperplane2d, nontrivial-weight, inhomogeneous)");
  }

  run_el_check(sub, report);
  run_weight(sub, report);
  if (name == "nontrivial-weight") {
    // the h-growth scenario: truncated grid for the slope, periodic grid
    // for a positivity-safe spectrum
    sub.grid = GridSpec{true, -8.0, 8.0, 32.0, 128, QuadratureRule::Trapezoid};
    run_spectrum(sub, report);
  } else {
    run_spectrum(sub, report);
    run_solve(sub, report);
  }
  if (name == "inhomogeneous") run_oracle(sub, report);
  report["example"] = name;
}

}  // namespace detail

/// Runs one experiment, writing all artifacts into cfg.out_dir. Outputs
/// are byte-identical across runs and worker counts; wall-clock metadata
/// goes to the separate run_meta.json.
inline void run_experiment(const ExperimentConfig& cfg) {
  if (cfg.task.empty()) throw ConfigError("no task given");
  std::filesystem::create_directories(cfg.out_dir);

  json report;
  report["task"] = cfg.task;
  if (cfg.task == "el-check") detail::run_el_check(cfg, report);
  else if (cfg.task == "weight") detail::run_weight(cfg, report);
  else if (cfg.task == "spectrum") detail::run_spectrum(cfg, report);
  else if (cfg.task == "solve") detail::run_solve(cfg, report);
  else if (cfg.task == "sobolev") detail::run_sobolev(cfg, report);
  else if (cfg.task == "oracle") detail::run_oracle(cfg, report);
  else if (cfg.task == "example") detail::run_example(cfg, report);
  else throw ConfigError("unknown task '" + cfg.task + "'");

  const std::string report_path =
      cfg.report_path.empty() ? cfg.out_dir + "/report.json" : cfg.report_path;
  {
    std::ofstream out(report_path, std::ios::binary);
    if (!out) throw ConfigError("cannot open output file: " + report_path);
    out << report.dump(2) << '\n';
  }
  {
    std::ofstream out(cfg.out_dir + "/resolved_config.json", std::ios::binary);
    if (!out) throw ConfigError("cannot write resolved_config.json");
    out << resolved_config_json(cfg).dump(2) << '\n';
  }
  {
    const auto now = std::chrono::system_clock::now().time_since_epoch();
    json meta = {{"unix_time_ms",
                  std::chrono::duration_cast<std::chrono::milliseconds>(now).count()}};
    std::ofstream out(cfg.out_dir + "/run_meta.json", std::ios::binary);
    if (!out) throw ConfigError("cannot write run_meta.json");
    out << meta.dump(2) << '\n';
  }
}

}  // namespace cvp

#endif  // CVP_EXPERIMENT_HPP
