// cvp: batch runner for the causal-variational-principle pipeline.
//
// Usage: cvp <task> [--config cfg.json] [flags]
// Tasks: el-check, weight, spectrum, solve, sobolev, oracle, example.
// Exit codes: 0 success, 2 invalid config, 3 numerical failure,
// 4 resource cap exceeded.

#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "cvp/experiment.hpp"

namespace {

int fail(int code, const std::string& kind, const std::string& message) {
  nlohmann::ordered_json err = {{"error", {{"kind", kind}, {"message", message}}}};
  std::cout << err.dump(2) << std::endl;
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical pipeline for linearized field equations of causal variational principles"};
  app.require_subcommand(0, 0);

  std::string task;
  std::string config_path;
  std::string out_dir;
  std::string report_path;
  std::string dump_operator;
  std::string preset;
  double epsilon = std::nan("");
  int threads = 0;
  int seed = -1;

  app.add_option("task", task, "task to run: el-check, weight, spectrum, solve, sobolev, oracle, example")
      ->required();
  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--out-dir", out_dir, "output directory (overrides config)");
  app.add_option("--report", report_path, "report JSON path (default <out-dir>/report.json)");
  app.add_option("--dump-operator", dump_operator, "dump A and H matrices with this path prefix");
  app.add_option("--epsilon", epsilon, "kernel cutoff (negative: relative default)");
  app.add_option("--threads", threads, "assembly worker count");
  app.add_option("--seed", seed, "seed for randomized probes");
  app.add_option("--preset", preset, "example preset name (task = example)");

  CLI11_PARSE(app, argc, argv);

  try {
    cvp::json cfg_json = cvp::json::object();
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) return fail(2, "config", "cannot open config file: " + config_path);
      try {
        in >> cfg_json;
      } catch (const nlohmann::json::exception& e) {
        return fail(2, "config", std::string("config is not valid JSON: ") + e.what());
      }
    }
    cvp::ExperimentConfig cfg = cvp::parse_config(cfg_json);
    cfg.task = task;
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (!report_path.empty()) cfg.report_path = report_path;
    if (!dump_operator.empty()) cfg.dump_operator = dump_operator;
    if (!std::isnan(epsilon)) cfg.epsilon = epsilon;
    if (threads > 0) cfg.threads = threads;
    if (seed >= 0) cfg.seed = seed;
    if (!preset.empty()) cfg.example_preset = preset;

    cvp::run_experiment(cfg);
    return 0;
  } catch (const cvp::ConfigError& e) {
    return fail(2, "config", e.what());
  } catch (const cvp::ResourceLimitError& e) {
    return fail(4, "resource", e.what());
  } catch (const cvp::NumericalError& e) {
    return fail(3, "numerical", e.what());
  } catch (const std::exception& e) {
    return fail(3, "internal", e.what());
  }
}
