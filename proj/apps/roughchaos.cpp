// roughchaos <experiment> --config <file> [--out <dir>] [--seed <u64>] [--threads <k>]
//
// Exit status: 0 when every criterion passes, 1 when one fails, 2 on a
// configuration or runtime error.

#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "roughchaos/errors.hpp"
#include "roughchaos/experiments.hpp"

int main(int argc, char** argv) {
  using namespace roughchaos;
  CLI::App app{"Rough-path mean-field experiments"};
  std::string experiment, config_file, out_dir;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  app.add_option("experiment", experiment, "experiment id")
      ->required()
      ->check(CLI::IsMember(experiment_ids()));
  app.add_option("--config", config_file, "flat key = value config (schema = 1)")->required();
  auto* out_opt = app.add_option("--out", out_dir, "output directory (default: config key out, else out/<experiment>)");
  auto* seed_opt = app.add_option("--seed", seed, "overrides the config seed");
  app.add_option("--threads", threads, "worker threads; outputs do not depend on it")
      ->check(CLI::Range(1u, 1024u));
  CLI11_PARSE(app, argc, argv);

  try {
    Config cfg = Config::load(config_file);
    const auto cfg_out = cfg.take_unrecorded("out");
    if (!*out_opt) out_dir = cfg_out ? *cfg_out : "out/" + experiment;
    RunOptions options;
    if (*seed_opt) options.seed = seed;
    options.threads = threads;
    const ExperimentResult result = run_experiment(experiment, cfg, options);
    write_outputs(out_dir, result);
    for (const auto& c : result.criteria)
      std::printf("%s  %s: %s\n", c.pass ? "PASS" : "FAIL", c.name.c_str(), c.detail.c_str());
    std::printf("report: %s/report.json\n", out_dir.c_str());
    return result.pass() ? 0 : 1;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
  } catch (const ConvergenceError& e) {
    std::fprintf(stderr, "convergence error: %s (%zu iterations)\n", e.what(), e.trace().size());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
  }
  return 2;
}
