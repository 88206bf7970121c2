#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "roughchaos/config.hpp"
#include "roughchaos/io.hpp"

namespace roughchaos {

struct RunOptions {
  /// Overrides the config's `seed`.
  std::optional<std::uint64_t> seed;
  /// Worker count; never changes any output byte.
  unsigned threads = 1;
};

struct Criterion {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct ExperimentResult {
  std::string experiment;
  io::Json report;
  std::vector<Criterion> criteria;
  /// File stem -> table; plots carry the columns x, y, lo, hi.
  std::map<std::string, io::Table> tables;
  std::map<std::string, io::Table> plots;
  std::vector<double> fixed_point_trace;

  bool pass() const;
};

/// poc, girsanov-check, sanov-decay, lift-approx, rde-flow, klayer-rde.
const std::vector<std::string>& experiment_ids();

/// Reads and validates every key of `cfg` before simulating anything; an
/// unknown key or an inconsistent value is a ConfigError.
ExperimentResult run_experiment(const std::string& id, Config& cfg, const RunOptions& options = {});

ExperimentResult run_poc(Config& cfg, const RunOptions& options = {});
ExperimentResult run_girsanov_check(Config& cfg, const RunOptions& options = {});
ExperimentResult run_sanov_decay(Config& cfg, const RunOptions& options = {});
ExperimentResult run_lift_approx(Config& cfg, const RunOptions& options = {});
ExperimentResult run_rde_flow(Config& cfg, const RunOptions& options = {});
ExperimentResult run_klayer_rde(Config& cfg, const RunOptions& options = {});

/// report.json, <table>.csv for every table, plot_<name>.csv for every plot
/// and fixed_point_trace.csv when a fixed point was solved.
void write_outputs(const std::filesystem::path& dir, const ExperimentResult& result);

}  // namespace roughchaos
