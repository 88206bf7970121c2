#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "roughchaos/empirical_measure.hpp"
#include "roughchaos/particle.hpp"
#include "roughchaos/rates.hpp"
#include "roughchaos/transport.hpp"

namespace roughchaos::io {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

/// 17 significant digits; strtod of the result gives back the same double.
std::string format_double(double v);

/// Parses a full field as a double; throws ArgumentError on trailing junk.
double parse_double(const std::string& field);

struct PathHeader {
  double alpha = 0.4;
  std::vector<std::uint64_t> lineage;
};

/// Rough path CSV: a `# {json}` line (dim, m, T, alpha, seeds), then columns
/// t, x_1..x_e, a_1_1..a_e_e. Row j carries the level-2 increment of the step
/// ending at t_j; row 0 is zero.
void write_rough_path_csv(const fs::path& file, const GridRoughPath& path,
                          const PathHeader& header = {});
GridRoughPath read_rough_path_csv(const fs::path& file, PathHeader* header = nullptr);

/// Level-1 path CSV: `# {json}` line, then t, x_1..x_e.
void write_path_csv(const fs::path& file, const SamplePath& path, const PathHeader& header = {});
SamplePath read_path_csv(const fs::path& file, PathHeader* header = nullptr);

/// Directory with manifest.json, paths.csv (particle, t, x..) and
/// increments.csv (particle, step, dB..).
void write_ensemble(const fs::path& dir, const ParticleEnsemble& ens);
ParticleEnsemble read_ensemble(const fs::path& dir);

/// Directory with atoms/ (one path CSV per distinct atom), atoms.csv
/// (atom, file), weights.csv (atom, weight) and meta.json. Atoms shared by
/// pointer are written once and shared again on reading.
void write_measure(const fs::path& dir, const RoughPathMeasure& mu);
void write_measure(const fs::path& dir, const PathMeasure& mu);
RoughPathMeasure read_rough_measure(const fs::path& dir);
PathMeasure read_path_measure(const fs::path& dir);

/// Sparse triplets row, col, mass; the header line records the shape and objective.
void write_plan_csv(const fs::path& file, const TransportPlan& plan);
TransportPlan read_plan_csv(const fs::path& file);

/// iter, sup_marginal_w1
void write_trace_csv(const fs::path& file, const std::vector<double>& trace);

Json to_json(const KTerms& k);
Json to_json(const RateReport& r);
Json to_json(const RateVerdict& v);

/// Writes `j` with two-space indentation and a trailing newline.
void write_json(const fs::path& file, const Json& j);
Json read_json(const fs::path& file);

/// Plain CSV table with a header row; numbers in format_double.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

void write_table_csv(const fs::path& file, const Table& table);
Table read_table_csv(const fs::path& file);

}  // namespace roughchaos::io
