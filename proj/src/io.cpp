#include "roughchaos/io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "roughchaos/errors.hpp"

namespace roughchaos::io {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& field) {
  const char* begin = field.c_str();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0') throw ArgumentError("not a number: '" + field + "'");
  return v;
}

namespace {

std::size_t parse_index(const std::string& field) {
  const double v = parse_double(field);
  if (!(v >= 0.0) || v != static_cast<double>(static_cast<std::size_t>(v)))
    throw ArgumentError("not an index: '" + field + "'");
  return static_cast<std::size_t>(v);
}

std::ofstream open_out(const fs::path& file) {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw ArgumentError("cannot write " + file.string());
  return out;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

/// A CSV file: optional `# {json}` preamble, one header row, numeric rows.
struct CsvFile {
  Json meta;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

CsvFile read_csv(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ArgumentError("cannot read " + file.string());
  CsvFile csv;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (!have_header && csv.meta.is_null()) csv.meta = Json::parse(line.substr(1));
      continue;
    }
    auto cells = split(line);
    if (!have_header) {
      csv.columns = std::move(cells);
      have_header = true;
      continue;
    }
    if (cells.size() != csv.columns.size())
      throw ArgumentError(file.string() + ": row width differs from header");
    csv.rows.push_back(std::move(cells));
  }
  if (!have_header) throw ArgumentError(file.string() + ": missing header row");
  return csv;
}

Json path_meta(std::size_t dim, const Grid& grid, const PathHeader& header) {
  Json j;
  j["dim"] = dim;
  j["m"] = grid.steps;
  j["T"] = grid.horizon;
  j["alpha"] = header.alpha;
  j["seeds"] = header.lineage;
  return j;
}

Grid grid_from_meta(const Json& meta, std::size_t* dim, PathHeader* header) {
  if (!meta.is_object()) throw ArgumentError("path CSV lacks its json header");
  *dim = meta.at("dim").get<std::size_t>();
  Grid grid{meta.at("m").get<std::size_t>(), meta.at("T").get<double>()};
  validate_grid(grid);
  if (header) {
    header->alpha = meta.at("alpha").get<double>();
    header->lineage = meta.at("seeds").get<std::vector<std::uint64_t>>();
  }
  return grid;
}

void write_line(std::ostream& out, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out << ',';
    out << cells[i];
  }
  out << '\n';
}

std::vector<std::string> coordinate_columns(std::size_t dim, bool areas) {
  std::vector<std::string> cols{"t"};
  for (std::size_t i = 0; i < dim; ++i) cols.push_back("x_" + std::to_string(i + 1));
  if (areas)
    for (std::size_t i = 0; i < dim; ++i)
      for (std::size_t k = 0; k < dim; ++k)
        cols.push_back("a_" + std::to_string(i + 1) + "_" + std::to_string(k + 1));
  return cols;
}

}  // namespace

void write_rough_path_csv(const fs::path& file, const GridRoughPath& path,
                          const PathHeader& header) {
  auto out = open_out(file);
  const std::size_t e = path.dim();
  out << "# " << path_meta(e, path.grid(), header).dump() << '\n';
  write_line(out, coordinate_columns(e, true));
  for (std::size_t j = 0; j <= path.steps(); ++j) {
    out << format_double(path.grid().time(j));
    for (double v : path.point(j)) out << ',' << format_double(v);
    for (std::size_t c = 0; c < e * e; ++c)
      out << ',' << format_double(j == 0 ? 0.0 : path.step_area(j - 1)[c]);
    out << '\n';
  }
}

GridRoughPath read_rough_path_csv(const fs::path& file, PathHeader* header) {
  const CsvFile csv = read_csv(file);
  std::size_t e = 0;
  const Grid grid = grid_from_meta(csv.meta, &e, header);
  if (csv.columns != coordinate_columns(e, true)) throw ArgumentError(file.string() + ": bad columns");
  if (csv.rows.size() != grid.steps + 1) throw ArgumentError(file.string() + ": wrong row count");
  std::vector<double> level1((grid.steps + 1) * e), level2(grid.steps * e * e);
  for (std::size_t j = 0; j <= grid.steps; ++j) {
    const auto& row = csv.rows[j];
    for (std::size_t i = 0; i < e; ++i) level1[j * e + i] = parse_double(row[1 + i]);
    if (j == 0) continue;
    for (std::size_t c = 0; c < e * e; ++c)
      level2[(j - 1) * e * e + c] = parse_double(row[1 + e + c]);
  }
  return GridRoughPath(e, grid, std::move(level1), std::move(level2));
}

void write_path_csv(const fs::path& file, const SamplePath& path, const PathHeader& header) {
  auto out = open_out(file);
  out << "# " << path_meta(path.dim(), path.grid(), header).dump() << '\n';
  write_line(out, coordinate_columns(path.dim(), false));
  for (std::size_t j = 0; j <= path.steps(); ++j) {
    out << format_double(path.grid().time(j));
    for (double v : path.point(j)) out << ',' << format_double(v);
    out << '\n';
  }
}

SamplePath read_path_csv(const fs::path& file, PathHeader* header) {
  const CsvFile csv = read_csv(file);
  std::size_t e = 0;
  const Grid grid = grid_from_meta(csv.meta, &e, header);
  if (csv.columns != coordinate_columns(e, false)) throw ArgumentError(file.string() + ": bad columns");
  if (csv.rows.size() != grid.steps + 1) throw ArgumentError(file.string() + ": wrong row count");
  std::vector<double> pts((grid.steps + 1) * e);
  for (std::size_t j = 0; j <= grid.steps; ++j)
    for (std::size_t i = 0; i < e; ++i) pts[j * e + i] = parse_double(csv.rows[j][1 + i]);
  return SamplePath(e, grid, std::move(pts));
}

void write_ensemble(const fs::path& dir, const ParticleEnsemble& ens) {
  fs::create_directories(dir);
  const std::size_t d = ens.dim, m = ens.grid.steps;
  Json manifest;
  manifest["n"] = ens.size();
  manifest["d"] = d;
  manifest["m"] = m;
  manifest["T"] = ens.grid.horizon;
  manifest["b"] = ens.interaction_id;
  manifest["law"] = ens.law_id;
  manifest["partners"] = ens.partners;
  manifest["seed"] = ens.seed;
  manifest["seeds"] = ens.seeds;
  write_json(dir / "manifest.json", manifest);

  auto paths = open_out(dir / "paths.csv");
  std::vector<std::string> cols{"particle", "t"};
  for (std::size_t r = 0; r < d; ++r) cols.push_back("x_" + std::to_string(r + 1));
  write_line(paths, cols);
  for (std::size_t i = 0; i < ens.size(); ++i)
    for (std::size_t j = 0; j <= m; ++j) {
      paths << i << ',' << format_double(ens.grid.time(j));
      for (double v : ens.path(i).point(j)) paths << ',' << format_double(v);
      paths << '\n';
    }

  auto incs = open_out(dir / "increments.csv");
  cols = {"particle", "step"};
  for (std::size_t r = 0; r < d; ++r) cols.push_back("dB_" + std::to_string(r + 1));
  write_line(incs, cols);
  for (std::size_t i = 0; i < ens.size(); ++i)
    for (std::size_t j = 0; j < m; ++j) {
      incs << i << ',' << j;
      for (std::size_t r = 0; r < d; ++r) incs << ',' << format_double(ens.increments[i][j * d + r]);
      incs << '\n';
    }
}

ParticleEnsemble read_ensemble(const fs::path& dir) {
  const Json manifest = read_json(dir / "manifest.json");
  ParticleEnsemble ens;
  const std::size_t n = manifest.at("n").get<std::size_t>();
  ens.dim = manifest.at("d").get<std::size_t>();
  ens.grid = Grid{manifest.at("m").get<std::size_t>(), manifest.at("T").get<double>()};
  validate_grid(ens.grid);
  ens.interaction_id = manifest.at("b").get<std::string>();
  ens.law_id = manifest.at("law").get<std::string>();
  ens.partners = manifest.at("partners").get<std::size_t>();
  ens.seed = manifest.at("seed").get<std::uint64_t>();
  ens.seeds = manifest.at("seeds").get<std::vector<std::uint64_t>>();
  const std::size_t d = ens.dim, m = ens.grid.steps;

  const CsvFile paths = read_csv(dir / "paths.csv");
  if (paths.rows.size() != n * (m + 1) || paths.columns.size() != 2 + d)
    throw ArgumentError("paths.csv does not match the manifest");
  std::vector<std::vector<double>> pts(n, std::vector<double>((m + 1) * d));
  for (const auto& row : paths.rows) {
    const std::size_t i = parse_index(row[0]);
    if (i >= n) throw ArgumentError("paths.csv: particle index out of range");
    const std::size_t j = static_cast<std::size_t>(
        std::llround(parse_double(row[1]) / ens.grid.horizon * static_cast<double>(m)));
    if (j > m) throw ArgumentError("paths.csv: time off the grid");
    for (std::size_t r = 0; r < d; ++r) pts[i][j * d + r] = parse_double(row[2 + r]);
  }
  for (auto& p : pts) ens.paths.push_back(std::make_shared<const SamplePath>(d, ens.grid, std::move(p)));

  const CsvFile incs = read_csv(dir / "increments.csv");
  if (incs.rows.size() != n * m || incs.columns.size() != 2 + d)
    throw ArgumentError("increments.csv does not match the manifest");
  ens.increments.assign(n, std::vector<double>(m * d));
  for (const auto& row : incs.rows) {
    const std::size_t i = parse_index(row[0]), j = parse_index(row[1]);
    if (i >= n || j >= m) throw ArgumentError("increments.csv: index out of range");
    for (std::size_t r = 0; r < d; ++r) ens.increments[i][j * d + r] = parse_double(row[2 + r]);
  }
  return ens;
}

namespace {

Json measure_meta(const MeasureInfo& info, std::size_t size, const char* kind) {
  Json j;
  j["kind"] = kind;
  j["size"] = size;
  j["layers"] = info.layers;
  j["sampled"] = info.sampled;
  j["tuple_count"] = info.tuple_count;
  j["lineage"] = info.lineage;
  return j;
}

MeasureInfo info_from_meta(const Json& j, const char* kind) {
  if (j.at("kind").get<std::string>() != kind)
    throw ArgumentError(std::string("measure manifest is not of kind ") + kind);
  MeasureInfo info;
  info.layers = j.at("layers").get<std::size_t>();
  info.sampled = j.at("sampled").get<bool>();
  info.tuple_count = j.at("tuple_count").get<std::size_t>();
  info.lineage = j.at("lineage").get<std::vector<std::uint64_t>>();
  return info;
}

template <class Atom, class Writer>
void write_measure_impl(const fs::path& dir, const EmpiricalMeasure<Atom>& mu, const char* kind,
                        Writer&& write_atom) {
  fs::create_directories(dir / "atoms");
  std::map<const Atom*, std::string> files;
  auto index = open_out(dir / "atoms.csv");
  auto weights = open_out(dir / "weights.csv");
  index << "atom,file\n";
  weights << "atom,weight\n";
  for (std::size_t a = 0; a < mu.size(); ++a) {
    const Atom* key = mu.atom_ptr(a).get();
    auto it = files.find(key);
    if (it == files.end()) {
      char name[32];
      std::snprintf(name, sizeof name, "atoms/%06zu.csv", files.size());
      it = files.emplace(key, name).first;
      write_atom(dir / name, *key);
    }
    index << a << ',' << it->second << '\n';
    weights << a << ',' << format_double(mu.weight(a)) << '\n';
  }
  write_json(dir / "meta.json", measure_meta(mu.info(), mu.size(), kind));
}

template <class Atom, class Reader>
EmpiricalMeasure<Atom> read_measure_impl(const fs::path& dir, const char* kind,
                                         Reader&& read_atom) {
  MeasureInfo info = info_from_meta(read_json(dir / "meta.json"), kind);
  const CsvFile index = read_csv(dir / "atoms.csv");
  const CsvFile weights = read_csv(dir / "weights.csv");
  if (index.rows.size() != weights.rows.size())
    throw ArgumentError("atoms.csv and weights.csv differ in length");
  std::map<std::string, std::shared_ptr<const Atom>> cache;
  std::vector<std::shared_ptr<const Atom>> atoms(index.rows.size());
  std::vector<double> w(index.rows.size());
  for (std::size_t r = 0; r < index.rows.size(); ++r) {
    const std::size_t a = parse_index(index.rows[r][0]);
    if (a != r || parse_index(weights.rows[r][0]) != r)
      throw ArgumentError("measure rows must list atoms in order");
    const std::string& file = index.rows[r][1];
    auto it = cache.find(file);
    if (it == cache.end())
      it = cache.emplace(file, std::make_shared<const Atom>(read_atom(dir / file))).first;
    atoms[r] = it->second;
    w[r] = parse_double(weights.rows[r][1]);
  }
  return EmpiricalMeasure<Atom>(std::move(atoms), std::move(w), std::move(info));
}

}  // namespace

void write_measure(const fs::path& dir, const RoughPathMeasure& mu) {
  PathHeader h;
  h.lineage = mu.info().lineage;
  write_measure_impl(dir, mu, "rough_path",
                     [&](const fs::path& f, const GridRoughPath& p) { write_rough_path_csv(f, p, h); });
}

void write_measure(const fs::path& dir, const PathMeasure& mu) {
  PathHeader h;
  h.lineage = mu.info().lineage;
  write_measure_impl(dir, mu, "path",
                     [&](const fs::path& f, const SamplePath& p) { write_path_csv(f, p, h); });
}

RoughPathMeasure read_rough_measure(const fs::path& dir) {
  return read_measure_impl<GridRoughPath>(
      dir, "rough_path", [](const fs::path& f) { return read_rough_path_csv(f); });
}

PathMeasure read_path_measure(const fs::path& dir) {
  return read_measure_impl<SamplePath>(dir, "path",
                                       [](const fs::path& f) { return read_path_csv(f); });
}

void write_plan_csv(const fs::path& file, const TransportPlan& plan) {
  auto out = open_out(file);
  Json meta;
  meta["n_rows"] = plan.n_rows;
  meta["n_cols"] = plan.n_cols;
  meta["objective"] = plan.objective;
  out << "# " << meta.dump() << '\n';
  out << "row,col,mass\n";
  for (std::size_t t = 0; t < plan.mass.size(); ++t)
    out << plan.rows[t] << ',' << plan.cols[t] << ',' << format_double(plan.mass[t]) << '\n';
}

TransportPlan read_plan_csv(const fs::path& file) {
  const CsvFile csv = read_csv(file);
  if (csv.columns != std::vector<std::string>{"row", "col", "mass"})
    throw ArgumentError(file.string() + ": expected row,col,mass");
  TransportPlan plan;
  plan.n_rows = csv.meta.at("n_rows").get<std::size_t>();
  plan.n_cols = csv.meta.at("n_cols").get<std::size_t>();
  plan.objective = csv.meta.at("objective").get<double>();
  for (const auto& row : csv.rows) {
    plan.rows.push_back(parse_index(row[0]));
    plan.cols.push_back(parse_index(row[1]));
    plan.mass.push_back(parse_double(row[2]));
    if (plan.rows.back() >= plan.n_rows || plan.cols.back() >= plan.n_cols)
      throw ArgumentError(file.string() + ": index out of range");
  }
  return plan;
}

void write_trace_csv(const fs::path& file, const std::vector<double>& trace) {
  auto out = open_out(file);
  out << "iter,sup_marginal_w1\n";
  for (std::size_t i = 0; i < trace.size(); ++i) out << i + 1 << ',' << format_double(trace[i]) << '\n';
}

Json to_json(const KTerms& k) {
  Json j;
  j["term1"] = k.term1;
  j["term2"] = k.term2;
  j["term3"] = k.term3;
  j["total"] = k.total;
  j["k_prime"] = k.k_prime;
  return j;
}

Json to_json(const RateReport& r) {
  Json j;
  j["H"] = r.H;
  j["K"] = to_json(r.K);
  j["J"] = r.J;
  j["J_mismatch"] = r.J_mismatch;
  return j;
}

Json to_json(const RateVerdict& v) {
  Json j;
  j["kind"] = to_string(v.kind);
  if (v.kind == RateVerdictKind::Finite)
    j["value"] = v.value;
  else
    j["value"] = nullptr;
  j["worst_atom"] = v.worst_atom;
  j["worst_distance"] = v.worst_distance;
  j["reason"] = v.reason;
  return j;
}

void write_json(const fs::path& file, const Json& j) {
  auto out = open_out(file);
  out << j.dump(2) << '\n';
}

Json read_json(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ArgumentError("cannot read " + file.string());
  return Json::parse(in);
}

void write_table_csv(const fs::path& file, const Table& table) {
  auto out = open_out(file);
  write_line(out, table.columns);
  for (const auto& row : table.rows) {
    if (row.size() != table.columns.size()) throw ArgumentError("table row width differs from header");
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format_double(row[c]);
    out << '\n';
  }
}

Table read_table_csv(const fs::path& file) {
  const CsvFile csv = read_csv(file);
  Table t;
  t.columns = csv.columns;
  for (const auto& row : csv.rows) {
    std::vector<double> r;
    for (const auto& c : row) r.push_back(parse_double(c));
    t.rows.push_back(std::move(r));
  }
  return t;
}

}  // namespace roughchaos::io
