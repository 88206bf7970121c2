#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>

#include "doctest.h"
#include "roughchaos/errors.hpp"
#include "roughchaos/io.hpp"
#include "roughchaos/lift.hpp"
#include "roughchaos/measures.hpp"
#include "roughchaos/metrics.hpp"
#include "roughchaos/rng.hpp"

using namespace roughchaos;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const char* name) {
  const fs::path p = fs::temp_directory_path() / "roughchaos_test_io" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("format_double round-trips awkward values bit for bit") {
  RandomStream rng(3);
  std::vector<double> values{0.1, 1.0 / 3.0, -0.0, 5e-324, std::numeric_limits<double>::max(),
                             std::nextafter(1.0, 2.0), 123456789.123456789};
  for (int i = 0; i < 1000; ++i) values.push_back(std::ldexp(rng.normal(), int(rng.index(200)) - 100));
  for (double v : values) {
    const double back = io::parse_double(io::format_double(v));
    CHECK(std::memcmp(&back, &v, sizeof v) == 0);
  }
  CHECK_THROWS_AS(io::parse_double("1.5x"), ArgumentError);
  CHECK_THROWS_AS(io::parse_double(""), ArgumentError);
}

TEST_CASE("rough path CSV round-trips exactly with its header") {
  const fs::path dir = scratch("rough");
  const GridRoughPath p = lift_brownian(3, 1.7, LiftConfig{16, 4, 99});
  io::PathHeader h;
  h.alpha = 0.37;
  h.lineage = {99, 18446744073709551615ull};
  io::write_rough_path_csv(dir / "p.csv", p, h);
  io::PathHeader back;
  const GridRoughPath q = io::read_rough_path_csv(dir / "p.csv", &back);
  CHECK(q == p);
  CHECK(back.alpha == 0.37);
  CHECK(back.lineage == h.lineage);

  std::ifstream in(dir / "p.csv");
  std::string first, second;
  std::getline(in, first);
  std::getline(in, second);
  CHECK(first.rfind("# {", 0) == 0);
  CHECK(second.rfind("t,x_1,x_2,x_3,a_1_1,a_1_2", 0) == 0);
}

TEST_CASE("sample path CSV round-trips exactly") {
  const fs::path dir = scratch("path");
  const SamplePath p = brownian_points(2, 1.0, 20, 5, std::vector<double>{0.3, -1.0});
  io::write_path_csv(dir / "p.csv", p);
  CHECK(io::read_path_csv(dir / "p.csv") == p);
}

TEST_CASE("ensemble directory round-trips") {
  const fs::path dir = scratch("ensemble");
  const ParticleEnsemble ens = simulate_ips(interactions::attraction(2, 0.5),
                                            laws::gaussian({0.0, 1.0}, 1.0), 6, 1.0, 10, 42);
  io::write_ensemble(dir, ens);
  CHECK(fs::exists(dir / "manifest.json"));
  const ParticleEnsemble back = io::read_ensemble(dir);
  REQUIRE(back.size() == ens.size());
  CHECK(back.grid == ens.grid);
  CHECK(back.seeds == ens.seeds);
  CHECK(back.seed == ens.seed);
  CHECK(back.interaction_id == ens.interaction_id);
  CHECK(back.increments == ens.increments);
  for (std::size_t i = 0; i < ens.size(); ++i) CHECK(back.path(i) == ens.path(i));
}

TEST_CASE("measure manifests round-trip and keep shared atoms shared") {
  const fs::path dir = scratch("measure");
  const ParticleEnsemble ens = simulate_brownian_ensemble(laws::gaussian({0.0}, 1.0), 3, 1.0, 8, 7);
  const RoughPathMeasure f3 = enhanced_k_layer(ens, 3);
  const RoughPathMeasure p2 = project_Pi2(f3);
  io::write_measure(dir / "p2", p2);
  const RoughPathMeasure back = io::read_rough_measure(dir / "p2");
  REQUIRE(back.size() == p2.size());
  for (std::size_t a = 0; a < p2.size(); ++a) {
    CHECK(back.atom(a) == p2.atom(a));
    CHECK(back.weight(a) == p2.weight(a));
  }
  CHECK(back.info().layers == p2.info().layers);
  CHECK(back.info().lineage == p2.info().lineage);

  // A measure listing one atom twice writes one file and reads back one pointer.
  const auto atom = std::make_shared<const SamplePath>(ens.path(0));
  const PathMeasure twice({atom, atom}, {0.25, 0.75});
  io::write_measure(dir / "twice", twice);
  std::size_t files = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir / "twice" / "atoms")) ++files;
  CHECK(files == 1);
  const PathMeasure tb = io::read_path_measure(dir / "twice");
  CHECK(tb.atom_ptr(0) == tb.atom_ptr(1));
  CHECK(tb.weight(1) == 0.75);
  CHECK_THROWS_AS(io::read_rough_measure(dir / "twice"), ArgumentError);
}

TEST_CASE("transport plan triplets round-trip") {
  const fs::path dir = scratch("plan");
  const std::vector<double> x{0.0, 1.0, 3.0}, y{0.5, 2.0};
  const std::vector<double> wx{0.2, 0.3, 0.5}, wy{0.6, 0.4};
  const WassersteinResult r = wasserstein1_points(x, wx, y, wy, 1);
  io::write_plan_csv(dir / "plan.csv", r.plan);
  const TransportPlan back = io::read_plan_csv(dir / "plan.csv");
  CHECK(back.rows == r.plan.rows);
  CHECK(back.cols == r.plan.cols);
  CHECK(back.mass == r.plan.mass);
  CHECK(back.objective == r.plan.objective);
  CHECK(back.marginal_error(wx, wy) < 1e-15);
}

TEST_CASE("tables and rate reports serialise") {
  const fs::path dir = scratch("table");
  io::Table t{{"x", "y", "lo", "hi"}, {{1, 0.5, 0.25, 0.75}, {2, 1.0 / 3.0, 0.0, 1.0}}};
  io::write_table_csv(dir / "t.csv", t);
  const io::Table back = io::read_table_csv(dir / "t.csv");
  CHECK(back.columns == t.columns);
  CHECK(back.rows == t.rows);

  RateReport r;
  r.H = 1.5;
  r.K.term1 = 2.0;
  r.K.term2 = 0.25;
  r.K.term3 = 0.5;
  r.K.total = 1.25;
  r.J = 0.25;
  const io::Json j = io::to_json(r);
  CHECK(j.at("K").at("term3").get<double>() == 0.5);
  CHECK(j.at("J").get<double>() == 0.25);
  io::write_json(dir / "rate.json", j);
  CHECK(io::read_json(dir / "rate.json") == j);

  io::write_trace_csv(dir / "trace.csv", {0.5, 0.01});
  const io::Table tr = io::read_table_csv(dir / "trace.csv");
  CHECK(tr.columns == std::vector<std::string>{"iter", "sup_marginal_w1"});
  CHECK(tr.rows[1][1] == 0.01);
}
