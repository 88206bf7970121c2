// Python bindings: rough path lifts, exact transport and the experiment runner.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "roughchaos/config.hpp"
#include "roughchaos/errors.hpp"
#include "roughchaos/experiments.hpp"
#include "roughchaos/io.hpp"
#include "roughchaos/lift.hpp"
#include "roughchaos/metrics.hpp"
#include "roughchaos/rough_path.hpp"
#include "roughchaos/transport.hpp"

namespace py = pybind11;
using namespace roughchaos;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<double> flat(const Array& a) { return {a.data(), a.data() + a.size()}; }

Array matrix(std::span<const double> v, std::size_t rows, std::size_t cols) {
  Array out({rows, cols});
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

std::size_t cols_of(const Array& a, const char* what) {
  if (a.ndim() == 1) return 1;
  if (a.ndim() != 2) throw ArgumentError(std::string(what) + " must be one- or two-dimensional");
  return static_cast<std::size_t>(a.shape(1));
}

Array uniform_weights(std::size_t n) {
  Array w(n);
  std::fill(w.mutable_data(), w.mutable_data() + n, 1.0 / static_cast<double>(n));
  return w;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Rough-path mean-field toolkit";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  py::class_<GridRoughPath>(m, "RoughPath")
      .def(py::init([](const Array& points, const Array& areas, double horizon) {
             if (points.ndim() != 2) throw ArgumentError("points must have shape (m + 1, d)");
             const auto steps = static_cast<std::size_t>(points.shape(0)) - 1;
             const auto d = static_cast<std::size_t>(points.shape(1));
             if (areas.size() != static_cast<py::ssize_t>(steps * d * d))
               throw ArgumentError("areas must have shape (m, d, d)");
             return GridRoughPath(d, Grid{steps, horizon}, flat(points), flat(areas));
           }),
           py::arg("points"), py::arg("areas"), py::arg("horizon") = 1.0)
      .def_property_readonly("dim", &GridRoughPath::dim)
      .def_property_readonly("steps", &GridRoughPath::steps)
      .def_property_readonly("horizon", [](const GridRoughPath& p) { return p.grid().horizon; })
      .def_property_readonly("points",
                             [](const GridRoughPath& p) { return matrix(p.level1(), p.steps() + 1, p.dim()); })
      .def_property_readonly("areas",
                             [](const GridRoughPath& p) {
                               Array a({p.steps(), p.dim(), p.dim()});
                               std::copy(p.level2_steps().begin(), p.level2_steps().end(), a.mutable_data());
                               return a;
                             })
      .def(
          "increment",
          [](const GridRoughPath& p, std::size_t a, std::size_t b) {
            const Increment inc = chen_increment(p, a, b);
            return py::make_tuple(matrix(inc.level1, 1, p.dim()).reshape({p.dim()}),
                                  matrix(inc.level2, p.dim(), p.dim()));
          },
          py::arg("a"), py::arg("b"), "(X_ab, XX_ab) between grid nodes a < b.")
      .def("__eq__", [](const GridRoughPath& a, const GridRoughPath& b) { return a == b; });

  m.def(
      "lift_piecewise_linear",
      [](const Array& points, double horizon) {
        if (points.ndim() != 2) throw ArgumentError("points must have shape (m + 1, d)");
        return lift_piecewise_linear(static_cast<std::size_t>(points.shape(1)), flat(points), horizon);
      },
      py::arg("points"), py::arg("horizon") = 1.0);
  m.def(
      "lift_brownian",
      [](std::size_t dim, double horizon, std::size_t steps, std::size_t refine, std::uint64_t seed) {
        return lift_brownian(dim, horizon, LiftConfig{steps, refine, seed});
      },
      py::arg("dim"), py::arg("horizon") = 1.0, py::arg("steps") = 64, py::arg("refine") = 16,
      py::arg("seed") = 0);
  m.def(
      "homogeneous_distance",
      [](const GridRoughPath& p, const GridRoughPath& q, double alpha) {
        return homogeneous_distance(p, q, HoelderExponent(alpha));
      },
      py::arg("p"), py::arg("q"), py::arg("alpha") = 0.4);
  m.def(
      "read_rough_path_csv", [](const std::filesystem::path& f) { return io::read_rough_path_csv(f); },
      py::arg("file"));
  m.def(
      "write_rough_path_csv",
      [](const std::filesystem::path& f, const GridRoughPath& p) { io::write_rough_path_csv(f, p); },
      py::arg("file"), py::arg("path"));

  m.def(
      "solve_transport",
      [](const Array& a, const Array& b, const Array& cost) {
        const TransportPlan plan = solve_transport(flat(a), flat(b), flat(cost));
        py::dict out;
        out["objective"] = plan.objective;
        out["rows"] = plan.rows;
        out["cols"] = plan.cols;
        out["mass"] = plan.mass;
        return out;
      },
      py::arg("a"), py::arg("b"), py::arg("cost"),
      "Exact balanced transport; cost is row-major with shape (len(a), len(b)).");
  m.def(
      "wasserstein1",
      [](const Array& x, const Array& y, std::optional<Array> wx, std::optional<Array> wy) {
        const std::size_t dim = cols_of(x, "x");
        if (cols_of(y, "y") != dim) throw ArgumentError("x and y differ in dimension");
        const std::size_t nx = x.size() / dim, ny = y.size() / dim;
        const Array ax = wx ? *wx : uniform_weights(nx), ay = wy ? *wy : uniform_weights(ny);
        return wasserstein1_points(flat(x), flat(ax), flat(y), flat(ay), dim).value;
      },
      py::arg("x"), py::arg("y"), py::arg("wx") = py::none(), py::arg("wy") = py::none(),
      "Exact W1 between weighted point clouds with the euclidean metric.");

  m.def("experiment_ids", &experiment_ids);
  m.def(
      "run_experiment",
      [](const std::string& id, const std::string& config_text, std::optional<std::uint64_t> seed,
         unsigned threads, std::optional<std::filesystem::path> out) {
        Config cfg = Config::parse(config_text);
        RunOptions o;
        o.seed = seed;
        o.threads = threads;
        ExperimentResult r;
        {
          py::gil_scoped_release release;
          r = run_experiment(id, cfg, o);
        }
        if (out) write_outputs(*out, r);
        return r.report.dump();
      },
      py::arg("experiment"), py::arg("config"), py::arg("seed") = py::none(), py::arg("threads") = 1,
      py::arg("out") = py::none(), "Runs an experiment from config text; returns report.json as a string.");
  m.def("git_blob_sha1", &git_blob_sha1, py::arg("content"));
}
