#include "roughchaos/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "roughchaos/errors.hpp"

namespace roughchaos {

void validate_grid(const Grid& grid) {
  if (grid.steps < 1) throw ArgumentError("grid needs at least one step");
  if (!(grid.horizon > 0.0) || !std::isfinite(grid.horizon))
    throw ArgumentError("grid horizon must be positive and finite");
}

SamplePath::SamplePath(std::size_t dim, Grid grid, std::vector<double> points)
    : dim_(dim), grid_(grid), points_(std::move(points)) {
  validate_grid(grid_);
  if (dim_ == 0) throw ArgumentError("path dimension must be positive");
  if (points_.size() != (grid_.steps + 1) * dim_)
    throw ArgumentError("path expects " + std::to_string((grid_.steps + 1) * dim_) +
                        " values, got " + std::to_string(points_.size()));
}

SamplePath SamplePath::slice(std::size_t first, std::size_t count) const {
  if (count == 0 || first + count > dim_) throw ArgumentError("coordinate slice out of range");
  std::vector<double> out;
  out.reserve((steps() + 1) * count);
  for (std::size_t j = 0; j <= steps(); ++j) {
    auto p = point(j);
    out.insert(out.end(), p.begin() + first, p.begin() + first + count);
  }
  return SamplePath(count, grid_, std::move(out));
}

SamplePath stack_paths(std::span<const SamplePath* const> layers) {
  if (layers.empty()) throw ArgumentError("no layers to stack");
  const Grid grid = layers.front()->grid();
  std::size_t dim = 0;
  for (const SamplePath* layer : layers) {
    if (!(layer->grid() == grid)) throw ArgumentError("layers do not share a grid");
    dim += layer->dim();
  }
  std::vector<double> points;
  points.reserve((grid.steps + 1) * dim);
  for (std::size_t j = 0; j <= grid.steps; ++j)
    for (const SamplePath* layer : layers) {
      auto p = layer->point(j);
      points.insert(points.end(), p.begin(), p.end());
    }
  return SamplePath(dim, grid, std::move(points));
}

double euclidean_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

namespace {

double seminorm_of_difference(const SamplePath& p, const SamplePath* q, double beta) {
  const std::size_t m = p.steps();
  const std::size_t e = p.dim();
  std::vector<double> scale(m + 1);
  for (std::size_t l = 1; l <= m; ++l)
    scale[l] = std::pow(p.grid().step() * static_cast<double>(l), beta);
  double sup = 0.0;
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = a + 1; b <= m; ++b) {
      double s = 0.0;
      for (std::size_t i = 0; i < e; ++i) {
        double d = p.point(b)[i] - p.point(a)[i];
        if (q) d -= q->point(b)[i] - q->point(a)[i];
        s += d * d;
      }
      sup = std::max(sup, std::sqrt(s) / scale[b - a]);
    }
  return sup;
}

}  // namespace

double hoelder_seminorm(const SamplePath& path, double beta) {
  return seminorm_of_difference(path, nullptr, beta);
}

double hoelder_path_distance(const SamplePath& p, const SamplePath& q, double beta) {
  if (p.dim() != q.dim() || !(p.grid() == q.grid()))
    throw ArgumentError("paths must share grid and dimension");
  double d0 = 0.0;
  for (std::size_t i = 0; i < p.dim(); ++i) {
    const double d = p.point(0)[i] - q.point(0)[i];
    d0 += d * d;
  }
  return std::sqrt(d0) + seminorm_of_difference(p, &q, beta);
}

}  // namespace roughchaos
