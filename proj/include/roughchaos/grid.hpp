#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace roughchaos {

/// Uniform time grid 0 = t_0 < ... < t_m = horizon.
struct Grid {
  std::size_t steps = 1;
  double horizon = 1.0;

  double step() const noexcept { return horizon / static_cast<double>(steps); }
  double time(std::size_t j) const noexcept {
    return horizon * static_cast<double>(j) / static_cast<double>(steps);
  }
  bool operator==(const Grid&) const = default;
};

void validate_grid(const Grid& grid);

/// Level-1 path sampled on a grid: (steps + 1) points in R^dim, row-major.
class SamplePath {
 public:
  SamplePath() = default;
  SamplePath(std::size_t dim, Grid grid, std::vector<double> points);

  std::size_t dim() const noexcept { return dim_; }
  const Grid& grid() const noexcept { return grid_; }
  std::size_t steps() const noexcept { return grid_.steps; }

  std::span<const double> point(std::size_t j) const {
    return {points_.data() + j * dim_, dim_};
  }
  std::span<const double> points() const noexcept { return points_; }

  /// Coordinates [first, first + count) of every point.
  SamplePath slice(std::size_t first, std::size_t count) const;

  bool operator==(const SamplePath& other) const {
    return dim_ == other.dim_ && grid_ == other.grid_ && points_ == other.points_;
  }

 private:
  std::size_t dim_ = 0;
  Grid grid_{};
  std::vector<double> points_;
};

/// Stack k paths on a shared grid into one path over R^{sum of dims}.
SamplePath stack_paths(std::span<const SamplePath* const> layers);

double euclidean_norm(std::span<const double> v);

/// sup over grid pairs of |X_t - X_s| / |t - s|^beta.
double hoelder_seminorm(const SamplePath& path, double beta);

/// |X_0 - Y_0| + beta-Hoelder seminorm of X - Y; paths must share grid and dim.
double hoelder_path_distance(const SamplePath& p, const SamplePath& q, double beta);

}  // namespace roughchaos
