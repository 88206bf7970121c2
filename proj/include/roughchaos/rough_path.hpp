#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "roughchaos/grid.hpp"

namespace roughchaos {

/// Hoelder exponent alpha, restricted to the open interval (1/3, 1/2).
class HoelderExponent {
 public:
  constexpr HoelderExponent() = default;
  explicit HoelderExponent(double alpha);

  double value() const noexcept { return alpha_; }
  /// 1/alpha, the variation exponent.
  double variation_exponent() const noexcept { return 1.0 / alpha_; }

 private:
  double alpha_ = 0.4;
};

/// (X_{s,t}, XX_{s,t}): level-1 vector and row-major e x e level-2 matrix.
struct Increment {
  std::vector<double> level1;
  std::vector<double> level2;

  /// Chen product: (*this) followed by `next`.
  Increment& operator*=(const Increment& next);
};

/// Level-2 geometric rough path on a uniform grid. Stores the points X_{t_j}
/// and the level-2 increments of consecutive steps; every other pair is
/// reconstructed with Chen's relation. Immutable after construction.
class GridRoughPath {
 public:
  /// Throws ArgumentError if shapes disagree, values are non-finite, or a
  /// step violates Sym(XX) = 1/2 X (x) X beyond 1e-12 (scaled by 1 + |X|^2).
  GridRoughPath(std::size_t dim, Grid grid, std::vector<double> level1,
                std::vector<double> level2_steps);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t steps() const noexcept { return grid_.steps; }
  const Grid& grid() const noexcept { return grid_; }

  std::span<const double> point(std::size_t j) const {
    return {level1_.data() + j * dim_, dim_};
  }
  std::span<const double> step_area(std::size_t j) const {
    return {level2_.data() + j * dim_ * dim_, dim_ * dim_};
  }
  std::span<const double> level1() const noexcept { return level1_; }
  std::span<const double> level2_steps() const noexcept { return level2_; }

  /// Level-1 projection.
  SamplePath path() const { return SamplePath(dim_, grid_, level1_); }

  /// Sub-path on coordinates [first, first + count), keeping the matching
  /// level-2 block.
  GridRoughPath block(std::size_t first, std::size_t count) const;

  bool operator==(const GridRoughPath& other) const {
    return dim_ == other.dim_ && grid_ == other.grid_ && level1_ == other.level1_ &&
           level2_ == other.level2_;
  }

 private:
  std::size_t dim_;
  Grid grid_;
  std::vector<double> level1_;
  std::vector<double> level2_;
};

/// (X_{t_a,t_b}, XX_{t_a,t_b}) by left-to-right Chen composition of steps.
Increment chen_increment(const GridRoughPath& path, std::size_t a, std::size_t b);

/// Dilation delta_lambda: level 1 (and the start point) scaled by lambda,
/// level 2 by lambda^2.
GridRoughPath dilate(const GridRoughPath& path, double lambda);

/// Chen-composes blocks of `factor` consecutive steps into single steps.
GridRoughPath coarsen(const GridRoughPath& path, std::size_t factor);

enum class HoelderMode {
  Exact,   ///< all grid pairs, O(m^2)
  Dyadic,  ///< pairs (j, j + 2^l) only, O(m log m); a lower bound
};

/// sup |X_{s,t}|/|t-s|^a + sup |XX_{s,t}|^{1/2}/|t-s|^a over grid pairs.
/// Dyadic mode is honoured only when m > 4096.
double hoelder_norm(const GridRoughPath& path, HoelderExponent alpha,
                    HoelderMode mode = HoelderMode::Exact);

/// |X_0 - Y_0| + sup |X_{s,t} - Y_{s,t}|/|t-s|^a + sup |XX_{s,t} - YY_{s,t}|/|t-s|^{2a}.
/// Used as the library's homogeneous distance d_alpha.
double homogeneous_distance(const GridRoughPath& p, const GridRoughPath& q,
                            HoelderExponent alpha);

/// Homogeneous step size |X_{s,t}| + |XX_{s,t}|^{1/2}.
double homogeneous_size(std::span<const double> level1, std::span<const double> level2);

/// (1/alpha)-variation over [t_a, t_b] restricted to grid partition points,
/// by dynamic programming over all sub-partitions.
double p_variation(const GridRoughPath& path, std::size_t a, std::size_t b,
                   HoelderExponent alpha);

/// Grid indices tau_1 < tau_2 < ... of the greedy stopping times: each is the
/// first node where the (1/alpha)-variation since the previous one reaches 1.
std::vector<std::size_t> variation_stopping_times(const GridRoughPath& path,
                                                  HoelderExponent alpha);

/// N_alpha: number of stopping times strictly before the horizon.
std::size_t n_alpha(const GridRoughPath& path, HoelderExponent alpha);

}  // namespace roughchaos
