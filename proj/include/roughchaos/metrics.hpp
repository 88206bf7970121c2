#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "roughchaos/empirical_measure.hpp"
#include "roughchaos/transport.hpp"

namespace roughchaos {

enum class GroundMetric {
  HoelderPath,        ///< |X_0 - Y_0| + beta-Hoelder seminorm of X - Y (level 1)
  HomogeneousRough,   ///< the library d_alpha on rough paths
  EuclideanEndpoint,  ///< |X_T - Y_T|
};

const char* to_string(GroundMetric g);

struct WassersteinOptions {
  double beta = 0.45;
  HoelderExponent alpha{0.4};
  /// Largest n_mu * n_nu solved exactly; above it both measures are resampled
  /// to floor(sqrt(budget)) atoms each.
  std::size_t budget = 1'000'000;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

struct WassersteinResult {
  double value = 0.0;
  TransportPlan plan;
  /// "exact" or "subsampled".
  std::string mode = "exact";
};

WassersteinResult wasserstein1(const PathMeasure& mu, const PathMeasure& nu, GroundMetric ground,
                               const WassersteinOptions& options = {});
WassersteinResult wasserstein1(const RoughPathMeasure& mu, const RoughPathMeasure& nu,
                               GroundMetric ground, const WassersteinOptions& options = {});

/// Exact W_1 between weighted point clouds in R^dim (rows of `x`, `y`) with
/// the euclidean ground metric.
WassersteinResult wasserstein1_points(std::span<const double> x, std::span<const double> wx,
                                      std::span<const double> y, std::span<const double> wy,
                                      std::size_t dim);

/// W_1 on the line: integral of |F - G| for weighted samples.
double wasserstein1_line(std::span<const double> x, std::span<const double> wx,
                         std::span<const double> y, std::span<const double> wy);

}  // namespace roughchaos
