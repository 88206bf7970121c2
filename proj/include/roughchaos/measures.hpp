#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "roughchaos/empirical_measure.hpp"
#include "roughchaos/lift.hpp"
#include "roughchaos/particle.hpp"

namespace roughchaos {

/// L_n: uniform weights on the ensemble's paths (shared, not copied).
PathMeasure empirical_from_ensemble(const ParticleEnsemble& ens);

struct EnhancedOptions {
  /// Largest n^k enumerated exactly.
  std::size_t tuple_budget = 1'000'000;
  /// Seed for uniform tuple sampling above budget; without it an oversized
  /// request is a ResourceError.
  std::optional<std::uint64_t> sampling_seed;
  /// Output resolution; nullopt lifts on the ensemble grid.
  std::optional<LiftConfig> lift;
};

/// Enhanced k-layer empirical measure. Exact enumeration equals
/// map_F_k(empirical_from_ensemble(ens), k) atom for atom; above budget,
/// `tuple_budget` tuples are drawn uniformly with weight 1 / tuple_budget.
RoughPathMeasure enhanced_k_layer(const ParticleEnsemble& ens, std::size_t k,
                                  const EnhancedOptions& options = {});

/// Level-1 path of the first layer of every atom; bitwise-equal results merge.
PathMeasure project_pi1(const RoughPathMeasure& mu);

/// First two layers (level 1 and their 2d x 2d level-2 block); bitwise-equal
/// results merge. k = 2 returns the input unchanged.
RoughPathMeasure project_Pi2(const RoughPathMeasure& mu);

/// sum_a w_a (|X_0| + ||X||_alpha + N_alpha(X))^{1 + eps}.
double modified_moment(const RoughPathMeasure& mu, HoelderExponent alpha, double eps);

/// Law Q on path space with a drift representation: under Q the coordinate
/// process is X_0 + int g dt + W. drift[i] holds g at the m + 1 grid nodes of
/// path i; the value at node j may depend on the path only up to t_j.
struct GirsanovMeasure {
  std::vector<std::shared_ptr<const SamplePath>> paths;
  std::vector<std::vector<double>> drift;
  /// nu = lambda, so H(nu | lambda) = 0.
  bool initial_matches_reference = true;
  /// log d nu / d lambda; required when the initial laws differ.
  InitialLaw::LogRatio log_initial_ratio;

  std::size_t size() const noexcept { return paths.size(); }
  PathMeasure measure() const;
  void validate() const;
};

/// Q with X = X_0 + theta t + W, X_0 ~ law; the drift is exactly theta.
GirsanovMeasure constant_drift_measure(const InitialLaw& law, std::vector<double> theta,
                                       std::size_t n, double horizon, std::size_t steps,
                                       std::uint64_t seed);

/// Trapezoid rule on a uniform grid for values at the m + 1 nodes.
double trapezoid(const std::vector<double>& values, double step);

}  // namespace roughchaos
