#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "roughchaos/empirical_measure.hpp"
#include "roughchaos/grid.hpp"
#include "roughchaos/rough_path.hpp"

namespace roughchaos {

/// Resolution of a lift: `target_steps` output steps, each refined into
/// `refine_factor` piecewise-linear sub-steps that carry the area.
struct LiftConfig {
  std::size_t target_steps = 64;
  std::size_t refine_factor = 16;
  std::uint64_t seed = 0;

  std::size_t fine_steps() const noexcept { return target_steps * refine_factor; }
};

void validate(const LiftConfig& cfg);

/// Exact level-2 lift of the piecewise-linear interpolant of `points`
/// ((steps + 1) x dim, row-major) on [0, horizon]; each step has XX = dX (x) dX / 2.
GridRoughPath lift_piecewise_linear(std::size_t dim, std::span<const double> points,
                                    double horizon);
GridRoughPath lift_piecewise_linear(const SamplePath& path);

/// Standard Brownian points from `start` on a grid of `steps` steps, driven by
/// stream `seed`.
SamplePath brownian_points(std::size_t dim, double horizon, std::size_t steps,
                           std::uint64_t seed, std::span<const double> start = {});

/// Stratonovich lift of a Brownian path: simulated on m * r steps, lifted
/// piecewise-linearly and Chen-coarsened to m steps. Starts at the origin.
GridRoughPath lift_brownian(std::size_t dim, double horizon, const LiftConfig& cfg);

/// Lift of a fine path coarsened to cfg.target_steps; the path must have
/// cfg.fine_steps() steps.
GridRoughPath lift_to_config(const SamplePath& fine, const LiftConfig& cfg);

/// Joint lift of k layers over R^{kd}: stacks level-1 data and lifts the joint
/// fine path, so all cross areas between layers are present. Layers must
/// share a grid with cfg.fine_steps() steps.
GridRoughPath lift_k_layer(std::span<const SamplePath* const> layers, const LiftConfig& cfg);

/// Piecewise-linear re-lift of a fine path from its values at `coarse_steps`
/// evenly spaced nodes, expressed on the original fine grid.
GridRoughPath relift_from_subsample(const SamplePath& fine, std::size_t coarse_steps);

struct ApproximationRow {
  std::size_t m = 0;
  double mean_distance = 0.0;
  double sd_distance = 0.0;
  double exp_moment = 0.0;  ///< sample mean of exp(c m^{eta/2} d_alpha)
};

struct ApproximationSettings {
  std::size_t dim = 2;
  double horizon = 1.0;
  HoelderExponent alpha{0.4};
  std::vector<std::size_t> m_list{8, 32, 128};
  std::size_t fine_steps = 512;
  std::size_t samples = 1000;
  double c = 0.1;
  double eta = 0.05;
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

/// d_alpha between the fine Brownian lift and its piecewise-linear re-lift at
/// m points of the same sample, for every m in the list.
std::vector<ApproximationRow> approximation_error_decay(const ApproximationSettings& settings);

/// Pushforward of the k-fold product of `measure` under the joint lift: all
/// k-tuples with repetition, in lexicographic order, weights multiplied.
/// Atoms are lifted on their own grid unless `cfg` asks for coarsening.
/// Throws ResourceError when n^k exceeds `guard`.
RoughPathMeasure map_F_k(const PathMeasure& measure, std::size_t k,
                         std::size_t guard = 1'000'000, const LiftConfig* cfg = nullptr);

/// Number of k-tuples n^k, saturating at SIZE_MAX.
std::size_t tuple_count(std::size_t n, std::size_t k);

}  // namespace roughchaos
