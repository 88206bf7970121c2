#include "roughchaos/lift.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "roughchaos/errors.hpp"
#include "roughchaos/parallel.hpp"
#include "roughchaos/rng.hpp"

namespace roughchaos {

void validate(const LiftConfig& cfg) {
  if (cfg.target_steps < 1) throw ArgumentError("LiftConfig.target_steps must be >= 1");
  if (cfg.refine_factor < 1) throw ArgumentError("LiftConfig.refine_factor must be >= 1");
}

GridRoughPath lift_piecewise_linear(std::size_t dim, std::span<const double> points,
                                    double horizon) {
  if (dim == 0 || points.size() % dim != 0) throw ArgumentError("points do not match dimension");
  const std::size_t count = points.size() / dim;
  if (count < 2) throw ArgumentError("lift_piecewise_linear needs at least 2 points");
  const std::size_t m = count - 1;
  std::vector<double> l2(m * dim * dim);
  for (std::size_t j = 0; j < m; ++j) {
    const double* a = points.data() + j * dim;
    const double* b = a + dim;
    double* xx = l2.data() + j * dim * dim;
    for (std::size_t r = 0; r < dim; ++r)
      for (std::size_t c = 0; c < dim; ++c) xx[r * dim + c] = 0.5 * (b[r] - a[r]) * (b[c] - a[c]);
  }
  return GridRoughPath(dim, Grid{m, horizon}, std::vector<double>(points.begin(), points.end()),
                       std::move(l2));
}

GridRoughPath lift_piecewise_linear(const SamplePath& path) {
  return lift_piecewise_linear(path.dim(), path.points(), path.grid().horizon);
}

SamplePath brownian_points(std::size_t dim, double horizon, std::size_t steps,
                           std::uint64_t seed, std::span<const double> start) {
  if (!start.empty() && start.size() != dim) throw ArgumentError("start point has wrong dimension");
  const Grid grid{steps, horizon};
  validate_grid(grid);
  const double sd = std::sqrt(grid.step());
  RandomStream stream(seed);
  std::vector<double> pts((steps + 1) * dim, 0.0);
  if (!start.empty()) std::copy(start.begin(), start.end(), pts.begin());
  for (std::size_t j = 0; j < steps; ++j)
    for (std::size_t i = 0; i < dim; ++i)
      pts[(j + 1) * dim + i] = pts[j * dim + i] + sd * stream.normal();
  return SamplePath(dim, grid, std::move(pts));
}

GridRoughPath lift_to_config(const SamplePath& fine, const LiftConfig& cfg) {
  validate(cfg);
  if (fine.steps() != cfg.fine_steps())
    throw ArgumentError("path has " + std::to_string(fine.steps()) + " steps, config expects " +
                        std::to_string(cfg.fine_steps()));
  return coarsen(lift_piecewise_linear(fine), cfg.refine_factor);
}

GridRoughPath lift_brownian(std::size_t dim, double horizon, const LiftConfig& cfg) {
  validate(cfg);
  return lift_to_config(brownian_points(dim, horizon, cfg.fine_steps(), cfg.seed), cfg);
}

GridRoughPath lift_k_layer(std::span<const SamplePath* const> layers, const LiftConfig& cfg) {
  return lift_to_config(stack_paths(layers), cfg);
}

GridRoughPath relift_from_subsample(const SamplePath& fine, std::size_t coarse_steps) {
  const std::size_t big = fine.steps();
  if (coarse_steps == 0 || big % coarse_steps != 0)
    throw ArgumentError("coarse resolution must divide the fine resolution");
  const std::size_t ratio = big / coarse_steps;
  const std::size_t e = fine.dim();
  std::vector<double> pts((big + 1) * e);
  for (std::size_t c = 0; c < coarse_steps; ++c) {
    auto a = fine.point(c * ratio);
    auto b = fine.point((c + 1) * ratio);
    for (std::size_t s = 0; s < ratio; ++s) {
      const double w = static_cast<double>(s) / static_cast<double>(ratio);
      for (std::size_t i = 0; i < e; ++i)
        pts[(c * ratio + s) * e + i] = s == 0 ? a[i] : a[i] + w * (b[i] - a[i]);
    }
  }
  auto last = fine.point(big);
  std::copy(last.begin(), last.end(), pts.begin() + static_cast<std::ptrdiff_t>(big * e));
  return lift_piecewise_linear(e, pts, fine.grid().horizon);
}

std::vector<ApproximationRow> approximation_error_decay(const ApproximationSettings& s) {
  for (std::size_t i = 1; i < s.m_list.size(); ++i)
    if (s.m_list[i] <= s.m_list[i - 1]) throw ArgumentError("m_list must be increasing");
  for (std::size_t m : s.m_list)
    if (m == 0 || s.fine_steps % m != 0)
      throw ArgumentError("every m must divide the fine resolution");
  if (s.samples == 0) throw ArgumentError("need at least one sample");
  const std::size_t cols = s.m_list.size();
  std::vector<double> dist(s.samples * cols);
  parallel_for(s.samples, s.threads, [&](std::size_t k) {
    const SamplePath fine =
        brownian_points(s.dim, s.horizon, s.fine_steps, split_seed(s.seed, k));
    const GridRoughPath truth = lift_piecewise_linear(fine);
    for (std::size_t c = 0; c < cols; ++c)
      dist[k * cols + c] =
          homogeneous_distance(truth, relift_from_subsample(fine, s.m_list[c]), s.alpha);
  });
  std::vector<ApproximationRow> rows;
  for (std::size_t c = 0; c < cols; ++c) {
    const double m = static_cast<double>(s.m_list[c]);
    const double scale = s.c * std::pow(m, s.eta / 2.0);
    double sum = 0.0, sq = 0.0, ex = 0.0;
    for (std::size_t k = 0; k < s.samples; ++k) {
      const double d = dist[k * cols + c];
      sum += d;
      sq += d * d;
      ex += std::exp(scale * d);
    }
    const double n = static_cast<double>(s.samples);
    const double mean = sum / n;
    const double var = s.samples > 1 ? std::max(0.0, (sq - n * mean * mean) / (n - 1.0)) : 0.0;
    rows.push_back({s.m_list[c], mean, std::sqrt(var), ex / n});
  }
  return rows;
}

std::size_t tuple_count(std::size_t n, std::size_t k) {
  std::size_t total = 1;
  for (std::size_t i = 0; i < k; ++i) {
    if (n != 0 && total > std::numeric_limits<std::size_t>::max() / n)
      return std::numeric_limits<std::size_t>::max();
    total *= n;
  }
  return total;
}

RoughPathMeasure map_F_k(const PathMeasure& measure, std::size_t k, std::size_t guard,
                         const LiftConfig* cfg) {
  if (k == 0) throw ArgumentError("k must be >= 1");
  const std::size_t n = measure.size();
  const std::size_t total = tuple_count(n, k);
  if (total > guard)
    throw ResourceError("F^k would create " + std::to_string(n) + "^" + std::to_string(k) +
                        " atoms, above the guard of " + std::to_string(guard) +
                        "; subsample the measure first");
  LiftConfig own{measure.grid().steps, 1, 0};
  const LiftConfig& use = cfg ? *cfg : own;
  std::vector<RoughPathMeasure::AtomPtr> atoms;
  std::vector<double> weights;
  atoms.reserve(total);
  weights.reserve(total);
  std::vector<std::size_t> digits(k, 0);
  std::vector<const SamplePath*> layers(k);
  for (std::size_t t = 0; t < total; ++t) {
    double w = 1.0;
    for (std::size_t l = 0; l < k; ++l) {
      layers[l] = &measure.atom(digits[l]);
      w *= measure.weight(digits[l]);
    }
    atoms.push_back(std::make_shared<const GridRoughPath>(lift_k_layer(layers, use)));
    weights.push_back(w);
    for (std::size_t l = k; l-- > 0;) {
      if (++digits[l] < n) break;
      digits[l] = 0;
    }
  }
  MeasureInfo info = measure.info();
  info.layers = k;
  info.tuple_count = total;
  info.sampled = false;
  // Products of weights can drift off 1 by rounding when n^k is large.
  const double sum = compensated_sum(weights);
  if (std::abs(sum - 1.0) > 1e-13)
    for (double& w : weights) w /= sum;
  return RoughPathMeasure(std::move(atoms), std::move(weights), std::move(info));
}

}  // namespace roughchaos
