#include "roughchaos/mckean_vlasov.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "roughchaos/errors.hpp"
#include "roughchaos/lift.hpp"
#include "roughchaos/metrics.hpp"
#include "roughchaos/parallel.hpp"

namespace roughchaos {

FlowMeasure::FlowMeasure(PathMeasure measure) : measure_(std::move(measure)) {
  const std::size_t n = measure_.size(), d = measure_.dim(), m = measure_.grid().steps;
  marginals_.assign(m + 1, std::vector<double>(n * d));
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t s = 0; s <= m; ++s) {
      const auto p = measure_.atom(a).point(s);
      std::copy(p.begin(), p.end(), marginals_[s].begin() + a * d);
    }
}

void FlowMeasure::convolve(const InteractionField& b, std::size_t s, const double* x,
                           double* out) const {
  const std::size_t d = dim();
  thread_local std::vector<double> val;
  val.resize(d);
  std::fill(out, out + d, 0.0);
  const double* atoms = marginals_[s].data();
  for (std::size_t a = 0; a < size(); ++a) {
    b.b(x, atoms + a * d, val.data());
    const double w = measure_.weight(a);
    for (std::size_t r = 0; r < d; ++r) out[r] += w * val[r];
  }
}

namespace {

struct FrozenPaths {
  std::vector<std::shared_ptr<const SamplePath>> paths;
  std::vector<std::vector<double>> drift;
};

FrozenPaths simulate_frozen(const InteractionField& b, const FlowMeasure& q,
                            const InitialLaw& law, std::size_t count, std::uint64_t seed,
                            unsigned threads) {
  const std::size_t d = b.dim;
  if (q.dim() != d || law.dim != d) throw ArgumentError("flow, law and interaction dimensions differ");
  if (count == 0) throw ArgumentError("need at least one copy");
  const Grid grid = q.grid();
  const std::size_t m = grid.steps;
  const double h = grid.step(), sd = std::sqrt(h);
  FrozenPaths out;
  out.paths.resize(count);
  out.drift.assign(count, std::vector<double>((m + 1) * d));
  parallel_for(count, threads, [&](std::size_t i) {
    RandomStream rng(split_seed(seed, i));
    std::vector<double> pts((m + 1) * d), noise(m * d);
    law.sample(rng, std::span<double>(pts.data(), d));
    for (double& v : noise) v = sd * rng.normal();
    double* g = out.drift[i].data();
    for (std::size_t j = 0; j <= m; ++j) {
      q.convolve(b, j, pts.data() + j * d, g + j * d);
      if (j == m) break;
      for (std::size_t r = 0; r < d; ++r) {
        const double v = pts[j * d + r] + g[j * d + r] * h + noise[j * d + r];
        if (!std::isfinite(v)) throw DivergenceError("copy " + std::to_string(i) + " diverged", j + 1);
        pts[(j + 1) * d + r] = v;
      }
    }
    out.paths[i] = std::make_shared<const SamplePath>(d, grid, std::move(pts));
  });
  return out;
}

}  // namespace

PhiResult phi_map(const InteractionField& b, const FlowMeasure& q, const InitialLaw& law,
                  std::size_t n_out, std::uint64_t seed, unsigned threads) {
  FrozenPaths fp = simulate_frozen(b, q, law, n_out, seed, threads);
  GirsanovMeasure rep;
  rep.paths = fp.paths;
  rep.drift = std::move(fp.drift);
  MeasureInfo info;
  info.lineage = {seed};
  std::vector<PathMeasure::AtomPtr> atoms(fp.paths.begin(), fp.paths.end());
  return PhiResult{FlowMeasure(PathMeasure::uniform(std::move(atoms), std::move(info))),
                   std::move(rep)};
}

double sup_marginal_w1(const FlowMeasure& a, const FlowMeasure& b) {
  if (a.dim() != b.dim() || !(a.grid() == b.grid()))
    throw ArgumentError("flows must share grid and dimension");
  const std::size_t d = a.dim(), m = a.grid().steps;
  constexpr std::size_t kCap = 1000;
  double worst = 0.0;
  for (std::size_t s = 0; s <= m; ++s) {
    const auto x = a.marginal(s), y = b.marginal(s);
    double dist;
    if (d == 1) {
      dist = wasserstein1_line(x, a.measure().weights(), y, b.measure().weights());
    } else {
      const std::size_t na = std::min(a.size(), kCap), nb = std::min(b.size(), kCap);
      std::vector<double> wa(na, 1.0 / double(na)), wb(nb, 1.0 / double(nb));
      if (na == a.size()) wa = a.measure().weights();
      if (nb == b.size()) wb = b.measure().weights();
      dist = wasserstein1_points(x.subspan(0, na * d), wa, y.subspan(0, nb * d), wb, d).value;
    }
    worst = std::max(worst, dist);
  }
  return worst;
}

FixedPointResult solve_mkv_fixed_point(const InteractionField& b, const InitialLaw& law,
                                       std::size_t n_out, double horizon, std::size_t steps,
                                       double tol, std::size_t max_iter, std::uint64_t seed,
                                       unsigned threads) {
  if (!(tol > 0.0)) throw ArgumentError("tolerance must be positive");
  if (max_iter == 0) throw ArgumentError("max_iter must be positive");
  const ParticleEnsemble start = simulate_brownian_ensemble(law, n_out, horizon, steps, seed, threads);
  FlowMeasure current(empirical_from_ensemble(start));
  std::vector<double> trace;
  for (std::size_t it = 0; it < max_iter; ++it) {
    PhiResult next = phi_map(b, current, law, n_out, seed, threads);
    trace.push_back(sup_marginal_w1(next.flow, current));
    if (trace.back() < tol) return FixedPointResult{std::move(next), std::move(trace)};
    current = next.flow;
  }
  throw ConvergenceError("McKean-Vlasov iteration did not reach tolerance " + std::to_string(tol) +
                             " in " + std::to_string(max_iter) + " iterations",
                         trace);
}

RoughPathMeasure sample_iid_mkv(const FlowMeasure& flow, const InteractionField& b,
                                const InitialLaw& law, std::size_t k, std::size_t n_samples,
                                std::uint64_t seed, unsigned threads) {
  if (k == 0 || n_samples == 0) throw ArgumentError("k and n_samples must be positive");
  const FrozenPaths fp = simulate_frozen(b, flow, law, k * n_samples, seed, threads);
  const LiftConfig own{flow.grid().steps, 1, 0};
  std::vector<RoughPathMeasure::AtomPtr> atoms(n_samples);
  parallel_for(n_samples, threads, [&](std::size_t s) {
    std::vector<const SamplePath*> layers(k);
    for (std::size_t l = 0; l < k; ++l) layers[l] = fp.paths[s * k + l].get();
    atoms[s] = std::make_shared<const GridRoughPath>(lift_k_layer(layers, own));
  });
  MeasureInfo info;
  info.layers = k;
  info.lineage = {seed};
  info.tuple_count = n_samples;
  return RoughPathMeasure::uniform(std::move(atoms), std::move(info));
}

}  // namespace roughchaos
