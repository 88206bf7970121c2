#include "roughchaos/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include "roughchaos/errors.hpp"
#include "roughchaos/parallel.hpp"
#include "roughchaos/rng.hpp"

namespace roughchaos {

const char* to_string(GroundMetric g) {
  switch (g) {
    case GroundMetric::HoelderPath: return "hoelder_path";
    case GroundMetric::HomogeneousRough: return "homogeneous_rough";
    case GroundMetric::EuclideanEndpoint: return "euclidean_endpoint";
  }
  return "unknown";
}

namespace {

double endpoint_distance(const SamplePath& p, const SamplePath& q) {
  const auto a = p.point(p.steps());
  const auto b = q.point(q.steps());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

double endpoint_distance(const GridRoughPath& p, const GridRoughPath& q) {
  const auto a = p.point(p.steps());
  const auto b = q.point(q.steps());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

// Weighted resampling to `count` atoms with uniform weights.
template <class Atom>
EmpiricalMeasure<Atom> resample(const EmpiricalMeasure<Atom>& mu, std::size_t count,
                                std::uint64_t seed) {
  std::vector<double> cdf(mu.size());
  std::partial_sum(mu.weights().begin(), mu.weights().end(), cdf.begin());
  RandomStream rng(seed);
  std::vector<typename EmpiricalMeasure<Atom>::AtomPtr> atoms(count);
  for (auto& a : atoms) {
    const double u = rng.uniform() * cdf.back();
    const std::size_t idx = std::min<std::size_t>(
        std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin(), mu.size() - 1);
    a = mu.atom_ptr(idx);
  }
  return EmpiricalMeasure<Atom>::uniform(std::move(atoms), mu.info());
}

template <class Atom, class Dist>
WassersteinResult solve_measures(const EmpiricalMeasure<Atom>& mu0,
                                 const EmpiricalMeasure<Atom>& nu0,
                                 const WassersteinOptions& options, Dist&& dist) {
  if (mu0.dim() != nu0.dim() || !(mu0.grid() == nu0.grid()))
    throw ArgumentError("measures must share grid and dimension");
  WassersteinResult result;
  const EmpiricalMeasure<Atom>* mu = &mu0;
  const EmpiricalMeasure<Atom>* nu = &nu0;
  std::optional<EmpiricalMeasure<Atom>> rmu, rnu;
  if (mu0.size() * nu0.size() > options.budget) {
    const auto count = static_cast<std::size_t>(std::sqrt(static_cast<double>(options.budget)));
    rmu.emplace(resample(mu0, count, split_seed(options.seed, 0)));
    rnu.emplace(resample(nu0, count, split_seed(options.seed, 1)));
    mu = &*rmu;
    nu = &*rnu;
    result.mode = "subsampled";
  }
  const std::size_t n = mu->size(), m = nu->size();
  std::vector<double> cost(n * m);
  parallel_for(n, options.threads, [&](std::size_t i) {
    for (std::size_t j = 0; j < m; ++j) cost[i * m + j] = dist(mu->atom(i), nu->atom(j));
  });
  result.plan = solve_transport(mu->weights(), nu->weights(), cost);
  result.value = result.plan.objective;
  return result;
}

}  // namespace

WassersteinResult wasserstein1(const PathMeasure& mu, const PathMeasure& nu, GroundMetric ground,
                               const WassersteinOptions& options) {
  switch (ground) {
    case GroundMetric::HoelderPath:
      return solve_measures(mu, nu, options, [&](const SamplePath& p, const SamplePath& q) {
        return hoelder_path_distance(p, q, options.beta);
      });
    case GroundMetric::EuclideanEndpoint:
      return solve_measures(mu, nu, options, [](const SamplePath& p, const SamplePath& q) {
        return endpoint_distance(p, q);
      });
    case GroundMetric::HomogeneousRough:
      break;
  }
  throw ArgumentError("homogeneous_rough needs rough-path atoms");
}

WassersteinResult wasserstein1(const RoughPathMeasure& mu, const RoughPathMeasure& nu,
                               GroundMetric ground, const WassersteinOptions& options) {
  switch (ground) {
    case GroundMetric::HoelderPath:
      return solve_measures(mu, nu, options, [&](const GridRoughPath& p, const GridRoughPath& q) {
        return hoelder_path_distance(p.path(), q.path(), options.beta);
      });
    case GroundMetric::EuclideanEndpoint:
      return solve_measures(mu, nu, options, [](const GridRoughPath& p, const GridRoughPath& q) {
        return endpoint_distance(p, q);
      });
    case GroundMetric::HomogeneousRough:
      return solve_measures(mu, nu, options, [&](const GridRoughPath& p, const GridRoughPath& q) {
        return homogeneous_distance(p, q, options.alpha);
      });
  }
  throw ArgumentError("unknown ground metric");
}

WassersteinResult wasserstein1_points(std::span<const double> x, std::span<const double> wx,
                                      std::span<const double> y, std::span<const double> wy,
                                      std::size_t dim) {
  if (dim == 0 || x.size() != wx.size() * dim || y.size() != wy.size() * dim)
    throw ArgumentError("point clouds do not match their weights and dimension");
  const std::size_t n = wx.size(), m = wy.size();
  std::vector<double> cost(n * m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      double s = 0.0;
      for (std::size_t r = 0; r < dim; ++r) {
        const double d = x[i * dim + r] - y[j * dim + r];
        s += d * d;
      }
      cost[i * m + j] = std::sqrt(s);
    }
  WassersteinResult result;
  result.plan = solve_transport(wx, wy, cost);
  result.value = result.plan.objective;
  return result;
}

double wasserstein1_line(std::span<const double> x, std::span<const double> wx,
                         std::span<const double> y, std::span<const double> wy) {
  if (x.size() != wx.size() || y.size() != wy.size() || x.empty() || y.empty())
    throw ArgumentError("samples and weights must match and be nonempty");
  struct Event {
    double at;
    double dw;
  };
  const double sx = std::accumulate(wx.begin(), wx.end(), 0.0);
  const double sy = std::accumulate(wy.begin(), wy.end(), 0.0);
  std::vector<Event> ev;
  ev.reserve(x.size() + y.size());
  for (std::size_t i = 0; i < x.size(); ++i) ev.push_back({x[i], wx[i] / sx});
  for (std::size_t j = 0; j < y.size(); ++j) ev.push_back({y[j], -wy[j] / sy});
  std::sort(ev.begin(), ev.end(), [](const Event& a, const Event& b) { return a.at < b.at; });
  double total = 0.0, diff = 0.0;
  for (std::size_t k = 0; k + 1 < ev.size(); ++k) {
    diff += ev[k].dw;
    total += std::abs(diff) * (ev[k + 1].at - ev[k].at);
  }
  return total;
}

}  // namespace roughchaos
