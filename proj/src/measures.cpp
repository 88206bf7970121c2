#include "roughchaos/measures.hpp"

#include <cmath>
#include <cstring>
#include <string>
#include <unordered_map>

#include "roughchaos/errors.hpp"

namespace roughchaos {

namespace {

std::string bytes_of(std::span<const double> a, std::span<const double> b = {}) {
  std::string key(sizeof(double) * (a.size() + b.size()), '\0');
  if (!a.empty()) std::memcpy(key.data(), a.data(), sizeof(double) * a.size());
  if (!b.empty())
    std::memcpy(key.data() + sizeof(double) * a.size(), b.data(), sizeof(double) * b.size());
  return key;
}

template <class Atom>
EmpiricalMeasure<Atom> merge_identical(std::vector<std::shared_ptr<const Atom>> atoms,
                                       const std::vector<double>& weights,
                                       const std::vector<std::string>& keys, MeasureInfo info) {
  std::unordered_map<std::string, std::size_t> seen;
  std::vector<std::shared_ptr<const Atom>> out;
  std::vector<double> w;
  for (std::size_t a = 0; a < atoms.size(); ++a) {
    auto [it, inserted] = seen.emplace(keys[a], out.size());
    if (inserted) {
      out.push_back(std::move(atoms[a]));
      w.push_back(weights[a]);
    } else {
      w[it->second] += weights[a];
    }
  }
  return EmpiricalMeasure<Atom>(std::move(out), std::move(w), std::move(info));
}

}  // namespace

PathMeasure empirical_from_ensemble(const ParticleEnsemble& ens) {
  MeasureInfo info;
  info.lineage = ens.seeds;
  std::vector<PathMeasure::AtomPtr> atoms(ens.paths.begin(), ens.paths.end());
  return PathMeasure::uniform(std::move(atoms), std::move(info));
}

RoughPathMeasure enhanced_k_layer(const ParticleEnsemble& ens, std::size_t k,
                                  const EnhancedOptions& options) {
  if (k == 0) throw ArgumentError("k must be >= 1");
  const std::size_t n = ens.size();
  const LiftConfig own{ens.grid.steps, 1, 0};
  const LiftConfig& cfg = options.lift ? *options.lift : own;
  if (tuple_count(n, k) <= options.tuple_budget)
    return map_F_k(empirical_from_ensemble(ens), k, options.tuple_budget, &cfg);
  if (!options.sampling_seed)
    throw ResourceError("n^k = " + std::to_string(n) + "^" + std::to_string(k) +
                        " exceeds the tuple budget and sampling is disabled");
  const std::size_t samples = options.tuple_budget;
  if (samples == 0) throw ArgumentError("tuple budget must be positive");
  std::vector<RoughPathMeasure::AtomPtr> atoms(samples);
  std::vector<std::vector<std::size_t>> tuples(samples, std::vector<std::size_t>(k));
  RandomStream rng(*options.sampling_seed);
  for (auto& t : tuples)
    for (auto& i : t) i = rng.index(n);
  for (std::size_t s = 0; s < samples; ++s) {
    std::vector<const SamplePath*> layers(k);
    for (std::size_t l = 0; l < k; ++l) layers[l] = &ens.path(tuples[s][l]);
    atoms[s] = std::make_shared<const GridRoughPath>(lift_k_layer(layers, cfg));
  }
  MeasureInfo info;
  info.layers = k;
  info.lineage = ens.seeds;
  info.sampled = true;
  info.tuple_count = samples;
  return RoughPathMeasure::uniform(std::move(atoms), std::move(info));
}

PathMeasure project_pi1(const RoughPathMeasure& mu) {
  const std::size_t k = mu.info().layers;
  if (k == 0 || mu.dim() % k != 0) throw ArgumentError("measure dimension is not k * d");
  const std::size_t d = mu.dim() / k;
  std::vector<PathMeasure::AtomPtr> atoms;
  std::vector<std::string> keys;
  atoms.reserve(mu.size());
  keys.reserve(mu.size());
  for (const auto& a : mu.atoms()) {
    auto p = std::make_shared<const SamplePath>(a->path().slice(0, d));
    keys.push_back(bytes_of(p->points()));
    atoms.push_back(std::move(p));
  }
  MeasureInfo info = mu.info();
  info.layers = 1;
  return merge_identical(std::move(atoms), mu.weights(), keys, std::move(info));
}

RoughPathMeasure project_Pi2(const RoughPathMeasure& mu) {
  const std::size_t k = mu.info().layers;
  if (k < 2) throw ArgumentError("Pi_2 needs at least two layers");
  if (mu.dim() % k != 0) throw ArgumentError("measure dimension is not k * d");
  if (k == 2) return mu;
  const std::size_t d = mu.dim() / k;
  std::vector<RoughPathMeasure::AtomPtr> atoms;
  std::vector<std::string> keys;
  for (const auto& a : mu.atoms()) {
    auto p = std::make_shared<const GridRoughPath>(a->block(0, 2 * d));
    keys.push_back(bytes_of(p->level1(), p->level2_steps()));
    atoms.push_back(std::move(p));
  }
  MeasureInfo info = mu.info();
  info.layers = 2;
  return merge_identical(std::move(atoms), mu.weights(), keys, std::move(info));
}

double modified_moment(const RoughPathMeasure& mu, HoelderExponent alpha, double eps) {
  if (!(eps > 0.0)) throw ArgumentError("eps must be positive");
  return mu.integrate([&](const GridRoughPath& x) {
    const double size = euclidean_norm(x.point(0)) + hoelder_norm(x, alpha) +
                        static_cast<double>(n_alpha(x, alpha));
    return std::pow(size, 1.0 + eps);
  });
}

PathMeasure GirsanovMeasure::measure() const {
  std::vector<PathMeasure::AtomPtr> atoms(paths.begin(), paths.end());
  return PathMeasure::uniform(std::move(atoms));
}

void GirsanovMeasure::validate() const {
  if (paths.empty()) throw ArgumentError("Girsanov measure needs at least one path");
  if (drift.size() != paths.size()) throw ArgumentError("one drift record per path required");
  const std::size_t expect = (paths.front()->steps() + 1) * paths.front()->dim();
  for (std::size_t i = 0; i < paths.size(); ++i) {
    if (!(paths[i]->grid() == paths.front()->grid()) || paths[i]->dim() != paths.front()->dim())
      throw ArgumentError("Girsanov paths must share grid and dimension");
    if (drift[i].size() != expect) throw ArgumentError("drift record has the wrong length");
    for (double g : drift[i])
      if (!std::isfinite(g)) throw ArgumentError("drift must be finite");
  }
}

GirsanovMeasure constant_drift_measure(const InitialLaw& law, std::vector<double> theta,
                                       std::size_t n, double horizon, std::size_t steps,
                                       std::uint64_t seed) {
  if (theta.size() != law.dim) throw ArgumentError("drift and law dimensions differ");
  const ParticleEnsemble ens =
      simulate_ips(interactions::constant(theta), law, n, horizon, steps, seed);
  GirsanovMeasure q;
  q.paths.assign(ens.paths.begin(), ens.paths.end());
  std::vector<double> g;
  for (std::size_t j = 0; j <= steps; ++j) g.insert(g.end(), theta.begin(), theta.end());
  q.drift.assign(n, g);
  return q;
}

double trapezoid(const std::vector<double>& values, double step) {
  if (values.size() < 2) throw ArgumentError("trapezoid needs at least two nodes");
  double s = 0.5 * (values.front() + values.back());
  for (std::size_t j = 1; j + 1 < values.size(); ++j) s += values[j];
  return s * step;
}

}  // namespace roughchaos
