#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "roughchaos/calculus.hpp"
#include "roughchaos/grid.hpp"
#include "roughchaos/rng.hpp"
#include "roughchaos/rough_path.hpp"

namespace roughchaos {

/// Mean-field drift b : R^d x R^d -> R^d with its two partial jacobians.
/// Jacobians are d x d row-major, entry (r, c) = d b_r / d x_c (resp. y_c).
struct InteractionField {
  using Map = std::function<void(const double* x, const double* y, double* out)>;

  std::size_t dim = 1;
  Map b;
  Map jac_x;
  Map jac_y;
  double sup_b = 0.0;
  double sup_jacobian = 0.0;
  double sup_hessian = 0.0;
  std::string id;

  bool has_divergence() const noexcept { return static_cast<bool>(jac_x) && static_cast<bool>(jac_y); }
  /// div_x b(x, y), the divergence of b-bar in its first d variables.
  double div_x(const double* x, const double* y) const;
  /// div_y b(x, y).
  double div_y(const double* x, const double* y) const;
};

namespace interactions {

InteractionField zero(std::size_t dim);
/// b(x, y) = c.
InteractionField constant(std::vector<double> c);
/// b(x, y) = theta (y - x).
InteractionField attraction(std::size_t dim, double theta);
/// b(x, y) = theta tanh(y - x) componentwise; C^2_b.
InteractionField tanh_attraction(std::size_t dim, double theta);
/// b(x, y) = -theta x; no dependence on y.
InteractionField ornstein_uhlenbeck(std::size_t dim, double theta);

}  // namespace interactions

/// b-bar(x^1, x^2) = (b(x^1, x^2), 0) as a one-form on R^{2d}, ready for
/// rough integration along 2-layer lifts.
VectorField bbar_field(const InteractionField& b);

/// Analytic jacobians (hence divergences) against central differences at
/// random points of [-radius, radius]^{2d}.
FieldCheck check_interaction(const InteractionField& b, std::size_t points, std::uint64_t seed,
                             double radius = 2.0);

/// Initial law lambda (or nu) on R^d.
struct InitialLaw {
  using Sampler = std::function<void(RandomStream&, std::span<double>)>;
  using LogRatio = std::function<double(std::span<const double>)>;

  std::size_t dim = 1;
  Sampler sample;
  /// log d nu / d lambda at a point, when this law is a tilt of a reference.
  LogRatio log_density_ratio;
  /// (c, eps) with E exp(c |x|^{1 + eps}) < infinity.
  double c = 1.0;
  double eps = 0.5;
  std::string id;
};

namespace laws {

InitialLaw dirac(std::vector<double> point);
/// Independent N(mean_i, sd^2) coordinates.
InitialLaw gaussian(std::vector<double> mean, double sd);

}  // namespace laws

/// Sample mean of exp(c |x|^{1 + eps}) over `samples` draws.
double exp_moment_estimate(const InitialLaw& law, std::size_t samples, std::uint64_t seed);

/// n simulated paths on a shared grid together with the Brownian increments
/// that drove them and the per-particle seeds.
struct ParticleEnsemble {
  using PathPtr = std::shared_ptr<const SamplePath>;

  std::size_t dim = 1;
  Grid grid{};
  std::vector<PathPtr> paths;
  /// increments[i] holds m x d Brownian increments of particle i.
  std::vector<std::vector<double>> increments;
  std::vector<std::uint64_t> seeds;
  std::uint64_t seed = 0;
  std::string interaction_id;
  std::string law_id;
  /// 0 for the exact O(n^2) drift, else the partner count of the estimator.
  std::size_t partners = 0;

  std::size_t size() const noexcept { return paths.size(); }
  const SamplePath& path(std::size_t i) const { return *paths[i]; }
};

struct SimulationOptions {
  /// Random interaction partners per particle and step; 0 is exact. Only
  /// honoured for n > 2048.
  std::size_t partners = 0;
  unsigned threads = 1;
};

/// Per-particle seed stream i of `seed`.
std::vector<std::uint64_t> particle_seeds(std::uint64_t seed, std::size_t n);

/// Euler-Maruyama for dX^i = (1/n) sum_j b(X^i, X^j) dt + dB^i on m steps of
/// [0, T]. Particle i draws X^i_0 and then its m x d normals from seeds[i].
ParticleEnsemble simulate_ips(const InteractionField& b, const InitialLaw& law, double horizon,
                              std::size_t steps, std::span<const std::uint64_t> seeds,
                              const SimulationOptions& options = {});
ParticleEnsemble simulate_ips(const InteractionField& b, const InitialLaw& law, std::size_t n,
                              double horizon, std::size_t steps, std::uint64_t seed,
                              const SimulationOptions& options = {});

/// i.i.d. Brownian paths started from `law` (the system with b = 0).
ParticleEnsemble simulate_brownian_ensemble(const InitialLaw& law, std::size_t n,
                                            double horizon, std::size_t steps,
                                            std::uint64_t seed, unsigned threads = 1);

/// G(gamma) = c ||gamma||_beta^{1+eps} + c |gamma(0)|^{1+eps}; beta must lie
/// in (alpha, 1/2).
double sanov_moment_G(const SamplePath& path, double beta, double c, double eps,
                      HoelderExponent alpha = HoelderExponent{0.4});

}  // namespace roughchaos
