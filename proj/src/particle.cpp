#include "roughchaos/particle.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "roughchaos/errors.hpp"
#include "roughchaos/parallel.hpp"

namespace roughchaos {

double InteractionField::div_x(const double* x, const double* y) const {
  if (!jac_x) throw ArgumentError("interaction '" + id + "' has no jacobian in x");
  thread_local std::vector<double> j;
  j.resize(dim * dim);
  jac_x(x, y, j.data());
  double s = 0.0;
  for (std::size_t r = 0; r < dim; ++r) s += j[r * dim + r];
  return s;
}

double InteractionField::div_y(const double* x, const double* y) const {
  if (!jac_y) throw ArgumentError("interaction '" + id + "' has no jacobian in y");
  thread_local std::vector<double> j;
  j.resize(dim * dim);
  jac_y(x, y, j.data());
  double s = 0.0;
  for (std::size_t r = 0; r < dim; ++r) s += j[r * dim + r];
  return s;
}

namespace interactions {

namespace {

InteractionField::Map zeros(std::size_t count) {
  return [count](const double*, const double*, double* out) { std::fill(out, out + count, 0.0); };
}

InteractionField::Map scaled_identity(std::size_t d, double s) {
  return [d, s](const double*, const double*, double* out) {
    std::fill(out, out + d * d, 0.0);
    for (std::size_t r = 0; r < d; ++r) out[r * d + r] = s;
  };
}

}  // namespace

InteractionField zero(std::size_t dim) {
  InteractionField f;
  f.dim = dim;
  f.b = zeros(dim);
  f.jac_x = f.jac_y = zeros(dim * dim);
  f.id = "zero";
  return f;
}

InteractionField constant(std::vector<double> c) {
  InteractionField f = zero(c.size());
  for (double v : c) f.sup_b = std::max(f.sup_b, std::abs(v));
  f.b = [c = std::move(c)](const double*, const double*, double* out) {
    std::copy(c.begin(), c.end(), out);
  };
  f.id = "constant";
  return f;
}

InteractionField attraction(std::size_t dim, double theta) {
  InteractionField f;
  f.dim = dim;
  f.b = [dim, theta](const double* x, const double* y, double* out) {
    for (std::size_t r = 0; r < dim; ++r) out[r] = theta * (y[r] - x[r]);
  };
  f.jac_x = scaled_identity(dim, -theta);
  f.jac_y = scaled_identity(dim, theta);
  f.sup_b = HUGE_VAL;
  f.sup_jacobian = std::abs(theta);
  f.id = "attraction";
  return f;
}

InteractionField tanh_attraction(std::size_t dim, double theta) {
  InteractionField f;
  f.dim = dim;
  f.b = [dim, theta](const double* x, const double* y, double* out) {
    for (std::size_t r = 0; r < dim; ++r) out[r] = theta * std::tanh(y[r] - x[r]);
  };
  auto jac = [dim, theta](double sign) {
    return [dim, theta, sign](const double* x, const double* y, double* out) {
      std::fill(out, out + dim * dim, 0.0);
      for (std::size_t r = 0; r < dim; ++r) {
        const double t = std::tanh(y[r] - x[r]);
        out[r * dim + r] = sign * theta * (1.0 - t * t);
      }
    };
  };
  f.jac_x = jac(-1.0);
  f.jac_y = jac(1.0);
  f.sup_b = f.sup_jacobian = std::abs(theta);
  // sup |d^2 tanh| = 4 / (3 sqrt 3)
  f.sup_hessian = std::abs(theta) * 4.0 / (3.0 * std::sqrt(3.0));
  f.id = "tanh_attraction";
  return f;
}

InteractionField ornstein_uhlenbeck(std::size_t dim, double theta) {
  InteractionField f;
  f.dim = dim;
  f.b = [dim, theta](const double* x, const double*, double* out) {
    for (std::size_t r = 0; r < dim; ++r) out[r] = -theta * x[r];
  };
  f.jac_x = scaled_identity(dim, -theta);
  f.jac_y = zeros(dim * dim);
  f.sup_b = HUGE_VAL;
  f.sup_jacobian = std::abs(theta);
  f.id = "ornstein_uhlenbeck";
  return f;
}

}  // namespace interactions

VectorField bbar_field(const InteractionField& b) {
  const std::size_t d = b.dim;
  VectorField f;
  f.in_dim = 2 * d;
  f.drive_dim = 2 * d;
  f.out_dim = 1;
  f.value = [b, d](std::span<const double> x, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
    b.b(x.data(), x.data() + d, out.data());
  };
  if (b.has_divergence()) {
    f.jacobian = [b, d](std::span<const double> x, std::span<double> out) {
      thread_local std::vector<double> jx, jy;
      jx.resize(d * d);
      jy.resize(d * d);
      b.jac_x(x.data(), x.data() + d, jx.data());
      b.jac_y(x.data(), x.data() + d, jy.data());
      std::fill(out.begin(), out.end(), 0.0);
      for (std::size_t r = 0; r < d; ++r)
        for (std::size_t c = 0; c < d; ++c) {
          out[r * 2 * d + c] = jx[r * d + c];
          out[r * 2 * d + d + c] = jy[r * d + c];
        }
    };
  }
  f.sup_value = b.sup_b;
  f.sup_jacobian = b.sup_jacobian;
  f.sup_hessian = b.sup_hessian;
  f.name = "bbar(" + b.id + ")";
  return f;
}

FieldCheck check_interaction(const InteractionField& b, std::size_t points, std::uint64_t seed,
                             double radius) {
  if (!b.has_divergence()) throw ArgumentError("interaction has no jacobians to check");
  return check_jacobian(bbar_field(b), points, seed, radius);
}

namespace laws {

InitialLaw dirac(std::vector<double> point) {
  InitialLaw law;
  law.dim = point.size();
  law.sample = [point](RandomStream&, std::span<double> out) {
    std::copy(point.begin(), point.end(), out.begin());
  };
  law.id = "dirac";
  return law;
}

InitialLaw gaussian(std::vector<double> mean, double sd) {
  if (!(sd > 0.0)) throw ArgumentError("gaussian law needs sd > 0");
  InitialLaw law;
  law.dim = mean.size();
  law.sample = [mean, sd](RandomStream& rng, std::span<double> out) {
    for (std::size_t i = 0; i < mean.size(); ++i) out[i] = mean[i] + sd * rng.normal();
  };
  // E exp(c |x|^{1.5}) is finite for every c.
  law.c = 1.0;
  law.eps = 0.5;
  law.id = "gaussian";
  return law;
}

}  // namespace laws

double exp_moment_estimate(const InitialLaw& law, std::size_t samples, std::uint64_t seed) {
  if (samples == 0) throw ArgumentError("need at least one sample");
  RandomStream rng(seed);
  std::vector<double> x(law.dim);
  double sum = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    law.sample(rng, x);
    sum += std::exp(law.c * std::pow(euclidean_norm(x), 1.0 + law.eps));
  }
  return sum / static_cast<double>(samples);
}

std::vector<std::uint64_t> particle_seeds(std::uint64_t seed, std::size_t n) {
  std::vector<std::uint64_t> seeds(n);
  for (std::size_t i = 0; i < n; ++i) seeds[i] = split_seed(seed, i);
  return seeds;
}

ParticleEnsemble simulate_ips(const InteractionField& b, const InitialLaw& law, double horizon,
                              std::size_t steps, std::span<const std::uint64_t> seeds,
                              const SimulationOptions& options) {
  const std::size_t n = seeds.size();
  const std::size_t d = b.dim;
  if (n == 0) throw ArgumentError("simulate_ips needs n >= 1");
  if (law.dim != d) throw ArgumentError("initial law and interaction dimensions differ");
  const Grid grid{steps, horizon};
  validate_grid(grid);
  const double h = grid.step();
  const double sd = std::sqrt(h);
  const bool sampled = options.partners > 0 && n > 2048;

  ParticleEnsemble ens;
  ens.dim = d;
  ens.grid = grid;
  ens.seeds.assign(seeds.begin(), seeds.end());
  ens.interaction_id = b.id;
  ens.law_id = law.id;
  ens.partners = sampled ? options.partners : 0;
  ens.increments.assign(n, std::vector<double>(steps * d));

  // state[j] is the n x d snapshot at node j.
  std::vector<std::vector<double>> state(steps + 1, std::vector<double>(n * d));
  parallel_for(n, options.threads, [&](std::size_t i) {
    RandomStream rng(seeds[i]);
    law.sample(rng, std::span<double>(state[0].data() + i * d, d));
    for (double& v : ens.increments[i]) v = sd * rng.normal();
  });

  const double inv_n = 1.0 / static_cast<double>(n);
  const double inv_k = sampled ? 1.0 / static_cast<double>(options.partners) : inv_n;
  for (std::size_t j = 0; j < steps; ++j) {
    const std::vector<double>& now = state[j];
    std::vector<double>& next = state[j + 1];
    parallel_for(n, options.threads, [&](std::size_t i) {
      std::vector<double> acc(d, 0.0), tmp(d);
      const double* xi = now.data() + i * d;
      if (sampled) {
        RandomStream partner(split_seed(~seeds[i], j));
        for (std::size_t k = 0; k < options.partners; ++k) {
          b.b(xi, now.data() + partner.index(n) * d, tmp.data());
          for (std::size_t r = 0; r < d; ++r) acc[r] += tmp[r];
        }
      } else {
        for (std::size_t q = 0; q < n; ++q) {
          b.b(xi, now.data() + q * d, tmp.data());
          for (std::size_t r = 0; r < d; ++r) acc[r] += tmp[r];
        }
      }
      const double* db = ens.increments[i].data() + j * d;
      for (std::size_t r = 0; r < d; ++r) {
        const double v = xi[r] + (acc[r] * (sampled ? inv_k : inv_n)) * h + db[r];
        if (!std::isfinite(v)) throw DivergenceError("particle " + std::to_string(i) + " diverged", j + 1);
        next[i * d + r] = v;
      }
    });
  }

  ens.paths.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> pts((steps + 1) * d);
    for (std::size_t j = 0; j <= steps; ++j)
      std::copy_n(state[j].data() + i * d, d, pts.data() + j * d);
    ens.paths[i] = std::make_shared<const SamplePath>(d, grid, std::move(pts));
  }
  return ens;
}

ParticleEnsemble simulate_ips(const InteractionField& b, const InitialLaw& law, std::size_t n,
                              double horizon, std::size_t steps, std::uint64_t seed,
                              const SimulationOptions& options) {
  const auto seeds = particle_seeds(seed, n);
  ParticleEnsemble ens = simulate_ips(b, law, horizon, steps, seeds, options);
  ens.seed = seed;
  return ens;
}

ParticleEnsemble simulate_brownian_ensemble(const InitialLaw& law, std::size_t n,
                                            double horizon, std::size_t steps,
                                            std::uint64_t seed, unsigned threads) {
  if (n == 0) throw ArgumentError("ensemble needs n >= 1");
  const std::size_t d = law.dim;
  const Grid grid{steps, horizon};
  validate_grid(grid);
  const double sd = std::sqrt(grid.step());
  ParticleEnsemble ens;
  ens.dim = d;
  ens.grid = grid;
  ens.seed = seed;
  ens.seeds = particle_seeds(seed, n);
  ens.interaction_id = "zero";
  ens.law_id = law.id;
  ens.paths.resize(n);
  ens.increments.assign(n, std::vector<double>(steps * d));
  parallel_for(n, threads, [&](std::size_t i) {
    RandomStream rng(ens.seeds[i]);
    std::vector<double> pts((steps + 1) * d);
    law.sample(rng, std::span<double>(pts.data(), d));
    auto& inc = ens.increments[i];
    for (double& v : inc) v = sd * rng.normal();
    for (std::size_t j = 0; j < steps; ++j)
      for (std::size_t r = 0; r < d; ++r)
        pts[(j + 1) * d + r] = pts[j * d + r] + inc[j * d + r];
    ens.paths[i] = std::make_shared<const SamplePath>(d, grid, std::move(pts));
  });
  return ens;
}

double sanov_moment_G(const SamplePath& path, double beta, double c, double eps,
                      HoelderExponent alpha) {
  if (!(beta > alpha.value() && beta < 0.5))
    throw ArgumentError("beta must lie in (alpha, 1/2)");
  const double p = 1.0 + eps;
  return c * std::pow(hoelder_seminorm(path, beta), p) +
         c * std::pow(euclidean_norm(path.point(0)), p);
}

}  // namespace roughchaos
