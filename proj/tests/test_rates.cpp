#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "roughchaos/calculus.hpp"
#include "roughchaos/errors.hpp"
#include "roughchaos/lift.hpp"
#include "roughchaos/rates.hpp"

using namespace roughchaos;

namespace {

// Direct evaluation of the particle-system log density on explicit pair lifts.
double rho_oracle(const ParticleEnsemble& ens, const InteractionField& b) {
  const std::size_t n = ens.size(), d = b.dim, m = ens.grid.steps;
  const double h = ens.grid.step(), nn = double(n);
  const VectorField bbar = bbar_field(b);
  auto trap = [&](auto&& f) {
    std::vector<double> v(m + 1);
    for (std::size_t s = 0; s <= m; ++s) v[s] = f(s);
    return trapezoid(v, h);
  };
  double rho = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const SamplePath* pair[2] = {&ens.path(i), &ens.path(j)};
      const GridRoughPath lift = lift_piecewise_linear(stack_paths(pair));
      rho += rough_integral(bbar, lift)[0] / nn;
      rho -= trap([&](std::size_t s) {
               return b.div_x(ens.path(i).point(s).data(), ens.path(j).point(s).data());
             }) / (2.0 * nn);
    }
    rho -= trap([&](std::size_t s) {
             const double* x = ens.path(i).point(s).data();
             return b.div_y(x, x);
           }) / (2.0 * nn);
    rho -= 0.5 * trap([&](std::size_t s) {
      std::vector<double> avg(d, 0.0), v(d);
      for (std::size_t j = 0; j < n; ++j) {
        b.b(ens.path(i).point(s).data(), ens.path(j).point(s).data(), v.data());
        for (std::size_t r = 0; r < d; ++r) avg[r] += v[r] / nn;
      }
      double sq = 0.0;
      for (double a : avg) sq += a * a;
      return sq;
    });
  }
  return rho;
}

PathMeasure random_weight_measure(const ParticleEnsemble& ens, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.2, 1.0);
  std::vector<double> w(ens.size());
  double s = 0.0;
  for (auto& v : w) s += (v = u(rng));
  for (auto& v : w) v /= s;
  return PathMeasure(std::vector<PathMeasure::AtomPtr>(ens.paths.begin(), ens.paths.end()), w);
}

}  // namespace

TEST_CASE("rho_n matches a direct evaluation on pair lifts") {
  for (std::size_t d : {1, 2}) {
    const ParticleEnsemble ens = simulate_brownian_ensemble(
        laws::gaussian(std::vector<double>(d, 0.0), 1.0), 3, 1.0, 24, 10 + d);
    for (const InteractionField& b :
         {interactions::tanh_attraction(d, 0.8), interactions::attraction(d, 0.5),
          interactions::ornstein_uhlenbeck(d, 0.7)}) {
      const double oracle = rho_oracle(ens, b);
      CHECK(girsanov_log_density_rho_n(ens, b) == doctest::Approx(oracle).epsilon(1e-11));
    }
    CHECK(girsanov_log_density_rho_n(ens, interactions::zero(d)) == 0.0);
  }
}

TEST_CASE("rho_n splits into n K_b plus K'_b on the two-layer measure") {
  const ParticleEnsemble ens =
      simulate_brownian_ensemble(laws::gaussian({0.0, 0.5}, 1.0), 6, 1.0, 16, 3);
  const InteractionField b = interactions::tanh_attraction(2, 1.1);
  const KTerms k = functional_K_b_enhanced(enhanced_k_layer(ens, 2), b);
  CHECK(girsanov_log_density_rho_n(ens, b) ==
        doctest::Approx(6.0 * k.total + k.k_prime).epsilon(1e-11));
}

TEST_CASE("classical and enhanced functionals agree on F^2(Q)") {
  const ParticleEnsemble ens = simulate_ips(interactions::tanh_attraction(2, 1.0),
                                            laws::gaussian({0.0, 0.0}, 1.0), 7, 1.5, 20, 4);
  for (const PathMeasure& q : {empirical_from_ensemble(ens), random_weight_measure(ens, 9)}) {
    for (const InteractionField& b :
         {interactions::tanh_attraction(2, 0.6), interactions::attraction(2, 1.0)}) {
      const KTerms c = functional_K_b_classical(q, b, 2);
      const KTerms e = functional_K_b_enhanced(map_F_k(q, 2), b, 3);
      CHECK(c.term1 == doctest::Approx(e.term1).epsilon(1e-12));
      CHECK(c.term2 == doctest::Approx(e.term2).epsilon(1e-12));
      CHECK(c.term3 == doctest::Approx(e.term3).epsilon(1e-12));
      CHECK(c.k_prime == doctest::Approx(e.k_prime).epsilon(1e-12));
    }
  }
}

TEST_CASE("functionals vanish for b = 0 and K' is bounded") {
  const ParticleEnsemble ens =
      simulate_brownian_ensemble(laws::gaussian({0.0}, 1.0), 10, 2.0, 16, 5);
  const KTerms z = functional_K_b_enhanced(enhanced_k_layer(ens, 2), interactions::zero(1));
  CHECK(z.total == 0.0);
  CHECK(z.k_prime == 0.0);
  const double theta = 1.7;
  const KTerms k =
      functional_K_b_classical(empirical_from_ensemble(ens), interactions::tanh_attraction(1, theta));
  CHECK(std::abs(k.k_prime) <= 0.5 * 2.0 * theta + 1e-12);
}

TEST_CASE("constant interaction on Wiener measure") {
  const double c = 0.6, T = 1.0;
  const std::size_t n = 2000;
  const ParticleEnsemble ens = simulate_brownian_ensemble(laws::dirac({0.0}), n, T, 16, 6);
  const KTerms k = functional_K_b_classical(empirical_from_ensemble(ens), interactions::constant({c}));
  CHECK(k.term2 == 0.0);
  CHECK(k.term3 == doctest::Approx(0.5 * c * c * T).epsilon(1e-12));
  // term1 = c mean(X_T) has sd c sqrt(T / n).
  CHECK(std::abs(k.total + 0.5 * c * c * T) < 4.0 * c * std::sqrt(T / double(n)));
}

TEST_CASE("relative entropy through the drift representation") {
  const double theta = 0.9, T = 2.0;
  GirsanovMeasure q = constant_drift_measure(laws::dirac({0.0}), {theta}, 30, T, 10, 2);
  CHECK(relative_entropy_girsanov(q) == doctest::Approx(0.5 * theta * theta * T).epsilon(1e-12));
  const GirsanovMeasure two = constant_drift_measure(laws::dirac({0.0, 0.0}), {0.4, -1.2}, 10, T, 8, 1);
  CHECK(relative_entropy_girsanov(two) ==
        doctest::Approx(0.5 * 0.16 * T + 0.5 * 1.44 * T).epsilon(1e-12));
  const GirsanovMeasure zero = constant_drift_measure(laws::dirac({0.0}), {0.0}, 5, T, 8, 1);
  CHECK(relative_entropy_girsanov(zero) == 0.0);
  q.initial_matches_reference = false;
  CHECK_THROWS_AS(relative_entropy_girsanov(q), ArgumentError);
  q.log_initial_ratio = [](std::span<const double>) { return 0.25; };
  CHECK(relative_entropy_girsanov(q) ==
        doctest::Approx(0.25 + 0.5 * theta * theta * T).epsilon(1e-12));
}

TEST_CASE("J_b on the constant-drift family") {
  const double theta = 0.8, c = 0.3, T = 1.0;
  const std::size_t n = 2000;
  const GirsanovMeasure q = constant_drift_measure(laws::dirac({0.0}), {theta}, n, T, 16, 12);
  const RateReport r = rate_J_b(q, interactions::constant({c}));
  const double expect = 0.5 * (theta - c) * (theta - c) * T;
  CHECK(r.J_mismatch == doctest::Approx(expect).epsilon(1e-12));
  CHECK(std::abs(r.J - expect) < 4.0 * c * std::sqrt(T / double(n)));
  const RateReport fixed = rate_J_b(constant_drift_measure(laws::dirac({0.0}), {c}, n, T, 16, 12),
                                    interactions::constant({c}));
  CHECK(fixed.J_mismatch == doctest::Approx(0.0).scale(1.0));
  const GirsanovMeasure w = constant_drift_measure(laws::dirac({0.0}), {0.0}, 50, T, 16, 1);
  const RateReport wiener = rate_J_b(w, interactions::zero(1));
  CHECK(wiener.J == 0.0);
  CHECK(wiener.J_mismatch == 0.0);
}

TEST_CASE("structural condition of the Sanov rate") {
  const GirsanovMeasure q = constant_drift_measure(laws::gaussian({0.0, 0.0}, 1.0), {0.0, 0.0}, 4,
                                                   1.0, 16, 8);
  const RoughPathMeasure mu = map_F_k(q.measure(), 2);
  const RateVerdict ok = rate_I_k(mu, 1e-9, &q);
  CHECK(ok.kind == RateVerdictKind::Finite);
  CHECK(ok.value == 0.0);
  CHECK(rate_I_k(mu).kind == RateVerdictKind::Unrepresentable);

  // Perturb the antisymmetric level-2 part of one atom's step so it stays geometric.
  const std::size_t victim = 5;
  std::vector<RoughPathMeasure::AtomPtr> atoms = mu.atoms();
  const GridRoughPath& x = mu.atom(victim);
  std::vector<double> l2(x.level2_steps().begin(), x.level2_steps().end());
  l2[0 * 4 + 2] += 0.1;
  l2[2 * 4 + 0] -= 0.1;
  atoms[victim] = std::make_shared<const GridRoughPath>(
      x.dim(), x.grid(), std::vector<double>(x.level1().begin(), x.level1().end()), l2);
  const RoughPathMeasure bad(atoms, mu.weights(), mu.info());
  const RateVerdict v = rate_I_k(bad, 1e-9, &q);
  CHECK(v.kind == RateVerdictKind::Infinite);
  CHECK(v.worst_atom == victim);
  CHECK(v.reason.find(std::to_string(victim)) != std::string::npos);

  // Non-product weights.
  std::vector<double> w = mu.weights();
  w[0] += 0.01;
  w[1] -= 0.01;
  CHECK(rate_I_k(RoughPathMeasure(mu.atoms(), w, mu.info()), 1e-9, &q).kind ==
        RateVerdictKind::Infinite);
}

TEST_CASE("enhanced rate equals the classical rate on F^k(Q)") {
  const double theta = 0.7, c = 0.4;
  const GirsanovMeasure q = constant_drift_measure(laws::dirac({0.0}), {theta}, 5, 1.0, 12, 21);
  const InteractionField b = interactions::tanh_attraction(1, c);
  const RateReport classical = rate_J_b(q, b);
  for (std::size_t k : {2, 3}) {
    const RateVerdict v = enhanced_J_b(map_F_k(q.measure(), k), b, &q);
    REQUIRE(v.kind == RateVerdictKind::Finite);
    CHECK(v.value == doctest::Approx(classical.J).epsilon(1e-11));
  }
}

TEST_CASE("missing divergence data is an argument error") {
  InteractionField b = interactions::attraction(1, 1.0);
  b.jac_y = nullptr;
  const ParticleEnsemble ens = simulate_brownian_ensemble(laws::dirac({0.0}), 3, 1.0, 4, 1);
  CHECK_THROWS_AS(girsanov_log_density_rho_n(ens, b), ArgumentError);
  CHECK_THROWS_AS(functional_K_b_enhanced(enhanced_k_layer(ens, 2), interactions::zero(2)),
                  ArgumentError);
}
