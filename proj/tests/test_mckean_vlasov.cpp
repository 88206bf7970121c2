#include <cmath>
#include <vector>

#include "doctest.h"
#include "roughchaos/errors.hpp"
#include "roughchaos/mckean_vlasov.hpp"
#include "roughchaos/rates.hpp"

using namespace roughchaos;

namespace {

struct Moments {
  double mean = 0.0;
  double var = 0.0;
};

Moments node_moments(const FlowMeasure& q, std::size_t s) {
  const auto x = q.marginal(s);
  Moments mo;
  for (double v : x) mo.mean += v;
  mo.mean /= double(x.size());
  for (double v : x) mo.var += (v - mo.mean) * (v - mo.mean);
  mo.var /= double(x.size() - 1);
  return mo;
}

// Euler-Maruyama moments of dY = -theta (Y - c) dt + dB from N(m0, v0):
// m_{j+1} = c + (1 - theta h)(m_j - c), v_{j+1} = (1 - theta h)^2 v_j + h.
std::vector<Moments> em_ou_moments(double theta, double c, double m0, double v0, double T,
                                   std::size_t m) {
  const double h = T / double(m), a = 1.0 - theta * h;
  std::vector<Moments> out(m + 1);
  out[0] = {m0, v0};
  for (std::size_t j = 0; j < m; ++j)
    out[j + 1] = {c + a * (out[j].mean - c), a * a * out[j].var + h};
  return out;
}

FlowMeasure constant_flow(double value, std::size_t m, double T) {
  std::vector<double> pts(m + 1, value);
  return FlowMeasure(PathMeasure::uniform({std::make_shared<const SamplePath>(1, Grid{m, T}, pts)}));
}

void check_against(const FlowMeasure& q, const std::vector<Moments>& oracle) {
  const double n = double(q.size());
  for (std::size_t s = 0; s < oracle.size(); s += 5) {
    const Moments mo = node_moments(q, s);
    const double v = oracle[s].var;
    CHECK(std::abs(mo.mean - oracle[s].mean) <= 3.0 * std::sqrt(v / n) + 1e-12);
    CHECK(std::abs(mo.var - v) <= 3.0 * v * std::sqrt(2.0 / n) + 1e-12);
  }
}

}  // namespace

TEST_CASE("Phi without interaction is the Brownian ensemble") {
  const auto law = laws::gaussian({0.2}, 1.0);
  const FlowMeasure q = constant_flow(3.0, 16, 1.0);
  const PhiResult phi = phi_map(interactions::zero(1), q, law, 50, 7);
  const ParticleEnsemble bm = simulate_brownian_ensemble(law, 50, 1.0, 16, 7);
  for (std::size_t i = 0; i < 50; ++i) CHECK(phi.flow.measure().atom(i) == bm.path(i));
}

TEST_CASE("Phi for a y-independent drift follows the OU moments") {
  const double theta = 1.0, T = 1.0;
  const std::size_t m = 40, n = 20000;
  const auto law = laws::gaussian({1.0}, 0.5);
  const PhiResult phi =
      phi_map(interactions::ornstein_uhlenbeck(1, theta), constant_flow(0.0, m, T), law, n, 3);
  check_against(phi.flow, em_ou_moments(theta, 0.0, 1.0, 0.25, T, m));
  // The continuous-time ODEs m' = -m, v' = -2v + 1 agree up to O(h).
  const Moments end = node_moments(phi.flow, m);
  CHECK(end.mean == doctest::Approx(std::exp(-T)).epsilon(0.05));
  CHECK(end.var ==
        doctest::Approx(0.25 * std::exp(-2 * T) + 0.5 * (1 - std::exp(-2 * T))).epsilon(0.05));
}

TEST_CASE("Phi for attraction toward a point mass is OU toward it") {
  const double theta = 0.7, T = 2.0;
  const std::size_t m = 40, n = 20000;
  const PhiResult phi = phi_map(interactions::attraction(1, theta), constant_flow(0.0, m, T),
                                laws::dirac({0.0}), n, 5);
  check_against(phi.flow, em_ou_moments(theta, 0.0, 0.0, 0.0, T, m));
  // The recorded drift is the frozen-flow convolution.
  const auto& p = *phi.representation.paths[3];
  for (std::size_t s = 0; s <= m; ++s)
    CHECK(phi.representation.drift[3][s] == doctest::Approx(-theta * p.point(s)[0]));
}

TEST_CASE("fixed point without interaction converges at once") {
  const FixedPointResult r =
      solve_mkv_fixed_point(interactions::zero(1), laws::gaussian({0.0}, 1.0), 200, 1.0, 16,
                            1e-12, 3, 11);
  REQUIRE(r.trace.size() == 1);
  CHECK(r.trace[0] == 0.0);
}

TEST_CASE("linear mean-field fixed point") {
  const double theta = 0.5, T = 1.0, mu0 = 0.4, sd0 = 0.8;
  const std::size_t m = 32, n = 2000;
  const auto law = laws::gaussian({mu0}, sd0);
  const InteractionField b = interactions::attraction(1, theta);
  const FixedPointResult r = solve_mkv_fixed_point(b, law, n, T, m, 1e-5, 30, 2);
  MESSAGE("fixed point iterations: " << r.trace.size());
  // Mean preserved, variance follows the OU recursion around the frozen mean.
  check_against(r.last.flow, em_ou_moments(theta, mu0, mu0, sd0 * sd0, T, m));
  for (std::size_t i = 2; i < r.trace.size(); ++i) CHECK(r.trace[i] <= r.trace[i - 1] * 1.0001);
  // Self-consistency: one more Phi moves the marginals by less than 2 tol.
  const PhiResult again = phi_map(b, r.last.flow, law, n, 2);
  CHECK(sup_marginal_w1(again.flow, r.last.flow) < 2e-5);
  // The fixed point is a zero of the rate function up to estimator noise.
  const RateReport rate = rate_J_b(r.last.representation, b);
  CHECK(std::abs(rate.J_mismatch) < 1e-8);
  MESSAGE("J at the fixed point: " << rate.J);
  CHECK(std::abs(rate.J) < 0.02);
}

TEST_CASE("non-convergence carries the trace") {
  try {
    solve_mkv_fixed_point(interactions::attraction(1, 1.0), laws::gaussian({0.0}, 1.0), 100, 1.0,
                          8, 1e-30, 2, 1);
    FAIL("expected ConvergenceError");
  } catch (const ConvergenceError& e) {
    CHECK(e.trace().size() == 2);
  }
}

TEST_CASE("i.i.d. copies from a frozen flow") {
  const double T = 1.0;
  const std::size_t m = 32;
  const auto law = laws::dirac({0.0});
  const FlowMeasure q = constant_flow(0.0, m, T);
  const RoughPathMeasure one = sample_iid_mkv(q, interactions::zero(1), law, 1, 20, 4);
  const ParticleEnsemble bm = simulate_brownian_ensemble(law, 20, T, m, 4);
  for (std::size_t i = 0; i < 20; ++i) CHECK(one.atom(i).path() == bm.path(i));

  const std::size_t n = 20000;
  const RoughPathMeasure pairs = sample_iid_mkv(q, interactions::zero(1), law, 2, n, 9);
  CHECK(pairs.info().layers == 2);
  double s2 = 0.0, cross = 0.0;
  for (std::size_t a = 0; a < n; ++a) {
    const Increment inc = chen_increment(pairs.atom(a), 0, m);
    const double area = 0.5 * (inc.level2[1] - inc.level2[2]);
    s2 += area * area;
    cross += inc.level1[0] * inc.level1[1];
  }
  // Piecewise-linear area variance on m steps: T^2 (1 - 1/m) / 4.
  CHECK(s2 / double(n) == doctest::Approx(T * T * (1.0 - 1.0 / double(m)) / 4.0).epsilon(0.05));
  CHECK(std::abs(cross / double(n)) < 3.0 * T / std::sqrt(double(n)));
}
