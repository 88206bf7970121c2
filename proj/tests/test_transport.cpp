#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "doctest.h"
#include "roughchaos/errors.hpp"
#include "roughchaos/lift.hpp"
#include "roughchaos/metrics.hpp"
#include "roughchaos/rng.hpp"
#include "roughchaos/transport.hpp"
#include "transport_oracle.hpp"

using namespace roughchaos;

namespace {

std::vector<double> random_simplex(std::mt19937_64& rng, std::size_t n, bool ties) {
  std::uniform_int_distribution<int> small(1, 3);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::vector<double> w(n);
  double s = 0.0;
  for (auto& v : w) s += (v = ties ? small(rng) : u(rng));
  for (auto& v : w) v /= s;
  return w;
}

}  // namespace

TEST_CASE("network simplex matches basis enumeration") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> size(1, 4);
  std::uniform_int_distribution<int> icost(0, 3);
  std::uniform_real_distribution<double> rcost(0.0, 5.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = size(rng), m = size(rng);
    // Integer costs and weights provoke degenerate pivots and ties.
    const bool ties = trial % 2 == 0;
    const auto a = random_simplex(rng, n, ties);
    const auto b = random_simplex(rng, m, ties);
    std::vector<double> c(n * m);
    for (auto& v : c) v = ties ? icost(rng) : rcost(rng);
    const TransportPlan plan = solve_transport(a, b, c);
    const double best = oracle::brute_force(a, b, c);
    CHECK(plan.objective == doctest::Approx(best).epsilon(1e-11));
    CHECK(plan.marginal_error(a, b) < 1e-12);
    for (double f : plan.mass) CHECK(f > 0.0);
  }
}

TEST_CASE("two atoms against a point mass") {
  const std::vector<double> x{0.0, 2.0}, wx{0.5, 0.5}, y{1.0}, wy{1.0};
  CHECK(wasserstein1_points(x, wx, y, wy, 1).value == doctest::Approx(1.0));
  CHECK(wasserstein1_line(x, wx, y, wy) == doctest::Approx(1.0));
}

TEST_CASE("identity coupling costs nothing and line W1 agrees with the simplex") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> x(30), y(25), wx(30, 1.0 / 30), wy(25, 1.0 / 25);
    for (auto& v : x) v = g(rng);
    for (auto& v : y) v = g(rng) + 0.3;
    CHECK(wasserstein1_points(x, wx, x, wx, 1).value == doctest::Approx(0.0));
    CHECK(wasserstein1_points(x, wx, y, wy, 1).value ==
          doctest::Approx(wasserstein1_line(x, wx, y, wy)).epsilon(1e-10));
  }
}

TEST_CASE("W1 is a metric on path measures") {
  auto measure = [](std::uint64_t seed, double shift) {
    std::vector<PathMeasure::AtomPtr> atoms;
    for (std::size_t i = 0; i < 16; ++i) {
      SamplePath p = brownian_points(2, 1.0, 16, split_seed(seed, i));
      std::vector<double> pts(p.points().begin(), p.points().end());
      for (auto& v : pts) v += shift;
      atoms.push_back(std::make_shared<const SamplePath>(2, p.grid(), std::move(pts)));
    }
    return PathMeasure::uniform(std::move(atoms));
  };
  for (std::uint64_t t = 0; t < 10; ++t) {
    const PathMeasure p = measure(3 * t, 0.0), q = measure(3 * t + 1, 0.2),
                      r = measure(3 * t + 2, -0.1);
    for (GroundMetric gm : {GroundMetric::HoelderPath, GroundMetric::EuclideanEndpoint}) {
      const double pq = wasserstein1(p, q, gm).value;
      const double qp = wasserstein1(q, p, gm).value;
      const double qr = wasserstein1(q, r, gm).value;
      const double pr = wasserstein1(p, r, gm).value;
      CHECK(wasserstein1(p, p, gm).value == doctest::Approx(0.0));
      CHECK(pq > 0.0);
      CHECK(pq == doctest::Approx(qp).epsilon(1e-12));
      CHECK(pr <= pq + qr + 1e-12);
    }
  }
}

TEST_CASE("transport input validation") {
  const std::vector<double> a{0.5, 0.5}, b{1.0}, c{1.0, 2.0};
  CHECK_THROWS_AS(solve_transport(a, std::vector<double>{0.5}, c), ArgumentError);
  CHECK_THROWS_AS(solve_transport(a, b, std::vector<double>{1.0}), ArgumentError);
  CHECK_THROWS_AS(solve_transport(std::vector<double>{1.5, -0.5}, b, c), ArgumentError);
  CHECK_THROWS_AS(solve_transport(a, b, std::vector<double>{1.0, NAN}), ArgumentError);
}

TEST_CASE("larger instances stay feasible and beat the product coupling") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t n : {50, 200}) {
    std::vector<double> a(n, 1.0 / double(n)), b(n + 7, 1.0 / double(n + 7)), c(n * (n + 7));
    for (auto& v : c) v = u(rng);
    const TransportPlan plan = solve_transport(a, b, c);
    CHECK(plan.marginal_error(a, b) < 1e-12);
    CHECK(plan.mass.size() <= 2 * n + 6);
    double product = 0.0;
    for (double v : c) product += v / double(n) / double(n + 7);
    CHECK(plan.objective < product);
  }
}
