// Acceptance run: one PASS/FAIL line per criterion, exit 0 iff all pass.
// Tolerances and runtime budgets are pinned below.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "roughchaos/calculus.hpp"
#include "roughchaos/config.hpp"
#include "roughchaos/experiments.hpp"
#include "roughchaos/lift.hpp"
#include "roughchaos/mckean_vlasov.hpp"
#include "roughchaos/measures.hpp"
#include "roughchaos/metrics.hpp"
#include "roughchaos/rates.hpp"
#include "roughchaos/rng.hpp"
#include "roughchaos/rough_path.hpp"
#include "roughchaos/transport.hpp"
#include "transport_oracle.hpp"

using namespace roughchaos;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

double median(std::vector<double> v) {
  std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
  return v[v.size() / 2];
}

// ---- C1 Chen / geometricity ----------------------------------------------------

constexpr double kChenTol = 1e-12;

Outcome chen_suite() {
  std::mt19937_64 gen(101);
  std::normal_distribution<double> nd;
  double chen = 0.0, sym = 0.0;
  for (int rep = 0; rep < 1000; ++rep) {
    const std::size_t e = 1 + rep % 4, m = 2 + (rep * 7) % 63;
    std::vector<double> pts((m + 1) * e);
    for (std::size_t i = e; i < pts.size(); ++i) pts[i] = pts[i - e] + nd(gen) / std::sqrt(double(m));
    const GridRoughPath p = lift_piecewise_linear(e, pts, 1.0);
    // Three distinct nodes a < b < c.
    const std::size_t a = std::uniform_int_distribution<std::size_t>(0, m - 2)(gen);
    const std::size_t b = std::uniform_int_distribution<std::size_t>(a + 1, m - 1)(gen);
    const std::size_t c = std::uniform_int_distribution<std::size_t>(b + 1, m)(gen);
    Increment left = chen_increment(p, a, b);
    left *= chen_increment(p, b, c);
    const Increment whole = chen_increment(p, a, c);
    for (std::size_t k = 0; k < e * e; ++k) chen = std::max(chen, std::abs(left.level2[k] - whole.level2[k]));
    for (std::size_t i = 0; i < e; ++i)
      for (std::size_t j = 0; j < e; ++j) {
        const double s = 0.5 * (whole.level2[i * e + j] + whole.level2[j * e + i]);
        sym = std::max(sym, std::abs(s - 0.5 * whole.level1[i] * whole.level1[j]));
      }
  }
  return {chen < kChenTol && sym < kChenTol,
          "max Chen residual " + num(chen) + ", max symmetry residual " + num(sym)};
}

// ---- C2 Levy area ------------------------------------------------------------------

constexpr double kCircleTol = 1e-3;
constexpr double kAreaVarianceRelTol = 0.03;

Outcome levy_area() {
  const std::size_t m = 512;
  std::vector<double> pts;
  for (std::size_t j = 0; j <= m; ++j) {
    const double t = 2.0 * std::numbers::pi * double(j) / double(m);
    pts.push_back(std::cos(t));
    pts.push_back(std::sin(t));
  }
  const Increment circle = chen_increment(lift_piecewise_linear(2, pts, 1.0), 0, m);
  const double area = 0.5 * (circle.level2[1] - circle.level2[2]);

  const std::size_t samples = 100000;
  const double T = 1.0;
  double sum = 0.0, sq = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    const GridRoughPath b = lift_brownian(2, T, LiftConfig{1, 256, split_seed(202, s)});
    const auto xx = b.step_area(0);
    const double levy = 0.5 * (xx[1] - xx[2]);
    sum += levy;
    sq += levy * levy;
  }
  const double mean = sum / double(samples);
  const double var = (sq - double(samples) * mean * mean) / double(samples - 1);
  const double target = T * T / 4.0;
  const bool ok = std::abs(area - std::numbers::pi) < kCircleTol &&
                  std::abs(var - target) < kAreaVarianceRelTol * target;
  return {ok, "circle area " + num(area) + " (pi " + num(std::numbers::pi) + "), area variance " + num(var) +
                  " vs T^2/4 = " + num(target)};
}

// ---- C3 rough vs Stratonovich --------------------------------------------------------

constexpr double kStratMedianTol = 1e-2;
constexpr double kRoundoff = 1e-12;

Outcome rough_stratonovich() {
  const std::size_t m = 2048, paths = 1000;
  const std::size_t strides[] = {8, 4, 2, 1};
  std::vector<std::vector<double>> err_x(4, std::vector<double>(paths)), err_cos(4, std::vector<double>(paths));
  const VectorField id = fields::identity_form(1), cosf = fields::cosine_form(1);
  for (std::size_t k = 0; k < paths; ++k) {
    const GridRoughPath b = lift_brownian(1, 1.0, LiftConfig{m, 1, split_seed(303, k)});
    const double b0 = b.point(0)[0], bt = b.point(m)[0];
    for (std::size_t r = 0; r < 4; ++r) {
      err_x[r][k] = std::abs(rough_integral(id, b, strides[r])[0] - 0.5 * (bt * bt - b0 * b0));
      err_cos[r][k] = std::abs(rough_integral(cosf, b, strides[r])[0] - (std::sin(bt) - std::sin(b0)));
    }
  }
  std::vector<double> mx, mc;
  for (std::size_t r = 0; r < 4; ++r) {
    mx.push_back(median(err_x[r]));
    mc.push_back(median(err_cos[r]));
  }
  bool ok = mx[3] < kStratMedianTol;
  for (std::size_t r = 1; r < 4; ++r) ok = ok && mx[r] <= mx[r - 1] + kRoundoff && mc[r] < mc[r - 1];
  return {ok, "x dx medians " + num(mx[0]) + " " + num(mx[1]) + " " + num(mx[2]) + " " + num(mx[3]) +
                  "; cos dx medians " + num(mc[0]) + " " + num(mc[1]) + " " + num(mc[2]) + " " + num(mc[3])};
}

// ---- C4 RDE exactness and drive continuity ------------------------------------------------

constexpr double kLinearRdeTol = 1e-4;
constexpr double kLipschitzRatio = 2.0;

Outcome rde_exactness() {
  const std::size_t m = 1024;
  // Smooth two-dimensional drive; dY = Y (0.5 dX^1 - 0.3 dX^2) has Y_T = exp(0.5 X^1_T - 0.3 X^2_T).
  std::vector<double> pts;
  for (std::size_t j = 0; j <= m; ++j) {
    const double t = double(j) / double(m);
    pts.push_back(std::sin(2.0 * std::numbers::pi * t));
    pts.push_back(t * t);
  }
  const GridRoughPath smooth = lift_piecewise_linear(2, pts, 1.0);
  const double y0[] = {1.0};
  const VectorField none{};
  const SamplePath y = rde_solve(none, fields::linear_scaling(1, {0.5, -0.3}), smooth, y0);
  const double exact = std::exp(0.5 * pts[2 * m] - 0.3 * pts[2 * m + 1]);
  const double linear_err = std::abs(y.point(m)[0] - exact);

  // Lipschitz ratio sup|Y - Y'| / d_alpha(X, X') under two perturbation sizes.
  const std::size_t mb = 256;
  const SamplePath base = brownian_points(2, 1.0, mb, 404);
  const VectorField f = fields::sine_field(2, 2, 0.7);
  const double z0[] = {0.2, -0.1};
  const GridRoughPath x = lift_piecewise_linear(base);
  const SamplePath yx = rde_solve(none, f, x, z0);
  std::vector<double> ratios;
  for (double eps : {1e-2, 1e-3}) {
    std::vector<double> q(base.points().begin(), base.points().end());
    for (std::size_t j = 0; j <= mb; ++j) {
      const double t = double(j) / double(mb);
      q[2 * j] += eps * std::sin(2.0 * std::numbers::pi * t);
      q[2 * j + 1] += eps * t * (1.0 - t);
    }
    const GridRoughPath xp = lift_piecewise_linear(2, q, 1.0);
    const SamplePath yp = rde_solve(none, f, xp, z0);
    double sup = 0.0;
    for (std::size_t j = 0; j <= mb; ++j)
      for (std::size_t i = 0; i < 2; ++i) sup = std::max(sup, std::abs(yx.point(j)[i] - yp.point(j)[i]));
    ratios.push_back(sup / homogeneous_distance(x, xp, HoelderExponent(0.4)));
  }
  const bool stable = std::isfinite(ratios[0]) && std::isfinite(ratios[1]) && ratios[0] > 0.0 &&
                      ratios[1] > 0.0 &&
                      std::max(ratios[0], ratios[1]) <= kLipschitzRatio * std::min(ratios[0], ratios[1]);
  return {linear_err < kLinearRdeTol && stable,
          "linear terminal error " + num(linear_err) + ", Lipschitz estimates " + num(ratios[0]) + " (eps 1e-2), " +
              num(ratios[1]) + " (eps 1e-3)"};
}

// ---- C5 lift approximation ---------------------------------------------------------------

constexpr double kMomentRatio = 2.0;

Outcome lift_approximation() {
  ApproximationSettings s;
  s.dim = 2;
  s.m_list = {8, 32, 128};
  s.fine_steps = 512;
  s.samples = 1000;
  s.c = 0.1;
  s.eta = 0.05;
  s.seed = 505;
  const auto rows = approximation_error_decay(s);
  bool ok = true;
  std::string detail;
  const double root = std::sqrt(double(s.samples));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    detail += "m=" + std::to_string(r.m) + ": mean " + num(r.mean_distance) + " exp-moment " + num(r.exp_moment) + "; ";
    ok = ok && std::isfinite(r.exp_moment) && r.exp_moment <= kMomentRatio * rows.front().exp_moment;
    if (i == 0) continue;
    // Strict decrease, and by more than the 2 sigma band of the difference.
    const double band = 2.0 * std::hypot(rows[i - 1].sd_distance, r.sd_distance) / root;
    ok = ok && r.mean_distance + band < rows[i - 1].mean_distance;
  }
  return {ok, detail};
}

// ---- C6 Wasserstein correctness ----------------------------------------------------------------

constexpr double kBruteForceTol = 1e-10;

Outcome wasserstein_correctness() {
  std::mt19937_64 rng(606);
  std::uniform_int_distribution<std::size_t> size(1, 4);
  std::uniform_int_distribution<int> icost(0, 3);
  std::uniform_real_distribution<double> u(0.05, 1.0), rcost(0.0, 5.0);
  auto simplex = [&](std::size_t n, bool ties) {
    std::vector<double> w(n);
    double s = 0.0;
    for (auto& v : w) s += (v = ties ? double(icost(rng) + 1) : u(rng));
    for (auto& v : w) v /= s;
    return w;
  };
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const bool ties = trial % 2 == 0;
    const std::size_t n = size(rng), m = size(rng);
    const auto a = simplex(n, ties), b = simplex(m, ties);
    std::vector<double> c(n * m);
    for (auto& v : c) v = ties ? icost(rng) : rcost(rng);
    worst = std::max(worst, std::abs(solve_transport(a, b, c).objective - oracle::brute_force(a, b, c)));
  }

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
  bool axioms = true;
  for (std::uint64_t t = 0; t < 20; ++t) {
    const PathMeasure p = measure(3 * t + 1000, 0.0), q = measure(3 * t + 1001, 0.2), r = measure(3 * t + 1002, -0.1);
    for (GroundMetric g : {GroundMetric::HoelderPath, GroundMetric::EuclideanEndpoint}) {
      const double pp = wasserstein1(p, p, g).value, pq = wasserstein1(p, q, g).value;
      const double qp = wasserstein1(q, p, g).value, qr = wasserstein1(q, r, g).value;
      const double pr = wasserstein1(p, r, g).value;
      axioms = axioms && std::abs(pp) < 1e-12 && pq > 0.0 && std::abs(pq - qp) <= 1e-12 * pq &&
               pr <= pq + qr + 1e-12;
    }
  }
  return {worst < kBruteForceTol && axioms,
          "max |simplex - enumeration| " + num(worst) + " over 1000 instances; metric axioms " +
              (axioms ? "hold" : "violated") + " on 20 triples x 2 ground metrics"};
}

// ---- experiments ---------------------------------------------------------------------------------

std::string describe(const ExperimentResult& r) {
  std::string s;
  for (const auto& c : r.criteria) s += std::string(c.pass ? "[ok] " : "[fail] ") + c.name + ": " + c.detail + "; ";
  return s;
}

const char* kGirsanovConfig = R"(schema = 1
seed = 7
interaction = attraction
theta = 0.5
law = gaussian
n = 2
m = 64
samples = 10000
)";

const char* kPocConfig = R"(schema = 1
seed = 20240601
interaction = attraction
theta = 0.5
d = 1
k = 2
T = 1
m = 32
n_list = 8, 32, 128, 512
tuples = 1000
reference_n = 2000
bootstrap = 16
)";

const char* kSanovConfig = R"(schema = 1
seed = 11
delta = 0.5
T = 1
m = 8
n_list = 16, 32, 64, 128, 256
samples = 20000
estimator = tilted
)";

const char* kKlayerConfig = R"(schema = 1
seed = 17
n_list = 8, 16, 32
tuples = 500
reference_n = 500
replicas = 8
field = sine
)";

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

ExperimentResult run(const std::string& id, const char* text, unsigned threads, double* secs = nullptr) {
  const auto start = std::chrono::steady_clock::now();
  Config cfg = Config::parse(text);
  RunOptions o;
  o.threads = threads;
  ExperimentResult r = run_experiment(id, cfg, o);
  if (secs) *secs = seconds_since(start);
  return r;
}

ExperimentResult girsanov_result, poc_result;
double girsanov_secs = 0.0, poc_secs = 0.0;

Outcome girsanov() {
  girsanov_result = run("girsanov-check", kGirsanovConfig, 1, &girsanov_secs);
  return {girsanov_result.pass(), describe(girsanov_result)};
}

// ---- C8 rate-function zero --------------------------------------------------------------------

constexpr double kMkvJBound = 0.02;
constexpr double kBenchmarkRelTol = 0.10;

Outcome rate_zero() {
  const InteractionField b = interactions::attraction(1, 0.5);
  const FixedPointResult fp =
      solve_mkv_fixed_point(b, laws::gaussian({0.0}, 1.0), 2000, 1.0, 32, 1e-5, 50, 808);
  const RateReport mkv = rate_J_b(fp.last.representation, b);

  // Wiener law under b = c: J_b = 1/2 (0 - c)^2 T.
  const double c = 1.0, T = 1.0;
  const GirsanovMeasure wiener = constant_drift_measure(laws::dirac({0.0}), {0.0}, 2000, T, 32, 809);
  const RateReport w = rate_J_b(wiener, interactions::constant({c}));
  const double hand = 0.5 * c * c * T;
  const bool ok = std::abs(mkv.J) < kMkvJBound && std::abs(w.J - hand) <= kBenchmarkRelTol * hand;
  return {ok, "MKV fixed point (" + std::to_string(fp.trace.size()) + " iterations): J " + num(mkv.J) +
                  ", J_mismatch " + num(mkv.J_mismatch) + "; Wiener law, b = 1: J " + num(w.J) +
                  " vs 1/2 c^2 T = " + num(hand)};
}

Outcome poc() {
  poc_result = run("poc", kPocConfig, 1, &poc_secs);
  return {poc_result.pass(), describe(poc_result)};
}

Outcome sanov() {
  const ExperimentResult r = run("sanov-decay", kSanovConfig, 1);
  return {r.pass(), describe(r)};
}

// Each rerun at 4 threads must match byte for byte and finish within twice
// the single-thread time; the slack absorbs thread start-up on sub-second runs.
constexpr double kRerunTimeFactor = 2.0;
constexpr double kRerunSlackSeconds = 1.0;

Outcome determinism() {
  bool ok = true;
  std::string detail;
  auto compare = [&](const std::string& id, const ExperimentResult& one, double one_secs, const char* text) {
    double secs = 0.0;
    const ExperimentResult four = run(id, text, 4, &secs);
    const bool eq = one.report.dump(2) == four.report.dump(2);
    const bool fast = secs <= kRerunTimeFactor * one_secs + kRerunSlackSeconds;
    ok = ok && eq && fast;
    detail += id + (eq ? " identical" : " DIFFERS") + " (" + num(one_secs) + " s vs " + num(secs) + " s); ";
  };
  compare("girsanov-check", girsanov_result, girsanov_secs, kGirsanovConfig);
  compare("poc", poc_result, poc_secs, kPocConfig);
  double klayer_secs = 0.0;
  const ExperimentResult klayer = run("klayer-rde", kKlayerConfig, 1, &klayer_secs);
  compare("klayer-rde", klayer, klayer_secs, kKlayerConfig);
  return {ok, detail + "threads 1 vs 4"};
}

struct Entry {
  const char* id;
  const char* name;
  double budget_seconds;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Entry> entries{
      {"C1", "Chen and geometricity on 1000 random lifts", 10, chen_suite},
      {"C2", "Levy area: circle and Brownian variance", 60, levy_area},
      {"C3", "rough integral equals Stratonovich", 60, rough_stratonovich},
      {"C4", "RDE exactness and drive continuity", 30, rde_exactness},
      {"C5", "lift approximation decay and exponential moment", 300, lift_approximation},
      {"C6", "exact W1 against enumeration; metric axioms", 60, wasserstein_correctness},
      {"C7", "enhanced Girsanov identities", 300, girsanov},
      {"C8", "rate function vanishes at the McKean-Vlasov law", 300, rate_zero},
      {"C9", "enhanced propagation of chaos", 900, poc},
      {"C10", "Sanov decay rate", 600, sanov},
      {"C11", "thread-count determinism of report.json", 3600, determinism},
  };
  int failures = 0;
  for (const auto& e : entries) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = e.run();
    } catch (const std::exception& ex) {
      o = {false, std::string("exception: ") + ex.what()};
    }
    const double secs = seconds_since(start);
    const bool in_time = secs <= e.budget_seconds;
    const bool pass = o.pass && in_time;
    if (!pass) ++failures;
    std::printf("%-4s %s  %s (%.1f s of %.0f s): %s\n", e.id, pass ? "PASS" : "FAIL", e.name, secs,
                e.budget_seconds, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failures, entries.size());
  return failures == 0 ? 0 : 1;
}
