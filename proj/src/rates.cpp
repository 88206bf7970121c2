#include "roughchaos/rates.hpp"

#include <cmath>
#include <cstring>
#include <string>
#include <unordered_map>
#include <vector>

#include "roughchaos/calculus.hpp"
#include "roughchaos/errors.hpp"
#include "roughchaos/lift.hpp"
#include "roughchaos/parallel.hpp"

namespace roughchaos {

namespace {

void require_divergence(const InteractionField& b) {
  if (!b.has_divergence())
    throw ArgumentError("interaction '" + b.id + "' lacks the jacobians needed for divergences");
}

double trace(const std::vector<double>& j, std::size_t d) {
  double s = 0.0;
  for (std::size_t r = 0; r < d; ++r) s += j[r * d + r];
  return s;
}

// Trapezoid node weight on m steps of size h.
double node_weight(std::size_t s, std::size_t m, double h) {
  return (s == 0 || s == m) ? 0.5 * h : h;
}

std::string key_of(std::span<const double> v) {
  std::string k(sizeof(double) * v.size(), '\0');
  std::memcpy(k.data(), v.data(), k.size());
  return k;
}

struct RowSums {
  double integral = 0.0;
  double div = 0.0;
  double k_prime = 0.0;
  std::vector<double> mean_field_sq;  // per node
};

// Fused per-pair kernel: for particle i against every j, the stride-1 integral
// of b-bar along the pair's piecewise-linear lift (area dX (x) dX / 2 per
// step), the trapezoid integral of div_x b, and the averaged drift per node.
RowSums classical_row(const PathMeasure& q, const InteractionField& b, std::size_t i) {
  const std::size_t d = b.dim, m = q.grid().steps, n = q.size();
  const double h = q.grid().step();
  const SamplePath& x = q.atom(i);
  RowSums out;
  std::vector<double> val(d), jx(d * d), jy(d * d), dx(d), dy(d);
  std::vector<double> drift((m + 1) * d, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    const SamplePath& y = q.atom(j);
    const double wj = q.weight(j);
    double integral = 0.0, div = 0.0;
    for (std::size_t s = 0; s <= m; ++s) {
      const double* px = x.point(s).data();
      const double* py = y.point(s).data();
      b.b(px, py, val.data());
      b.jac_x(px, py, jx.data());
      for (std::size_t r = 0; r < d; ++r) drift[s * d + r] += wj * val[r];
      div += node_weight(s, m, h) * trace(jx, d);
      if (s == m) break;
      b.jac_y(px, py, jy.data());
      const double* nx = x.point(s + 1).data();
      const double* ny = y.point(s + 1).data();
      for (std::size_t r = 0; r < d; ++r) {
        dx[r] = nx[r] - px[r];
        dy[r] = ny[r] - py[r];
      }
      double acc = 0.0;
      for (std::size_t r = 0; r < d; ++r) {
        acc += val[r] * dx[r];
        double lin = 0.0;
        for (std::size_t c = 0; c < d; ++c) lin += jx[r * d + c] * dx[c] + jy[r * d + c] * dy[c];
        acc += 0.5 * lin * dx[r];
      }
      integral += acc;
    }
    out.integral += wj * integral;
    out.div += wj * div;
  }
  out.mean_field_sq.resize(m + 1);
  for (std::size_t s = 0; s <= m; ++s) {
    double sq = 0.0;
    for (std::size_t r = 0; r < d; ++r) sq += drift[s * d + r] * drift[s * d + r];
    out.mean_field_sq[s] = sq;
    const double* px = x.point(s).data();
    b.jac_y(px, px, jy.data());
    out.k_prime += node_weight(s, m, h) * trace(jy, d);
  }
  return out;
}

}  // namespace

KTerms functional_K_b_classical(const PathMeasure& q, const InteractionField& b,
                                unsigned threads) {
  require_divergence(b);
  if (q.dim() != b.dim) throw ArgumentError("measure dimension differs from the interaction's");
  const std::size_t n = q.size(), m = q.grid().steps;
  const double h = q.grid().step();
  std::vector<RowSums> rows(n);
  parallel_for(n, threads, [&](std::size_t i) { rows[i] = classical_row(q, b, i); });
  KTerms k;
  double sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = q.weight(i);
    k.term1 += w * rows[i].integral;
    k.term2 += w * rows[i].div;
    k.k_prime += w * rows[i].k_prime;
    for (std::size_t s = 0; s <= m; ++s) sq += w * node_weight(s, m, h) * rows[i].mean_field_sq[s];
  }
  k.term2 *= 0.5;
  k.term3 = 0.5 * sq;
  k.k_prime *= -0.5;
  k.total = k.term1 - k.term2 - k.term3;
  return k;
}

KTerms functional_K_b_enhanced(const RoughPathMeasure& mu, const InteractionField& b,
                               unsigned threads) {
  require_divergence(b);
  const std::size_t d = b.dim;
  if (mu.dim() != 2 * d)
    throw ArgumentError("enhanced functional needs 2d = " + std::to_string(2 * d) +
                        " dimensional rough paths, got " + std::to_string(mu.dim()));
  const std::size_t n = mu.size(), m = mu.grid().steps;
  const double h = mu.grid().step();
  const VectorField bbar = bbar_field(b);

  std::vector<double> integral(n), div(n), kp(n);
  parallel_for(n, threads, [&](std::size_t a) {
    const GridRoughPath& x = mu.atom(a);
    integral[a] = rough_integral(bbar, x).front();
    std::vector<double> jac(d * d);
    double sd = 0.0, sk = 0.0;
    for (std::size_t s = 0; s <= m; ++s) {
      const double* p = x.point(s).data();
      b.jac_x(p, p + d, jac.data());
      sd += node_weight(s, m, h) * trace(jac, d);
      b.jac_y(p, p, jac.data());
      sk += node_weight(s, m, h) * trace(jac, d);
    }
    div[a] = sd;
    kp[a] = sk;
  });

  // Inner average per node over the distinct second-layer values, outer sum
  // over the distinct first-layer values.
  std::vector<double> node_sq(m + 1);
  parallel_for(m + 1, threads, [&](std::size_t s) {
    std::unordered_map<std::string, std::size_t> first_idx, second_idx;
    std::vector<const double*> first_pt, second_pt;
    std::vector<double> first_w, second_w;
    for (std::size_t a = 0; a < n; ++a) {
      const auto p = mu.atom(a).point(s);
      const auto x1 = p.subspan(0, d), x2 = p.subspan(d, d);
      auto [i1, new1] = first_idx.emplace(key_of(x1), first_pt.size());
      if (new1) {
        first_pt.push_back(x1.data());
        first_w.push_back(0.0);
      }
      first_w[i1->second] += mu.weight(a);
      auto [i2, new2] = second_idx.emplace(key_of(x2), second_pt.size());
      if (new2) {
        second_pt.push_back(x2.data());
        second_w.push_back(0.0);
      }
      second_w[i2->second] += mu.weight(a);
    }
    std::vector<double> val(d), avg(d);
    double sq = 0.0;
    for (std::size_t u = 0; u < first_pt.size(); ++u) {
      std::fill(avg.begin(), avg.end(), 0.0);
      for (std::size_t v = 0; v < second_pt.size(); ++v) {
        b.b(first_pt[u], second_pt[v], val.data());
        for (std::size_t r = 0; r < d; ++r) avg[r] += second_w[v] * val[r];
      }
      double norm = 0.0;
      for (double c : avg) norm += c * c;
      sq += first_w[u] * norm;
    }
    node_sq[s] = sq;
  });

  KTerms k;
  for (std::size_t a = 0; a < n; ++a) {
    k.term1 += mu.weight(a) * integral[a];
    k.term2 += mu.weight(a) * div[a];
    k.k_prime += mu.weight(a) * kp[a];
  }
  double sq = 0.0;
  for (std::size_t s = 0; s <= m; ++s) sq += node_weight(s, m, h) * node_sq[s];
  k.term2 *= 0.5;
  k.term3 = 0.5 * sq;
  k.k_prime *= -0.5;
  k.total = k.term1 - k.term2 - k.term3;
  return k;
}

double girsanov_log_density_rho_n(const ParticleEnsemble& ens, const InteractionField& b,
                                  unsigned threads) {
  require_divergence(b);
  const KTerms k = functional_K_b_classical(empirical_from_ensemble(ens), b, threads);
  return static_cast<double>(ens.size()) * k.total + k.k_prime;
}

namespace {

double initial_entropy(const GirsanovMeasure& q) {
  if (q.initial_matches_reference) return 0.0;
  if (!q.log_initial_ratio)
    throw ArgumentError("initial law differs from the reference but no log-density ratio given");
  double s = 0.0;
  for (const auto& p : q.paths) s += q.log_initial_ratio(p->point(0));
  return s / static_cast<double>(q.size());
}

}  // namespace

double relative_entropy_girsanov(const GirsanovMeasure& q) {
  q.validate();
  const std::size_t d = q.paths.front()->dim(), m = q.paths.front()->steps();
  const double h = q.paths.front()->grid().step();
  double energy = 0.0;
  for (const auto& g : q.drift) {
    double e = 0.0;
    for (std::size_t s = 0; s <= m; ++s) {
      double sq = 0.0;
      for (std::size_t r = 0; r < d; ++r) sq += g[s * d + r] * g[s * d + r];
      e += node_weight(s, m, h) * sq;
    }
    energy += e;
  }
  return initial_entropy(q) + 0.5 * energy / static_cast<double>(q.size());
}

RateReport rate_J_b(const GirsanovMeasure& q, const InteractionField& b, unsigned threads) {
  q.validate();
  const PathMeasure measure = q.measure();
  RateReport rep;
  rep.H = relative_entropy_girsanov(q);
  rep.K = functional_K_b_classical(measure, b, threads);
  rep.J = rep.H - rep.K.total;

  const std::size_t n = q.size(), d = b.dim, m = measure.grid().steps;
  const double h = measure.grid().step();
  std::vector<double> mismatch(n);
  parallel_for(n, threads, [&](std::size_t i) {
    std::vector<double> val(d), avg(d);
    double e = 0.0;
    for (std::size_t s = 0; s <= m; ++s) {
      std::fill(avg.begin(), avg.end(), 0.0);
      const double* x = q.paths[i]->point(s).data();
      for (std::size_t j = 0; j < n; ++j) {
        b.b(x, q.paths[j]->point(s).data(), val.data());
        for (std::size_t r = 0; r < d; ++r) avg[r] += val[r];
      }
      double sq = 0.0;
      for (std::size_t r = 0; r < d; ++r) {
        const double diff = q.drift[i][s * d + r] - avg[r] / static_cast<double>(n);
        sq += diff * diff;
      }
      e += node_weight(s, m, h) * sq;
    }
    mismatch[i] = e;
  });
  double e = 0.0;
  for (double v : mismatch) e += v;
  rep.J_mismatch = initial_entropy(q) + 0.5 * e / static_cast<double>(n);
  return rep;
}

const char* to_string(RateVerdictKind kind) {
  switch (kind) {
    case RateVerdictKind::Finite: return "finite";
    case RateVerdictKind::Infinite: return "infinite";
    case RateVerdictKind::Unrepresentable: return "unrepresentable";
  }
  return "unknown";
}

RateVerdict rate_I_k(const RoughPathMeasure& mu, double tol, const GirsanovMeasure* rep,
                     HoelderExponent alpha) {
  const std::size_t k = mu.info().layers;
  RateVerdict verdict;
  if (k == 0 || mu.dim() % k != 0) {
    verdict.kind = RateVerdictKind::Infinite;
    verdict.reason = "dimension is not a multiple of the layer count";
    return verdict;
  }
  const std::size_t d = mu.dim() / k, m = mu.grid().steps;
  const PathMeasure q = project_pi1(mu);
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < q.size(); ++i) index.emplace(key_of(q.atom(i).points()), i);

  const LiftConfig own{m, 1, 0};
  std::unordered_map<std::string, double> tuple_weight;
  std::vector<double> layer_pts((m + 1) * d);
  for (std::size_t a = 0; a < mu.size(); ++a) {
    const GridRoughPath& x = mu.atom(a);
    std::vector<std::size_t> tuple(k);
    std::vector<const SamplePath*> layers(k);
    for (std::size_t l = 0; l < k; ++l) {
      for (std::size_t s = 0; s <= m; ++s)
        for (std::size_t r = 0; r < d; ++r) layer_pts[s * d + r] = x.point(s)[l * d + r];
      auto it = index.find(key_of(layer_pts));
      if (it == index.end()) {
        verdict.kind = RateVerdictKind::Infinite;
        verdict.worst_atom = a;
        verdict.worst_distance = std::numeric_limits<double>::infinity();
        verdict.reason = "atom " + std::to_string(a) + " layer " + std::to_string(l + 1) +
                         " is not a first-layer atom";
        return verdict;
      }
      tuple[l] = it->second;
      layers[l] = &q.atom(it->second);
    }
    const double dist = homogeneous_distance(lift_k_layer(layers, own), x, alpha);
    if (dist > verdict.worst_distance || a == 0) {
      verdict.worst_distance = dist;
      verdict.worst_atom = a;
    }
    std::string tk(sizeof(std::size_t) * k, '\0');
    std::memcpy(tk.data(), tuple.data(), tk.size());
    tuple_weight[tk] += mu.weight(a);
  }
  if (verdict.worst_distance > tol) {
    verdict.kind = RateVerdictKind::Infinite;
    verdict.reason = "atom " + std::to_string(verdict.worst_atom) +
                     " differs from the lift of its layers";
    return verdict;
  }
  for (const auto& [tk, w] : tuple_weight) {
    std::vector<std::size_t> tuple(k);
    std::memcpy(tuple.data(), tk.data(), tk.size());
    double prod = 1.0;
    for (std::size_t i : tuple) prod *= q.weight(i);
    if (std::abs(w - prod) > 1e-10 * prod + 1e-14) {
      verdict.kind = RateVerdictKind::Infinite;
      verdict.reason = "tuple weights are not products of first-layer weights";
      return verdict;
    }
  }
  if (!rep) {
    verdict.kind = RateVerdictKind::Unrepresentable;
    verdict.reason = "no drift representation of the first-layer measure";
    return verdict;
  }
  bool matches = rep->size() == q.size();
  for (std::size_t i = 0; matches && i < rep->size(); ++i) {
    auto it = index.find(key_of(rep->paths[i]->points()));
    matches = it != index.end() &&
              std::abs(q.weight(it->second) - 1.0 / static_cast<double>(rep->size())) < 1e-12;
  }
  if (!matches) {
    verdict.kind = RateVerdictKind::Unrepresentable;
    verdict.reason = "the drift representation does not describe the first-layer measure";
    return verdict;
  }
  verdict.kind = RateVerdictKind::Finite;
  verdict.value = relative_entropy_girsanov(*rep);
  return verdict;
}

RateVerdict enhanced_J_b(const RoughPathMeasure& mu, const InteractionField& b,
                         const GirsanovMeasure* rep, double tol, unsigned threads) {
  RateVerdict v = rate_I_k(mu, tol, rep);
  if (v.kind != RateVerdictKind::Finite) return v;
  v.value -= functional_K_b_enhanced(project_Pi2(mu), b, threads).total;
  return v;
}

}  // namespace roughchaos
