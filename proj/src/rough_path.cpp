#include "roughchaos/rough_path.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "roughchaos/errors.hpp"

namespace roughchaos {

namespace {

double frobenius(std::span<const double> m) { return euclidean_norm(m); }

// (x, xx) <- (x, xx) (x) (dx, dxx)
void chen_step(std::span<double> x, std::span<double> xx, std::span<const double> dx,
               std::span<const double> dxx) {
  const std::size_t e = x.size();
  for (std::size_t i = 0; i < e; ++i)
    for (std::size_t j = 0; j < e; ++j) xx[i * e + j] += dxx[i * e + j] + x[i] * dx[j];
  for (std::size_t i = 0; i < e; ++i) x[i] += dx[i];
}

void step_delta(const GridRoughPath& p, std::size_t j, std::span<double> out) {
  auto a = p.point(j);
  auto b = p.point(j + 1);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = b[i] - a[i];
}

}  // namespace

HoelderExponent::HoelderExponent(double alpha) : alpha_(alpha) {
  if (!(alpha > 1.0 / 3.0 && alpha < 0.5))
    throw ArgumentError("alpha must lie in (1/3, 1/2), got " + std::to_string(alpha));
}

Increment& Increment::operator*=(const Increment& next) {
  chen_step(level1, level2, next.level1, next.level2);
  return *this;
}

GridRoughPath::GridRoughPath(std::size_t dim, Grid grid, std::vector<double> level1,
                             std::vector<double> level2_steps)
    : dim_(dim), grid_(grid), level1_(std::move(level1)), level2_(std::move(level2_steps)) {
  validate_grid(grid_);
  if (dim_ == 0) throw ArgumentError("rough path dimension must be positive");
  if (level1_.size() != (grid_.steps + 1) * dim_)
    throw ArgumentError("level-1 data has wrong size");
  if (level2_.size() != grid_.steps * dim_ * dim_)
    throw ArgumentError("level-2 data has wrong size");
  for (double v : level1_)
    if (!std::isfinite(v)) throw ArgumentError("non-finite level-1 value");
  std::vector<double> dx(dim_);
  for (std::size_t j = 0; j < grid_.steps; ++j) {
    step_delta(*this, j, dx);
    auto xx = step_area(j);
    double scale = 1.0;
    for (double v : dx) scale += v * v;
    for (std::size_t a = 0; a < dim_; ++a)
      for (std::size_t b = a; b < dim_; ++b) {
        const double sym = 0.5 * (xx[a * dim_ + b] + xx[b * dim_ + a]);
        if (!std::isfinite(sym) || std::abs(sym - 0.5 * dx[a] * dx[b]) > 1e-12 * scale)
          throw ArgumentError("level-2 step " + std::to_string(j) +
                              " violates geometricity Sym(XX) = X(x)X/2");
      }
  }
}

GridRoughPath GridRoughPath::block(std::size_t first, std::size_t count) const {
  if (count == 0 || first + count > dim_) throw ArgumentError("block out of range");
  std::vector<double> l1;
  l1.reserve((steps() + 1) * count);
  for (std::size_t j = 0; j <= steps(); ++j) {
    auto p = point(j);
    l1.insert(l1.end(), p.begin() + first, p.begin() + first + count);
  }
  std::vector<double> l2;
  l2.reserve(steps() * count * count);
  for (std::size_t j = 0; j < steps(); ++j) {
    auto a = step_area(j);
    for (std::size_t r = first; r < first + count; ++r)
      for (std::size_t c = first; c < first + count; ++c) l2.push_back(a[r * dim_ + c]);
  }
  return GridRoughPath(count, grid_, std::move(l1), std::move(l2));
}

Increment chen_increment(const GridRoughPath& path, std::size_t a, std::size_t b) {
  if (!(a < b) || b > path.steps())
    throw ArgumentError("chen_increment needs 0 <= a < b <= m, got a=" + std::to_string(a) +
                        " b=" + std::to_string(b));
  const std::size_t e = path.dim();
  Increment inc{std::vector<double>(e, 0.0), std::vector<double>(e * e, 0.0)};
  std::vector<double> dx(e);
  for (std::size_t j = a; j < b; ++j) {
    step_delta(path, j, dx);
    chen_step(inc.level1, inc.level2, dx, path.step_area(j));
  }
  return inc;
}

GridRoughPath dilate(const GridRoughPath& path, double lambda) {
  std::vector<double> l1(path.level1().begin(), path.level1().end());
  std::vector<double> l2(path.level2_steps().begin(), path.level2_steps().end());
  for (double& v : l1) v *= lambda;
  for (double& v : l2) v *= lambda * lambda;
  return GridRoughPath(path.dim(), path.grid(), std::move(l1), std::move(l2));
}

GridRoughPath coarsen(const GridRoughPath& path, std::size_t factor) {
  if (factor == 0 || path.steps() % factor != 0)
    throw ArgumentError("coarsening factor must divide the number of steps");
  if (factor == 1) return path;
  const std::size_t e = path.dim();
  const std::size_t coarse = path.steps() / factor;
  std::vector<double> l1;
  l1.reserve((coarse + 1) * e);
  std::vector<double> l2(coarse * e * e, 0.0);
  std::vector<double> x(e), dx(e);
  for (std::size_t c = 0; c < coarse; ++c) {
    auto p = path.point(c * factor);
    l1.insert(l1.end(), p.begin(), p.end());
    std::fill(x.begin(), x.end(), 0.0);
    std::span<double> xx(l2.data() + c * e * e, e * e);
    for (std::size_t j = c * factor; j < (c + 1) * factor; ++j) {
      step_delta(path, j, dx);
      chen_step(x, xx, dx, path.step_area(j));
    }
  }
  auto last = path.point(path.steps());
  l1.insert(l1.end(), last.begin(), last.end());
  return GridRoughPath(e, Grid{coarse, path.grid().horizon}, std::move(l1), std::move(l2));
}

double homogeneous_size(std::span<const double> level1, std::span<const double> level2) {
  return euclidean_norm(level1) + std::sqrt(frobenius(level2));
}

namespace {

double hoelder_exact(const GridRoughPath& path, double alpha) {
  const std::size_t m = path.steps();
  const std::size_t e = path.dim();
  const double h = path.grid().step();
  std::vector<double> lag_pow(m + 1);
  for (std::size_t l = 1; l <= m; ++l) lag_pow[l] = std::pow(h * static_cast<double>(l), alpha);
  double sup1 = 0.0, sup2 = 0.0;
  std::vector<double> x(e), xx(e * e), dx(e);
  for (std::size_t a = 0; a < m; ++a) {
    std::fill(x.begin(), x.end(), 0.0);
    std::fill(xx.begin(), xx.end(), 0.0);
    for (std::size_t b = a + 1; b <= m; ++b) {
      step_delta(path, b - 1, dx);
      chen_step(x, xx, dx, path.step_area(b - 1));
      const double w = lag_pow[b - a];
      sup1 = std::max(sup1, euclidean_norm(x) / w);
      sup2 = std::max(sup2, std::sqrt(frobenius(xx)) / w);
    }
  }
  return sup1 + sup2;
}

// Prefix signatures S_j = (X_{0,j}, XX_{0,j}); pairs recovered with the Chen
// inverse XX_{a,b} = XX_{0,b} - XX_{0,a} - X_{0,a} (x) X_{a,b}.
double hoelder_dyadic(const GridRoughPath& path, double alpha) {
  const std::size_t m = path.steps();
  const std::size_t e = path.dim();
  const double h = path.grid().step();
  std::vector<double> px((m + 1) * e, 0.0), pxx((m + 1) * e * e, 0.0);
  std::vector<double> dx(e);
  for (std::size_t j = 0; j < m; ++j) {
    std::copy_n(px.begin() + j * e, e, px.begin() + (j + 1) * e);
    std::copy_n(pxx.begin() + j * e * e, e * e, pxx.begin() + (j + 1) * e * e);
    step_delta(path, j, dx);
    chen_step({px.data() + (j + 1) * e, e}, {pxx.data() + (j + 1) * e * e, e * e}, dx,
              path.step_area(j));
  }
  double sup1 = 0.0, sup2 = 0.0;
  std::vector<double> x(e), xx(e * e);
  for (std::size_t lag = 1; lag <= m; lag *= 2) {
    const double w = std::pow(h * static_cast<double>(lag), alpha);
    for (std::size_t a = 0; a + lag <= m; ++a) {
      const std::size_t b = a + lag;
      for (std::size_t i = 0; i < e; ++i) x[i] = px[b * e + i] - px[a * e + i];
      for (std::size_t i = 0; i < e; ++i)
        for (std::size_t k = 0; k < e; ++k)
          xx[i * e + k] = pxx[b * e * e + i * e + k] - pxx[a * e * e + i * e + k] -
                          px[a * e + i] * x[k];
      sup1 = std::max(sup1, euclidean_norm(x) / w);
      sup2 = std::max(sup2, std::sqrt(frobenius(xx)) / w);
    }
  }
  return sup1 + sup2;
}

}  // namespace

double hoelder_norm(const GridRoughPath& path, HoelderExponent alpha, HoelderMode mode) {
  if (mode == HoelderMode::Dyadic && path.steps() > 4096)
    return hoelder_dyadic(path, alpha.value());
  return hoelder_exact(path, alpha.value());
}

double homogeneous_distance(const GridRoughPath& p, const GridRoughPath& q,
                            HoelderExponent alpha) {
  if (p.dim() != q.dim() || !(p.grid() == q.grid()))
    throw ArgumentError("homogeneous_distance needs paths on the same grid and dimension");
  const std::size_t m = p.steps();
  const std::size_t e = p.dim();
  const double h = p.grid().step();
  std::vector<double> pow1(m + 1), pow2(m + 1);
  for (std::size_t l = 1; l <= m; ++l) {
    pow1[l] = std::pow(h * static_cast<double>(l), alpha.value());
    pow2[l] = pow1[l] * pow1[l];
  }
  std::vector<double> diff0(e);
  for (std::size_t i = 0; i < e; ++i) diff0[i] = p.point(0)[i] - q.point(0)[i];
  double sup1 = 0.0, sup2 = 0.0;
  std::vector<double> x(e), xx(e * e), y(e), yy(e * e), dx(e), dy(e), d1(e), d2(e * e);
  for (std::size_t a = 0; a < m; ++a) {
    std::fill(x.begin(), x.end(), 0.0);
    std::fill(xx.begin(), xx.end(), 0.0);
    std::fill(y.begin(), y.end(), 0.0);
    std::fill(yy.begin(), yy.end(), 0.0);
    for (std::size_t b = a + 1; b <= m; ++b) {
      step_delta(p, b - 1, dx);
      step_delta(q, b - 1, dy);
      chen_step(x, xx, dx, p.step_area(b - 1));
      chen_step(y, yy, dy, q.step_area(b - 1));
      for (std::size_t i = 0; i < e; ++i) d1[i] = x[i] - y[i];
      for (std::size_t i = 0; i < e * e; ++i) d2[i] = xx[i] - yy[i];
      sup1 = std::max(sup1, euclidean_norm(d1) / pow1[b - a]);
      sup2 = std::max(sup2, frobenius(d2) / pow2[b - a]);
    }
  }
  return euclidean_norm(diff0) + sup1 + sup2;
}

double p_variation(const GridRoughPath& path, std::size_t a, std::size_t b,
                   HoelderExponent alpha) {
  if (!(a < b) || b > path.steps()) throw ArgumentError("p_variation needs a < b <= m");
  const double p = alpha.variation_exponent();
  const std::size_t e = path.dim();
  const std::size_t len = b - a;
  // best[i]: max over partitions of [t_a, t_{a+i}] of sum omega^p
  std::vector<double> best(len + 1, 0.0);
  std::vector<double> x(e), xx(e * e), dx(e);
  for (std::size_t i = 0; i < len; ++i) {
    std::fill(x.begin(), x.end(), 0.0);
    std::fill(xx.begin(), xx.end(), 0.0);
    for (std::size_t j = i + 1; j <= len; ++j) {
      step_delta(path, a + j - 1, dx);
      chen_step(x, xx, dx, path.step_area(a + j - 1));
      best[j] = std::max(best[j], best[i] + std::pow(homogeneous_size(x, xx), p));
    }
  }
  return std::pow(best[len], alpha.value());
}

std::vector<std::size_t> variation_stopping_times(const GridRoughPath& path,
                                                  HoelderExponent alpha) {
  const double p = alpha.variation_exponent();
  const std::size_t m = path.steps();
  const std::size_t e = path.dim();
  std::vector<std::size_t> taus;
  // Running increments from every node of the current window to the current
  // node; best[i] as in p_variation, indexed relative to the window start.
  std::vector<double> xs, xxs, best;
  std::vector<double> dx(e);
  std::size_t start = 0;
  best.assign(1, 0.0);
  xs.clear();
  xxs.clear();
  for (std::size_t t = start; t < m; ++t) {
    step_delta(path, t, dx);
    auto area = path.step_area(t);
    // open a new running increment starting at node t
    xs.insert(xs.end(), e, 0.0);
    xxs.insert(xxs.end(), e * e, 0.0);
    const std::size_t open = t - start + 1;
    double value = 0.0;
    for (std::size_t i = 0; i < open; ++i) {
      std::span<double> x(xs.data() + i * e, e);
      std::span<double> xx(xxs.data() + i * e * e, e * e);
      chen_step(x, xx, dx, area);
      value = std::max(value, best[i] + std::pow(homogeneous_size(x, xx), p));
    }
    best.push_back(value);
    if (value >= 1.0) {
      taus.push_back(t + 1);
      start = t + 1;
      best.assign(1, 0.0);
      xs.clear();
      xxs.clear();
    }
  }
  return taus;
}

std::size_t n_alpha(const GridRoughPath& path, HoelderExponent alpha) {
  const auto taus = variation_stopping_times(path, alpha);
  return static_cast<std::size_t>(
      std::count_if(taus.begin(), taus.end(), [&](std::size_t t) { return t < path.steps(); }));
}

}  // namespace roughchaos
