#include "roughchaos/calculus.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "roughchaos/errors.hpp"
#include "roughchaos/rng.hpp"

namespace roughchaos {

namespace fields {

VectorField zero(std::size_t in_dim, std::size_t drive_dim, std::size_t out_dim) {
  VectorField f;
  f.in_dim = in_dim;
  f.drive_dim = drive_dim;
  f.out_dim = out_dim;
  f.value = [](std::span<const double>, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
  };
  f.jacobian = f.value;
  f.name = "zero";
  return f;
}

VectorField constant(std::size_t in_dim, std::size_t drive_dim, std::size_t out_dim,
                     std::vector<double> c) {
  if (c.size() != drive_dim * out_dim) throw ArgumentError("constant field has wrong size");
  VectorField f = zero(in_dim, drive_dim, out_dim);
  double sup = 0.0;
  for (double v : c) sup = std::max(sup, std::abs(v));
  f.value = [c = std::move(c)](std::span<const double>, std::span<double> out) {
    std::copy(c.begin(), c.end(), out.begin());
  };
  f.sup_value = sup;
  f.name = "constant";
  return f;
}

VectorField identity_form(std::size_t dim) {
  VectorField f;
  f.in_dim = dim;
  f.drive_dim = dim;
  f.out_dim = 1;
  f.value = [](std::span<const double> x, std::span<double> out) {
    std::copy(x.begin(), x.end(), out.begin());
  };
  f.jacobian = [dim](std::span<const double>, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t j = 0; j < dim; ++j) out[j * dim + j] = 1.0;
  };
  f.sup_value = HUGE_VAL;
  f.sup_jacobian = 1.0;
  f.name = "identity_form";
  return f;
}

VectorField cosine_form(std::size_t dim) {
  VectorField f;
  f.in_dim = dim;
  f.drive_dim = dim;
  f.out_dim = 1;
  f.value = [](std::span<const double> x, std::span<double> out) {
    for (std::size_t j = 0; j < x.size(); ++j) out[j] = std::cos(x[j]);
  };
  f.jacobian = [dim](std::span<const double> x, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t j = 0; j < dim; ++j) out[j * dim + j] = -std::sin(x[j]);
  };
  f.sup_value = f.sup_jacobian = f.sup_hessian = 1.0;
  f.name = "cosine_form";
  return f;
}

VectorField linear_scaling(std::size_t state_dim, std::vector<double> a) {
  VectorField f;
  f.in_dim = state_dim;
  f.drive_dim = a.size();
  f.out_dim = state_dim;
  const std::size_t e = a.size();
  double amax = 0.0;
  for (double v : a) amax = std::max(amax, std::abs(v));
  f.value = [a, e](std::span<const double> y, std::span<double> out) {
    for (std::size_t o = 0; o < y.size(); ++o)
      for (std::size_t j = 0; j < e; ++j) out[o * e + j] = a[j] * y[o];
  };
  f.jacobian = [a, e, state_dim](std::span<const double>, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t o = 0; o < state_dim; ++o)
      for (std::size_t j = 0; j < e; ++j) out[(o * e + j) * state_dim + o] = a[j];
  };
  f.sup_value = HUGE_VAL;
  f.sup_jacobian = amax;
  f.name = "linear_scaling";
  return f;
}

VectorField linear_drift(std::size_t state_dim, std::vector<double> a) {
  if (a.size() != state_dim * state_dim) throw ArgumentError("drift matrix has wrong size");
  VectorField f;
  f.in_dim = state_dim;
  f.drive_dim = 1;
  f.out_dim = state_dim;
  f.value = [a, state_dim](std::span<const double> y, std::span<double> out) {
    for (std::size_t o = 0; o < state_dim; ++o) {
      double s = 0.0;
      for (std::size_t k = 0; k < state_dim; ++k) s += a[o * state_dim + k] * y[k];
      out[o] = s;
    }
  };
  f.jacobian = [a](std::span<const double>, std::span<double> out) {
    std::copy(a.begin(), a.end(), out.begin());
  };
  f.sup_value = HUGE_VAL;
  f.name = "linear_drift";
  return f;
}

VectorField sine_field(std::size_t state_dim, std::size_t drive_dim, double scale) {
  VectorField f;
  f.in_dim = state_dim;
  f.drive_dim = drive_dim;
  f.out_dim = state_dim;
  f.value = [=](std::span<const double> y, std::span<double> out) {
    for (std::size_t o = 0; o < state_dim; ++o)
      for (std::size_t j = 0; j < drive_dim; ++j)
        out[o * drive_dim + j] = scale * std::sin(y[o] + static_cast<double>(j + 1));
  };
  f.jacobian = [=](std::span<const double> y, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t o = 0; o < state_dim; ++o)
      for (std::size_t j = 0; j < drive_dim; ++j)
        out[(o * drive_dim + j) * state_dim + o] =
            scale * std::cos(y[o] + static_cast<double>(j + 1));
  };
  f.sup_value = f.sup_jacobian = f.sup_hessian = std::abs(scale);
  f.name = "sine_field";
  return f;
}

}  // namespace fields

FieldCheck check_jacobian(const VectorField& f, std::size_t points, std::uint64_t seed,
                          double radius) {
  RandomStream stream(seed);
  const std::size_t in = f.in_dim;
  std::vector<double> x(in), jac(f.jacobian_size()), plus(f.value_size()), minus(f.value_size());
  FieldCheck check;
  for (std::size_t p = 0; p < points; ++p) {
    for (double& v : x) v = radius * (2.0 * stream.uniform() - 1.0);
    f.jacobian(x, jac);
    for (std::size_t k = 0; k < in; ++k) {
      const double step = 1e-6 * std::max(1.0, std::abs(x[k]));
      const double keep = x[k];
      x[k] = keep + step;
      f.value(x, plus);
      x[k] = keep - step;
      f.value(x, minus);
      x[k] = keep;
      for (std::size_t r = 0; r < f.value_size(); ++r) {
        const double fd = (plus[r] - minus[r]) / (2.0 * step);
        const double an = jac[r * in + k];
        const double err = std::abs(fd - an) / std::max(1.0, std::abs(an));
        check.max_relative_error = std::max(check.max_relative_error, err);
      }
    }
  }
  check.ok = check.max_relative_error < 1e-6;
  return check;
}

std::vector<double> rough_integral(const VectorField& f, const GridRoughPath& path,
                                   std::size_t stride) {
  const std::size_t e = path.dim();
  if (f.in_dim != e || f.drive_dim != e)
    throw ArgumentError("vector field dimensions (" + std::to_string(f.in_dim) + "," +
                        std::to_string(f.drive_dim) + ") do not match path dimension " +
                        std::to_string(e));
  if (stride == 0 || path.steps() % stride != 0)
    throw ArgumentError("stride must divide the number of steps");
  const std::size_t out_dim = f.out_dim;
  std::vector<double> total(out_dim, 0.0), val(f.value_size()), jac(f.jacobian_size());
  std::vector<double> dx(e);
  for (std::size_t s = 0; s < path.steps(); s += stride) {
    auto x = path.point(s);
    std::span<const double> inc, area;
    Increment chen;
    if (stride == 1) {
      auto next = path.point(s + 1);
      for (std::size_t i = 0; i < e; ++i) dx[i] = next[i] - x[i];
      inc = dx;
      area = path.step_area(s);
    } else {
      chen = chen_increment(path, s, s + stride);
      inc = chen.level1;
      area = chen.level2;
    }
    f.value(x, val);
    f.jacobian(x, jac);
    for (std::size_t o = 0; o < out_dim; ++o) {
      double acc = 0.0;
      for (std::size_t j = 0; j < e; ++j) acc += val[o * e + j] * inc[j];
      for (std::size_t j = 0; j < e; ++j)
        for (std::size_t k = 0; k < e; ++k) acc += jac[(o * e + j) * e + k] * area[k * e + j];
      total[o] += acc;
    }
  }
  return total;
}

RefinementReport rough_integral_refinement_check(const VectorField& f, const GridRoughPath& path,
                                                 HoelderExponent alpha) {
  const std::size_t m = path.steps();
  if (m == 0 || (m & (m - 1)) != 0) throw ArgumentError("refinement check needs m a power of 2");
  RefinementReport rep;
  for (std::size_t s = m; s >= 1; s /= 2) {
    rep.strides.push_back(s);
    rep.values.push_back(rough_integral(f, path, s).front());
  }
  double scale = 0.0;
  for (double v : rep.values) scale = std::max(scale, std::abs(v));
  std::vector<double> lx, ly;
  for (std::size_t i = 1; i < rep.values.size(); ++i) {
    const double d = std::abs(rep.values[i] - rep.values[i - 1]);
    rep.differences.push_back(d);
    if (d > 1e-13 * std::max(1.0, scale)) {
      lx.push_back(std::log(path.grid().step() * static_cast<double>(rep.strides[i - 1])));
      ly.push_back(std::log(d));
    }
  }
  if (lx.size() >= 2) {
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      mx += lx[i];
      my += ly[i];
    }
    mx /= static_cast<double>(lx.size());
    my /= static_cast<double>(lx.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      sxy += (lx[i] - mx) * (ly[i] - my);
      sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    rep.decay_exponent = sxx > 0.0 ? sxy / sxx : 0.0;
    rep.cauchy = rep.decay_exponent > 0.0;
  } else {
    rep.decay_exponent = HUGE_VAL;
    rep.cauchy = true;
  }
  const std::size_t n = rep.values.size();
  rep.richardson = n >= 2 ? 2.0 * rep.values[n - 1] - rep.values[n - 2] : rep.values.back();
  rep.norm = hoelder_norm(path, alpha);
  const double cf = kGrowthBoundConstant * (f.sup_value + f.sup_jacobian + f.sup_hessian) *
                    std::max(1.0, path.grid().horizon);
  rep.bound = cf * std::max(rep.norm, std::pow(rep.norm, alpha.variation_exponent()));
  rep.bound_holds = euclidean_norm(rough_integral(f, path, 1)) <= rep.bound;
  return rep;
}

SamplePath rde_solve(const VectorField& drift, const VectorField& diffusion,
                     const GridRoughPath& drive, std::span<const double> y0) {
  const std::size_t n = y0.size();
  const std::size_t e = drive.dim();
  if (diffusion.in_dim != n || diffusion.out_dim != n || diffusion.drive_dim != e)
    throw ArgumentError("diffusion field does not match state/drive dimensions");
  const bool has_drift = drift.in_dim != 0;
  if (has_drift && (drift.in_dim != n || drift.out_dim != n || drift.drive_dim != 1))
    throw ArgumentError("drift field does not match state dimension");
  const std::size_t m = drive.steps();
  const double h = drive.grid().step();
  std::vector<double> ys((m + 1) * n);
  std::copy(y0.begin(), y0.end(), ys.begin());
  std::vector<double> val(diffusion.value_size()), jac(diffusion.jacobian_size()), f0(n), dx(e);
  for (std::size_t j = 0; j < m; ++j) {
    std::span<const double> y(ys.data() + j * n, n);
    std::span<double> next(ys.data() + (j + 1) * n, n);
    auto a = drive.point(j);
    auto b = drive.point(j + 1);
    for (std::size_t i = 0; i < e; ++i) dx[i] = b[i] - a[i];
    auto area = drive.step_area(j);
    diffusion.value(y, val);
    diffusion.jacobian(y, jac);
    if (has_drift) drift.value(y, f0);
    for (std::size_t o = 0; o < n; ++o) {
      double acc = y[o];
      if (has_drift) acc += f0[o] * h;
      for (std::size_t k = 0; k < e; ++k) acc += val[o * e + k] * dx[k];
      // (Df f)_{o,kj} XX^{kj} with (Df f)_{o,kj} = sum_l d_l f_{o j} f_{l k}
      for (std::size_t k = 0; k < e; ++k)
        for (std::size_t jj = 0; jj < e; ++jj) {
          double dff = 0.0;
          for (std::size_t l = 0; l < n; ++l) dff += jac[(o * e + jj) * n + l] * val[l * e + k];
          acc += dff * area[k * e + jj];
        }
      if (!std::isfinite(acc)) throw DivergenceError("RDE state became non-finite", j + 1);
      next[o] = acc;
    }
  }
  return SamplePath(n, drive.grid(), std::move(ys));
}

}  // namespace roughchaos
