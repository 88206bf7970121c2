#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "roughchaos/grid.hpp"
#include "roughchaos/rough_path.hpp"

namespace roughchaos {

/// f : R^in -> L(R^drive, R^out).
///
/// `value` writes the out x drive matrix (row-major). `jacobian` writes
/// d f_{o,j} / d x_k at index (o * drive + j) * in + k.
struct VectorField {
  using Eval = std::function<void(std::span<const double> x, std::span<double> out)>;

  std::size_t in_dim = 0;
  std::size_t drive_dim = 0;
  std::size_t out_dim = 0;
  Eval value;
  Eval jacobian;
  /// Sup norms of f, Df, D^2 f as declared by the constructor of the field.
  double sup_value = 0.0;
  double sup_jacobian = 0.0;
  double sup_hessian = 0.0;
  std::string name;

  std::size_t value_size() const noexcept { return out_dim * drive_dim; }
  std::size_t jacobian_size() const noexcept { return out_dim * drive_dim * in_dim; }
};

namespace fields {

/// f = 0.
VectorField zero(std::size_t in_dim, std::size_t drive_dim, std::size_t out_dim);
/// f(x) = c, a constant out x drive matrix.
VectorField constant(std::size_t in_dim, std::size_t drive_dim, std::size_t out_dim,
                     std::vector<double> c);
/// One-form f(x) . dX = <x, dX> on R^e (unbounded; for Stratonovich checks).
VectorField identity_form(std::size_t dim);
/// One-form f(x) . dX = sum_i cos(x_i) dX^i on R^e, in C^2_b.
VectorField cosine_form(std::size_t dim);
/// Linear field on R^N driven by R^e: f(y) e_j = a_j * y (each drive slot
/// scales y). Used by dY = Y dX style equations.
VectorField linear_scaling(std::size_t state_dim, std::vector<double> a);
/// f(y) = A y as a drift (drive dimension 1); `a` is N x N row-major.
VectorField linear_drift(std::size_t state_dim, std::vector<double> a);
/// Bounded smooth field on R^N driven by R^e: f(y) e_j = s_j * (sin(y_1 + j), ..., ).
VectorField sine_field(std::size_t state_dim, std::size_t drive_dim, double scale);

}  // namespace fields

struct FieldCheck {
  double max_relative_error = 0.0;
  bool ok = false;
};

/// Compares the analytic jacobian with central finite differences at `points`
/// random points in [-radius, radius]^in (relative tolerance 1e-6).
FieldCheck check_jacobian(const VectorField& f, std::size_t points, std::uint64_t seed,
                          double radius = 2.0);

/// I_Delta f(X) = sum_[s,t] f(X_s) X_{s,t} + Df(X_s) XX_{s,t} over the
/// partition of every `stride`-th grid node. stride = 1 is the integral.
std::vector<double> rough_integral(const VectorField& f, const GridRoughPath& path,
                                   std::size_t stride = 1);

/// Documented constant in |int f dX| <= C_f (||X|| v ||X||^{1/alpha}).
inline constexpr double kGrowthBoundConstant = 8.0;

struct RefinementReport {
  std::vector<std::size_t> strides;      ///< m, m/2, ..., 1
  std::vector<double> values;            ///< first output component per stride
  std::vector<double> differences;       ///< |I_k+1 - I_k|
  double decay_exponent = 0.0;           ///< slope of log diff against log mesh
  bool cauchy = false;                   ///< exponent > 0 or all differences ~ 0
  double richardson = 0.0;               ///< 2 I_1 - I_2 extrapolation
  double norm = 0.0;                     ///< ||X||_alpha
  double bound = 0.0;                    ///< C_f (||X|| v ||X||^{1/alpha})
  bool bound_holds = false;
};

/// Evaluates I_Delta over strides {m, m/2, ..., 1}; m must be a power of 2.
/// C_f = 8 (|f| + |Df| + |D^2 f|) (1 v T).
RefinementReport rough_integral_refinement_check(const VectorField& f, const GridRoughPath& path,
                                                 HoelderExponent alpha = HoelderExponent{0.4});

/// Second-order (Davie) scheme on the drive grid:
/// Y_{j+1} = Y_j + f0(Y_j) h + f(Y_j) X_{j,j+1} + (Df f)(Y_j) XX_{j,j+1}.
/// `drift` has drive dimension 1 and may be empty (in_dim == 0) for no drift.
/// Throws DivergenceError on a non-finite state.
SamplePath rde_solve(const VectorField& drift, const VectorField& diffusion,
                     const GridRoughPath& drive, std::span<const double> y0);

}  // namespace roughchaos
