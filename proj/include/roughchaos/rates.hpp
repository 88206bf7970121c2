#pragma once

#include <cstddef>
#include <limits>
#include <string>

#include "roughchaos/empirical_measure.hpp"
#include "roughchaos/measures.hpp"
#include "roughchaos/particle.hpp"

namespace roughchaos {

/// Itemized three-term functional: total = term1 - term2 - term3, where term1
/// is the mean integral of b-bar, term2 half the mean time integral of div b-bar
/// and term3 half the time integral of the squared averaged interaction.
/// k_prime is the bounded correction -1/2 int int div_y b(x, x).
struct KTerms {
  double term1 = 0.0;
  double term2 = 0.0;
  double term3 = 0.0;
  double total = 0.0;
  double k_prime = 0.0;
};

/// Enhanced functional on a measure over 2d-dimensional rough paths. Rough
/// integrals use stride 1, time integrals the trapezoid rule; the inner
/// average of term3 is taken over atoms at every grid node.
KTerms functional_K_b_enhanced(const RoughPathMeasure& mu, const InteractionField& b,
                               unsigned threads = 1);

/// Classical functional on a path measure, via Stratonovich sums on the
/// piecewise-linear pair lifts. Agrees with functional_K_b_enhanced of the
/// two-layer lift up to summation order.
KTerms functional_K_b_classical(const PathMeasure& q, const InteractionField& b,
                                unsigned threads = 1);

/// Log density of the particle system's lifted law against the lifted Brownian
/// law, evaluated on the n paths of `ens` (normally a Brownian ensemble).
double girsanov_log_density_rho_n(const ParticleEnsemble& ens, const InteractionField& b,
                                  unsigned threads = 1);

/// H(nu | lambda) + 1/2 E_Q int |g|^2 dt, the expectation as the ensemble mean.
double relative_entropy_girsanov(const GirsanovMeasure& q);

struct RateReport {
  double H = 0.0;
  KTerms K;
  /// H - K.total
  double J = 0.0;
  /// H(nu | lambda) + 1/2 E_Q int |g - b * Q_t|^2 dt, the H(Q | Phi(Q)) form.
  double J_mismatch = 0.0;
};

RateReport rate_J_b(const GirsanovMeasure& q, const InteractionField& b, unsigned threads = 1);

enum class RateVerdictKind { Finite, Infinite, Unrepresentable };

const char* to_string(RateVerdictKind kind);

struct RateVerdict {
  RateVerdictKind kind = RateVerdictKind::Unrepresentable;
  double value = std::numeric_limits<double>::infinity();
  /// Atom with the largest re-lift distance (or the first offending atom).
  std::size_t worst_atom = 0;
  double worst_distance = 0.0;
  std::string reason;
};

/// Checks mu = F^k(pi_1 mu): every layer must be a first-layer atom, every
/// atom must equal the joint lift of its layers within `tol` in homogeneous
/// distance, and weights must be products of first-layer weights. When the
/// condition holds, `rep` (a drift representation of pi_1 mu) supplies the
/// entropy; without it the verdict is Unrepresentable. Atoms must live on the
/// grid they were lifted on (refine factor 1).
RateVerdict rate_I_k(const RoughPathMeasure& mu, double tol = 1e-9,
                     const GirsanovMeasure* rep = nullptr,
                     HoelderExponent alpha = HoelderExponent{0.4});

/// rate_I_k minus the enhanced functional on Pi_2 mu.
RateVerdict enhanced_J_b(const RoughPathMeasure& mu, const InteractionField& b,
                         const GirsanovMeasure* rep, double tol = 1e-9, unsigned threads = 1);

}  // namespace roughchaos
