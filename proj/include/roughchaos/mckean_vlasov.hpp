#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "roughchaos/empirical_measure.hpp"
#include "roughchaos/measures.hpp"
#include "roughchaos/particle.hpp"

namespace roughchaos {

/// A law Q on path space held as an empirical measure, with its time
/// marginals cached node by node.
class FlowMeasure {
 public:
  explicit FlowMeasure(PathMeasure measure);

  const PathMeasure& measure() const noexcept { return measure_; }
  std::size_t size() const noexcept { return measure_.size(); }
  std::size_t dim() const { return measure_.dim(); }
  const Grid& grid() const { return measure_.grid(); }

  /// Atom values at node s, size() x dim() row-major.
  std::span<const double> marginal(std::size_t s) const { return marginals_[s]; }

  /// (b * Q_{t_s})(x) = sum_a w_a b(x, X^a_{t_s}).
  void convolve(const InteractionField& b, std::size_t s, const double* x, double* out) const;

 private:
  PathMeasure measure_;
  std::vector<std::vector<double>> marginals_;
};

struct PhiResult {
  FlowMeasure flow;
  /// The same paths with their drift (b * Q_t)(Y_t) at every node.
  GirsanovMeasure representation;
};

/// Phi(Q): n_out independent solutions of dY = (b * Q_t)(Y) dt + dB by
/// Euler-Maruyama on Q's grid. Copy i draws Y_0 and then its m x d normals
/// from stream i of `seed`, exactly as particle i of simulate_ips.
PhiResult phi_map(const InteractionField& b, const FlowMeasure& q, const InitialLaw& law,
                  std::size_t n_out, std::uint64_t seed, unsigned threads = 1);

struct FixedPointResult {
  PhiResult last;
  /// sup over nodes of the marginal W_1 between consecutive iterates.
  std::vector<double> trace;
};

/// Picard iteration Q_{k+1} = Phi(Q_k) from the Brownian law, with the same
/// seed (common random numbers) at every iterate. Stops once the trace value
/// falls below `tol`; throws ConvergenceError carrying the trace otherwise.
FixedPointResult solve_mkv_fixed_point(const InteractionField& b, const InitialLaw& law,
                                       std::size_t n_out, double horizon, std::size_t steps,
                                       double tol, std::size_t max_iter, std::uint64_t seed,
                                       unsigned threads = 1);

/// sup over grid nodes of W_1 between the time marginals of two flows. Exact
/// on the line; for d > 1 exact OT on at most 1000 leading atoms per side.
double sup_marginal_w1(const FlowMeasure& a, const FlowMeasure& b);

/// n_samples joint lifts of k independent copies driven by the frozen flow
/// (b * Q_t); copies are grouped consecutively and lifted on the flow's grid.
RoughPathMeasure sample_iid_mkv(const FlowMeasure& flow, const InteractionField& b,
                                const InitialLaw& law, std::size_t k, std::size_t n_samples,
                                std::uint64_t seed, unsigned threads = 1);

}  // namespace roughchaos
