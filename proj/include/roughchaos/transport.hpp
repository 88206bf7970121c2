#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace roughchaos {

/// Sparse optimal coupling: mass[t] moves from row atom rows[t] to column
/// atom cols[t].
struct TransportPlan {
  std::size_t n_rows = 0;
  std::size_t n_cols = 0;
  std::vector<std::size_t> rows;
  std::vector<std::size_t> cols;
  std::vector<double> mass;
  double objective = 0.0;

  /// Largest deviation of the plan's marginals from `a` and `b`.
  double marginal_error(std::span<const double> a, std::span<const double> b) const;
};

/// Balanced transport min sum pi_ij c_ij subject to pi 1 = a, pi^T 1 = b,
/// pi >= 0, solved exactly by a primal network simplex on the bipartite graph
/// (strongly feasible trees, block pricing). `cost` is row-major n x m.
/// The basis is found on weights rounded to multiples of 2^-40; flows of the
/// optimal tree are then recomputed from the exact weights.
TransportPlan solve_transport(std::span<const double> a, std::span<const double> b,
                              std::span<const double> cost);

}  // namespace roughchaos
