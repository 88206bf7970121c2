#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "roughchaos/errors.hpp"
#include "roughchaos/grid.hpp"
#include "roughchaos/rough_path.hpp"

namespace roughchaos {

struct MeasureInfo {
  std::size_t layers = 1;               ///< k of a k-layer measure
  std::vector<std::uint64_t> lineage;   ///< seeds the atoms descend from
  bool sampled = false;                 ///< tuples subsampled rather than enumerated
  std::size_t tuple_count = 0;          ///< tuples used (enhanced measures)
};

/// Neumaier-compensated sum.
double compensated_sum(const std::vector<double>& values);

/// Finite atomic probability measure. Atoms are shared, never copied, so
/// projections and tuple measures reuse path data where atoms coincide.
template <class Atom>
class EmpiricalMeasure {
 public:
  using AtomPtr = std::shared_ptr<const Atom>;

  EmpiricalMeasure(std::vector<AtomPtr> atoms, std::vector<double> weights, MeasureInfo info = {})
      : atoms_(std::move(atoms)), weights_(std::move(weights)), info_(std::move(info)) {
    if (atoms_.empty()) throw ArgumentError("empirical measure needs at least one atom");
    if (atoms_.size() != weights_.size()) throw ArgumentError("atom/weight count mismatch");
    for (double w : weights_)
      if (!(w >= 0.0) || !std::isfinite(w)) throw ArgumentError("weights must be nonnegative");
    if (std::abs(compensated_sum(weights_) - 1.0) > 1e-12)
      throw ArgumentError("weights must sum to 1");
    for (const auto& a : atoms_) {
      if (!a) throw ArgumentError("null atom");
      if (a->dim() != atoms_.front()->dim() || !(a->grid() == atoms_.front()->grid()))
        throw ArgumentError("atoms must share grid and dimension");
    }
  }

  static EmpiricalMeasure uniform(std::vector<AtomPtr> atoms, MeasureInfo info = {}) {
    const double w = 1.0 / static_cast<double>(atoms.size());
    std::vector<double> weights(atoms.size(), w);
    return EmpiricalMeasure(std::move(atoms), std::move(weights), std::move(info));
  }

  std::size_t size() const noexcept { return atoms_.size(); }
  const Atom& atom(std::size_t i) const { return *atoms_[i]; }
  const AtomPtr& atom_ptr(std::size_t i) const { return atoms_[i]; }
  double weight(std::size_t i) const { return weights_[i]; }
  const std::vector<AtomPtr>& atoms() const noexcept { return atoms_; }
  const std::vector<double>& weights() const noexcept { return weights_; }
  const MeasureInfo& info() const noexcept { return info_; }
  std::size_t dim() const { return atoms_.front()->dim(); }
  const Grid& grid() const { return atoms_.front()->grid(); }

  /// sum_a w_a f(atom_a)
  template <class F>
  double integrate(F&& f) const {
    double s = 0.0;
    for (std::size_t i = 0; i < atoms_.size(); ++i) s += weights_[i] * f(*atoms_[i]);
    return s;
  }

 private:
  std::vector<AtomPtr> atoms_;
  std::vector<double> weights_;
  MeasureInfo info_;
};

using PathMeasure = EmpiricalMeasure<SamplePath>;
using RoughPathMeasure = EmpiricalMeasure<GridRoughPath>;

}  // namespace roughchaos
