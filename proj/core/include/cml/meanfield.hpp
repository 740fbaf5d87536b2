#pragma once

// Mean-field transfer operator on the circle. The interaction felt by a
// point depends on the measure itself:
//
//   Q_mu x = gamma x + (1 - gamma) * barycenter of mu on [x - eps, x + eps]
//
// and one step is mu -> Q_{T*mu}* T* mu.

#include "cml/bv_measures.hpp"
#include "cml/local_maps.hpp"
#include "cml/rational.hpp"

#include <cstddef>
#include <vector>

namespace cml {

struct MeanFieldParams {
  Rational epsilon{1, 10};
  Rational gamma{1, 2};
  PiecewiseAffineMap map = maps::doubling();

  void validate() const;
};

struct Atom {
  Rational position;
  Rational mass;

  bool operator==(const Atom&) const = default;
};

/// Finitely many point masses on the circle, sorted by position. Atoms
/// placed at the same position are merged.
class AtomicMeasure {
 public:
  AtomicMeasure() = default;
  explicit AtomicMeasure(std::vector<Atom> atoms);

  /// Equal masses on the given positions.
  static AtomicMeasure uniform_on(const std::vector<Rational>& positions);

  const std::vector<Atom>& atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }
  Rational total_mass() const;

  bool operator==(const AtomicMeasure&) const = default;

 private:
  std::vector<Atom> atoms_;
};

/// Total variation |mu - nu|.
Rational total_variation(const AtomicMeasure& mu, const AtomicMeasure& nu);

/// Throws std::domain_error when mu gives the arc no mass.
double mean_field_point_update(double x, const GridMeasure& mu, const MeanFieldParams& params);
Rational mean_field_point_update(const Rational& x, const AtomicMeasure& mu, const MeanFieldParams& params);

/// Grid: Ulam push of the local map, then `resolution` midpoint samples per
/// bin carried by the point update and re-binned. gamma = 1 returns the
/// plain push.
GridMeasure mean_field_step(const GridMeasure& mu, const MeanFieldParams& params, std::size_t resolution = 16);
AtomicMeasure mean_field_step(const AtomicMeasure& mu, const MeanFieldParams& params);

template <class Measure>
struct MeanFieldTrajectory {
  std::vector<Measure> measures;  // mu_0 .. mu_steps
  std::vector<double> distances;  // between successive iterates
};

/// Successive distances are in the weak norm for grids and in total
/// variation for atoms.
MeanFieldTrajectory<GridMeasure> mean_field_iterate(const GridMeasure& mu0, const MeanFieldParams& params,
                                                    std::size_t steps, std::size_t resolution = 16);
MeanFieldTrajectory<AtomicMeasure> mean_field_iterate(const AtomicMeasure& mu0, const MeanFieldParams& params,
                                                      std::size_t steps);

}  // namespace cml
