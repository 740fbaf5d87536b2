#pragma once

// Piecewise-affine local maps of [0,1) (or of the circle when values are
// reduced mod 1). Pieces are half-open [b_j, b_{j+1}). All breakpoints,
// slopes and intercepts are exact rationals; evaluation is available in
// both double and exact arithmetic.

#include "cml/rational.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace cml {

struct AffinePiece {
  Rational left;
  Rational right;
  Rational slope;
  Rational intercept;
};

class PiecewiseAffineMap {
 public:
  PiecewiseAffineMap() : PiecewiseAffineMap({Rational(0), Rational(1)}, {Rational(1)}, {Rational(0)}, false) {}

  /// `breakpoints` must be strictly increasing from 0 to 1 with one slope
  /// and one intercept per piece. Without wraparound every piece image must
  /// stay inside [0,1].
  PiecewiseAffineMap(std::vector<Rational> breakpoints, std::vector<Rational> slopes,
                     std::vector<Rational> intercepts, bool wraparound, std::string name = "pieces");

  double eval(double x) const;
  Rational eval(const Rational& x) const;

  std::size_t piece_count() const { return pieces_.size(); }
  const std::vector<AffinePiece>& pieces() const { return pieces_; }
  std::size_t piece_index(double x) const;
  std::size_t piece_index(const Rational& x) const;
  bool wraparound() const { return wraparound_; }
  const std::string& name() const { return name_; }
  bool is_identity() const;

 private:
  std::vector<AffinePiece> pieces_;
  std::vector<double> left_d_;
  std::vector<double> slope_d_;
  std::vector<double> intercept_d_;
  bool wraparound_;
  std::string name_;
};

/// Lipschitz and Lasota-Yorke data of a piecewise-affine map.
struct ExpansionData {
  Rational lambda;     // inf |T'|
  Rational beta1;      // 2 / (lambda * shortest piece)
  Rational beta2;      // sup |(1/T')'|, zero for affine pieces
  Rational beta;       // beta1 + beta2
  Rational lipschitz;  // sup |T'|
};

ExpansionData expansion_data(const PiecewiseAffineMap& map);

struct PerturbationInterval {
  Rational a;      // left end of A_i
  Rational b;      // right end of A_i
  Rational alpha;  // slope, > 0
  Rational c;      // intercept
};

/// Intervals A_i = [a_i, b_i] on which the map acts as alpha_i x + c_i; the
/// map is the identity elsewhere.
struct PerturbationMapSpec {
  std::vector<PerturbationInterval> intervals;

  /// Intercept that keeps the midpoint of [a, b] fixed: (1 - alpha)(a + b)/2.
  static Rational midpoint_intercept(const Rational& a, const Rational& b, const Rational& alpha);

  std::size_t size() const { return intervals.size(); }
  Rational total_length() const;
  Rational inverse_slope_sum() const;
};

PiecewiseAffineMap build_perturbation_map(const PerturbationMapSpec& spec);

/// outer(inner(x)). Wraparound of the inner map is resolved piece by piece,
/// so the result wraps exactly when the outer map does.
PiecewiseAffineMap compose(const PiecewiseAffineMap& outer, const PiecewiseAffineMap& inner);

namespace maps {

PiecewiseAffineMap identity();
/// x -> k x mod 1 with k full affine branches.
PiecewiseAffineMap multiply(unsigned factor);
PiecewiseAffineMap doubling();
PiecewiseAffineMap tripling();
PiecewiseAffineMap tent();
/// x -> slope x + intercept on all of [0,1); the image must lie in [0,1].
PiecewiseAffineMap affine(const Rational& slope, const Rational& intercept);

/// Maps in the catalog that are known to be weakly mixing. Not verified.
bool known_weak_mixing(const std::string& name);

}  // namespace maps

}  // namespace cml
