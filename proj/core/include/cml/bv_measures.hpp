#pragma once

// Signed measures on [0,1) with piecewise-constant density on a uniform
// grid. The variation functionals have closed forms for this class:
//
//   zero extension:  V  = |f_1| + sum |f_{i+1} - f_i| + |f_n|
//                    V0 = sum |f_{i+1} - f_i|
//   periodic:        V  = V0 = cyclic sum |f_{i+1} - f_i|
//   weak (L1):       sum |f_i| / n

#include "cml/rational.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace cml {

enum class Boundary { zero_extension, periodic };

std::string to_string(Boundary b);
Boundary boundary_from_string(const std::string& name);

template <class Real>
class BasicGridMeasure {
 public:
  BasicGridMeasure() = default;

  explicit BasicGridMeasure(std::vector<Real> densities, Boundary boundary = Boundary::zero_extension)
      : densities_(std::move(densities)), boundary_(boundary) {
    if (densities_.empty()) throw std::invalid_argument("grid measure needs at least one bin");
  }

  static BasicGridMeasure lebesgue(std::size_t bins, Boundary boundary = Boundary::zero_extension) {
    return BasicGridMeasure(std::vector<Real>(bins, Real(1)), boundary);
  }

  static BasicGridMeasure zero(std::size_t bins, Boundary boundary = Boundary::zero_extension) {
    return BasicGridMeasure(std::vector<Real>(bins, Real(0)), boundary);
  }

  std::size_t bins() const { return densities_.size(); }
  Boundary boundary() const { return boundary_; }
  const std::vector<Real>& densities() const { return densities_; }
  std::vector<Real>& densities() { return densities_; }
  const Real& operator[](std::size_t i) const { return densities_[i]; }

  Real mass() const {
    Real total(0);
    for (const auto& f : densities_) total += f;
    return total / Real(static_cast<long>(bins()));
  }

  bool nonnegative() const {
    for (const auto& f : densities_) {
      if (f < Real(0)) return false;
    }
    return true;
  }

  BasicGridMeasure& operator+=(const BasicGridMeasure& other) {
    check_compatible(other);
    for (std::size_t i = 0; i < bins(); ++i) densities_[i] += other.densities_[i];
    return *this;
  }

  BasicGridMeasure& operator-=(const BasicGridMeasure& other) {
    check_compatible(other);
    for (std::size_t i = 0; i < bins(); ++i) densities_[i] -= other.densities_[i];
    return *this;
  }

  BasicGridMeasure& operator*=(const Real& s) {
    for (auto& f : densities_) f *= s;
    return *this;
  }

  friend BasicGridMeasure operator+(BasicGridMeasure a, const BasicGridMeasure& b) { return a += b; }
  friend BasicGridMeasure operator-(BasicGridMeasure a, const BasicGridMeasure& b) { return a -= b; }
  friend BasicGridMeasure operator*(const Real& s, BasicGridMeasure a) { return a *= s; }

  bool operator==(const BasicGridMeasure&) const = default;

 private:
  void check_compatible(const BasicGridMeasure& other) const {
    if (other.bins() != bins()) {
      throw std::invalid_argument("grid measures have different bin counts: " + std::to_string(bins()) +
                                  " vs " + std::to_string(other.bins()));
    }
  }

  std::vector<Real> densities_;
  Boundary boundary_ = Boundary::zero_extension;
};

using GridMeasure = BasicGridMeasure<double>;
using ExactGridMeasure = BasicGridMeasure<Rational>;

template <class Real>
struct NormReport {
  Real strong;  // V
  Real inner;   // V0
  Real weak;    // L1
};

template <class Real>
NormReport<Real> norms(const BasicGridMeasure<Real>& mu) {
  const auto& f = mu.densities();
  const std::size_t n = f.size();
  NormReport<Real> r{Real(0), Real(0), Real(0)};
  for (std::size_t i = 0; i + 1 < n; ++i) r.inner += abs_value(Real(f[i + 1] - f[i]));
  for (const auto& v : f) r.weak += abs_value(v);
  r.weak /= Real(static_cast<long>(n));
  if (mu.boundary() == Boundary::periodic) {
    r.inner += abs_value(Real(f.front() - f.back()));
    r.strong = r.inner;
  } else {
    r.strong = r.inner + abs_value(f.front()) + abs_value(f.back());
  }
  return r;
}

namespace detail {

inline std::size_t aligned_bin(const Rational& x, std::size_t bins, const char* what) {
  Rational scaled = x * Rational(static_cast<long>(bins));
  if (scaled.get_den() != 1) {
    throw std::invalid_argument(std::string(what) + " " + to_string(x) + " is not on the grid of " +
                                std::to_string(bins) + " bins");
  }
  return static_cast<std::size_t>(scaled.get_num().get_ui());
}

}  // namespace detail

/// Zeroes the density outside [lo, hi]; both ends must lie on the grid.
template <class Real>
BasicGridMeasure<Real> restrict(const BasicGridMeasure<Real>& mu, const Rational& lo, const Rational& hi) {
  if (lo < 0 || hi > 1 || hi < lo) throw std::invalid_argument("restrict: need 0 <= lo <= hi <= 1");
  const std::size_t first = detail::aligned_bin(lo, mu.bins(), "restrict: endpoint");
  const std::size_t last = detail::aligned_bin(hi, mu.bins(), "restrict: endpoint");
  auto out = mu;
  for (std::size_t i = 0; i < mu.bins(); ++i) {
    if (i < first || i >= last) out.densities()[i] = Real(0);
  }
  return out;
}

/// Splits every bin into `factor` equal bins of the same density.
template <class Real>
BasicGridMeasure<Real> refine(const BasicGridMeasure<Real>& mu, std::size_t factor) {
  if (factor == 0) throw std::invalid_argument("refine: factor must be positive");
  std::vector<Real> out;
  out.reserve(mu.bins() * factor);
  for (const auto& f : mu.densities()) out.insert(out.end(), factor, f);
  return BasicGridMeasure<Real>(std::move(out), mu.boundary());
}

struct VariationCheck {
  bool restriction_monotone;  // (a) V(mu|Y) <= V(mu)
  bool two_sided;             // (b) V0(mu|Y) <= V(mu|Y) <= 2 V0(mu|Y) + 2 |mu|Y| / m(Y)
  bool weak_by_strong;        // (c) |mu|Y| <= m(Y) V(mu) / 2

  bool all() const { return restriction_monotone && two_sided && weak_by_strong; }
};

template <class Real>
VariationCheck check_variation_lemma(const BasicGridMeasure<Real>& mu, const Rational& lo, const Rational& hi) {
  const auto restricted = restrict(mu, lo, hi);
  const auto full = norms(mu);
  const auto part = norms(restricted);
  const Real length = scalar_from<Real>(Rational(hi - lo));
  VariationCheck check{};
  check.restriction_monotone = part.strong <= full.strong;
  check.two_sided = part.inner <= part.strong &&
                    (length == Real(0) || part.strong <= Real(2) * part.inner + Real(2) * part.weak / length);
  check.weak_by_strong = part.weak <= length * full.strong / Real(2);
  return check;
}

template <class Real>
struct DiagonalMassBounds {
  Real lower_sum;       // sum over eps-blocks of (block mass)^N
  Real uniform_floor;   // n_eps^(1 - N)
  double mc_estimate;   // Monte Carlo estimate of mu^N(D_eps)
  double mc_sigma;
  std::size_t samples;

  bool mc_consistent() const { return mc_estimate >= to_double(lower_sum) - 3.0 * mc_sigma; }
  bool floor_holds() const { return lower_sum >= uniform_floor; }
};

/// Lower bound for the product measure of the eps-neighbourhood of the
/// diagonal by a block partition of diameter eps, checked against a Monte
/// Carlo estimate. `eps` must be a multiple of the bin width.
template <class Real>
DiagonalMassBounds<Real> diagonal_mass_bounds(const BasicGridMeasure<Real>& mu, unsigned particles,
                                              const Rational& eps, std::size_t samples, std::uint64_t seed) {
  if (particles == 0) throw std::invalid_argument("diagonal_mass_bounds: need N >= 1");
  if (eps <= 0 || eps > 1) throw std::invalid_argument("diagonal_mass_bounds: need 0 < eps <= 1");
  if (!mu.nonnegative()) throw std::invalid_argument("diagonal_mass_bounds: measure must be nonnegative");
  if (mu.mass() != Real(1)) {
    if (!(abs_value(Real(mu.mass() - Real(1))) <= Real(1) / Real(1000000000L))) {
      throw std::invalid_argument("diagonal_mass_bounds: measure must be probabilistic");
    }
  }
  const std::size_t width = detail::aligned_bin(eps, mu.bins(), "diagonal_mass_bounds: eps");
  const std::size_t n = mu.bins();
  const std::size_t blocks = (n + width - 1) / width;

  DiagonalMassBounds<Real> out{Real(0), Real(0), 0.0, 0.0, samples};
  for (std::size_t b = 0; b < blocks; ++b) {
    Real block(0);
    for (std::size_t i = b * width; i < std::min(n, (b + 1) * width); ++i) block += mu[i];
    block /= Real(static_cast<long>(n));
    Real term(1);
    for (unsigned k = 0; k < particles; ++k) term *= block;
    out.lower_sum += term;
  }
  Real floor_value(1);
  for (unsigned k = 1; k < particles; ++k) floor_value /= Real(static_cast<long>(blocks));
  out.uniform_floor = floor_value;

  if (samples > 0) {
    std::vector<double> weights;
    weights.reserve(n);
    for (const auto& f : mu.densities()) weights.push_back(to_double(f));
    std::mt19937_64 rng(seed);
    std::discrete_distribution<std::size_t> pick_bin(weights.begin(), weights.end());
    std::uniform_real_distribution<double> within(0.0, 1.0);
    const double eps_d = eps.get_d();
    const bool circle = mu.boundary() == Boundary::periodic;
    std::size_t hits = 0;
    std::vector<double> pts(particles);
    for (std::size_t s = 0; s < samples; ++s) {
      for (auto& x : pts) x = (static_cast<double>(pick_bin(rng)) + within(rng)) / static_cast<double>(n);
      double lo = pts[0];
      double hi = pts[0];
      for (double x : pts) {
        lo = std::min(lo, x);
        hi = std::max(hi, x);
      }
      bool inside = hi - lo <= eps_d;
      if (!inside && circle) {
        // Smallest arc containing all points: 1 minus the largest gap.
        std::vector<double> sorted = pts;
        std::sort(sorted.begin(), sorted.end());
        double gap = 1.0 - (sorted.back() - sorted.front());
        for (std::size_t k = 0; k + 1 < sorted.size(); ++k) gap = std::max(gap, sorted[k + 1] - sorted[k]);
        // Diameter in the max metric of a set contained in an arc of length < 1/2.
        inside = 1.0 - gap <= eps_d;
      }
      if (inside) ++hits;
    }
    const double p = static_cast<double>(hits) / static_cast<double>(samples);
    out.mc_estimate = p;
    out.mc_sigma = std::sqrt(p * (1.0 - p) / static_cast<double>(samples));
  }
  return out;
}

}  // namespace cml
