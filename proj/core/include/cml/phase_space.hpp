#pragma once

// Phase spaces of the lattice: the unit interval and the unit circle, and
// their finite coordinate-wise products. Every coordinate lives in [0,1).
// Distances between points use the max over coordinates, so the
// configuration metric is the max over particles and coordinates.

#include "cml/rational.hpp"

#include <algorithm>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cml {

enum class Topology { interval, circle };

struct Space {
  Topology topology = Topology::interval;
  std::size_t dim = 1;

  bool operator==(const Space&) const = default;
};

std::string to_string(Topology t);
Topology topology_from_string(const std::string& name);

/// Per-coordinate distance.
template <class Real>
Real coordinate_distance(Topology topology, const Real& x, const Real& y) {
  Real d = abs_value(Real(x - y));
  if (topology == Topology::circle) {
    Real wrapped = Real(1) - d;
    if (wrapped < d) d = wrapped;
  }
  return d;
}

/// Signed displacement from `from` to `to`. On the circle this is the
/// representative in (-1/2, 1/2].
template <class Real>
Real coordinate_offset(Topology topology, const Real& from, const Real& to) {
  Real d = to - from;
  if (topology == Topology::circle) {
    const Real half = Real(1) / Real(2);
    if (d > half) d -= Real(1);
    if (d <= -half) d += Real(1);
  }
  return d;
}

template <class Real>
bool in_unit(const Real& x) {
  return x >= Real(0) && x < Real(1);
}

template <class Real>
Real dist(const Space& space, std::span<const Real> x, std::span<const Real> y) {
  if (x.size() != space.dim || y.size() != space.dim) {
    throw std::invalid_argument("dist: point dimension does not match space dimension " +
                                std::to_string(space.dim));
  }
  Real best(0);
  for (std::size_t k = 0; k < space.dim; ++k) {
    Real d = coordinate_distance(space.topology, x[k], y[k]);
    if (d > best) best = d;
  }
  return best;
}

template <class Real>
Real dist(const Space& space, const std::vector<Real>& x, const std::vector<Real>& y) {
  return dist(space, std::span<const Real>(x), std::span<const Real>(y));
}

/// Ordered particle positions, stored flat (particle-major).
template <class Real>
class BasicConfiguration {
 public:
  BasicConfiguration() = default;

  BasicConfiguration(std::size_t dim, std::vector<Real> coordinates)
      : dim_(dim), coords_(std::move(coordinates)) {
    if (dim_ == 0) throw std::invalid_argument("configuration dimension must be positive");
    if (coords_.empty() || coords_.size() % dim_ != 0) {
      throw std::invalid_argument("configuration needs N >= 1 particles of dimension " +
                                  std::to_string(dim_));
    }
    for (std::size_t k = 0; k < coords_.size(); ++k) {
      if (!in_unit(coords_[k])) {
        throw std::invalid_argument("coordinate " + std::to_string(k) + " = " +
                                    std::to_string(to_double(coords_[k])) + " outside [0,1)");
      }
    }
  }

  /// One-dimensional configuration from a list of positions.
  static BasicConfiguration line(std::vector<Real> positions) {
    return BasicConfiguration(1, std::move(positions));
  }

  static BasicConfiguration from_points(const std::vector<std::vector<Real>>& points) {
    if (points.empty()) throw std::invalid_argument("configuration needs N >= 1 particles");
    std::vector<Real> flat;
    const std::size_t dim = points.front().size();
    for (const auto& p : points) {
      if (p.size() != dim) throw std::invalid_argument("configuration points differ in dimension");
      flat.insert(flat.end(), p.begin(), p.end());
    }
    return BasicConfiguration(dim, std::move(flat));
  }

  std::size_t size() const { return dim_ == 0 ? 0 : coords_.size() / dim_; }
  std::size_t dim() const { return dim_; }

  std::span<const Real> operator[](std::size_t i) const {
    return std::span<const Real>(coords_).subspan(i * dim_, dim_);
  }

  std::vector<Real> point(std::size_t i) const {
    auto p = (*this)[i];
    return {p.begin(), p.end()};
  }

  const std::vector<Real>& coordinates() const { return coords_; }

  bool operator==(const BasicConfiguration&) const = default;

 private:
  std::size_t dim_ = 0;
  std::vector<Real> coords_;
};

using Configuration = BasicConfiguration<double>;
using ExactConfiguration = BasicConfiguration<Rational>;

template <class Real>
Real diameter(const BasicConfiguration<Real>& config, const Space& space) {
  Real best(0);
  for (std::size_t i = 0; i < config.size(); ++i) {
    for (std::size_t j = i + 1; j < config.size(); ++j) {
      Real d = dist(space, config[i], config[j]);
      if (d > best) best = d;
    }
  }
  return best;
}

namespace detail {

/// Mean of points lifted into the chart anchored at `anchor`. Returns the
/// mean displacement from the anchor, coordinate by coordinate.
template <class Real, class PointAt>
std::vector<Real> mean_offset(const Space& space, std::span<const Real> anchor, std::size_t count,
                              PointAt point_at) {
  std::vector<Real> sum(space.dim, Real(0));
  for (std::size_t k = 0; k < space.dim; ++k) {
    Real lo(0);
    Real hi(0);
    for (std::size_t m = 0; m < count; ++m) {
      std::span<const Real> p = point_at(m);
      Real d = coordinate_offset(space.topology, anchor[k], p[k]);
      if (d < lo) lo = d;
      if (d > hi) hi = d;
      sum[k] += d;
    }
    if (space.topology == Topology::circle && Real(hi - lo) >= Real(1) / Real(2)) {
      throw std::domain_error(
          "center of gravity undefined: circle points spread over half the circle or more");
    }
    sum[k] /= Real(static_cast<long>(count));
  }
  return sum;
}

template <class Real>
Real project(Topology topology, const Real& x) {
  return topology == Topology::circle ? wrap_unit(x) : x;
}

}  // namespace detail

/// Arithmetic mean. On the circle the points are lifted to the chart
/// centred on the first point; a spread of 1/2 or more is an error.
template <class Real>
std::vector<Real> center_of_gravity(const std::vector<std::vector<Real>>& points, const Space& space) {
  if (points.empty()) throw std::invalid_argument("center_of_gravity of an empty set");
  for (const auto& p : points) {
    if (p.size() != space.dim) throw std::invalid_argument("center_of_gravity: dimension mismatch");
  }
  std::span<const Real> anchor(points.front());
  auto offset = detail::mean_offset<Real>(space, anchor, points.size(), [&](std::size_t m) {
    return std::span<const Real>(points[m]);
  });
  std::vector<Real> result(space.dim);
  for (std::size_t k = 0; k < space.dim; ++k) {
    result[k] = detail::project(space.topology, Real(anchor[k] + offset[k]));
  }
  return result;
}

template <class Real>
bool in_diagonal_neighborhood(const BasicConfiguration<Real>& config, const Space& space,
                              const Real& epsilon) {
  if (epsilon < Real(0)) throw std::invalid_argument("epsilon must be nonnegative");
  return diameter(config, space) <= epsilon;
}

}  // namespace cml
