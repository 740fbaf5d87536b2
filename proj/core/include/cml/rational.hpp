#pragma once

#include <gmpxx.h>

#include <cmath>
#include <string>
#include <string_view>

namespace cml {

using Rational = mpq_class;

/// Parses "7", "-3/4", "0.125" or "1e-2" into an exact rational.
/// Throws std::invalid_argument on malformed text or a zero denominator.
Rational parse_rational(std::string_view text);

/// Exact rational of the shortest decimal that round-trips to `x`,
/// so 0.01 becomes 1/100 rather than the nearest binary fraction.
Rational rational_from_double(double x);

std::string to_string(const Rational& q);

Rational floor(const Rational& q);
Rational pow(const Rational& base, unsigned exponent);

/// Reduces into [0,1).
inline double wrap_unit(double x) {
  double r = x - std::floor(x);
  return r >= 1.0 ? 0.0 : r;
}

inline Rational wrap_unit(const Rational& x) {
  Rational r = x - floor(x);
  return r;
}

inline double to_double(double x) { return x; }
inline double to_double(const Rational& q) { return q.get_d(); }

template <class Real>
Real scalar_from(const Rational& q);

template <>
inline double scalar_from<double>(const Rational& q) {
  return q.get_d();
}

template <>
inline Rational scalar_from<Rational>(const Rational& q) {
  return q;
}

inline double abs_value(double x) { return std::fabs(x); }
inline Rational abs_value(const Rational& q) { return Rational(abs(q)); }

}  // namespace cml
