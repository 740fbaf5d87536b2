#pragma once

// Slow reference implementations used to cross-check the library. None of
// these share code with core/: they work from preimages rather than images,
// from reachability matrices rather than union-find, from integer residues
// rather than rationals.

#include "cml/local_maps.hpp"
#include "cml/phase_space.hpp"
#include "cml/rational.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace oracle {

using cml::Rational;

inline Rational min_q(const Rational& a, const Rational& b) { return a < b ? a : b; }
inline Rational max_q(const Rational& a, const Rational& b) { return a < b ? b : a; }

inline Rational overlap(const Rational& a0, const Rational& a1, const Rational& b0, const Rational& b1) {
  Rational lo = max_q(a0, b0);
  Rational hi = min_q(a1, b1);
  return hi > lo ? Rational(hi - lo) : Rational(0);
}

/// n * m(bin_i ∩ T^{-1} bin_j), summing over pieces and over the integer
/// shifts that a wrapping map can add.
inline Rational ulam_entry(const cml::PiecewiseAffineMap& map, std::size_t bins, std::size_t i, std::size_t j) {
  const Rational n(static_cast<long>(bins));
  const Rational x0 = Rational(static_cast<long>(i)) / n;
  const Rational x1 = Rational(static_cast<long>(i + 1)) / n;
  const Rational y0 = Rational(static_cast<long>(j)) / n;
  const Rational y1 = Rational(static_cast<long>(j + 1)) / n;
  Rational total(0);
  const long reach = map.wraparound() ? 64 : 0;
  for (const auto& p : map.pieces()) {
    if (p.slope == 0) {
      Rational v = p.intercept;
      if (map.wraparound()) v = cml::wrap_unit(v);
      if (v >= y0 && v < y1) total += overlap(x0, x1, p.left, p.right);
      continue;
    }
    for (long k = -reach; k <= reach; ++k) {
      // slope * x + intercept in [y0 + k, y1 + k)
      Rational u = (y0 + k - p.intercept) / p.slope;
      Rational v = (y1 + k - p.intercept) / p.slope;
      if (v < u) std::swap(u, v);
      Rational lo = max_q(u, p.left);
      Rational hi = min_q(v, p.right);
      if (hi > lo) total += overlap(x0, x1, lo, hi);
    }
  }
  return total * n;
}

/// Density of the pushforward of a grid density at y (not on a breakpoint
/// image): sum over preimages of f(x) / |T'(x)|.
inline Rational pushforward_density(const cml::PiecewiseAffineMap& map, const std::vector<Rational>& f,
                                    const Rational& y) {
  const Rational n(static_cast<long>(f.size()));
  Rational total(0);
  const long reach = map.wraparound() ? 64 : 0;
  for (const auto& p : map.pieces()) {
    for (long k = -reach; k <= reach; ++k) {
      Rational x = (y + k - p.intercept) / p.slope;
      if (x < p.left || x >= p.right) continue;
      Rational scaled = x * n;
      auto bin = static_cast<std::size_t>(cml::floor(scaled).get_num().get_si());
      if (bin >= f.size()) continue;
      total += f[bin] / Rational(abs(p.slope));
    }
  }
  return total;
}

/// Clusters via the transitive closure of the eps-adjacency matrix, ordered
/// by smallest member.
template <class Real>
std::vector<std::vector<std::size_t>> closure_clusters(const cml::BasicConfiguration<Real>& config,
                                                       const cml::Space& space, const Real& eps) {
  const std::size_t n = config.size();
  std::vector<std::vector<char>> reach(n, std::vector<char>(n, 0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) reach[i][j] = i == j || cml::dist(space, config[i], config[j]) <= eps;
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (reach[i][k] && reach[k][j]) reach[i][j] = 1;
  std::vector<std::vector<std::size_t>> out;
  std::vector<char> seen(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (seen[i]) continue;
    out.emplace_back();
    for (std::size_t j = 0; j < n; ++j) {
      if (reach[i][j]) {
        out.back().push_back(j);
        seen[j] = 1;
      }
    }
  }
  return out;
}

struct HitSample {
  double mean = 0.0;
  double sd = 0.0;
  double median = 0.0;
  std::size_t censored = 0;
};

/// First time two doubling-map orbits on the circle come within eps = 1/inv_eps,
/// both started uniformly on the residues mod q. Only the difference matters,
/// and it doubles mod q. Rigid merging happens after the hit, so it never
/// affects this time.
inline HitSample doubling_pair_hits(std::size_t pairs, std::uint64_t seed, std::int64_t q = 1000000007,
                                    std::int64_t inv_eps = 100, std::size_t horizon = 100000) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::int64_t> pick(0, q - 1);
  std::vector<double> times;
  HitSample s;
  for (std::size_t k = 0; k < pairs; ++k) {
    std::int64_t d = (pick(rng) - pick(rng) + q) % q;
    std::size_t t = 0;
    for (; t <= horizon; ++t) {
      std::int64_t gap = std::min(d, q - d);
      if (gap * inv_eps <= q) break;
      d = (2 * d) % q;
    }
    if (t > horizon) {
      ++s.censored;
      continue;
    }
    times.push_back(static_cast<double>(t));
  }
  double sum = 0.0;
  for (double t : times) sum += t;
  s.mean = sum / static_cast<double>(times.size());
  double ss = 0.0;
  for (double t : times) ss += (t - s.mean) * (t - s.mean);
  s.sd = std::sqrt(ss / static_cast<double>(times.size() - 1));
  std::sort(times.begin(), times.end());
  const std::size_t m = times.size() / 2;
  s.median = times.size() % 2 ? times[m] : 0.5 * (times[m - 1] + times[m]);
  return s;
}

}  // namespace oracle
