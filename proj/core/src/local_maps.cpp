#include "cml/local_maps.hpp"

#include <algorithm>
#include <stdexcept>

namespace cml {
namespace {

template <class Real>
Real finish(const Real& v, bool wraparound) {
  if (wraparound) return wrap_unit(v);
  // Pieces of a non-wrapping map land in [0,1]; the right endpoint 1 is
  // identified with 0 so the result stays in [0,1).
  if (v >= Real(1)) return wrap_unit(v);
  if (v < Real(0)) return Real(0);
  return v;
}

}  // namespace

PiecewiseAffineMap::PiecewiseAffineMap(std::vector<Rational> breakpoints, std::vector<Rational> slopes,
                                       std::vector<Rational> intercepts, bool wraparound, std::string name)
    : wraparound_(wraparound), name_(std::move(name)) {
  if (breakpoints.size() < 2) throw std::invalid_argument("map needs at least one piece");
  const std::size_t k = breakpoints.size() - 1;
  if (slopes.size() != k || intercepts.size() != k) {
    throw std::invalid_argument("map needs one slope and one intercept per piece");
  }
  if (breakpoints.front() != 0 || breakpoints.back() != 1) {
    throw std::invalid_argument("map breakpoints must start at 0 and end at 1");
  }
  for (std::size_t j = 0; j < k; ++j) {
    if (!(breakpoints[j] < breakpoints[j + 1])) {
      throw std::invalid_argument("map breakpoints must be strictly increasing");
    }
    AffinePiece piece{breakpoints[j], breakpoints[j + 1], slopes[j], intercepts[j]};
    if (!wraparound) {
      Rational lo = piece.slope * piece.left + piece.intercept;
      Rational hi = piece.slope * piece.right + piece.intercept;
      if (lo > hi) std::swap(lo, hi);
      if (lo < 0 || hi > 1) {
        throw std::invalid_argument("piece " + std::to_string(j) + " of map '" + name_ +
                                    "' leaves [0,1]; set wraparound for circle maps");
      }
    }
    pieces_.push_back(piece);
    left_d_.push_back(piece.left.get_d());
    slope_d_.push_back(piece.slope.get_d());
    intercept_d_.push_back(piece.intercept.get_d());
  }
}

std::size_t PiecewiseAffineMap::piece_index(double x) const {
  auto it = std::upper_bound(left_d_.begin(), left_d_.end(), x);
  return it == left_d_.begin() ? 0 : static_cast<std::size_t>(it - left_d_.begin()) - 1;
}

std::size_t PiecewiseAffineMap::piece_index(const Rational& x) const {
  auto it = std::upper_bound(pieces_.begin(), pieces_.end(), x,
                             [](const Rational& v, const AffinePiece& p) { return v < p.left; });
  return it == pieces_.begin() ? 0 : static_cast<std::size_t>(it - pieces_.begin()) - 1;
}

double PiecewiseAffineMap::eval(double x) const {
  const std::size_t j = piece_index(x);
  return finish(slope_d_[j] * x + intercept_d_[j], wraparound_);
}

Rational PiecewiseAffineMap::eval(const Rational& x) const {
  const auto& p = pieces_[piece_index(x)];
  return finish(Rational(p.slope * x + p.intercept), wraparound_);
}

bool PiecewiseAffineMap::is_identity() const {
  return std::all_of(pieces_.begin(), pieces_.end(),
                     [](const AffinePiece& p) { return p.slope == 1 && p.intercept == 0; });
}

ExpansionData expansion_data(const PiecewiseAffineMap& map) {
  ExpansionData data;
  bool first = true;
  Rational shortest;
  for (const auto& p : map.pieces()) {
    if (p.slope == 0) throw std::invalid_argument("expansion_data: zero slope on a piece");
    Rational s = abs_value(p.slope);
    Rational len = p.right - p.left;
    if (first) {
      data.lambda = s;
      data.lipschitz = s;
      shortest = len;
      first = false;
    } else {
      data.lambda = std::min(data.lambda, s);
      data.lipschitz = std::max(data.lipschitz, s);
      shortest = std::min(shortest, len);
    }
  }
  data.beta1 = Rational(2) / (data.lambda * shortest);
  data.beta2 = 0;
  data.beta = data.beta1 + data.beta2;
  return data;
}

Rational PerturbationMapSpec::midpoint_intercept(const Rational& a, const Rational& b, const Rational& alpha) {
  return Rational((1 - alpha) * (a + b) / 2);
}

Rational PerturbationMapSpec::total_length() const {
  Rational total(0);
  for (const auto& i : intervals) total += i.b - i.a;
  return total;
}

Rational PerturbationMapSpec::inverse_slope_sum() const {
  Rational total(0);
  for (const auto& i : intervals) total += 1 / i.alpha;
  return total;
}

PiecewiseAffineMap build_perturbation_map(const PerturbationMapSpec& spec) {
  std::vector<Rational> breaks{Rational(0)};
  std::vector<Rational> slopes;
  std::vector<Rational> intercepts;
  Rational cursor(0);
  for (std::size_t i = 0; i < spec.intervals.size(); ++i) {
    const auto& iv = spec.intervals[i];
    const std::string tag = "perturbation interval " + std::to_string(i);
    if (!(iv.a < iv.b)) throw std::invalid_argument(tag + ": needs a < b");
    if (iv.a < cursor) throw std::invalid_argument(tag + ": intervals overlap or are out of order");
    if (iv.b > 1) throw std::invalid_argument(tag + ": extends past 1");
    if (iv.alpha <= 0) throw std::invalid_argument(tag + ": slope must be positive");
    Rational lo = iv.alpha * iv.a + iv.c;
    Rational hi = iv.alpha * iv.b + iv.c;
    if (lo < iv.a || hi > iv.b) {
      throw std::invalid_argument(tag + ": image [" + to_string(lo) + ", " + to_string(hi) +
                                  "] is not contained in [" + to_string(iv.a) + ", " + to_string(iv.b) + "]");
    }
    if (iv.a > cursor) {
      breaks.push_back(iv.a);
      slopes.emplace_back(1);
      intercepts.emplace_back(0);
    }
    breaks.push_back(iv.b);
    slopes.push_back(iv.alpha);
    intercepts.push_back(iv.c);
    cursor = iv.b;
  }
  if (cursor < 1) {
    breaks.emplace_back(1);
    slopes.emplace_back(1);
    intercepts.emplace_back(0);
  }
  return PiecewiseAffineMap(std::move(breaks), std::move(slopes), std::move(intercepts), false,
                            spec.intervals.empty() ? "identity" : "perturbation");
}

PiecewiseAffineMap compose(const PiecewiseAffineMap& outer, const PiecewiseAffineMap& inner) {
  std::vector<Rational> breaks{Rational(0)};
  std::vector<Rational> slopes;
  std::vector<Rational> intercepts;
  std::vector<Rational> outer_breaks;
  for (const auto& p : outer.pieces()) outer_breaks.push_back(p.left);
  outer_breaks.emplace_back(1);

  for (const auto& p : inner.pieces()) {
    if (p.slope == 0) throw std::invalid_argument("compose: inner map has a constant piece");
    Rational y0 = p.slope * p.left + p.intercept;
    Rational y1 = p.slope * p.right + p.intercept;
    Rational ylo = std::min(y0, y1);
    Rational yhi = std::max(y0, y1);
    std::vector<Rational> cuts{p.left, p.right};
    for (Rational k = floor(ylo); k <= yhi; k += 1) {
      for (const auto& b : outer_breaks) {
        Rational x = (b + k - p.intercept) / p.slope;
        if (x > p.left && x < p.right) cuts.push_back(x);
      }
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    for (std::size_t m = 0; m + 1 < cuts.size(); ++m) {
      Rational mid = (cuts[m] + cuts[m + 1]) / 2;
      Rational y = p.slope * mid + p.intercept;
      Rational shift = inner.wraparound() ? floor(y) : Rational(0);
      const auto& q = outer.pieces()[outer.piece_index(Rational(y - shift))];
      breaks.push_back(cuts[m + 1]);
      slopes.push_back(q.slope * p.slope);
      intercepts.push_back(q.slope * (p.intercept - shift) + q.intercept);
    }
  }
  return PiecewiseAffineMap(std::move(breaks), std::move(slopes), std::move(intercepts), outer.wraparound(),
                            outer.name() + "∘" + inner.name());
}

namespace maps {

PiecewiseAffineMap identity() {
  return PiecewiseAffineMap({Rational(0), Rational(1)}, {Rational(1)}, {Rational(0)}, false, "identity");
}

PiecewiseAffineMap multiply(unsigned factor) {
  if (factor == 0) throw std::invalid_argument("multiply: factor must be positive");
  std::vector<Rational> breaks;
  for (unsigned j = 0; j <= factor; ++j) breaks.push_back(Rational(j) / factor);
  std::vector<Rational> slopes(factor, Rational(factor));
  std::vector<Rational> intercepts(factor, Rational(0));
  std::string name = factor == 2 ? "doubling" : factor == 3 ? "tripling" : "multiply" + std::to_string(factor);
  return PiecewiseAffineMap(std::move(breaks), std::move(slopes), std::move(intercepts), true, name);
}

PiecewiseAffineMap doubling() { return multiply(2); }
PiecewiseAffineMap tripling() { return multiply(3); }

PiecewiseAffineMap tent() {
  return PiecewiseAffineMap({Rational(0), Rational(1, 2), Rational(1)}, {Rational(2), Rational(-2)},
                            {Rational(0), Rational(2)}, false, "tent");
}

PiecewiseAffineMap affine(const Rational& slope, const Rational& intercept) {
  return PiecewiseAffineMap({Rational(0), Rational(1)}, {slope}, {intercept}, false, "affine");
}

bool known_weak_mixing(const std::string& name) {
  return name == "doubling" || name == "tripling" || name == "tent" || name.starts_with("multiply");
}

}  // namespace maps

}  // namespace cml
