#include "cml/meanfield.hpp"

#include "cml/phase_space.hpp"
#include "cml/transfer_ops.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace cml {

void MeanFieldParams::validate() const {
  if (epsilon <= 0 || epsilon >= Rational(1, 4)) throw std::invalid_argument("mean field needs 0 < eps < 1/4");
  if (gamma < 0 || gamma > 1) throw std::invalid_argument("mean field needs gamma in [0,1]");
}

AtomicMeasure::AtomicMeasure(std::vector<Atom> atoms) {
  std::map<Rational, Rational> merged;
  for (auto& a : atoms) {
    if (a.position < 0 || a.position >= 1) {
      throw std::invalid_argument("atom position " + to_string(a.position) + " outside [0,1)");
    }
    if (a.mass <= 0) throw std::invalid_argument("atom mass must be positive");
    merged[a.position] += a.mass;
  }
  for (auto& [x, m] : merged) atoms_.push_back({x, m});
}

AtomicMeasure AtomicMeasure::uniform_on(const std::vector<Rational>& positions) {
  if (positions.empty()) throw std::invalid_argument("uniform_on needs at least one position");
  const Rational each = Rational(1) / static_cast<long>(positions.size());
  std::vector<Atom> atoms;
  for (const auto& x : positions) atoms.push_back({x, each});
  return AtomicMeasure(std::move(atoms));
}

Rational AtomicMeasure::total_mass() const {
  Rational total(0);
  for (const auto& a : atoms_) total += a.mass;
  return total;
}

Rational total_variation(const AtomicMeasure& mu, const AtomicMeasure& nu) {
  std::map<Rational, Rational> diff;
  for (const auto& a : mu.atoms()) diff[a.position] += a.mass;
  for (const auto& a : nu.atoms()) diff[a.position] -= a.mass;
  Rational total(0);
  for (const auto& [x, m] : diff) total += abs_value(m);
  return total;
}

double mean_field_point_update(double x, const GridMeasure& mu, const MeanFieldParams& params) {
  const auto& f = mu.densities();
  const auto n = static_cast<long>(f.size());
  const double nd = static_cast<double>(n);
  const double eps = params.epsilon.get_d();
  double mass = 0.0;
  double moment = 0.0;  // integral of (y - x) over the arc, in the chart at x
  double s = x - eps;
  const double end = x + eps;
  while (s < end) {
    double k = std::floor(s * nd);
    // s on a bin edge can round into the bin below
    if ((k + 1.0) / nd <= s) k += 1.0;
    const double next = std::min((k + 1.0) / nd, end);
    long bin = static_cast<long>(k) % n;
    if (bin < 0) bin += n;
    const double v = f[static_cast<std::size_t>(bin)];
    mass += v * (next - s);
    moment += v * 0.5 * ((next - x) * (next - x) - (s - x) * (s - x));
    s = next;
  }
  if (!(mass > 0.0)) {
    throw std::domain_error("mean-field update undefined at x = " + std::to_string(x) + ": arc has no mass");
  }
  return wrap_unit(x + (1.0 - params.gamma.get_d()) * moment / mass);
}

Rational mean_field_point_update(const Rational& x, const AtomicMeasure& mu, const MeanFieldParams& params) {
  Rational mass(0);
  Rational moment(0);
  for (const auto& a : mu.atoms()) {
    const Rational offset = coordinate_offset(Topology::circle, x, a.position);
    if (abs_value(offset) <= params.epsilon) {
      mass += a.mass;
      moment += a.mass * offset;
    }
  }
  if (mass == 0) {
    throw std::domain_error("mean-field update undefined at x = " + to_string(x) + ": arc has no mass");
  }
  return wrap_unit(Rational(x + (1 - params.gamma) * moment / mass));
}

GridMeasure mean_field_step(const GridMeasure& mu, const MeanFieldParams& params, std::size_t resolution) {
  params.validate();
  if (resolution == 0) throw std::invalid_argument("mean_field_step: resolution must be positive");
  const std::size_t n = mu.bins();
  GridMeasure pushed = ulam(params.map, n).push(GridMeasure(mu.densities(), Boundary::periodic));
  if (params.gamma == 1) return pushed;

  std::vector<double> out(n, 0.0);
  const double nd = static_cast<double>(n);
  const double rd = static_cast<double>(resolution);
  for (std::size_t i = 0; i < n; ++i) {
    const double share = pushed[i] / rd;
    if (share == 0.0) continue;
    for (std::size_t k = 0; k < resolution; ++k) {
      const double x = (static_cast<double>(i) + (static_cast<double>(k) + 0.5) / rd) / nd;
      const double y = mean_field_point_update(x, pushed, params);
      auto bin = static_cast<std::size_t>(y * nd);
      if (bin >= n) bin = n - 1;
      out[bin] += share;
    }
  }
  return GridMeasure(std::move(out), Boundary::periodic);
}

AtomicMeasure mean_field_step(const AtomicMeasure& mu, const MeanFieldParams& params) {
  params.validate();
  std::vector<Atom> image;
  for (const auto& a : mu.atoms()) image.push_back({params.map.eval(a.position), a.mass});
  const AtomicMeasure pushed(std::move(image));
  if (params.gamma == 1) return pushed;
  std::vector<Atom> moved;
  for (const auto& a : pushed.atoms()) moved.push_back({mean_field_point_update(a.position, pushed, params), a.mass});
  return AtomicMeasure(std::move(moved));
}

MeanFieldTrajectory<GridMeasure> mean_field_iterate(const GridMeasure& mu0, const MeanFieldParams& params,
                                                    std::size_t steps, std::size_t resolution) {
  MeanFieldTrajectory<GridMeasure> tr;
  tr.measures.push_back(GridMeasure(mu0.densities(), Boundary::periodic));
  for (std::size_t t = 0; t < steps; ++t) {
    tr.measures.push_back(mean_field_step(tr.measures.back(), params, resolution));
    const auto& a = tr.measures[tr.measures.size() - 1];
    const auto& b = tr.measures[tr.measures.size() - 2];
    tr.distances.push_back(norms(a - b).weak);
  }
  return tr;
}

MeanFieldTrajectory<AtomicMeasure> mean_field_iterate(const AtomicMeasure& mu0, const MeanFieldParams& params,
                                                      std::size_t steps) {
  MeanFieldTrajectory<AtomicMeasure> tr;
  tr.measures.push_back(mu0);
  for (std::size_t t = 0; t < steps; ++t) {
    tr.measures.push_back(mean_field_step(tr.measures.back(), params));
    tr.distances.push_back(total_variation(tr.measures.back(), tr.measures[tr.measures.size() - 2]).get_d());
  }
  return tr;
}

}  // namespace cml
