#include "cml/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numbers>
#include <random>
#include <stdexcept>
#include <thread>

namespace cml {
namespace {

template <class Real>
BasicConfiguration<Real> step_impl(const BasicConfiguration<Real>& config, const SimulationSpec& spec) {
  const auto q = apply_interaction(config, spec.space, spec.rule);
  std::vector<Real> out = q.coordinates();
  const std::size_t dim = config.dim();
  for (std::size_t i = 0; i < q.size(); ++i) {
    const auto& map = spec.map_for(i);
    for (std::size_t k = 0; k < dim; ++k) out[i * dim + k] = map.eval(out[i * dim + k]);
  }
  return BasicConfiguration<Real>(dim, std::move(out));
}

Configuration quantize_all(const Configuration& config, unsigned bits, Topology topology) {
  std::vector<double> out = config.coordinates();
  for (auto& x : out) x = quantize(x, bits, topology);
  return Configuration(config.dim(), std::move(out));
}

std::optional<double> fit_decay(const std::vector<double>& diameters) {
  double st = 0.0;
  double sy = 0.0;
  double stt = 0.0;
  double sty = 0.0;
  std::size_t count = 0;
  for (std::size_t t = 0; t < diameters.size(); ++t) {
    if (!(diameters[t] > 0.0)) continue;
    const double y = std::log(diameters[t]);
    const double x = static_cast<double>(t);
    st += x;
    sy += y;
    stt += x * x;
    sty += x * y;
    ++count;
  }
  if (count < 2) return std::nullopt;
  const double n = static_cast<double>(count);
  const double denom = n * stt - st * st;
  if (denom == 0.0) return std::nullopt;
  return std::exp((n * sty - st * sy) / denom);
}

template <class Real>
RunRecord run_impl(const SimulationSpec& spec, BasicConfiguration<Real> config) {
  constexpr bool exact = std::is_same_v<Real, Rational>;
  const bool quantized = spec.arithmetic.kind == ArithmeticKind::quantized;
  const Real eps = scalar_from<Real>(spec.rule.epsilon);
  const bool rigid = spec.rule.rigid() && spec.rule.mode != InteractionMode::potential;
  // Rigid collapse is exact by construction, so synchronisation means
  // diameter exactly zero; soft runs only approach the diagonal.
  const Real tol = rigid ? Real(0) : scalar_from<Real>(rational_from_double(spec.sync_tolerance));
  const bool shared_map = spec.maps.size() == 1;

  RunRecord record;
  auto observe = [&](std::size_t t) {
    const Real d = diameter(config, spec.space);
    if (spec.record_series) {
      record.diameters.push_back(to_double(d));
      record.cluster_counts.push_back(epsilon_chain_clusters(config, spec.space, eps).size());
      if constexpr (exact) record.exact_diameters.push_back(d);
    }
    if (!record.hit_time && d <= eps) record.hit_time = t;
    if (!record.sync_time && d <= tol) record.sync_time = t;
    return d;
  };

  Real d = observe(0);
  for (std::size_t t = 1; t <= spec.horizon; ++t) {
    if (rigid && shared_map && d == Real(0)) break;
    if constexpr (exact) {
      config = step_impl(config, spec);
    } else {
      config = step_impl(config, spec);
      if (quantized) config = quantize_all(config, spec.arithmetic.bits, spec.space.topology);
    }
    record.steps = t;
    d = observe(t);
  }

  if constexpr (exact) {
    std::vector<double> coords;
    for (const auto& x : config.coordinates()) coords.push_back(x.get_d());
    record.final_config = Configuration(config.dim(), std::move(coords));
    record.final_exact = config;
  } else {
    record.final_config = config;
  }
  if (!rigid && spec.rule.gamma > 0 && spec.rule.gamma < 1) record.decay_rate = fit_decay(record.diameters);
  return record;
}

std::vector<double> to_doubles(const std::vector<Rational>& xs) {
  std::vector<double> out;
  out.reserve(xs.size());
  for (const auto& x : xs) out.push_back(x.get_d());
  return out;
}

}  // namespace

std::string to_string(const Arithmetic& a) {
  switch (a.kind) {
    case ArithmeticKind::rational:
      return "rational";
    case ArithmeticKind::quantized:
      return "quantized(" + std::to_string(a.bits) + ")";
    default:
      return "float64";
  }
}

Arithmetic arithmetic_from_string(const std::string& name, unsigned bits) {
  if (name == "float64" || name == "double") return Arithmetic::float64();
  if (name == "rational") return Arithmetic::rational();
  if (name == "quantized") {
    if (bits == 0) throw std::invalid_argument("quantized arithmetic needs bits >= 1");
    return Arithmetic::quantized(bits);
  }
  throw std::invalid_argument("unknown arithmetic '" + name + "' (expected float64, rational or quantized)");
}

void SimulationSpec::validate() const {
  if (particles == 0) throw std::invalid_argument("simulation needs at least one particle");
  if (space.dim == 0) throw std::invalid_argument("space dimension must be positive");
  if (horizon == 0) throw std::invalid_argument("horizon must be at least 1");
  if (maps.size() != 1 && maps.size() != particles) {
    throw std::invalid_argument("need one local map or one per particle, got " + std::to_string(maps.size()));
  }
  if (arithmetic.kind == ArithmeticKind::quantized && (arithmetic.bits == 0 || arithmetic.bits > 52)) {
    throw std::invalid_argument("quantized arithmetic needs 1 <= bits <= 52");
  }
  if (arithmetic.kind == ArithmeticKind::rational && rule.mode == InteractionMode::potential) {
    throw std::invalid_argument("potential interaction is available in float64 arithmetic only");
  }
  if (!(sync_tolerance >= 0.0)) throw std::invalid_argument("sync tolerance must be nonnegative");
  if (initial && initial->size() != particles * space.dim) {
    throw std::invalid_argument("initial configuration has " + std::to_string(initial->size()) +
                                " coordinates, expected " + std::to_string(particles * space.dim));
  }
  rule.validate(particles);
}

Configuration step(const Configuration& config, const SimulationSpec& spec) { return step_impl(config, spec); }
ExactConfiguration step(const ExactConfiguration& config, const SimulationSpec& spec) {
  return step_impl(config, spec);
}

double quantize(double x, unsigned bits, Topology topology) {
  const double scale = std::ldexp(1.0, static_cast<int>(bits));
  double y = std::floor(x * scale + 0.5) / scale;
  if (y >= 1.0) y = topology == Topology::circle ? 0.0 : 1.0 - 1.0 / scale;
  if (y < 0.0) y = 0.0;
  return y;
}

Configuration random_configuration(const Space& space, std::size_t particles, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> coords(particles * space.dim);
  for (auto& x : coords) x = unit(rng);
  return Configuration(space.dim, std::move(coords));
}

ExactConfiguration random_exact_configuration(const Space& space, std::size_t particles, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<long> numerator(0, kRationalGrid - 1);
  std::vector<Rational> coords(particles * space.dim);
  for (auto& x : coords) {
    x = numerator(rng);
    x /= kRationalGrid;
  }
  return ExactConfiguration(space.dim, std::move(coords));
}

Configuration random_near_diagonal(const Space& space, std::size_t particles, const Rational& eps,
                                   std::uint64_t seed) {
  const auto exact = random_exact_near_diagonal(space, particles, eps, seed);
  return Configuration(space.dim, to_doubles(exact.coordinates()));
}

ExactConfiguration random_exact_near_diagonal(const Space& space, std::size_t particles, const Rational& eps,
                                              std::uint64_t seed) {
  if (eps < 0 || eps >= Rational(1, 2)) throw std::invalid_argument("near-diagonal start needs 0 <= eps < 1/2");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<long> numerator(0, kRationalGrid - 1);
  auto unit = [&]() -> Rational { return Rational(numerator(rng)) / kRationalGrid; };
  std::vector<Rational> centre(space.dim);
  for (auto& c : centre) {
    c = unit();
    if (space.topology == Topology::interval) c = eps / 2 + c * (1 - eps);
  }
  std::vector<Rational> coords;
  coords.reserve(particles * space.dim);
  for (std::size_t i = 0; i < particles; ++i) {
    for (std::size_t k = 0; k < space.dim; ++k) {
      Rational x = centre[k] + (unit() - Rational(1, 2)) * eps;
      if (space.topology == Topology::circle) x = wrap_unit(x);
      if (x >= 1) x = 0;
      coords.push_back(x);
    }
  }
  return ExactConfiguration(space.dim, std::move(coords));
}

RunRecord run(const SimulationSpec& spec) {
  spec.validate();
  const bool exact = spec.arithmetic.kind == ArithmeticKind::rational;
  std::optional<ExactConfiguration> start;
  if (spec.initial) {
    start = ExactConfiguration(spec.space.dim, *spec.initial);
  } else if (spec.start_near_diagonal) {
    start = random_exact_near_diagonal(spec.space, spec.particles, spec.rule.epsilon, spec.seed);
  }
  if (exact) return run_impl<Rational>(spec, start ? *start : random_exact_configuration(spec.space, spec.particles, spec.seed));
  Configuration config = start ? Configuration(spec.space.dim, to_doubles(start->coordinates()))
                               : random_configuration(spec.space, spec.particles, spec.seed);
  if (spec.arithmetic.kind == ArithmeticKind::quantized) {
    config = quantize_all(config, spec.arithmetic.bits, spec.space.topology);
  }
  return run_impl<double>(spec, std::move(config));
}

std::vector<std::size_t> decay_violations(const RunRecord& record, const Rational& rate, std::size_t up_to) {
  std::vector<std::size_t> bad;
  const bool exact = !record.exact_diameters.empty();
  const std::size_t last = std::min(up_to, record.diameters.size() == 0 ? 0 : record.diameters.size() - 1);
  Rational factor(1);
  const double rate_d = rate.get_d();
  for (std::size_t t = 0; t <= last && t < record.diameters.size(); ++t) {
    if (exact) {
      if (record.exact_diameters[t] > factor * record.exact_diameters[0]) bad.push_back(t);
      factor *= rate;
    } else if (record.diameters[t] > std::pow(rate_d, static_cast<double>(t)) * record.diameters[0]) {
      bad.push_back(t);
    }
  }
  return bad;
}

std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index) {
  std::uint64_t z = master_seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

EnsembleResult ensemble(const SimulationSpec& spec, std::size_t trials, std::uint64_t master_seed, unsigned threads) {
  if (trials == 0) throw std::invalid_argument("ensemble needs at least one trial");
  spec.validate();
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, trials));

  EnsembleResult result;
  result.runs.resize(trials);
  std::vector<std::exception_ptr> errors(threads);
  auto work = [&](unsigned w) {
    try {
      for (std::size_t i = w; i < trials; i += threads) {
        SimulationSpec trial = spec;
        trial.seed = derive_seed(master_seed, i);
        result.runs[i] = run(trial);
      }
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  auto& s = result.summary;
  s.trials = trials;
  std::vector<double> hits;
  double sync_total = 0.0;
  for (const auto& r : result.runs) {
    if (r.sync_time) {
      ++s.synced;
      sync_total += static_cast<double>(*r.sync_time);
    }
    if (r.hit_time) hits.push_back(static_cast<double>(*r.hit_time));
  }
  s.synced_fraction = static_cast<double>(s.synced) / static_cast<double>(trials);
  s.hits = hits.size();
  if (!hits.empty()) {
    double total = 0.0;
    for (double h : hits) total += h;
    s.hit_time_mean = total / static_cast<double>(hits.size());
    std::sort(hits.begin(), hits.end());
    const std::size_t mid = hits.size() / 2;
    s.hit_time_median = hits.size() % 2 == 1 ? hits[mid] : 0.5 * (hits[mid - 1] + hits[mid]);
  }
  if (s.synced > 0) s.sync_time_mean = sync_total / static_cast<double>(s.synced);
  return result;
}

GapTrajectory lemma5_distance_dynamics(const Rational& a0, const Rational& b0, const Rational& eps,
                                          std::size_t steps, Arithmetic arithmetic) {
  auto inside = [&](const Rational& a, const Rational& b) { return a > 0 && b > 0 && a <= eps && b <= eps && a + b > eps; };
  if (!inside(a0, b0)) {
    throw std::invalid_argument("lemma5: start (" + to_string(a0) + ", " + to_string(b0) +
                                ") is outside A = {0 < a, b <= eps, a + b > eps}");
  }
  if (arithmetic.kind == ArithmeticKind::quantized) {
    throw std::invalid_argument("lemma5 gap dynamics runs in rational or float64 arithmetic");
  }
  GapTrajectory tr;
  tr.sum = a0 + b0;
  tr.ab.reserve(steps + 1);
  tr.in_A.reserve(steps + 1);

  auto note = [&](std::size_t t, bool ok, double a, double b) {
    tr.ab.emplace_back(a, b);
    tr.in_A.push_back(ok);
    if (!ok && tr.stays_in_A) {
      tr.stays_in_A = false;
      tr.first_exit = t;
    }
  };

  if (arithmetic.kind == ArithmeticKind::rational) {
    Rational a = a0;
    Rational b = b0;
    note(0, true, a.get_d(), b.get_d());
    for (std::size_t t = 1; t <= steps; ++t) {
      Rational na = (a + 2 * b) / 3;
      Rational nb = (2 * a + b) / 3;
      a = std::move(na);
      b = std::move(nb);
      if (a + b != tr.sum) tr.sum_conserved = false;
      note(t, inside(a, b), a.get_d(), b.get_d());
    }
    tr.final_a = a;
    tr.final_b = b;
  } else {
    const double e = eps.get_d();
    const double sum = tr.sum.get_d();
    double a = a0.get_d();
    double b = b0.get_d();
    note(0, true, a, b);
    for (std::size_t t = 1; t <= steps; ++t) {
      const double na = (a + 2.0 * b) / 3.0;
      const double nb = (2.0 * a + b) / 3.0;
      a = na;
      b = nb;
      if (a + b != sum) tr.sum_conserved = false;
      note(t, a > 0.0 && b > 0.0 && a <= e && b <= e && a + b > e, a, b);
    }
    tr.final_a = Rational(a);
    tr.final_b = Rational(b);
  }
  return tr;
}

RunRecord lemma5_position_mode(const Rational& a0, const Rational& b0, const Rational& eps, std::size_t steps,
                               Arithmetic arithmetic, std::uint64_t seed) {
  if (!(a0 > 0 && b0 > 0 && a0 <= eps && b0 <= eps && a0 + b0 > eps)) {
    throw std::invalid_argument("lemma5: start gaps are outside A");
  }
  SimulationSpec spec;
  spec.space = Space{Topology::circle, 1};
  spec.maps = {maps::doubling()};
  spec.rule.mode = InteractionMode::threshold;
  spec.rule.epsilon = eps;
  spec.rule.gamma = 0;
  spec.particles = 3;
  spec.horizon = steps;
  spec.seed = seed;
  spec.arithmetic = arithmetic;
  const Rational x1 = random_exact_configuration(spec.space, 1, seed)[0][0];
  spec.initial = std::vector<Rational>{x1, wrap_unit(Rational(x1 + a0)), wrap_unit(Rational(x1 + a0 + b0))};
  return run(spec);
}

CircleShrink circle_shrink_factor(std::size_t n, double eps) {
  if (n < 3) throw std::invalid_argument("circle_shrink_factor needs n >= 3");
  if (!(eps > 0.0)) throw std::invalid_argument("circle_shrink_factor needs eps > 0");
  CircleShrink out;
  out.n = n;
  const double pi = std::numbers::pi;
  out.closed_form = std::max(0.0, (1.0 + 2.0 * std::cos(2.0 * pi / static_cast<double>(n))) / 3.0);

  const double r = 0.5 * eps / std::sin(pi / static_cast<double>(n));
  std::vector<std::pair<double, double>> p(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double angle = 2.0 * pi * static_cast<double>(i) / static_cast<double>(n);
    p[i] = {r * std::cos(angle), r * std::sin(angle)};
  }
  const double reach = eps * (1.0 + 1e-9);
  double lo = INFINITY;
  double hi = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double sx = 0.0;
    double sy = 0.0;
    std::size_t count = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (std::hypot(p[i].first - p[j].first, p[i].second - p[j].second) <= reach) {
        sx += p[j].first;
        sy += p[j].second;
        ++count;
      }
    }
    const double ratio = std::hypot(sx / static_cast<double>(count), sy / static_cast<double>(count)) / r;
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
    total += ratio;
  }
  out.simulated = total / static_cast<double>(n);
  out.spread = hi - lo;

  if (n == 4) {
    // Unit square diagonal points; neighbours at squared distance 2 = eps^2.
    const std::vector<std::pair<Rational, Rational>> q{{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    Rational sx(0);
    Rational sy(0);
    std::size_t count = 0;
    for (const auto& pt : q) {
      Rational dx = q[0].first - pt.first;
      Rational dy = q[0].second - pt.second;
      if (dx * dx + dy * dy <= 2) {
        sx += pt.first;
        sy += pt.second;
        ++count;
      }
    }
    sx /= static_cast<long>(count);
    sy /= static_cast<long>(count);
    const Rational sq = sx * sx + sy * sy;
    mpz_class num = sqrt(sq.get_num());
    mpz_class den = sqrt(sq.get_den());
    if (num * num == sq.get_num() && den * den == sq.get_den()) out.exact = Rational(num, den);
  }
  return out;
}

}  // namespace cml
