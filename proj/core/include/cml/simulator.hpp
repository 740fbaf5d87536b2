#pragma once

// Iteration of the lattice map T o Q, run diagnostics, seeded ensembles,
// and two exact special-purpose experiments (the three-particle gap
// dynamics and the shrink factor of a uniform ring).

#include "cml/interactions.hpp"
#include "cml/local_maps.hpp"
#include "cml/phase_space.hpp"
#include "cml/rational.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace cml {

enum class ArithmeticKind { float64, rational, quantized };

struct Arithmetic {
  ArithmeticKind kind = ArithmeticKind::float64;
  unsigned bits = 0;  // grid bits for quantized mode

  static Arithmetic float64() { return {}; }
  static Arithmetic rational() { return {ArithmeticKind::rational, 0}; }
  static Arithmetic quantized(unsigned k) { return {ArithmeticKind::quantized, k}; }

  bool operator==(const Arithmetic&) const = default;
};

std::string to_string(const Arithmetic& a);
Arithmetic arithmetic_from_string(const std::string& name, unsigned bits = 0);

/// Denominator of random rational starting positions k/q. q is a prime
/// with q = 7 mod 8, so 2 is a quadratic residue and the doubling orbit of
/// k/q has period dividing (q-1)/2 = 500000003 (itself prime).
inline constexpr long kRationalGrid = 1000000007L;

struct SimulationSpec {
  Space space{Topology::circle, 1};
  std::vector<PiecewiseAffineMap> maps{maps::doubling()};  // one shared map or one per particle
  InteractionRule rule;
  std::size_t particles = 2;
  std::optional<std::vector<Rational>> initial;  // flat coordinates; random when absent
  bool start_near_diagonal = false;              // random starts with diameter <= eps
  std::uint64_t seed = 0;
  std::size_t horizon = 100000;
  double sync_tolerance = 1e-12;
  Arithmetic arithmetic;
  bool record_series = true;

  void validate() const;
  const PiecewiseAffineMap& map_for(std::size_t particle) const {
    return maps.size() == 1 ? maps.front() : maps[particle];
  }
};

struct RunRecord {
  std::vector<double> diameters;            // t = 0 .. steps
  std::vector<std::size_t> cluster_counts;  // eps-chain clusters per step
  std::vector<Rational> exact_diameters;    // rational mode only
  std::optional<std::size_t> sync_time;
  std::optional<std::size_t> hit_time;
  std::size_t steps = 0;
  Configuration final_config;
  std::optional<ExactConfiguration> final_exact;
  std::optional<double> decay_rate;  // geometric fit of the diameter, soft mode
};

Configuration step(const Configuration& config, const SimulationSpec& spec);
ExactConfiguration step(const ExactConfiguration& config, const SimulationSpec& spec);

/// Rounds to the nearest point of the 2^-bits grid, ties up. On the circle
/// 1 wraps to 0; on the interval it is clamped to the last grid point.
double quantize(double x, unsigned bits, Topology topology);

Configuration random_configuration(const Space& space, std::size_t particles, std::uint64_t seed);
ExactConfiguration random_exact_configuration(const Space& space, std::size_t particles, std::uint64_t seed);

/// Uniform centre plus independent offsets in [-eps/2, eps/2), so the
/// configuration lies in the eps-neighbourhood of the diagonal.
Configuration random_near_diagonal(const Space& space, std::size_t particles, const Rational& eps,
                                   std::uint64_t seed);
ExactConfiguration random_exact_near_diagonal(const Space& space, std::size_t particles, const Rational& eps,
                                              std::uint64_t seed);

RunRecord run(const SimulationSpec& spec);

/// Indices t with diameter(t) > rate^t diameter(0), compared exactly when
/// the record carries exact diameters.
std::vector<std::size_t> decay_violations(const RunRecord& record, const Rational& rate, std::size_t up_to);

std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index);

struct EnsembleSummary {
  std::size_t trials = 0;
  std::size_t synced = 0;
  double synced_fraction = 0.0;
  std::size_t hits = 0;
  double hit_time_mean = 0.0;
  double hit_time_median = 0.0;
  double sync_time_mean = 0.0;
};

struct EnsembleResult {
  std::vector<RunRecord> runs;
  EnsembleSummary summary;
};

/// Trial i runs `spec` with seed derive_seed(master_seed, i). Results do not
/// depend on `threads` (0 picks the hardware concurrency).
EnsembleResult ensemble(const SimulationSpec& spec, std::size_t trials, std::uint64_t master_seed,
                        unsigned threads = 0);

struct GapTrajectory {
  std::vector<std::pair<double, double>> ab;  // t = 0 .. steps
  std::vector<bool> in_A;
  bool stays_in_A = true;
  bool sum_conserved = true;
  std::optional<std::size_t> first_exit;
  Rational sum;                // a0 + b0
  Rational final_a;
  Rational final_b;
};

/// (a, b) -> ((a + 2b)/3, (2a + b)/3) on A = {0 < a, b <= eps, a + b > eps}.
/// Rational arithmetic is exact; float64 runs the same recursion in doubles.
GapTrajectory lemma5_distance_dynamics(const Rational& a0, const Rational& b0, const Rational& eps,
                                          std::size_t steps, Arithmetic arithmetic = Arithmetic::rational());

/// Three particles at x1, x1 + a0, x1 + a0 + b0 on the circle under the
/// doubling map with rigid threshold interaction. x1 is drawn from `seed`.
RunRecord lemma5_position_mode(const Rational& a0, const Rational& b0, const Rational& eps, std::size_t steps,
                               Arithmetic arithmetic, std::uint64_t seed);

struct CircleShrink {
  std::size_t n = 0;
  double closed_form = 0.0;  // (1 + 2 cos(2 pi / n)) / 3, floored at 0
  double simulated = 0.0;    // mean |p'| / r from the planar simulation
  double spread = 0.0;       // max deviation of |p'| / r across particles
  std::optional<Rational> exact;  // n = 4 computed in rationals
};

/// n particles evenly spaced on a planar circle of radius (eps/2)/sin(pi/n),
/// so neighbours sit at Euclidean distance eps, after one rigid interaction.
CircleShrink circle_shrink_factor(std::size_t n, double eps = 0.01);

}  // namespace cml
