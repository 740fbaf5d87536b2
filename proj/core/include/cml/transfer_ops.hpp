#pragma once

// Transfer operators of piecewise-affine maps on a uniform grid and the
// certification routines built on them.

#include "cml/bv_measures.hpp"
#include "cml/interactions.hpp"
#include "cml/local_maps.hpp"
#include "cml/rational.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

namespace cml {

/// Ulam discretisation: P[i][j] = m(bin_i ∩ T^{-1} bin_j) / m(bin_i).
/// Entries are exact rationals (with a double copy for fast products).
/// `exact()` is true when the image of every bin has its endpoints on the
/// grid, in which case pushing a grid density is the true pushforward
/// rather than its bin average.
class UlamOperator {
 public:
  struct Entry {
    std::size_t col;
    Rational value;
  };

  UlamOperator(std::size_t bins, std::vector<std::vector<Entry>> rows, bool exact);

  std::size_t bins() const { return bins_; }
  bool exact() const { return exact_; }
  const std::vector<std::vector<Entry>>& rows() const { return rows_; }

  Rational exact_entry(std::size_t i, std::size_t j) const;
  double entry(std::size_t i, std::size_t j) const { return exact_entry(i, j).get_d(); }
  Eigen::MatrixXd to_dense() const;

  /// Every row nonnegative with exact sum 1.
  bool row_stochastic() const;

  GridMeasure push(const GridMeasure& mu) const;
  ExactGridMeasure push(const ExactGridMeasure& mu) const;

 private:
  std::size_t bins_;
  std::vector<std::vector<Entry>> rows_;
  std::vector<std::size_t> row_start_;
  std::vector<std::size_t> col_;
  std::vector<double> value_;
  bool exact_;
};

UlamOperator ulam(const PiecewiseAffineMap& map, std::size_t bins);

inline GridMeasure push(const UlamOperator& op, const GridMeasure& mu) { return op.push(mu); }
inline ExactGridMeasure push(const UlamOperator& op, const ExactGridMeasure& mu) { return op.push(mu); }

/// True pushforward of a grid density under a piecewise-affine map. The
/// result lives on the coarsest grid (a multiple of the input grid) on
/// which every image endpoint is aligned.
ExactGridMeasure exact_push(const PiecewiseAffineMap& map, const ExactGridMeasure& mu);

struct LYConstants {
  Rational theta;           // 2 / lambda
  Rational Theta;           // beta of the map
  Rational perturb_factor;  // n + 1 + sum 1/alpha_i
  Rational weak_factor;     // (n + 2 + sum 1/alpha_i) m(A) / 2
};

LYConstants lasota_yorke_constants(const PiecewiseAffineMap& map, const PerturbationMapSpec& spec = {});

/// Random signed integer-valued densities used by the certification runs:
/// independent values, random walks and isolated spikes in rotation.
std::vector<ExactGridMeasure> random_signed_measures(std::size_t bins, std::size_t count, std::uint64_t seed);

struct LasotaYorkeReport {
  LYConstants constants;
  std::size_t trials = 0;
  std::size_t violations = 0;
  double max_ratio = 0.0;  // max of V(T*mu) / (theta V(mu) + Theta |mu|)
  bool lebesgue_holds = false;
};

/// Checks V(T*mu) <= (2/lambda) V(mu) + beta |mu| exactly on random signed
/// measures plus Lebesgue. Requires lambda > 1 and grid-aligned breakpoints.
LasotaYorkeReport verify_lasota_yorke(const PiecewiseAffineMap& map, std::size_t bins, std::size_t trials,
                                      std::uint64_t seed);

struct PerturbationReport {
  LYConstants constants;
  std::size_t trials = 0;
  std::size_t strong_violations = 0;
  std::size_t weak_violations = 0;
  double max_strong_ratio = 0.0;
  double max_weak_ratio = 0.0;
  Rational lebesgue_strong;         // V(tau* m)
  Rational lebesgue_weak_distance;  // |m - tau* m|
  Rational sharp_value;             // 2 (n + 1 + sum 1/alpha_i)
  bool interior = false;            // every tau A_i inside the open A_i, A_i disjoint and inside (0,1)
  bool sharpness_holds = false;     // V(tau* m) == sharp_value (only expected when interior)

  bool passed() const {
    return strong_violations == 0 && weak_violations == 0 && (!interior || sharpness_holds);
  }
};

/// Both perturbation bounds on random measures, and V(tau* m) against
/// 2(n + 1 + sum 1/alpha_i). A_i and tau_i A_i must be grid-aligned.
PerturbationReport verify_perturbation_bounds(const PerturbationMapSpec& spec, std::size_t bins, std::size_t trials,
                                              std::uint64_t seed);

struct InvariantMeasureResult {
  GridMeasure measure;
  std::size_t iterations = 0;
  double residual = 0.0;  // |P mu - mu| in the weak norm
};

/// Fixed density of a row-stochastic operator, iterated from Lebesgue with
/// the lazy average mu <- (mu + P mu)/2 until |P mu - mu| < tol. Throws
/// std::runtime_error after max_iters.
InvariantMeasureResult invariant_measure(const UlamOperator& op, double tol = 1e-10, std::size_t max_iters = 100000);

struct ConvergenceRow {
  Rational delta;
  double weak_distance;  // |mu_delta - mu_T|
  double strong_norm;    // V(mu_delta)
  std::size_t iterations;
};

struct ConvergenceStudy {
  Rational hypothesis_lhs;  // 2 (n + 1 + sum 1/alpha_i)
  Rational lambda;
  std::vector<ConvergenceRow> rows;
  double fitted_constant = 0.0;  // C = max weak_distance / delta over delta > 0
  bool strictly_decreasing = false;
  bool bounded = false;  // weak_distance <= C delta for every row
};

/// Invariant densities of tau_delta ∘ T for single-interval perturbations
/// A = [center - delta/2, center + delta/2] with slope alpha and a fixed
/// midpoint, compared with the invariant density of T.
ConvergenceStudy perturbed_convergence_study(const PiecewiseAffineMap& base, const Rational& alpha,
                                             const Rational& center, const std::vector<Rational>& deltas,
                                             std::size_t bins, double tol = 1e-10, std::size_t max_iters = 100000);

struct ContractionReport {
  std::size_t n = 0;
  double gamma = 0.0;
  std::vector<double> eigenvalues;      // ascending
  double euclidean_min_gain = 0.0;      // smallest singular value of G
  double max_norm_min_gain = 0.0;       // 1 / ||G^{-1}||_inf
  double sum_norm_min_gain = 0.0;       // 1 / ||G^{-1}||_1
  double sampled_max_norm_gain = 0.0;   // min over random xi, >= max_norm_min_gain
  double sampled_sum_norm_gain = 0.0;
  double sampled_euclidean_gain = 0.0;
  // One-particle reduction: x -> gamma x + c acting on a grid density.
  Rational affine_strong_before;
  Rational affine_strong_after;
  bool affine_bound_holds = false;  // V(push) <= V / gamma
};

/// Gains of the block matrix G = gamma I + (1-gamma)/n E in the Euclidean,
/// max and sum norms, analytically and by random search, plus the 1-D
/// affine contraction bound. gamma must lie in (0,1].
ContractionReport verify_interaction_contraction(std::size_t n, const Rational& gamma, std::size_t samples = 2000,
                                                 std::uint64_t seed = 1);

struct ClusterGrowthReport {
  double gamma = 0.0;
  double epsilon = 0.0;
  std::size_t trials = 0;
  double max_growth = 0.0;  // max V(Q* mu) / V(mu) over product densities
  double bound = 0.0;       // 2^N theta / gamma with N = 2
  bool within_bound = false;
};

/// Two particles on the interval: directional strong norm of Q* applied to
/// product densities f ⊗ g, sampled on a fine grid.
ClusterGrowthReport measure_cluster_growth(const Rational& gamma, const Rational& epsilon, const Rational& theta,
                                           std::size_t bins, std::size_t resolution, std::size_t trials,
                                           std::uint64_t seed);

}  // namespace cml
