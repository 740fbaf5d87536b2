#include "cml/transfer_ops.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <stdexcept>

namespace cml {
namespace {

constexpr std::size_t kMaxRefinedBins = std::size_t{1} << 22;

// Image of the part of a source bin lying on one affine piece, reduced to a
// sub-interval of [0,1]. The pushed density on it is f / |slope|.
struct ImageSegment {
  std::size_t source;
  Rational lo;
  Rational hi;
  Rational inverse_slope;
};

template <class Visit>
void for_each_segment(const PiecewiseAffineMap& map, std::size_t bins, Visit visit) {
  const auto& pieces = map.pieces();
  const Rational n(static_cast<long>(bins));
  for (std::size_t i = 0; i < bins; ++i) {
    const Rational bin_lo = Rational(static_cast<long>(i)) / n;
    const Rational bin_hi = Rational(static_cast<long>(i + 1)) / n;
    for (std::size_t j = map.piece_index(bin_lo); j < pieces.size() && pieces[j].left < bin_hi; ++j) {
      const auto& p = pieces[j];
      if (p.slope == 0) throw std::invalid_argument("transfer operator undefined for a constant piece");
      const Rational l = std::max(p.left, bin_lo);
      const Rational r = std::min(p.right, bin_hi);
      if (!(l < r)) continue;
      Rational y0 = p.slope * l + p.intercept;
      Rational y1 = p.slope * r + p.intercept;
      if (y1 < y0) std::swap(y0, y1);
      const Rational inv = 1 / abs_value(p.slope);
      if (!map.wraparound()) {
        visit(ImageSegment{i, y0, y1, inv});
        continue;
      }
      for (Rational k = floor(y0); k < y1; k += 1) {
        Rational lo = std::max(y0, k) - k;
        Rational hi = std::min(y1, Rational(k + 1)) - k;
        if (lo < hi) visit(ImageSegment{i, lo, hi, inv});
      }
    }
  }
}

bool on_grid(const Rational& x, std::size_t bins) {
  Rational scaled = x * Rational(static_cast<long>(bins));
  return scaled.get_den() == 1;
}

void require_grid_aligned(const PiecewiseAffineMap& map, std::size_t bins, const char* who) {
  for (const auto& p : map.pieces()) {
    if (!on_grid(p.left, bins)) {
      throw std::invalid_argument(std::string(who) + ": breakpoint " + to_string(p.left) + " is not on the grid of " +
                                  std::to_string(bins) + " bins");
    }
  }
}

template <class Real>
Real ratio_or_zero(const Real& num, const Real& den) {
  return den > Real(0) ? Real(num / den) : Real(0);
}

}  // namespace

UlamOperator::UlamOperator(std::size_t bins, std::vector<std::vector<Entry>> rows, bool exact)
    : bins_(bins), rows_(std::move(rows)), exact_(exact) {
  if (rows_.size() != bins_) throw std::invalid_argument("Ulam operator needs one row per bin");
  row_start_.reserve(bins_ + 1);
  row_start_.push_back(0);
  for (const auto& row : rows_) {
    for (const auto& e : row) {
      if (e.col >= bins_) throw std::invalid_argument("Ulam entry column out of range");
      col_.push_back(e.col);
      value_.push_back(e.value.get_d());
    }
    row_start_.push_back(col_.size());
  }
}

Rational UlamOperator::exact_entry(std::size_t i, std::size_t j) const {
  for (const auto& e : rows_.at(i)) {
    if (e.col == j) return e.value;
  }
  return Rational(0);
}

Eigen::MatrixXd UlamOperator::to_dense() const {
  const auto n = static_cast<Eigen::Index>(bins_);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < bins_; ++i) {
    for (std::size_t k = row_start_[i]; k < row_start_[i + 1]; ++k) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(col_[k])) = value_[k];
    }
  }
  return m;
}

bool UlamOperator::row_stochastic() const {
  for (const auto& row : rows_) {
    Rational sum(0);
    for (const auto& e : row) {
      if (e.value < 0) return false;
      sum += e.value;
    }
    if (sum != 1) return false;
  }
  return true;
}

GridMeasure UlamOperator::push(const GridMeasure& mu) const {
  if (mu.bins() != bins_) throw std::invalid_argument("push: measure and operator differ in bin count");
  std::vector<double> out(bins_, 0.0);
  const auto& f = mu.densities();
  for (std::size_t i = 0; i < bins_; ++i) {
    if (f[i] == 0.0) continue;
    for (std::size_t k = row_start_[i]; k < row_start_[i + 1]; ++k) out[col_[k]] += f[i] * value_[k];
  }
  return GridMeasure(std::move(out), mu.boundary());
}

ExactGridMeasure UlamOperator::push(const ExactGridMeasure& mu) const {
  if (mu.bins() != bins_) throw std::invalid_argument("push: measure and operator differ in bin count");
  std::vector<Rational> out(bins_, Rational(0));
  const auto& f = mu.densities();
  for (std::size_t i = 0; i < bins_; ++i) {
    if (f[i] == 0) continue;
    for (const auto& e : rows_[i]) out[e.col] += f[i] * e.value;
  }
  return ExactGridMeasure(std::move(out), mu.boundary());
}

UlamOperator ulam(const PiecewiseAffineMap& map, std::size_t bins) {
  if (bins == 0) throw std::invalid_argument("ulam: need at least one bin");
  const Rational n(static_cast<long>(bins));
  std::vector<std::map<std::size_t, Rational>> acc(bins);
  bool exact = true;
  for_each_segment(map, bins, [&](const ImageSegment& s) {
    if (!on_grid(s.lo, bins) || !on_grid(s.hi, bins)) exact = false;
    const auto first = static_cast<std::size_t>(floor(Rational(s.lo * n)).get_num().get_ui());
    Rational top = s.hi * n;
    auto last = static_cast<std::size_t>(floor(top).get_num().get_ui());
    if (Rational(last) == top && last > 0) --last;
    last = std::min(last, bins - 1);
    for (std::size_t j = first; j <= last; ++j) {
      Rational lo = std::max(s.lo, Rational(Rational(static_cast<long>(j)) / n));
      Rational hi = std::min(s.hi, Rational(Rational(static_cast<long>(j + 1)) / n));
      if (lo < hi) acc[s.source][j] += n * (hi - lo) * s.inverse_slope;
    }
  });
  std::vector<std::vector<UlamOperator::Entry>> rows(bins);
  for (std::size_t i = 0; i < bins; ++i) {
    for (auto& [col, value] : acc[i]) rows[i].push_back({col, value});
  }
  return UlamOperator(bins, std::move(rows), exact);
}

ExactGridMeasure exact_push(const PiecewiseAffineMap& map, const ExactGridMeasure& mu) {
  const std::size_t bins = mu.bins();
  std::vector<ImageSegment> segments;
  mpz_class grid(static_cast<unsigned long>(bins));
  for_each_segment(map, bins, [&](const ImageSegment& s) {
    mpz_lcm(grid.get_mpz_t(), grid.get_mpz_t(), s.lo.get_den_mpz_t());
    mpz_lcm(grid.get_mpz_t(), grid.get_mpz_t(), s.hi.get_den_mpz_t());
    segments.push_back(s);
  });
  if (grid > static_cast<unsigned long>(kMaxRefinedBins)) {
    throw std::invalid_argument("exact_push: aligned output grid would need " + grid.get_str() + " bins");
  }
  const auto out_bins = static_cast<std::size_t>(grid.get_ui());
  const Rational n_out(static_cast<long>(out_bins));
  std::vector<Rational> out(out_bins, Rational(0));
  const auto& f = mu.densities();
  for (const auto& s : segments) {
    if (f[s.source] == 0) continue;
    const Rational density = f[s.source] * s.inverse_slope;
    const auto first = static_cast<std::size_t>(Rational(s.lo * n_out).get_num().get_ui());
    const auto last = static_cast<std::size_t>(Rational(s.hi * n_out).get_num().get_ui());
    for (std::size_t k = first; k < last; ++k) out[k] += density;
  }
  return ExactGridMeasure(std::move(out), mu.boundary());
}

LYConstants lasota_yorke_constants(const PiecewiseAffineMap& map, const PerturbationMapSpec& spec) {
  const auto data = expansion_data(map);
  const Rational count(static_cast<long>(spec.size()));
  LYConstants c;
  c.theta = Rational(2) / data.lambda;
  c.Theta = data.beta;
  c.perturb_factor = count + 1 + spec.inverse_slope_sum();
  c.weak_factor = (count + 2 + spec.inverse_slope_sum()) * spec.total_length() / 2;
  return c;
}

std::vector<ExactGridMeasure> random_signed_measures(std::size_t bins, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<long> value(-100, 100);
  std::uniform_int_distribution<long> step(-5, 5);
  std::uniform_int_distribution<std::size_t> where(0, bins - 1);
  std::vector<ExactGridMeasure> out;
  out.reserve(count);
  for (std::size_t t = 0; t < count; ++t) {
    std::vector<Rational> f(bins, Rational(0));
    switch (t % 3) {
      case 0:
        for (auto& v : f) v = value(rng);
        break;
      case 1: {
        long level = value(rng);
        for (auto& v : f) {
          level += step(rng);
          v = level;
        }
        break;
      }
      default: {
        long spike = value(rng);
        f[where(rng)] = spike == 0 ? 1 : spike;
        break;
      }
    }
    out.emplace_back(std::move(f));
  }
  return out;
}

LasotaYorkeReport verify_lasota_yorke(const PiecewiseAffineMap& map, std::size_t bins, std::size_t trials,
                                      std::uint64_t seed) {
  const auto data = expansion_data(map);
  if (data.lambda <= 1) {
    throw std::invalid_argument("verify_lasota_yorke: map is not expanding (lambda = " + to_string(data.lambda) + ")");
  }
  require_grid_aligned(map, bins, "verify_lasota_yorke");
  LasotaYorkeReport report;
  report.constants = lasota_yorke_constants(map);
  report.trials = trials;
  const auto& c = report.constants;

  auto check = [&](const ExactGridMeasure& mu) {
    const auto before = norms(mu);
    const auto after = norms(exact_push(map, mu));
    const Rational bound = c.theta * before.strong + c.Theta * before.weak;
    return std::pair{after.strong <= bound, ratio_or_zero(after.strong, bound)};
  };

  for (const auto& mu : random_signed_measures(bins, trials, seed)) {
    auto [ok, ratio] = check(mu);
    if (!ok) ++report.violations;
    report.max_ratio = std::max(report.max_ratio, ratio.get_d());
  }
  report.lebesgue_holds = check(ExactGridMeasure::lebesgue(bins)).first;
  return report;
}

PerturbationReport verify_perturbation_bounds(const PerturbationMapSpec& spec, std::size_t bins, std::size_t trials,
                                              std::uint64_t seed) {
  const auto tau = build_perturbation_map(spec);
  for (const auto& iv : spec.intervals) {
    detail::aligned_bin(iv.a, bins, "perturbation interval end");
    detail::aligned_bin(iv.b, bins, "perturbation interval end");
    detail::aligned_bin(Rational(iv.alpha * iv.a + iv.c), bins, "perturbation image end");
    detail::aligned_bin(Rational(iv.alpha * iv.b + iv.c), bins, "perturbation image end");
  }
  PerturbationReport report;
  report.constants = lasota_yorke_constants(maps::identity(), spec);
  report.trials = trials;
  const auto& c = report.constants;

  auto weak_distance = [&](const ExactGridMeasure& mu, const ExactGridMeasure& pushed) {
    const std::size_t factor = pushed.bins() / mu.bins();
    return norms(refine(mu, factor) - pushed).weak;
  };

  for (const auto& mu : random_signed_measures(bins, trials, seed)) {
    const auto pushed = exact_push(tau, mu);
    const Rational strong = norms(mu).strong;
    const Rational strong_bound = c.perturb_factor * strong;
    const Rational weak_bound = c.weak_factor * strong;
    const Rational pushed_strong = norms(pushed).strong;
    const Rational distance = weak_distance(mu, pushed);
    if (pushed_strong > strong_bound) ++report.strong_violations;
    if (distance > weak_bound) ++report.weak_violations;
    report.max_strong_ratio = std::max(report.max_strong_ratio, ratio_or_zero(pushed_strong, strong_bound).get_d());
    report.max_weak_ratio = std::max(report.max_weak_ratio, ratio_or_zero(distance, weak_bound).get_d());
  }

  const auto m = ExactGridMeasure::lebesgue(bins);
  const auto pushed_m = exact_push(tau, m);
  report.lebesgue_strong = norms(pushed_m).strong;
  report.lebesgue_weak_distance = weak_distance(m, pushed_m);
  report.sharp_value = 2 * c.perturb_factor;
  report.sharpness_holds = report.lebesgue_strong == report.sharp_value;

  bool interior = !spec.intervals.empty();
  for (std::size_t i = 0; i < spec.intervals.size(); ++i) {
    const auto& iv = spec.intervals[i];
    interior = interior && iv.a > 0 && iv.b < 1 && iv.alpha * iv.a + iv.c > iv.a && iv.alpha * iv.b + iv.c < iv.b;
    if (i + 1 < spec.intervals.size()) interior = interior && iv.b < spec.intervals[i + 1].a;
  }
  report.interior = interior;
  return report;
}

InvariantMeasureResult invariant_measure(const UlamOperator& op, double tol, std::size_t max_iters) {
  if (!op.row_stochastic()) throw std::invalid_argument("invariant_measure: operator is not row-stochastic");
  InvariantMeasureResult result;
  result.measure = GridMeasure::lebesgue(op.bins());
  for (std::size_t it = 0; it <= max_iters; ++it) {
    GridMeasure next = op.push(result.measure);
    result.residual = norms(next - result.measure).weak;
    result.iterations = it;
    if (result.residual < tol) return result;
    auto& f = result.measure.densities();
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = 0.5 * (f[i] + next[i]);
  }
  throw std::runtime_error("invariant_measure: no convergence after " + std::to_string(max_iters) +
                           " iterations (residual " + std::to_string(result.residual) + ")");
}

ConvergenceStudy perturbed_convergence_study(const PiecewiseAffineMap& base, const Rational& alpha,
                                             const Rational& center, const std::vector<Rational>& deltas,
                                             std::size_t bins, double tol, std::size_t max_iters) {
  ConvergenceStudy study;
  study.lambda = expansion_data(base).lambda;
  study.hypothesis_lhs = 2 * (Rational(2) + 1 / alpha);
  if (!(study.hypothesis_lhs < study.lambda)) {
    throw std::invalid_argument("perturbed_convergence_study: 2(n+1+sum 1/alpha) = " + to_string(study.hypothesis_lhs) +
                                " is not below lambda = " + to_string(study.lambda));
  }
  const auto base_result = invariant_measure(ulam(base, bins), tol, max_iters);

  for (const auto& delta : deltas) {
    if (delta < 0) throw std::invalid_argument("perturbed_convergence_study: negative delta");
    if (delta == 0) {
      study.rows.push_back({delta, 0.0, norms(base_result.measure).strong, 0});
      continue;
    }
    PerturbationInterval iv;
    iv.a = center - delta / 2;
    iv.b = center + delta / 2;
    iv.alpha = alpha;
    iv.c = PerturbationMapSpec::midpoint_intercept(iv.a, iv.b, alpha);
    for (const Rational& end : {iv.a, iv.b, Rational(alpha * iv.a + iv.c), Rational(alpha * iv.b + iv.c)}) {
      detail::aligned_bin(end, bins, "perturbed_convergence_study: interval end");
    }
    const auto tau = build_perturbation_map(PerturbationMapSpec{{iv}});
    const auto result = invariant_measure(ulam(compose(tau, base), bins), tol, max_iters);
    study.rows.push_back({delta, norms(result.measure - base_result.measure).weak, norms(result.measure).strong,
                          result.iterations});
  }

  for (const auto& row : study.rows) {
    if (row.delta > 0) study.fitted_constant = std::max(study.fitted_constant, row.weak_distance / row.delta.get_d());
  }
  auto sorted = study.rows;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.delta > b.delta; });
  study.strictly_decreasing = true;
  for (std::size_t k = 0; k + 1 < sorted.size(); ++k) {
    if (!(sorted[k + 1].weak_distance < sorted[k].weak_distance)) study.strictly_decreasing = false;
  }
  study.bounded = std::all_of(study.rows.begin(), study.rows.end(), [&](const auto& row) {
    return row.weak_distance <= study.fitted_constant * row.delta.get_d() * (1.0 + 1e-12);
  });
  return study;
}

ContractionReport verify_interaction_contraction(std::size_t n, const Rational& gamma, std::size_t samples,
                                                 std::uint64_t seed) {
  if (gamma <= 0 || gamma > 1) {
    throw std::invalid_argument("verify_interaction_contraction: gamma must lie in (0,1]; rigid clusters have no inverse");
  }
  ContractionReport r;
  r.n = n;
  r.gamma = gamma.get_d();
  const Eigen::MatrixXd g = interaction_block_matrix(n, r.gamma);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(g);
  for (Eigen::Index k = 0; k < eig.eigenvalues().size(); ++k) r.eigenvalues.push_back(eig.eigenvalues()[k]);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(g);
  r.euclidean_min_gain = svd.singularValues().minCoeff();
  const Eigen::MatrixXd inv = g.inverse();
  r.max_norm_min_gain = 1.0 / inv.cwiseAbs().rowwise().sum().maxCoeff();
  r.sum_norm_min_gain = 1.0 / inv.cwiseAbs().colwise().sum().maxCoeff();

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::bernoulli_distribution coin;
  r.sampled_max_norm_gain = r.sampled_sum_norm_gain = r.sampled_euclidean_gain = INFINITY;
  const auto dim = static_cast<Eigen::Index>(n);
  for (std::size_t s = 0; s < samples; ++s) {
    Eigen::VectorXd xi(dim);
    for (Eigen::Index k = 0; k < dim; ++k) xi[k] = (s % 2 == 0) ? normal(rng) : (coin(rng) ? 1.0 : -1.0);
    if (xi.norm() == 0.0) continue;
    const Eigen::VectorXd y = g * xi;
    r.sampled_euclidean_gain = std::min(r.sampled_euclidean_gain, y.norm() / xi.norm());
    r.sampled_max_norm_gain = std::min(r.sampled_max_norm_gain, y.lpNorm<Eigen::Infinity>() / xi.lpNorm<Eigen::Infinity>());
    r.sampled_sum_norm_gain = std::min(r.sampled_sum_norm_gain, y.lpNorm<1>() / xi.lpNorm<1>());
  }

  // One particle: x -> gamma x + (1 - gamma)/2 pushes a grid density onto a
  // compressed copy of itself.
  std::uniform_int_distribution<long> level(1, 20);
  std::vector<Rational> f(16);
  for (auto& v : f) v = level(rng);
  const ExactGridMeasure mu(std::move(f));
  const auto pushed = exact_push(maps::affine(gamma, Rational((1 - gamma) / 2)), mu);
  r.affine_strong_before = norms(mu).strong;
  r.affine_strong_after = norms(pushed).strong;
  r.affine_bound_holds = r.affine_strong_after <= r.affine_strong_before / gamma;
  return r;
}

ClusterGrowthReport measure_cluster_growth(const Rational& gamma, const Rational& epsilon, const Rational& theta,
                                           std::size_t bins, std::size_t resolution, std::size_t trials,
                                           std::uint64_t seed) {
  if (gamma <= 0 || gamma > 1) throw std::invalid_argument("measure_cluster_growth: gamma must lie in (0,1]");
  ClusterGrowthReport report;
  report.gamma = gamma.get_d();
  report.epsilon = epsilon.get_d();
  report.trials = trials;
  report.bound = 4.0 * theta.get_d() / report.gamma;
  const std::size_t m = bins * resolution;
  const double g = report.gamma;
  const double eps = report.epsilon;

  // Directional strong norm of a density sampled at cell centres of an
  // m x m grid: max over the two axes of the mean zero-extended variation.
  auto strong = [m](const std::vector<double>& h) {
    double along_x = 0.0;
    double along_y = 0.0;
    for (std::size_t a = 0; a < m; ++a) {
      double prev_x = 0.0;
      double prev_y = 0.0;
      for (std::size_t b = 0; b < m; ++b) {
        along_x += std::fabs(h[a * m + b] - prev_x);
        along_y += std::fabs(h[b * m + a] - prev_y);
        prev_x = h[a * m + b];
        prev_y = h[b * m + a];
      }
      along_x += std::fabs(prev_x);
      along_y += std::fabs(prev_y);
    }
    return std::max(along_x, along_y) / static_cast<double>(m);
  };

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> level(1, 10);
  for (std::size_t t = 0; t < trials; ++t) {
    std::vector<double> f(bins);
    std::vector<double> h(bins);
    for (auto& v : f) v = level(rng);
    for (auto& v : h) v = level(rng);
    auto density = [&](double x1, double x2) {
      if (x1 < 0.0 || x1 >= 1.0 || x2 < 0.0 || x2 >= 1.0) return 0.0;
      return f[static_cast<std::size_t>(x1 * static_cast<double>(bins))] *
             h[static_cast<std::size_t>(x2 * static_cast<double>(bins))];
    };
    std::vector<double> before(m * m);
    std::vector<double> after(m * m);
    for (std::size_t a = 0; a < m; ++a) {
      const double x1 = (static_cast<double>(a) + 0.5) / static_cast<double>(m);
      for (std::size_t b = 0; b < m; ++b) {
        const double x2 = (static_cast<double>(b) + 0.5) / static_cast<double>(m);
        before[a * m + b] = density(x1, x2);
        const double v = x1 - x2;
        const double u = 0.5 * (x1 + x2);
        double value = 0.0;
        if (std::fabs(v) > eps) {
          value = density(x1, x2);
        } else if (std::fabs(v) <= g * eps) {
          const double w = v / g;
          value = density(u + 0.5 * w, u - 0.5 * w) / g;
        }
        after[a * m + b] = value;
      }
    }
    report.max_growth = std::max(report.max_growth, strong(after) / strong(before));
  }
  report.within_bound = report.max_growth <= report.bound;
  return report;
}

}  // namespace cml
