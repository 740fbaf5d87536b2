#pragma once

// Interaction maps Q: each particle moves toward the center of gravity of
// the particles it currently interacts with,
//
//   (Q x)_i = gamma x_i + (1 - gamma)/|J_i| sum_{j in J_i} x_j,
//
// computed synchronously from the frozen input configuration. On the
// circle the sum is taken in the chart centred on x_i.

#include "cml/phase_space.hpp"
#include "cml/rational.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

namespace cml {

enum class InteractionMode { threshold, closest, potential, diffusive, graph_threshold };

std::string to_string(InteractionMode mode);
InteractionMode interaction_mode_from_string(const std::string& name);

/// U sampled uniformly on [-1,1], linearly interpolated, zero outside.
class SampledPotential {
 public:
  static constexpr std::size_t kMinSamples = 201;

  explicit SampledPotential(std::vector<double> samples);

  static SampledPotential indicator(std::size_t samples = kMinSamples);
  static SampledPotential constant(double value, std::size_t samples = kMinSamples);

  double operator()(double u) const;
  const std::vector<double>& samples() const { return samples_; }

 private:
  std::vector<double> samples_;
};

using Adjacency = std::vector<std::vector<std::size_t>>;
using NeighborSets = std::vector<std::vector<std::size_t>>;

struct InteractionRule {
  InteractionMode mode = InteractionMode::threshold;
  Rational epsilon{0};
  Rational gamma{1};  // self-weight: 0 rigid, 1 no interaction
  std::optional<SampledPotential> potential;
  std::optional<Adjacency> adjacency;

  bool rigid() const { return gamma == 0; }

  /// Throws std::invalid_argument when the rule is inconsistent for a
  /// configuration of `particles` particles.
  void validate(std::size_t particles) const;
};

template <class Real>
NeighborSets neighbor_sets(const BasicConfiguration<Real>& config, const Space& space,
                           const InteractionRule& rule) {
  const std::size_t n = config.size();
  const Real eps = scalar_from<Real>(rule.epsilon);
  NeighborSets sets(n);

  if (rule.mode == InteractionMode::diffusive) {
    if (!rule.adjacency) throw std::invalid_argument("diffusive coupling needs an adjacency list");
    for (std::size_t i = 0; i < n; ++i) {
      sets[i] = (*rule.adjacency)[i];
      std::sort(sets[i].begin(), sets[i].end());
    }
    return sets;
  }

  std::vector<Real> d(n * n, Real(0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      d[i * n + j] = dist(space, config[i], config[j]);
      d[j * n + i] = d[i * n + j];
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    auto& set = sets[i];
    switch (rule.mode) {
      case InteractionMode::closest: {
        std::optional<Real> nearest;
        for (std::size_t k = 0; k < n; ++k) {
          if (k != i && (!nearest || d[i * n + k] < *nearest)) nearest = d[i * n + k];
        }
        for (std::size_t j = 0; j < n; ++j) {
          if (j == i || (d[i * n + j] <= eps && d[i * n + j] == *nearest)) set.push_back(j);
        }
        break;
      }
      case InteractionMode::graph_threshold: {
        if (!rule.adjacency) throw std::invalid_argument("graph_threshold needs an adjacency list");
        const auto& adj = (*rule.adjacency)[i];
        for (std::size_t j = 0; j < n; ++j) {
          bool linked = j == i || std::find(adj.begin(), adj.end(), j) != adj.end();
          if (linked && d[i * n + j] <= eps) set.push_back(j);
        }
        break;
      }
      default:
        for (std::size_t j = 0; j < n; ++j) {
          if (d[i * n + j] <= eps) set.push_back(j);
        }
        break;
    }
  }
  return sets;
}

namespace detail {

template <class Real>
BasicConfiguration<Real> average_over(const BasicConfiguration<Real>& config, const Space& space,
                                      const NeighborSets& sets, const Real& weight) {
  std::vector<Real> out;
  out.reserve(config.coordinates().size());
  const Real pull = Real(1) - weight;
  for (std::size_t i = 0; i < config.size(); ++i) {
    if (sets[i].empty()) {
      throw std::invalid_argument("particle " + std::to_string(i) + " has an empty neighbor set");
    }
    // A rigid move sends every member of a neighbor set to one point; taking
    // the chart at the set's first member keeps that point bit-identical.
    auto anchor = weight == Real(0) ? config[sets[i].front()] : config[i];
    auto offset = mean_offset<Real>(space, anchor, sets[i].size(),
                                    [&](std::size_t m) { return config[sets[i][m]]; });
    for (std::size_t k = 0; k < space.dim; ++k) {
      out.push_back(project(space.topology, Real(anchor[k] + pull * offset[k])));
    }
  }
  return BasicConfiguration<Real>(config.dim(), std::move(out));
}

}  // namespace detail

/// Potential-weighted interaction
///   (Q x)_i = gamma x_i + (1 - gamma)/|J_i| sum_{j in J_i} x_j U(d_ij / eps)
/// with J_i the threshold neighbor set and d_ij the signed displacement
/// from x_i to x_j. The weights are not renormalised; on the interval an
/// image outside [0,1) raises std::domain_error. One-dimensional only.
inline Configuration apply_potential_interaction(const Configuration& config, const Space& space,
                                                 const InteractionRule& rule) {
  if (!rule.potential) throw std::invalid_argument("potential mode needs a sampled potential");
  if (space.dim != 1) throw std::invalid_argument("potential interaction is one-dimensional only");
  InteractionRule threshold = rule;
  threshold.mode = InteractionMode::threshold;
  const auto sets = neighbor_sets(config, space, threshold);
  const double eps = rule.epsilon.get_d();
  const double gamma = rule.gamma.get_d();
  std::vector<double> out;
  out.reserve(config.size());
  for (std::size_t i = 0; i < config.size(); ++i) {
    const double xi = config[i][0];
    double sum = 0.0;
    for (std::size_t j : sets[i]) {
      const double offset = coordinate_offset(space.topology, xi, config[j][0]);
      const double u = eps > 0.0 ? offset / eps : 0.0;
      sum += (xi + offset) * (*rule.potential)(u);
    }
    double x = gamma * xi + (1.0 - gamma) / static_cast<double>(sets[i].size()) * sum;
    if (space.topology == Topology::circle) {
      x = wrap_unit(x);
    } else if (x < 0.0 || x >= 1.0) {
      throw std::domain_error("potential interaction moved particle " + std::to_string(i) +
                              " outside [0,1): " + std::to_string(x));
    }
    out.push_back(x);
  }
  return Configuration(1, std::move(out));
}

/// Diffusive coupling on a fixed graph; the rule's gamma is the self-weight
/// and J_i is exactly the adjacency list of i (list i itself for a self-loop).
template <class Real>
BasicConfiguration<Real> apply_diffusive(const BasicConfiguration<Real>& config, const Space& space,
                                         const InteractionRule& rule) {
  if (!rule.adjacency) throw std::invalid_argument("diffusive coupling needs an adjacency list");
  if (rule.adjacency->size() != config.size()) {
    throw std::invalid_argument("adjacency list size differs from particle count");
  }
  InteractionRule diffusive = rule;
  diffusive.mode = InteractionMode::diffusive;
  return detail::average_over(config, space, neighbor_sets(config, space, diffusive),
                              scalar_from<Real>(rule.gamma));
}

/// Dispatches on the rule's mode.
template <class Real>
BasicConfiguration<Real> apply_interaction(const BasicConfiguration<Real>& config, const Space& space,
                                           const InteractionRule& rule) {
  switch (rule.mode) {
    case InteractionMode::potential:
      if constexpr (std::is_same_v<Real, double>) {
        return apply_potential_interaction(config, space, rule);
      } else {
        throw std::invalid_argument("potential interaction is available in double arithmetic only");
      }
    case InteractionMode::diffusive:
      return apply_diffusive(config, space, rule);
    default:
      break;
  }
  if (rule.gamma == 1) return config;
  return detail::average_over(config, space, neighbor_sets(config, space, rule), scalar_from<Real>(rule.gamma));
}

/// Connected components of the graph linking particles at distance <= eps.
/// Members are ascending; clusters are ordered by their smallest member.
template <class Real>
std::vector<std::vector<std::size_t>> epsilon_chain_clusters(const BasicConfiguration<Real>& config,
                                                             const Space& space, const Real& eps) {
  if (eps < Real(0)) throw std::invalid_argument("epsilon must be nonnegative");
  const std::size_t n = config.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t v) {
    while (parent[v] != v) {
      parent[v] = parent[parent[v]];
      v = parent[v];
    }
    return v;
  };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (dist(space, config[i], config[j]) <= eps) {
        std::size_t a = find(i);
        std::size_t b = find(j);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      }
    }
  }
  std::vector<std::vector<std::size_t>> clusters;
  std::vector<std::size_t> slot(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t root = find(i);
    if (slot[root] == n) {
      slot[root] = clusters.size();
      clusters.emplace_back();
    }
    clusters[slot[root]].push_back(i);
  }
  return clusters;
}

/// G = gamma I + ((1 - gamma)/n) E, the linear part of Q on a cluster of n
/// mutually interacting particles (E is the all-ones matrix).
Eigen::MatrixXd interaction_block_matrix(std::size_t n, double gamma);

}  // namespace cml
