#include "cml/interactions.hpp"

#include <algorithm>
#include <cmath>

namespace cml {

std::string to_string(InteractionMode mode) {
  switch (mode) {
    case InteractionMode::threshold: return "threshold";
    case InteractionMode::closest: return "closest";
    case InteractionMode::potential: return "potential";
    case InteractionMode::diffusive: return "diffusive";
    case InteractionMode::graph_threshold: return "graph_threshold";
  }
  return "threshold";
}

InteractionMode interaction_mode_from_string(const std::string& name) {
  if (name == "threshold") return InteractionMode::threshold;
  if (name == "closest") return InteractionMode::closest;
  if (name == "potential") return InteractionMode::potential;
  if (name == "diffusive") return InteractionMode::diffusive;
  if (name == "graph_threshold") return InteractionMode::graph_threshold;
  throw std::invalid_argument("unknown interaction mode '" + name + "'");
}

SampledPotential::SampledPotential(std::vector<double> samples) : samples_(std::move(samples)) {
  if (samples_.size() < kMinSamples) {
    throw std::invalid_argument("potential needs at least " + std::to_string(kMinSamples) +
                                " samples on [-1,1] (grid step <= eps/100)");
  }
  for (double v : samples_) {
    if (!std::isfinite(v) || v < 0.0) throw std::invalid_argument("potential must be finite and nonnegative");
  }
}

SampledPotential SampledPotential::indicator(std::size_t samples) {
  return SampledPotential(std::vector<double>(samples, 1.0));
}

SampledPotential SampledPotential::constant(double value, std::size_t samples) {
  return SampledPotential(std::vector<double>(samples, value));
}

double SampledPotential::operator()(double u) const {
  if (u < -1.0 || u > 1.0) return 0.0;
  const double pos = (u + 1.0) / 2.0 * static_cast<double>(samples_.size() - 1);
  const auto lo = std::min(static_cast<std::size_t>(pos), samples_.size() - 2);
  const double t = pos - static_cast<double>(lo);
  return samples_[lo] * (1.0 - t) + samples_[lo + 1] * t;
}

void InteractionRule::validate(std::size_t particles) const {
  if (gamma < 0 || gamma > 1) throw std::invalid_argument("gamma must lie in [0,1]");
  if (epsilon < 0) throw std::invalid_argument("epsilon must be nonnegative");
  const bool needs_graph = mode == InteractionMode::diffusive || mode == InteractionMode::graph_threshold;
  if (needs_graph && !adjacency) {
    throw std::invalid_argument(to_string(mode) + " mode needs an adjacency list");
  }
  if (mode == InteractionMode::potential && !potential) {
    throw std::invalid_argument("potential mode needs a sampled potential");
  }
  if (adjacency) {
    const auto& adj = *adjacency;
    if (adj.size() != particles) {
      throw std::invalid_argument("adjacency has " + std::to_string(adj.size()) + " lists for " +
                                  std::to_string(particles) + " particles");
    }
    for (std::size_t i = 0; i < adj.size(); ++i) {
      if (mode == InteractionMode::diffusive && adj[i].empty()) {
        throw std::invalid_argument("particle " + std::to_string(i) + " has no neighbors and no self-loop");
      }
      for (std::size_t j : adj[i]) {
        if (j >= particles) throw std::invalid_argument("adjacency index out of range");
        if (j != i && std::find(adj[j].begin(), adj[j].end(), i) == adj[j].end()) {
          throw std::invalid_argument("adjacency is not symmetric: " + std::to_string(i) + " -> " +
                                      std::to_string(j));
        }
      }
    }
  }
}

Eigen::MatrixXd interaction_block_matrix(std::size_t n, double gamma) {
  if (n == 0) throw std::invalid_argument("block size must be positive");
  if (gamma < 0.0 || gamma > 1.0) throw std::invalid_argument("gamma must lie in [0,1]");
  Eigen::MatrixXd g = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n),
                                                (1.0 - gamma) / static_cast<double>(n));
  g.diagonal().array() += gamma;
  return g;
}

}  // namespace cml
