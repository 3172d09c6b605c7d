#pragma once

// Direct solve of the MAD normal equations, one dense system per label:
//   (mu1 S + mu2 (D - W) + mu3 I) y = mu1 S seed + mu3 prior

#include <Eigen/Dense>

#include <random>
#include <vector>

#include "gssl/propagation.hpp"
#include "test_support.hpp"

namespace gssl::testing {

inline std::vector<Distribution> dense_mad_solve(const TrigramGraph& graph, const std::vector<NodeDistributions>& dist,
                                                 const MadConfig& config) {
  const auto n = static_cast<Eigen::Index>(graph.size());
  const std::size_t L = dist.empty() ? 0 : dist[0].prior.size();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index v = 0; v < n; ++v) {
    const auto& d = dist[static_cast<std::size_t>(v)];
    a(v, v) += config.mu3 + (d.seed ? config.mu1 : 0.0);
    for (const auto& e : graph.adjacency[static_cast<std::size_t>(v)]) {
      a(v, v) += config.mu2 * e.weight;
      a(v, e.neighbor) -= config.mu2 * e.weight;
    }
  }
  const auto lu = a.fullPivLu();
  std::vector<Distribution> out(static_cast<std::size_t>(n), Distribution(L));
  for (std::size_t l = 0; l < L; ++l) {
    Eigen::VectorXd b(n);
    for (Eigen::Index v = 0; v < n; ++v) {
      const auto& d = dist[static_cast<std::size_t>(v)];
      b(v) = config.mu3 * d.prior[l] + (d.seed ? config.mu1 * (*d.seed)[l] : 0.0);
    }
    const Eigen::VectorXd y = lu.solve(b);
    for (Eigen::Index v = 0; v < n; ++v) out[static_cast<std::size_t>(v)][l] = y(v);
  }
  return out;
}

// Random graph on n nodes with symmetric positive weights; each pair is
// connected with probability `density`.
inline TrigramGraph random_graph(std::mt19937_64& rng, std::size_t n, double density) {
  TrigramGraph g;
  g.nodes.resize(n);
  g.adjacency.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (uniform_real(rng) >= density) continue;
      const double w = uniform(rng, 0.05, 1.0);
      g.adjacency[i].push_back({static_cast<int>(j), w});
      g.adjacency[j].push_back({static_cast<int>(i), w});
    }
  }
  return g;
}

// Seeds, priors and starting point on every node; a random subset is unseeded.
inline std::vector<NodeDistributions> random_distributions(std::mt19937_64& rng, std::size_t n, std::size_t labels,
                                                           bool allow_unseeded) {
  std::vector<NodeDistributions> d(n);
  const Matrix seeds = random_distribution_rows(rng, n, labels, true);
  const Matrix priors = random_distribution_rows(rng, n, labels, true);
  for (std::size_t v = 0; v < n; ++v) {
    const auto s = seeds.row(v);
    const auto p = priors.row(v);
    if (!allow_unseeded || uniform_real(rng) < 0.7) d[v].seed = Distribution(s.begin(), s.end());
    d[v].prior = Distribution(p.begin(), p.end());
    d[v].current = d[v].seed ? *d[v].seed : d[v].prior;
  }
  return d;
}

}  // namespace gssl::testing
