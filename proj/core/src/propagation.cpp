#include "gssl/propagation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "gssl/errors.hpp"

namespace gssl {

namespace {

void check_distribution(const Distribution& d, std::size_t size, const char* what, std::size_t node) {
  if (d.size() != size) {
    throw ContractError(std::string(what) + " of node " + std::to_string(node) + " has wrong size");
  }
  double sum = 0.0;
  for (double x : d) {
    if (!(x >= 0.0) || !std::isfinite(x)) {
      throw ContractError(std::string(what) + " of node " + std::to_string(node) + " has an invalid entry");
    }
    sum += x;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ContractError(std::string(what) + " of node " + std::to_string(node) + " does not sum to 1");
  }
}

}  // namespace

void MadConfig::validate() const {
  if (!(mu1 >= 0.0 && mu2 >= 0.0 && mu3 >= 0.0)) throw ConfigError("MAD weights must be >= 0");
  if (!(mu1 + mu3 > 0.0)) throw ConfigError("MAD requires mu1 + mu3 > 0");
  if (max_sweeps < 1) throw ConfigError("MAD max_sweeps must be >= 1");
  if (!(convergence_eps > 0.0)) throw ConfigError("MAD convergence_eps must be positive");
}

std::string format_sweep(const SweepRecord& r) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "sweep=%d objective=%.10g max_delta=%.6g", r.sweep, r.objective, r.max_delta);
  return buf;
}

Distribution uniform_distribution(std::size_t size) {
  return Distribution(size, size == 0 ? 0.0 : 1.0 / static_cast<double>(size));
}

std::vector<NodeDistributions> seed_graph(const TrigramGraph& graph,
                                          std::span<const Distribution> averaged_marginals,
                                          std::span<const std::optional<Distribution>> empirical,
                                          const Distribution& uniform_prior) {
  const std::size_t n = graph.size();
  if (averaged_marginals.size() != n) throw ContractError("seed_graph: one q vector per node required");
  std::vector<NodeDistributions> out(n);
  for (std::size_t v = 0; v < n; ++v) {
    if (averaged_marginals[v].empty()) throw ContractError("seed_graph: node " + std::to_string(v) + " has no q");
    out[v].seed = averaged_marginals[v];
    out[v].current = averaged_marginals[v];
    if (graph.nodes[v].is_labeled) {
      if (v >= empirical.size() || !empirical[v]) {
        throw ContractError("seed_graph: labeled node " + std::to_string(v) + " has no empirical distribution");
      }
      out[v].prior = *empirical[v];
    } else {
      out[v].prior = uniform_prior;
    }
  }
  return out;
}

double objective_value(const TrigramGraph& graph, std::span<const NodeDistributions> dist,
                       const MadConfig& config) {
  double seed_term = 0.0, smooth_term = 0.0, prior_term = 0.0;
  for (std::size_t v = 0; v < dist.size(); ++v) {
    const auto& d = dist[v];
    for (std::size_t l = 0; l < d.current.size(); ++l) {
      if (d.seed) {
        const double r = (*d.seed)[l] - d.current[l];
        seed_term += r * r;
      }
      const double p = d.current[l] - d.prior[l];
      prior_term += p * p;
    }
    for (const auto& e : graph.adjacency[v]) {
      if (static_cast<std::size_t>(e.neighbor) <= v) continue;  // each undirected edge once
      const auto& u = dist[static_cast<std::size_t>(e.neighbor)].current;
      for (std::size_t l = 0; l < d.current.size(); ++l) {
        const double diff = d.current[l] - u[l];
        smooth_term += e.weight * diff * diff;
      }
    }
  }
  return config.mu1 * seed_term + config.mu2 * smooth_term + config.mu3 * prior_term;
}

std::vector<Distribution> propagate(const TrigramGraph& graph, std::vector<NodeDistributions>& dist,
                                    const MadConfig& config, const SweepCallback& on_sweep) {
  config.validate();
  const std::size_t n = graph.size();
  if (dist.size() != n) throw ContractError("propagate: one distribution record per node required");
  const std::size_t L = n == 0 ? 0 : dist[0].prior.size();
  for (std::size_t v = 0; v < n; ++v) {
    if (dist[v].seed) check_distribution(*dist[v].seed, L, "seed", v);
    check_distribution(dist[v].prior, L, "prior", v);
    if (dist[v].current.size() != L) throw ContractError("current distribution has wrong size");
  }

  std::vector<double> degree(n, 0.0);
  for (std::size_t v = 0; v < n; ++v)
    for (const auto& e : graph.adjacency[v]) degree[v] += e.weight;

  std::vector<Distribution> next(n, Distribution(L));
  for (int sweep = 1; sweep <= config.max_sweeps; ++sweep) {
    double max_delta = 0.0;
    for (std::size_t v = 0; v < n; ++v) {
      const double s = dist[v].seed ? 1.0 : 0.0;
      const double denom = config.mu1 * s + config.mu2 * degree[v] + config.mu3;
      for (std::size_t l = 0; l < L; ++l) {
        double num = config.mu3 * dist[v].prior[l];
        if (dist[v].seed) num += config.mu1 * (*dist[v].seed)[l];
        double neighbors = 0.0;
        for (const auto& e : graph.adjacency[v]) {
          neighbors += e.weight * dist[static_cast<std::size_t>(e.neighbor)].current[l];
        }
        num += config.mu2 * neighbors;
        const double value = denom > 0.0 ? num / denom : 0.0;
        if (!std::isfinite(value)) {
          throw NumericalError("MAD diverged at sweep " + std::to_string(sweep));
        }
        next[v][l] = value;
        max_delta = std::max(max_delta, std::abs(value - dist[v].current[l]));
      }
    }
    for (std::size_t v = 0; v < n; ++v) dist[v].current.swap(next[v]);
    if (on_sweep) on_sweep({sweep, objective_value(graph, dist, config), max_delta});
    if (max_delta < config.convergence_eps) break;
  }

  std::vector<Distribution> out(n);
  for (std::size_t v = 0; v < n; ++v) {
    double sum = 0.0;
    for (double x : dist[v].current) sum += std::max(x, 0.0);
    if (sum > 0.0) {
      out[v].resize(L);
      for (std::size_t l = 0; l < L; ++l) out[v][l] = std::max(dist[v].current[l], 0.0) / sum;
    } else {
      out[v] = uniform_distribution(L);
    }
  }
  return out;
}

}  // namespace gssl
