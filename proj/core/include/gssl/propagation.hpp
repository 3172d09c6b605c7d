#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gssl/graph.hpp"

namespace gssl {

using Distribution = std::vector<double>;

struct NodeDistributions {
  std::optional<Distribution> seed;  // Y_v
  Distribution prior;                // R_v
  Distribution current;              // Yhat_v, unnormalized during iteration
};

struct MadConfig {
  double mu1 = 1.0;   // seed fidelity
  double mu2 = 0.01;  // graph smoothness
  double mu3 = 0.01;  // prior regularization
  int max_sweeps = 30;
  double convergence_eps = 1e-4;  // max |change| of any entry in one sweep

  void validate() const;
};

struct SweepRecord {
  int sweep = 0;
  double objective = 0.0;
  double max_delta = 0.0;
};

std::string format_sweep(const SweepRecord& record);

using SweepCallback = std::function<void(const SweepRecord&)>;

// Every node gets seed q; labeled nodes take prior r, others `uniform_prior`.
// `empirical` is indexed by node id and must be set for every labeled node.
std::vector<NodeDistributions> seed_graph(const TrigramGraph& graph,
                                          std::span<const Distribution> averaged_marginals,
                                          std::span<const std::optional<Distribution>> empirical,
                                          const Distribution& uniform_prior);

// Jacobi sweeps on the stationarity conditions of the MAD objective
//   sum_l mu1 (Y_l - Yhat_l)' S (Y_l - Yhat_l) + mu2 Yhat_l' L Yhat_l + mu3 |Yhat_l - R_l|^2
// until no entry moves by more than convergence_eps or max_sweeps is hit.
// `distributions[v].current` holds the unnormalized iterate on return.
// Returns the read-out: each node normalized, uniform if all-zero.
std::vector<Distribution> propagate(const TrigramGraph& graph,
                                    std::vector<NodeDistributions>& distributions,
                                    const MadConfig& config, const SweepCallback& on_sweep = {});

// The MAD objective at the current iterate; L is the unnormalized graph
// Laplacian and S the seed indicator.
double objective_value(const TrigramGraph& graph, std::span<const NodeDistributions> distributions,
                       const MadConfig& config);

Distribution uniform_distribution(std::size_t size);

}  // namespace gssl
