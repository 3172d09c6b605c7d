#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gssl/corpus.hpp"
#include "gssl/crf.hpp"
#include "gssl/graph.hpp"
#include "gssl/optimizer.hpp"
#include "gssl/propagation.hpp"

namespace gssl {

struct SslConfig {
  double alpha = 0.1;   // weight of the CRF marginal in the interpolation
  double eta = 0.1;     // weight of the decoded unlabeled data when retraining
  double gamma = 0.01;  // L2 strength
  MadConfig mad;
  int knn_k = kDefaultNeighbors;
  int max_outer_iterations = 10;
  // Stop once fewer than this fraction of unlabeled tokens change label.
  double convergence_threshold = 0.001;
  OptimizerConfig optimizer;

  void validate() const;
};

struct RoundReport {
  int round = 0;
  double objective = 0.0;
  double changed_fraction = 0.0;
  int optimizer_iterations = 0;
  StopReason optimizer_stop = StopReason::kConverged;
  bool retrained = false;
  double seconds_marginals = 0.0;
  double seconds_propagation = 0.0;
  double seconds_decode = 0.0;
  double seconds_retrain = 0.0;
};

// "round=2 objective=... changed=... marginals_s=... propagation_s=... decode_s=... retrain_s=..."
std::string format_round(const RoundReport& report);

using RoundCallback = std::function<void(const RoundReport&)>;

struct SslResult {
  CrfModel model;
  std::vector<RoundReport> rounds;
  std::vector<std::vector<LabelId>> decoded;  // last decoded labels of the unlabeled data
  bool graph_fallback = false;                // no trigram nodes; supervised model returned
};

CrfModel train_supervised(std::span<const AlignedSentence> labeled, const LabelAlphabet& alphabet,
                          double gamma, const OptimizerConfig& config);

// For every labeled node, the relative frequency of gold center labels over
// its occurrences in labeled sentences. Unlabeled nodes get nullopt.
std::vector<std::optional<Distribution>> compute_empirical_distribution(
    std::span<const AlignedSentence> corpus, const TrigramGraph& graph, std::size_t num_labels);

// Mean of the center-position marginals over each node's unlabeled
// occurrences; nodes seen only in labeled sentences take their empirical
// distribution. `marginals` is indexed by corpus sentence id; entries for
// labeled sentences are ignored.
std::vector<Distribution> average_marginals(std::span<const MarginalTable> marginals,
                                            const TrigramGraph& graph,
                                            std::span<const std::optional<Distribution>> empirical,
                                            std::size_t num_labels);

// alpha * p + (1 - alpha) * q_hat.
Distribution interpolate(std::span<const double> crf_marginal, std::span<const double> propagated,
                         double alpha);

// Interpolated marginals of one sentence; positions without a centered
// node keep the CRF marginal.
Matrix interpolate_sentence(const MarginalTable& marginals, const TrigramGraph& graph,
                            std::size_t sentence_id, std::span<const Distribution> propagated,
                            double alpha);

// Graph-based semi-supervised training. `initial`, when given, must be the
// result of train_supervised on `labeled` and is used instead of retraining.
SslResult run_ssl(std::span<const AlignedSentence> labeled, std::span<const AlignedSentence> unlabeled,
                  const LabelAlphabet& alphabet, const Lexicon& lexicon, const SslConfig& config,
                  const RoundCallback& on_round = {}, const CrfModel* initial = nullptr);

// Same loop with plain Viterbi self-labeling and no graph.
SslResult self_train(std::span<const AlignedSentence> labeled, std::span<const AlignedSentence> unlabeled,
                     const LabelAlphabet& alphabet, const SslConfig& config,
                     const RoundCallback& on_round = {}, const CrfModel* initial = nullptr);

}  // namespace gssl
