#include "gssl/ssl_trainer.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>

#include "gssl/errors.hpp"

namespace gssl {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

Matrix transition_matrix(const CrfModel& model) {
  const std::size_t L = model.num_labels();
  Matrix m(L, L);
  for (std::size_t a = 0; a < L; ++a)
    for (std::size_t b = 0; b < L; ++b)
      m(a, b) = model.weights[model.transition_id(static_cast<LabelId>(a), static_cast<LabelId>(b))];
  return m;
}

double changed_fraction(const std::vector<std::vector<LabelId>>& before,
                        const std::vector<std::vector<LabelId>>& after) {
  std::size_t total = 0, changed = 0;
  for (std::size_t i = 0; i < after.size(); ++i) {
    total += after[i].size();
    for (std::size_t t = 0; t < after[i].size(); ++t) {
      if (before.empty() || before[i][t] != after[i][t]) ++changed;
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(changed) / static_cast<double>(total);
}

void check_inputs(std::span<const AlignedSentence> labeled, std::span<const AlignedSentence> unlabeled) {
  if (labeled.empty()) throw ContractError("at least one labeled sentence is required");
  for (const auto& s : labeled)
    if (!s.labeled()) throw ContractError("labeled partition contains an unlabeled sentence");
  for (const auto& s : unlabeled)
    if (s.labeled()) throw ContractError("unlabeled partition contains labels");
}

// Shared outer loop of graph SSL and self-training. `label_unlabeled`
// produces D_u^v under the current model.
template <typename Labeler>
SslResult outer_loop(std::span<const AlignedSentence> labeled, std::span<const AlignedSentence> unlabeled,
                     const LabelAlphabet& alphabet, const SslConfig& config, const RoundCallback& on_round,
                     const CrfModel* initial, Labeler&& label_unlabeled) {
  SslResult result{initial ? *initial : train_supervised(labeled, alphabet, config.gamma, config.optimizer),
                   {}, {}, false};
  if (unlabeled.empty()) return result;

  std::vector<AlignedSentence> decoded_sentences(unlabeled.begin(), unlabeled.end());
  for (int round = 1; round <= config.max_outer_iterations; ++round) {
    RoundReport report;
    report.round = round;
    auto decoded = label_unlabeled(result.model, report);
    for (const auto& labels : decoded) {
      for (LabelId y : labels) {
        if (!alphabet.contains(y)) throw ContractError("decoded label outside the alphabet");
      }
    }
    report.changed_fraction = changed_fraction(result.decoded, decoded);
    const bool converged = round > 1 && report.changed_fraction < config.convergence_threshold;
    result.decoded = std::move(decoded);

    if (!converged) {
      const auto start = Clock::now();
      for (std::size_t i = 0; i < unlabeled.size(); ++i) decoded_sentences[i].labels = result.decoded[i];
      TrainingObjective objective{labeled, decoded_sentences, config.gamma, config.eta};
      auto trained = minimize(objective, std::move(result.model), config.optimizer);
      result.model = std::move(trained.model);
      report.objective = trained.summary.value;
      report.optimizer_iterations = trained.summary.iterations;
      report.optimizer_stop = trained.summary.reason;
      report.retrained = true;
      report.seconds_retrain = seconds_since(start);
    }
    result.rounds.push_back(report);
    if (on_round) on_round(report);
    if (converged) break;
  }
  return result;
}

}  // namespace

void SslConfig::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in [0, 1]");
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw ConfigError("eta must be >= 0");
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw ConfigError("gamma must be >= 0");
  if (knn_k < 1) throw ConfigError("knn_k must be >= 1");
  if (max_outer_iterations < 1) throw ConfigError("max_outer_iterations must be >= 1");
  if (!(convergence_threshold >= 0.0)) throw ConfigError("convergence_threshold must be >= 0");
  mad.validate();
  optimizer.validate();
}

std::string format_round(const RoundReport& r) {
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "round=%d objective=%.10g changed=%.6f lbfgs_iterations=%d lbfgs_stop=%s "
                "marginals_s=%.3f propagation_s=%.3f decode_s=%.3f retrain_s=%.3f",
                r.round, r.objective, r.changed_fraction, r.optimizer_iterations,
                r.retrained ? to_string(r.optimizer_stop) : "skipped", r.seconds_marginals,
                r.seconds_propagation, r.seconds_decode, r.seconds_retrain);
  return buf;
}

CrfModel train_supervised(std::span<const AlignedSentence> labeled, const LabelAlphabet& alphabet,
                          double gamma, const OptimizerConfig& config) {
  if (labeled.empty()) throw ContractError("train_supervised needs labeled data");
  TrainingObjective objective{labeled, {}, gamma, 0.0};
  return minimize(objective, make_model(alphabet), config).model;
}

std::vector<std::optional<Distribution>> compute_empirical_distribution(
    std::span<const AlignedSentence> corpus, const TrigramGraph& graph, std::size_t num_labels) {
  std::vector<std::optional<Distribution>> out(graph.size());
  for (std::size_t v = 0; v < graph.size(); ++v) {
    Distribution counts(num_labels, 0.0);
    double total = 0.0;
    for (const auto& occ : graph.nodes[v].occurrences) {
      const auto& sentence = corpus[occ.sentence];
      if (!sentence.labeled()) continue;
      counts[static_cast<std::size_t>((*sentence.labels)[occ.center])] += 1.0;
      total += 1.0;
    }
    if (total == 0.0) continue;
    for (double& c : counts) c /= total;
    out[v] = std::move(counts);
  }
  return out;
}

std::vector<Distribution> average_marginals(std::span<const MarginalTable> marginals,
                                            const TrigramGraph& graph,
                                            std::span<const std::optional<Distribution>> empirical,
                                            std::size_t num_labels) {
  std::vector<Distribution> q(graph.size());
  for (std::size_t v = 0; v < graph.size(); ++v) {
    Distribution sum(num_labels, 0.0);
    double count = 0.0;
    for (const auto& occ : graph.nodes[v].occurrences) {
      if (graph.sentence_labeled[occ.sentence]) continue;
      const auto row = marginals[occ.sentence].node.row(occ.center);
      for (std::size_t y = 0; y < num_labels; ++y) sum[y] += row[y];
      count += 1.0;
    }
    if (count > 0.0) {
      for (double& s : sum) s /= count;
      q[v] = std::move(sum);
    } else if (v < empirical.size() && empirical[v]) {
      q[v] = *empirical[v];
    } else {
      throw ContractError("node " + std::to_string(v) + " has neither unlabeled occurrences nor an empirical distribution");
    }
  }
  return q;
}

Distribution interpolate(std::span<const double> p, std::span<const double> q, double alpha) {
  if (p.size() != q.size()) throw ContractError("interpolate: size mismatch");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ContractError("interpolate: alpha outside [0, 1]");
  Distribution out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) out[i] = alpha * p[i] + (1.0 - alpha) * q[i];
  return out;
}

Matrix interpolate_sentence(const MarginalTable& marginals, const TrigramGraph& graph,
                            std::size_t sentence_id, std::span<const Distribution> propagated,
                            double alpha) {
  Matrix out = marginals.node;
  for (std::size_t t = 0; t < out.rows(); ++t) {
    const int node = graph.node_at(sentence_id, t);
    if (node < 0) continue;
    const auto mixed = interpolate(marginals.node.row(t), propagated[static_cast<std::size_t>(node)], alpha);
    std::copy(mixed.begin(), mixed.end(), out.row(t).begin());
  }
  return out;
}

SslResult run_ssl(std::span<const AlignedSentence> labeled, std::span<const AlignedSentence> unlabeled,
                  const LabelAlphabet& alphabet, const Lexicon& lexicon, const SslConfig& config,
                  const RoundCallback& on_round, const CrfModel* initial) {
  config.validate();
  check_inputs(labeled, unlabeled);
  if (unlabeled.empty()) {
    return SslResult{initial ? *initial : train_supervised(labeled, alphabet, config.gamma, config.optimizer),
                     {}, {}, false};
  }

  std::vector<AlignedSentence> corpus(labeled.begin(), labeled.end());
  corpus.insert(corpus.end(), unlabeled.begin(), unlabeled.end());
  const auto graph = build_graph(corpus, lexicon, config.knn_k);
  if (graph.size() == 0) {
    std::fprintf(stderr, "warning: no dummy-free trigrams; returning the supervised model\n");
    SslResult result{initial ? *initial : train_supervised(labeled, alphabet, config.gamma, config.optimizer),
                     {}, {}, true};
    return result;
  }

  const std::size_t L = alphabet.size();
  const std::size_t offset = labeled.size();
  const auto empirical = compute_empirical_distribution(corpus, graph, L);
  const auto uniform = uniform_distribution(L);

  auto labeler = [&](const CrfModel& model, RoundReport& report) {
    auto start = Clock::now();
    std::vector<MarginalTable> marginals(corpus.size());
    for (std::size_t i = 0; i < unlabeled.size(); ++i) {
      marginals[offset + i] = compute_marginals(unlabeled[i], model);
    }
    report.seconds_marginals = seconds_since(start);

    start = Clock::now();
    const auto q = average_marginals(marginals, graph, empirical, L);
    auto distributions = seed_graph(graph, q, empirical, uniform);
    const auto q_hat = propagate(graph, distributions, config.mad);
    report.seconds_propagation = seconds_since(start);

    start = Clock::now();
    const auto transitions = transition_matrix(model);
    std::vector<std::vector<LabelId>> decoded(unlabeled.size());
    for (std::size_t i = 0; i < unlabeled.size(); ++i) {
      const auto mixed = interpolate_sentence(marginals[offset + i], graph, offset + i, q_hat, config.alpha);
      decoded[i] = constrained_viterbi(mixed, transitions);
    }
    report.seconds_decode = seconds_since(start);
    return decoded;
  };
  return outer_loop(labeled, unlabeled, alphabet, config, on_round, initial, labeler);
}

SslResult self_train(std::span<const AlignedSentence> labeled, std::span<const AlignedSentence> unlabeled,
                     const LabelAlphabet& alphabet, const SslConfig& config,
                     const RoundCallback& on_round, const CrfModel* initial) {
  config.validate();
  check_inputs(labeled, unlabeled);
  auto labeler = [&](const CrfModel& model, RoundReport& report) {
    const auto start = Clock::now();
    std::vector<std::vector<LabelId>> decoded(unlabeled.size());
    for (std::size_t i = 0; i < unlabeled.size(); ++i) decoded[i] = decode(unlabeled[i], model);
    report.seconds_decode = seconds_since(start);
    return decoded;
  };
  return outer_loop(labeled, unlabeled, alphabet, config, on_round, initial, labeler);
}

}  // namespace gssl
