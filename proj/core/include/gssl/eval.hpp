#pragma once

#include <compare>
#include <functional>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "gssl/corpus.hpp"
#include "gssl/crf.hpp"
#include "gssl/ssl_trainer.hpp"

namespace gssl {

struct SlotValue {
  std::size_t sentence_id = 0;
  std::string slot;
  std::string value;

  friend auto operator<=>(const SlotValue&, const SlotValue&) = default;
};

// Each maximal run of identical non-O labels becomes one slot whose value is
// the run's tokens joined by single spaces.
std::vector<SlotValue> extract_slots(std::span<const Token> tokens, std::span<const LabelId> labels,
                                     const LabelAlphabet& alphabet, std::size_t sentence_id);

struct PrfScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
};

PrfScore make_score(std::size_t tp, std::size_t fp, std::size_t fn);

// Multiset matching on exact (sentence, slot, value) triples.
PrfScore score(std::span<const SlotValue> predicted, std::span<const SlotValue> gold);

// Viterbi-decodes every (labeled) test sentence and scores the slots.
PrfScore evaluate_model(const CrfModel& model, std::span<const AlignedSentence> test);

enum class Method { kSupervised, kSelfTrain, kSsl };

const char* to_string(Method method);
Method parse_method(std::string_view name);  // supervised | selftrain | ssl

struct ExperimentConfig {
  std::vector<double> fractions{0.1, 0.2, 0.3};
  int repeats = 10;
  std::vector<Method> methods{Method::kSupervised, Method::kSelfTrain, Method::kSsl};
  SslConfig ssl;
  std::uint64_t seed = 1;
  double test_fraction = 0.2;

  void validate() const;
};

struct RunRecord {
  Method method = Method::kSupervised;
  double fraction = 0.0;
  int repeat = 0;
  PrfScore score;
};

struct SummaryRecord {
  Method method = Method::kSupervised;
  double fraction = 0.0;
  int runs = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct ExperimentReport {
  std::vector<RunRecord> runs;
  std::vector<SummaryRecord> summary;

  const SummaryRecord* find(Method method, double fraction) const;
};

struct TrainTestSplit {
  Corpus train;
  Corpus test;
};

// Seed-stable hold-out of `test_fraction` of the corpus.
TrainTestSplit hold_out_test(std::span<const AlignedSentence> corpus, double test_fraction,
                             std::uint64_t seed);

using RunCallback = std::function<void(const RunRecord&)>;

// For every (fraction, repeat) draws a deterministic labeled subset of the
// training pool, trains each method and scores it on the held-out test set.
ExperimentReport run_experiment(std::span<const AlignedSentence> corpus, const LabelAlphabet& alphabet,
                                const Lexicon& lexicon, const ExperimentConfig& config,
                                const RunCallback& on_run = {});

// Tab-separated table: one "run" row per run, one "mean" row per
// (method, fraction); numbers with four decimals.
void write_report(std::ostream& out, const ExperimentReport& report);

}  // namespace gssl
