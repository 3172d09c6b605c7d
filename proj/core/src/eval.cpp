#include "gssl/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <ostream>

#include "gssl/errors.hpp"

namespace gssl {

std::vector<SlotValue> extract_slots(std::span<const Token> tokens, std::span<const LabelId> labels,
                                     const LabelAlphabet& alphabet, std::size_t sentence_id) {
  if (tokens.size() != labels.size()) throw ContractError("extract_slots: token/label length mismatch");
  std::vector<SlotValue> out;
  std::size_t t = 0;
  while (t < labels.size()) {
    if (labels[t] == kNullLabel) {
      ++t;
      continue;
    }
    std::size_t end = t + 1;
    while (end < labels.size() && labels[end] == labels[t]) ++end;
    SlotValue slot{sentence_id, alphabet.name(labels[t]), tokens[t].surface};
    for (std::size_t i = t + 1; i < end; ++i) slot.value += ' ' + tokens[i].surface;
    out.push_back(std::move(slot));
    t = end;
  }
  return out;
}

PrfScore make_score(std::size_t tp, std::size_t fp, std::size_t fn) {
  PrfScore s;
  s.tp = tp;
  s.fp = fp;
  s.fn = fn;
  s.precision = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
  s.recall = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
  s.f1 = s.precision + s.recall == 0.0 ? 0.0 : 2.0 * s.precision * s.recall / (s.precision + s.recall);
  return s;
}

PrfScore score(std::span<const SlotValue> predicted, std::span<const SlotValue> gold) {
  std::vector<SlotValue> p(predicted.begin(), predicted.end());
  std::vector<SlotValue> g(gold.begin(), gold.end());
  std::sort(p.begin(), p.end());
  std::sort(g.begin(), g.end());
  std::vector<SlotValue> common;
  std::set_intersection(p.begin(), p.end(), g.begin(), g.end(), std::back_inserter(common));
  const std::size_t tp = common.size();
  return make_score(tp, p.size() - tp, g.size() - tp);
}

PrfScore evaluate_model(const CrfModel& model, std::span<const AlignedSentence> test) {
  std::vector<SlotValue> predicted, gold;
  for (std::size_t i = 0; i < test.size(); ++i) {
    const auto& sentence = test[i];
    if (!sentence.labeled()) throw ContractError("test sentence " + std::to_string(i) + " has no gold labels");
    const auto path = decode(sentence, model);
    for (auto& s : extract_slots(sentence.tokens, path, model.alphabet, i)) predicted.push_back(std::move(s));
    for (auto& s : extract_slots(sentence.tokens, *sentence.labels, model.alphabet, i)) gold.push_back(std::move(s));
  }
  return score(predicted, gold);
}

const char* to_string(Method method) {
  switch (method) {
    case Method::kSupervised: return "supervised";
    case Method::kSelfTrain: return "selftrain";
    case Method::kSsl: return "ssl";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  if (name == "supervised") return Method::kSupervised;
  if (name == "selftrain" || name == "self_train") return Method::kSelfTrain;
  if (name == "ssl") return Method::kSsl;
  throw ConfigError("unknown method '" + std::string(name) + "'");
}

void ExperimentConfig::validate() const {
  if (fractions.empty()) throw ConfigError("at least one labeled fraction is required");
  for (double f : fractions) {
    if (!(f > 0.0 && f <= 1.0)) throw ConfigError("labeled fractions must lie in (0, 1]");
  }
  if (repeats < 1) throw ConfigError("repeats must be >= 1");
  if (methods.empty()) throw ConfigError("at least one method is required");
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw ConfigError("test_fraction must lie in (0, 1)");
  ssl.validate();
}

const SummaryRecord* ExperimentReport::find(Method method, double fraction) const {
  for (const auto& s : summary) {
    if (s.method == method && s.fraction == fraction) return &s;
  }
  return nullptr;
}

TrainTestSplit hold_out_test(std::span<const AlignedSentence> corpus, double test_fraction,
                             std::uint64_t seed) {
  // Stream id kept apart from the per-repeat streams used for labeled subsets.
  constexpr std::uint64_t kTestStream = 0xFFFFFFFFULL;
  auto split = split_corpus(corpus, SplitSpec{1.0 - test_fraction, seed, kTestStream});
  TrainTestSplit out{std::move(split.labeled), {}};
  for (std::size_t i = 0; i < split.unlabeled.size(); ++i) {
    AlignedSentence s = std::move(split.unlabeled[i]);
    s.labels = std::move(split.unlabeled_gold[i]);
    out.test.push_back(std::move(s));
  }
  return out;
}

ExperimentReport run_experiment(std::span<const AlignedSentence> corpus, const LabelAlphabet& alphabet,
                                const Lexicon& lexicon, const ExperimentConfig& config,
                                const RunCallback& on_run) {
  config.validate();
  const auto data = hold_out_test(corpus, config.test_fraction, config.seed);
  if (data.test.empty() || data.train.empty()) throw DataError("corpus too small for a train/test split");

  ExperimentReport report;
  for (double fraction : config.fractions) {
    for (int repeat = 0; repeat < config.repeats; ++repeat) {
      const auto split = split_corpus(data.train, SplitSpec{fraction, config.seed, static_cast<std::uint64_t>(repeat)});
      if (split.labeled.empty()) throw DataError("labeled fraction selects no sentences");
      const auto supervised = train_supervised(split.labeled, alphabet, config.ssl.gamma, config.ssl.optimizer);
      for (Method method : config.methods) {
        RunRecord run{method, fraction, repeat, {}};
        switch (method) {
          case Method::kSupervised:
            run.score = evaluate_model(supervised, data.test);
            break;
          case Method::kSelfTrain:
            run.score = evaluate_model(
                self_train(split.labeled, split.unlabeled, alphabet, config.ssl, {}, &supervised).model, data.test);
            break;
          case Method::kSsl:
            run.score = evaluate_model(
                run_ssl(split.labeled, split.unlabeled, alphabet, lexicon, config.ssl, {}, &supervised).model,
                data.test);
            break;
        }
        report.runs.push_back(run);
        if (on_run) on_run(run);
      }
    }
  }

  for (Method method : config.methods) {
    for (double fraction : config.fractions) {
      SummaryRecord s{method, fraction, 0, 0.0, 0.0, 0.0};
      for (const auto& run : report.runs) {
        if (run.method != method || run.fraction != fraction) continue;
        ++s.runs;
        s.precision += run.score.precision;
        s.recall += run.score.recall;
        s.f1 += run.score.f1;
      }
      const auto n = static_cast<double>(s.runs);
      s.precision /= n;
      s.recall /= n;
      s.f1 /= n;
      report.summary.push_back(s);
    }
  }
  return report;
}

void write_report(std::ostream& out, const ExperimentReport& report) {
  char buf[256];
  out << "kind\tmethod\tfraction\trepeat\tprecision\trecall\tf1\n";
  for (const auto& r : report.runs) {
    std::snprintf(buf, sizeof(buf), "run\t%s\t%.4f\t%d\t%.4f\t%.4f\t%.4f\n", to_string(r.method), r.fraction,
                  r.repeat, r.score.precision, r.score.recall, r.score.f1);
    out << buf;
  }
  for (const auto& s : report.summary) {
    std::snprintf(buf, sizeof(buf), "mean\t%s\t%.4f\t-\t%.4f\t%.4f\t%.4f\n", to_string(s.method), s.fraction,
                  s.precision, s.recall, s.f1);
    out << buf;
  }
}

}  // namespace gssl
