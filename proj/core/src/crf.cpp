#include "gssl/crf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gssl/errors.hpp"

namespace gssl {

namespace {

const char* kind_prefix(TemplateKind kind) {
  switch (kind) {
    case TemplateKind::kUnigram: return "U";
    case TemplateKind::kBigram: return "B";
    case TemplateKind::kIsClass: return "C";
    case TemplateKind::kIsPreposition: return "P";
    case TemplateKind::kLabelBigram: return "T";
  }
  return "?";
}

double log_sum_exp(std::span<const double> values) {
  double hi = -std::numeric_limits<double>::infinity();
  for (double v : values) hi = std::max(hi, v);
  if (!std::isfinite(hi)) return hi;
  double sum = 0.0;
  for (double v : values) sum += std::exp(v - hi);
  return hi + std::log(sum);
}

// Node marginals, summed pair marginals and log Z for one sentence.
struct Posteriors {
  Matrix node;
  Matrix pair_sum;  // sum over t of p(y_{t-1} = a, y_t = b)
  double log_z = 0.0;
};

Posteriors log_space_posteriors(const Matrix& node, const Matrix& trans, bool want_pairs) {
  const std::size_t T = node.rows();
  const std::size_t L = node.cols();
  Matrix alpha(T, L), beta(T, L);
  std::vector<double> buf(L);
  for (std::size_t y = 0; y < L; ++y) alpha(0, y) = node(0, y);
  for (std::size_t t = 1; t < T; ++t) {
    for (std::size_t y = 0; y < L; ++y) {
      for (std::size_t a = 0; a < L; ++a) buf[a] = alpha(t - 1, a) + trans(a, y);
      alpha(t, y) = node(t, y) + log_sum_exp(buf);
    }
  }
  for (std::size_t y = 0; y < L; ++y) beta(T - 1, y) = 0.0;
  for (std::size_t t = T - 1; t-- > 0;) {
    for (std::size_t a = 0; a < L; ++a) {
      for (std::size_t b = 0; b < L; ++b) buf[b] = trans(a, b) + node(t + 1, b) + beta(t + 1, b);
      beta(t, a) = log_sum_exp(buf);
    }
  }
  Posteriors post;
  post.log_z = log_sum_exp(alpha.row(T - 1));
  post.node = Matrix(T, L);
  for (std::size_t t = 0; t < T; ++t) {
    double sum = 0.0;
    for (std::size_t y = 0; y < L; ++y) {
      post.node(t, y) = std::exp(alpha(t, y) + beta(t, y) - post.log_z);
      sum += post.node(t, y);
    }
    for (std::size_t y = 0; y < L; ++y) post.node(t, y) /= sum;
  }
  if (want_pairs) {
    post.pair_sum = Matrix(L, L);
    for (std::size_t t = 1; t < T; ++t) {
      for (std::size_t a = 0; a < L; ++a) {
        for (std::size_t b = 0; b < L; ++b) {
          post.pair_sum(a, b) += std::exp(alpha(t - 1, a) + trans(a, b) + node(t, b) +
                                          beta(t, b) - post.log_z);
        }
      }
    }
  }
  return post;
}

// Forward-backward in probability space with per-position rescaling. Falls
// back to the log-space recursion if a scale factor underflows.
Posteriors posteriors(const Matrix& node, const Matrix& trans, bool want_pairs) {
  const std::size_t T = node.rows();
  const std::size_t L = node.cols();
  if (T == 0) return Posteriors{Matrix(0, L), Matrix(L, L), 0.0};

  double trans_max = -std::numeric_limits<double>::infinity();
  for (double v : trans.data()) trans_max = std::max(trans_max, v);
  Matrix m(L, L);
  for (std::size_t a = 0; a < L; ++a)
    for (std::size_t b = 0; b < L; ++b) m(a, b) = std::exp(trans(a, b) - trans_max);

  Matrix psi(T, L);
  double log_z = (T > 1) ? static_cast<double>(T - 1) * trans_max : 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t y = 0; y < L; ++y) hi = std::max(hi, node(t, y));
    for (std::size_t y = 0; y < L; ++y) psi(t, y) = std::exp(node(t, y) - hi);
    log_z += hi;
  }

  Matrix alpha(T, L), beta(T, L);
  std::vector<double> scale(T);
  bool ok = true;
  for (std::size_t t = 0; t < T && ok; ++t) {
    double sum = 0.0;
    for (std::size_t y = 0; y < L; ++y) {
      double v;
      if (t == 0) {
        v = psi(0, y);
      } else {
        v = 0.0;
        for (std::size_t a = 0; a < L; ++a) v += alpha(t - 1, a) * m(a, y);
        v *= psi(t, y);
      }
      alpha(t, y) = v;
      sum += v;
    }
    if (!(sum > std::numeric_limits<double>::min()) || !std::isfinite(sum)) {
      ok = false;
      break;
    }
    scale[t] = sum;
    for (std::size_t y = 0; y < L; ++y) alpha(t, y) /= sum;
    log_z += std::log(sum);
  }
  if (!ok) return log_space_posteriors(node, trans, want_pairs);

  for (std::size_t y = 0; y < L; ++y) beta(T - 1, y) = 1.0;
  std::vector<double> tmp(L);
  for (std::size_t t = T - 1; t-- > 0;) {
    for (std::size_t b = 0; b < L; ++b) tmp[b] = psi(t + 1, b) * beta(t + 1, b);
    for (std::size_t a = 0; a < L; ++a) {
      double v = 0.0;
      for (std::size_t b = 0; b < L; ++b) v += m(a, b) * tmp[b];
      beta(t, a) = v / scale[t + 1];
    }
  }

  Posteriors post;
  post.log_z = log_z;
  post.node = Matrix(T, L);
  for (std::size_t t = 0; t < T; ++t) {
    double sum = 0.0;
    for (std::size_t y = 0; y < L; ++y) {
      post.node(t, y) = alpha(t, y) * beta(t, y);
      sum += post.node(t, y);
    }
    if (!(sum > 0.0) || !std::isfinite(sum)) return log_space_posteriors(node, trans, want_pairs);
    for (std::size_t y = 0; y < L; ++y) post.node(t, y) /= sum;
  }
  if (want_pairs) {
    post.pair_sum = Matrix(L, L);
    for (std::size_t t = 1; t < T; ++t) {
      for (std::size_t b = 0; b < L; ++b) tmp[b] = psi(t, b) * beta(t, b) / scale[t];
      for (std::size_t a = 0; a < L; ++a) {
        const double left = alpha(t - 1, a);
        for (std::size_t b = 0; b < L; ++b) post.pair_sum(a, b) += left * m(a, b) * tmp[b];
      }
    }
  }
  return post;
}

void check_tables(const Matrix& node, const Matrix& trans) {
  if (trans.rows() != trans.cols() || (node.rows() > 0 && node.cols() != trans.rows())) {
    throw ContractError("score table shapes disagree");
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Templates

std::string FeatureTemplate::code() const {
  std::string s = kind_prefix(kind);
  for (int o : offsets) s += std::to_string(o);
  return s;
}

FeatureTemplate FeatureTemplate::parse(std::string_view code) {
  if (code.empty()) throw ConfigError("empty feature template code");
  FeatureTemplate t;
  switch (code[0]) {
    case 'U': t.kind = TemplateKind::kUnigram; break;
    case 'B': t.kind = TemplateKind::kBigram; break;
    case 'C': t.kind = TemplateKind::kIsClass; break;
    case 'P': t.kind = TemplateKind::kIsPreposition; break;
    case 'T': t.kind = TemplateKind::kLabelBigram; break;
    default: throw ConfigError("unknown feature template '" + std::string(code) + "'");
  }
  for (char c : code.substr(1)) {
    if (c < '0' || c > '9') throw ConfigError("bad offset in template '" + std::string(code) + "'");
    t.offsets.push_back(c - '0');
  }
  const std::size_t expected = t.kind == TemplateKind::kBigram ? 2
                               : t.kind == TemplateKind::kLabelBigram ? 0
                                                                       : 1;
  if (t.offsets.size() != expected) {
    throw ConfigError("wrong offset count in template '" + std::string(code) + "'");
  }
  return t;
}

std::vector<FeatureTemplate> default_templates() {
  std::vector<FeatureTemplate> out;
  for (int o = 0; o <= 2; ++o) out.push_back({TemplateKind::kUnigram, {o}});
  out.push_back({TemplateKind::kBigram, {0, 1}});
  out.push_back({TemplateKind::kBigram, {1, 2}});
  for (int o = 0; o <= 2; ++o) out.push_back({TemplateKind::kIsClass, {o}});
  for (int o = 0; o <= 2; ++o) out.push_back({TemplateKind::kIsPreposition, {o}});
  out.push_back({TemplateKind::kLabelBigram, {}});
  return out;
}

void validate_templates(std::span<const FeatureTemplate> templates) {
  int label_bigrams = 0;
  for (const auto& t : templates) {
    if (t.kind == TemplateKind::kLabelBigram) ++label_bigrams;
    for (int o : t.offsets) {
      if (o < kMinOffset || o > kMaxOffset) {
        throw ConfigError("template " + t.code() + " has offset outside [0, +2]");
      }
    }
  }
  if (label_bigrams != 1) throw ConfigError("exactly one label-bigram template is required");
}

std::vector<std::string> instantiate_features(std::span<const Token> tokens, std::size_t position,
                                              std::span<const FeatureTemplate> templates) {
  auto at = [&](int offset) -> const Token* {
    const std::size_t p = position + static_cast<std::size_t>(offset);
    return p < tokens.size() ? &tokens[p] : nullptr;
  };
  auto surface = [&](int offset) -> std::string_view {
    const Token* tok = at(offset);
    return tok ? std::string_view(tok->surface) : kBoundarySymbol;
  };

  std::vector<std::string> out;
  out.reserve(templates.size());
  for (const auto& t : templates) {
    switch (t.kind) {
      case TemplateKind::kUnigram:
        out.push_back(t.code() + "=" + std::string(surface(t.offsets[0])));
        break;
      case TemplateKind::kBigram:
        out.push_back(t.code() + "=" + std::string(surface(t.offsets[0])) + "|" +
                      std::string(surface(t.offsets[1])));
        break;
      case TemplateKind::kIsClass:
        if (const Token* tok = at(t.offsets[0]); tok && tok->is_class) out.push_back(t.code());
        break;
      case TemplateKind::kIsPreposition:
        if (const Token* tok = at(t.offsets[0]); tok && tok->is_preposition) out.push_back(t.code());
        break;
      case TemplateKind::kLabelBigram:
        break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Model

std::optional<int> AttributeIndex::find(std::string_view attribute) const {
  auto it = ids_.find(std::string(attribute));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

int AttributeIndex::add(std::string_view attribute) {
  std::string key(attribute);
  if (auto it = ids_.find(key); it != ids_.end()) return it->second;
  const auto id = static_cast<int>(names_.size());
  names_.push_back(key);
  ids_.emplace(std::move(key), id);
  return id;
}

std::string CrfModel::feature_string(std::size_t weight_id) const {
  const std::size_t L = num_labels();
  if (weight_id < L * L) {
    return "trans " + alphabet.name(static_cast<LabelId>(weight_id / L)) + " " +
           alphabet.name(static_cast<LabelId>(weight_id % L));
  }
  const std::size_t rest = weight_id - L * L;
  if (rest / L >= attributes.size()) throw ContractError("weight id out of range");
  return "state " + attributes.name(static_cast<int>(rest / L)) + " " +
         alphabet.name(static_cast<LabelId>(rest % L));
}

int CrfModel::add_attribute(std::string_view attribute) {
  const int id = attributes.add(attribute);
  if (weights.size() < num_weights()) weights.resize(num_weights(), 0.0);
  return id;
}

CrfModel make_model(LabelAlphabet alphabet, std::vector<FeatureTemplate> templates) {
  validate_templates(templates);
  CrfModel model{std::move(alphabet), std::move(templates), {}, {}};
  model.weights.assign(model.num_weights(), 0.0);
  return model;
}

EncodedSentence encode_for_training(const AlignedSentence& sentence, CrfModel& model) {
  EncodedSentence enc;
  enc.attributes.resize(sentence.size());
  for (std::size_t t = 0; t < sentence.size(); ++t) {
    for (const auto& f : instantiate_features(sentence.tokens, t, model.templates)) {
      enc.attributes[t].push_back(model.add_attribute(f));
    }
  }
  if (sentence.labels) {
    for (LabelId y : *sentence.labels) {
      if (!model.alphabet.contains(y)) throw ContractError("label id outside the model alphabet");
    }
    enc.labels = *sentence.labels;
  }
  return enc;
}

EncodedSentence encode_for_inference(const AlignedSentence& sentence, const CrfModel& model) {
  EncodedSentence enc;
  enc.attributes.resize(sentence.size());
  for (std::size_t t = 0; t < sentence.size(); ++t) {
    for (const auto& f : instantiate_features(sentence.tokens, t, model.templates)) {
      if (auto id = model.attributes.find(f)) enc.attributes[t].push_back(*id);
    }
  }
  if (sentence.labels) enc.labels = *sentence.labels;
  return enc;
}

ScoreTables score_tables(const EncodedSentence& sentence, const CrfModel& model,
                         std::span<const double> weights) {
  const std::size_t L = model.num_labels();
  ScoreTables tables{Matrix(sentence.size(), L), Matrix(L, L)};
  for (std::size_t a = 0; a < L; ++a)
    for (std::size_t b = 0; b < L; ++b)
      tables.transition(a, b) = weights[model.transition_id(static_cast<LabelId>(a), static_cast<LabelId>(b))];
  for (std::size_t t = 0; t < sentence.size(); ++t) {
    auto row = tables.node.row(t);
    for (int attr : sentence.attributes[t]) {
      const double* w = weights.data() + model.state_id(attr, 0);
      for (std::size_t y = 0; y < L; ++y) row[y] += w[y];
    }
  }
  return tables;
}

ScoreTables score_tables(const AlignedSentence& sentence, const CrfModel& model) {
  return score_tables(encode_for_inference(sentence, model), model, model.weights);
}

// ---------------------------------------------------------------------------
// Inference

MarginalTable forward_backward(const Matrix& node_scores, const Matrix& transition_scores) {
  check_tables(node_scores, transition_scores);
  auto post = posteriors(node_scores, transition_scores, false);
  return MarginalTable{std::move(post.node), post.log_z};
}

std::vector<LabelId> viterbi(const Matrix& node_scores, const Matrix& transition_scores) {
  check_tables(node_scores, transition_scores);
  const std::size_t T = node_scores.rows();
  const std::size_t L = transition_scores.rows();
  if (T == 0) return {};
  Matrix delta(T, L);
  std::vector<std::vector<LabelId>> back(T, std::vector<LabelId>(L, 0));
  for (std::size_t y = 0; y < L; ++y) delta(0, y) = node_scores(0, y);
  for (std::size_t t = 1; t < T; ++t) {
    for (std::size_t y = 0; y < L; ++y) {
      double best = delta(t - 1, 0) + transition_scores(0, y);
      LabelId arg = 0;
      for (std::size_t a = 1; a < L; ++a) {
        const double s = delta(t - 1, a) + transition_scores(a, y);
        if (s > best) {
          best = s;
          arg = static_cast<LabelId>(a);
        }
      }
      delta(t, y) = best + node_scores(t, y);
      back[t][y] = arg;
    }
  }
  std::vector<LabelId> path(T);
  LabelId last = 0;
  for (std::size_t y = 1; y < L; ++y) {
    if (delta(T - 1, y) > delta(T - 1, static_cast<std::size_t>(last))) last = static_cast<LabelId>(y);
  }
  path[T - 1] = last;
  for (std::size_t t = T - 1; t > 0; --t) path[t - 1] = back[t][static_cast<std::size_t>(path[t])];
  return path;
}

std::vector<LabelId> constrained_viterbi(const Matrix& marginals, const Matrix& transition_scores) {
  check_tables(marginals, transition_scores);
  Matrix log_p(marginals.rows(), marginals.cols());
  for (std::size_t t = 0; t < marginals.rows(); ++t) {
    double sum = 0.0;
    for (std::size_t y = 0; y < marginals.cols(); ++y) {
      const double p = marginals(t, y);
      if (!(p >= 0.0) || !std::isfinite(p)) {
        throw ContractError("interpolated marginal at position " + std::to_string(t) +
                            " is negative or not finite");
      }
      sum += p;
      log_p(t, y) = std::log(std::max(p, kMarginalFloor));
    }
    if (std::abs(sum - 1.0) > kMarginalRowTolerance) {
      throw ContractError("interpolated marginals at position " + std::to_string(t) +
                          " sum to " + std::to_string(sum));
    }
  }
  return viterbi(log_p, transition_scores);
}

// ---------------------------------------------------------------------------
// Likelihood

double accumulate_log_loss(std::span<const EncodedSentence> batch, const CrfModel& model,
                           std::span<const double> weights, double scale,
                           std::span<double> gradient) {
  if (scale == 0.0) return 0.0;
  const std::size_t L = model.num_labels();
  double objective = 0.0;
  for (const auto& sentence : batch) {
    const std::size_t T = sentence.size();
    if (T == 0) continue;
    if (sentence.labels.size() != T) throw ContractError("training sentence lacks labels");
    const auto tables = score_tables(sentence, model, weights);
    const auto post = posteriors(tables.node, tables.transition, true);

    double gold = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
      const auto y = static_cast<std::size_t>(sentence.labels[t]);
      gold += tables.node(t, y);
      if (t > 0) gold += tables.transition(static_cast<std::size_t>(sentence.labels[t - 1]), y);
    }
    objective += scale * (post.log_z - gold);

    for (std::size_t t = 0; t < T; ++t) {
      const auto y = sentence.labels[t];
      const auto marg = post.node.row(t);
      for (int attr : sentence.attributes[t]) {
        double* g = gradient.data() + model.state_id(attr, 0);
        for (std::size_t k = 0; k < L; ++k) g[k] += scale * marg[k];
        g[y] -= scale;
      }
      if (t > 0) gradient[model.transition_id(sentence.labels[t - 1], y)] -= scale;
    }
    for (std::size_t a = 0; a < L; ++a)
      for (std::size_t b = 0; b < L; ++b)
        gradient[model.transition_id(static_cast<LabelId>(a), static_cast<LabelId>(b))] +=
            scale * post.pair_sum(a, b);
  }
  if (!std::isfinite(objective)) throw NumericalError("non-finite CRF log-likelihood");
  return objective;
}

LossAndGradient log_likelihood_and_gradient(std::span<const AlignedSentence> batch,
                                            CrfModel& model, double weight) {
  if (!(weight >= 0.0)) throw ContractError("likelihood weight must be non-negative");
  std::vector<EncodedSentence> encoded;
  encoded.reserve(batch.size());
  for (const auto& s : batch) {
    if (!s.labeled()) throw ContractError("log_likelihood_and_gradient requires labeled sentences");
    encoded.push_back(encode_for_training(s, model));
  }
  LossAndGradient out;
  out.gradient.assign(model.num_weights(), 0.0);
  out.objective = accumulate_log_loss(encoded, model, model.weights, weight, out.gradient);
  for (double g : out.gradient) {
    if (!std::isfinite(g)) throw NumericalError("non-finite CRF gradient");
  }
  return out;
}

MarginalTable compute_marginals(const AlignedSentence& sentence, const CrfModel& model) {
  const auto tables = score_tables(sentence, model);
  return forward_backward(tables.node, tables.transition);
}

std::vector<LabelId> decode(const AlignedSentence& sentence, const CrfModel& model) {
  const auto tables = score_tables(sentence, model);
  return viterbi(tables.node, tables.transition);
}

}  // namespace gssl
