#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "gssl/corpus.hpp"
#include "gssl/matrix.hpp"

namespace gssl {

enum class TemplateKind { kUnigram, kBigram, kIsClass, kIsPreposition, kLabelBigram };

// Observation template conjoined with the current label, or the single
// label-bigram transition template. Offsets are relative to the current
// position and lie in [0, +2].
struct FeatureTemplate {
  TemplateKind kind = TemplateKind::kUnigram;
  std::vector<int> offsets;

  // Short code such as "U1", "B01", "C2" or "T".
  std::string code() const;
  static FeatureTemplate parse(std::string_view code);

  friend bool operator==(const FeatureTemplate&, const FeatureTemplate&) = default;
};

inline constexpr int kMinOffset = 0;
inline constexpr int kMaxOffset = 2;
// Surface read for offsets past the end of the sentence.
inline constexpr std::string_view kBoundarySymbol = "</s>";

// U0 U1 U2 B01 B12 C0 C1 C2 P0 P1 P2 T
std::vector<FeatureTemplate> default_templates();

// Throws ConfigError unless offsets are in the window and there is exactly
// one label-bigram template.
void validate_templates(std::span<const FeatureTemplate> templates);

// Observation strings fired at `position`. Boolean templates appear only
// when true. The label-bigram template contributes nothing here.
std::vector<std::string> instantiate_features(std::span<const Token> tokens, std::size_t position,
                                              std::span<const FeatureTemplate> templates);

// Interns observation strings ("attributes") to dense ids.
class AttributeIndex {
 public:
  std::optional<int> find(std::string_view attribute) const;
  int add(std::string_view attribute);
  const std::string& name(int id) const { return names_[static_cast<std::size_t>(id)]; }
  std::size_t size() const { return names_.size(); }

  friend bool operator==(const AttributeIndex& a, const AttributeIndex& b) { return a.names_ == b.names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, int> ids_;
};

// Linear-chain CRF parameters.
//
// Weight layout: the |L|x|L| transition block first (row = previous label),
// then one |L| block per attribute. Each weight id corresponds to exactly one
// feature string ("trans <from> <to>" or "state <attribute> <label>").
struct CrfModel {
  LabelAlphabet alphabet;
  std::vector<FeatureTemplate> templates;
  AttributeIndex attributes;
  std::vector<double> weights;

  std::size_t num_labels() const { return alphabet.size(); }
  std::size_t transition_id(LabelId from, LabelId to) const {
    return static_cast<std::size_t>(from) * num_labels() + static_cast<std::size_t>(to);
  }
  std::size_t state_id(int attribute, LabelId label) const {
    return num_labels() * num_labels() + static_cast<std::size_t>(attribute) * num_labels() +
           static_cast<std::size_t>(label);
  }
  std::size_t num_weights() const {
    return num_labels() * num_labels() + attributes.size() * num_labels();
  }

  std::string feature_string(std::size_t weight_id) const;
  // Registers an attribute and grows `weights` with zeros.
  int add_attribute(std::string_view attribute);

  friend bool operator==(const CrfModel&, const CrfModel&) = default;
};

CrfModel make_model(LabelAlphabet alphabet,
                    std::vector<FeatureTemplate> templates = default_templates());

// A sentence with its observation strings resolved to attribute ids.
struct EncodedSentence {
  std::vector<std::vector<int>> attributes;  // per position
  std::vector<LabelId> labels;               // empty when unlabeled

  std::size_t size() const { return attributes.size(); }
};

// Registers unseen attributes in `model`.
EncodedSentence encode_for_training(const AlignedSentence& sentence, CrfModel& model);
// Unknown attributes are dropped and score zero.
EncodedSentence encode_for_inference(const AlignedSentence& sentence, const CrfModel& model);

struct ScoreTables {
  Matrix node;        // |T| x |L|, log-domain
  Matrix transition;  // |L| x |L|, log-domain
};

ScoreTables score_tables(const EncodedSentence& sentence, const CrfModel& model,
                         std::span<const double> weights);
ScoreTables score_tables(const AlignedSentence& sentence, const CrfModel& model);

struct MarginalTable {
  Matrix node;  // p(y_t = y | x), rows sum to 1
  double log_z = 0.0;
};

MarginalTable forward_backward(const Matrix& node_scores, const Matrix& transition_scores);

// Highest scoring path. Among tied predecessors and tied final labels the
// lowest label id wins.
std::vector<LabelId> viterbi(const Matrix& node_scores, const Matrix& transition_scores);

inline constexpr double kMarginalFloor = 1e-12;
inline constexpr double kMarginalRowTolerance = 1e-6;

// Viterbi over sum_t log p(y_t) + transition(y_{t-1}, y_t), with p floored
// at kMarginalFloor before the log.
std::vector<LabelId> constrained_viterbi(const Matrix& marginals, const Matrix& transition_scores);

// Adds scale * (-log p(y|x)) over the batch to the return value and
// scale * (expected - empirical) feature counts into `gradient`.
// The regularizer is not included. Every sentence must carry labels.
double accumulate_log_loss(std::span<const EncodedSentence> batch, const CrfModel& model,
                           std::span<const double> weights, double scale,
                           std::span<double> gradient);

struct LossAndGradient {
  double objective = 0.0;
  std::vector<double> gradient;
};

// Convenience form over raw sentences; extends the model's feature index.
LossAndGradient log_likelihood_and_gradient(std::span<const AlignedSentence> batch,
                                            CrfModel& model, double weight);

// Inference helpers over raw sentences.
MarginalTable compute_marginals(const AlignedSentence& sentence, const CrfModel& model);
std::vector<LabelId> decode(const AlignedSentence& sentence, const CrfModel& model);

// Versioned text serialization; weights round-trip exactly.
void write_model(std::ostream& out, const CrfModel& model);
CrfModel read_model(std::istream& in, const std::string& source = "<stream>");
void save_model(const std::filesystem::path& path, const CrfModel& model);
CrfModel load_model(const std::filesystem::path& path);

}  // namespace gssl
