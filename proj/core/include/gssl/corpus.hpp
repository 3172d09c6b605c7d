#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace gssl {

using LabelId = int;

inline constexpr LabelId kNullLabel = 0;
inline constexpr std::string_view kNullLabelName = "O";

struct Token {
  std::string surface;
  bool is_class = false;
  bool is_preposition = false;

  friend bool operator==(const Token&, const Token&) = default;
};

struct AlignedSentence {
  std::vector<Token> tokens;
  // Absent for unlabeled sentences; otherwise one label per token.
  std::optional<std::vector<LabelId>> labels;

  bool labeled() const { return labels.has_value(); }
  std::size_t size() const { return tokens.size(); }

  friend bool operator==(const AlignedSentence&, const AlignedSentence&) = default;
};

using Corpus = std::vector<AlignedSentence>;

// Bijection between label strings and dense ids. "O" is always id 0.
class LabelAlphabet {
 public:
  LabelAlphabet();

  // Returns the id of `name`, inserting it if new.
  LabelId add(std::string_view name);
  std::optional<LabelId> find(std::string_view name) const;
  // Throws DataError for unknown names.
  LabelId lookup(std::string_view name) const;
  const std::string& name(LabelId id) const;

  std::size_t size() const { return names_.size(); }
  bool contains(LabelId id) const { return id >= 0 && static_cast<std::size_t>(id) < names_.size(); }
  const std::vector<std::string>& names() const { return names_; }

  friend bool operator==(const LabelAlphabet& a, const LabelAlphabet& b) { return a.names_ == b.names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, LabelId> ids_;
};

// Class words and prepositions used for token flags and graph features.
//
// A class entry maps a surface form to the class name that replaces it at
// load time. Entries whose surface already is the class name (the usual case
// for pre-marked corpora such as `city_name`) map to themselves.
class Lexicon {
 public:
  static constexpr std::string_view kDefaultBoundary = "<pad>";

  Lexicon() = default;
  Lexicon(std::map<std::string, std::string> classes, std::set<std::string> prepositions,
          std::string dummy_boundary = std::string(kDefaultBoundary));

  static Lexicon from_sets(const std::set<std::string>& class_words,
                           const std::set<std::string>& prepositions);

  bool is_class(std::string_view surface) const;
  bool is_preposition(std::string_view surface) const;
  // Class name replacing `surface`, or nullopt when it is not a class word.
  std::optional<std::string> class_of(std::string_view surface) const;

  const std::map<std::string, std::string>& classes() const { return classes_; }
  const std::set<std::string>& prepositions() const { return prepositions_; }
  const std::string& dummy_boundary() const { return dummy_boundary_; }

  // Builds a flagged token, applying class replacement.
  Token make_token(std::string_view surface) const;

  friend bool operator==(const Lexicon&, const Lexicon&) = default;

 private:
  void validate() const;

  std::map<std::string, std::string> classes_;
  std::set<std::string, std::less<>> class_names_;
  std::set<std::string> prepositions_;
  std::string dummy_boundary_ = std::string(kDefaultBoundary);
};

struct SplitSpec {
  double labeled_fraction = 1.0;
  std::uint64_t rng_seed = 0;
  std::uint64_t repeat_index = 0;
};

struct CorpusSplit {
  Corpus labeled;
  Corpus unlabeled;  // labels stripped
  std::vector<std::vector<LabelId>> unlabeled_gold;
  // Original corpus positions of each partition's sentences.
  std::vector<std::size_t> labeled_indices;
  std::vector<std::size_t> unlabeled_indices;
};

struct LoadedCorpus {
  Corpus sentences;
  LabelAlphabet alphabet;
};

// Reads the tab-separated sentence format. `alphabet` is extended with new labels.
LoadedCorpus read_corpus(std::istream& in, LabelAlphabet alphabet, const Lexicon& lexicon,
                         const std::string& source = "<stream>");
LoadedCorpus load_corpus(const std::filesystem::path& path, LabelAlphabet alphabet,
                         const Lexicon& lexicon);

void write_corpus(std::ostream& out, std::span<const AlignedSentence> corpus,
                  const LabelAlphabet& alphabet);
void save_corpus(const std::filesystem::path& path, std::span<const AlignedSentence> corpus,
                 const LabelAlphabet& alphabet);

Lexicon read_lexicon(std::istream& in, const std::string& source = "<stream>");
Lexicon load_lexicon(const std::filesystem::path& path);
void write_lexicon(std::ostream& out, const Lexicon& lexicon);
void save_lexicon(const std::filesystem::path& path, const Lexicon& lexicon);

// Deterministic random partition; |labeled| = round-half-up(fraction * N).
CorpusSplit split_corpus(std::span<const AlignedSentence> corpus, const SplitSpec& spec);

// Labels each value token with its slot, left to right; everything else is O.
std::vector<LabelId> monotone_align(std::span<const Token> tokens,
                                    std::span<const std::pair<std::string, std::string>> slots,
                                    const LabelAlphabet& alphabet);

AlignedSentence strip_labels(AlignedSentence sentence);

struct SyntheticCorpus {
  Corpus sentences;
  LabelAlphabet alphabet;
  Lexicon lexicon;
};

// Flight-domain slot-filling corpus from a fixed in-code grammar.
SyntheticCorpus generate_synthetic(std::uint64_t grammar_seed, std::size_t n_sentences);

// Version tag of the built-in grammar; bumped whenever its output changes.
inline constexpr int kSyntheticGrammarVersion = 2;

}  // namespace gssl
