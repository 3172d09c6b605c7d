#include "gssl/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "gssl/errors.hpp"
#include "gssl/random.hpp"

namespace gssl {

namespace {

bool has_space(std::string_view s) {
  return s.find_first_of(" \t\n\r\v\f") != std::string_view::npos;
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// LabelAlphabet

LabelAlphabet::LabelAlphabet() { add(kNullLabelName); }

LabelId LabelAlphabet::add(std::string_view name) {
  if (auto it = ids_.find(std::string(name)); it != ids_.end()) return it->second;
  if (name.empty() || has_space(name)) {
    throw DataError("invalid label name '" + std::string(name) + "'");
  }
  const auto id = static_cast<LabelId>(names_.size());
  names_.emplace_back(name);
  ids_.emplace(names_.back(), id);
  return id;
}

std::optional<LabelId> LabelAlphabet::find(std::string_view name) const {
  auto it = ids_.find(std::string(name));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

LabelId LabelAlphabet::lookup(std::string_view name) const {
  if (auto id = find(name)) return *id;
  throw DataError("unknown label '" + std::string(name) + "'");
}

const std::string& LabelAlphabet::name(LabelId id) const {
  if (!contains(id)) throw ContractError("label id " + std::to_string(id) + " out of range");
  return names_[static_cast<std::size_t>(id)];
}

// ---------------------------------------------------------------------------
// Lexicon

Lexicon::Lexicon(std::map<std::string, std::string> classes, std::set<std::string> prepositions,
                 std::string dummy_boundary)
    : classes_(std::move(classes)),
      prepositions_(std::move(prepositions)),
      dummy_boundary_(std::move(dummy_boundary)) {
  for (const auto& [surface, name] : classes_) class_names_.insert(name);
  validate();
}

Lexicon Lexicon::from_sets(const std::set<std::string>& class_words,
                           const std::set<std::string>& prepositions) {
  std::map<std::string, std::string> classes;
  for (const auto& w : class_words) classes.emplace(w, w);
  return Lexicon(std::move(classes), prepositions);
}

void Lexicon::validate() const {
  if (dummy_boundary_.empty() || has_space(dummy_boundary_)) {
    throw ConfigError("lexicon: invalid boundary symbol");
  }
  for (const auto& [surface, name] : classes_) {
    if (surface.empty() || has_space(surface) || name.empty() || has_space(name)) {
      throw ConfigError("lexicon: invalid class entry '" + surface + "'");
    }
    if (prepositions_.count(surface) || prepositions_.count(name)) {
      throw ConfigError("lexicon: '" + surface + "' is both a class word and a preposition");
    }
  }
  for (const auto& p : prepositions_) {
    if (p.empty() || has_space(p)) throw ConfigError("lexicon: invalid preposition '" + p + "'");
  }
  if (is_class(dummy_boundary_) || is_preposition(dummy_boundary_)) {
    throw ConfigError("lexicon: boundary symbol '" + dummy_boundary_ +
                      "' must not be a class word or preposition");
  }
}

bool Lexicon::is_class(std::string_view surface) const {
  return class_names_.find(surface) != class_names_.end() ||
         classes_.find(std::string(surface)) != classes_.end();
}

bool Lexicon::is_preposition(std::string_view surface) const {
  return prepositions_.find(std::string(surface)) != prepositions_.end();
}

std::optional<std::string> Lexicon::class_of(std::string_view surface) const {
  if (auto it = classes_.find(std::string(surface)); it != classes_.end()) return it->second;
  if (class_names_.find(surface) != class_names_.end()) return std::string(surface);
  return std::nullopt;
}

Token Lexicon::make_token(std::string_view surface) const {
  Token token;
  if (auto cls = class_of(surface)) {
    token.surface = *cls;
    token.is_class = true;
  } else {
    token.surface = std::string(surface);
    token.is_preposition = is_preposition(surface);
  }
  return token;
}

Lexicon read_lexicon(std::istream& in, const std::string& source) {
  enum class Section { kNone, kClasses, kPrepositions, kBoundary };
  Section section = Section::kNone;
  std::map<std::string, std::string> classes;
  std::set<std::string> prepositions;
  std::string boundary(Lexicon::kDefaultBoundary);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (line == "[classes]") {
      section = Section::kClasses;
    } else if (line == "[prepositions]") {
      section = Section::kPrepositions;
    } else if (line == "[boundary]") {
      section = Section::kBoundary;
    } else {
      const auto fields = split_tabs(line);
      for (auto f : fields) {
        if (f.empty() || has_space(f)) throw ParseError(source, line_no, "malformed lexicon entry");
      }
      switch (section) {
        case Section::kNone:
          throw ParseError(source, line_no, "entry outside of a section");
        case Section::kClasses:
          if (fields.size() > 2) throw ParseError(source, line_no, "too many fields");
          classes[std::string(fields[0])] = std::string(fields.back());
          break;
        case Section::kPrepositions:
          if (fields.size() != 1) throw ParseError(source, line_no, "too many fields");
          prepositions.emplace(fields[0]);
          break;
        case Section::kBoundary:
          if (fields.size() != 1) throw ParseError(source, line_no, "too many fields");
          boundary = std::string(fields[0]);
          break;
      }
    }
  }
  try {
    return Lexicon(std::move(classes), std::move(prepositions), std::move(boundary));
  } catch (const ConfigError& e) {
    throw DataError(source + ": " + e.what());
  }
}

Lexicon load_lexicon(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open lexicon file " + path.string());
  return read_lexicon(in, path.string());
}

void write_lexicon(std::ostream& out, const Lexicon& lexicon) {
  out << "[classes]\n";
  for (const auto& [surface, name] : lexicon.classes()) {
    out << surface;
    if (name != surface) out << '\t' << name;
    out << '\n';
  }
  out << "[prepositions]\n";
  for (const auto& p : lexicon.prepositions()) out << p << '\n';
  if (lexicon.dummy_boundary() != Lexicon::kDefaultBoundary) {
    out << "[boundary]\n" << lexicon.dummy_boundary() << '\n';
  }
}

void save_lexicon(const std::filesystem::path& path, const Lexicon& lexicon) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write lexicon file " + path.string());
  write_lexicon(out, lexicon);
  if (!out) throw DataError("error writing " + path.string());
}

// ---------------------------------------------------------------------------
// Corpus files

LoadedCorpus read_corpus(std::istream& in, LabelAlphabet alphabet, const Lexicon& lexicon,
                         const std::string& source) {
  LoadedCorpus result{{}, std::move(alphabet)};
  AlignedSentence current;
  std::size_t arity = 0;  // 0 = no line yet in the current sentence
  std::size_t sentence_start = 0;

  auto flush = [&] {
    if (current.tokens.empty()) return;
    result.sentences.push_back(std::move(current));
    current = AlignedSentence{};
    arity = 0;
  };

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      flush();
      continue;
    }
    const auto fields = split_tabs(line);
    if (fields.size() > 2) throw ParseError(source, line_no, "expected 'token' or 'token<TAB>label'");
    for (auto f : fields) {
      if (f.empty()) throw ParseError(source, line_no, "empty field");
      if (has_space(f)) throw ParseError(source, line_no, "whitespace inside token or label");
    }
    if (fields[0] == lexicon.dummy_boundary()) {
      throw ParseError(source, line_no, "token equals the reserved boundary symbol");
    }
    if (arity == 0) {
      arity = fields.size();
      sentence_start = line_no;
      if (arity == 2) current.labels.emplace();
    } else if (arity != fields.size()) {
      throw DataError(source + ":" + std::to_string(line_no) +
                      ": sentence starting at line " + std::to_string(sentence_start) +
                      " mixes labeled and unlabeled lines");
    }
    current.tokens.push_back(lexicon.make_token(fields[0]));
    if (arity == 2) current.labels->push_back(result.alphabet.add(fields[1]));
  }
  flush();
  if (result.sentences.empty()) throw DataError(source + ": empty corpus");
  return result;
}

LoadedCorpus load_corpus(const std::filesystem::path& path, LabelAlphabet alphabet,
                         const Lexicon& lexicon) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus file " + path.string());
  return read_corpus(in, std::move(alphabet), lexicon, path.string());
}

void write_corpus(std::ostream& out, std::span<const AlignedSentence> corpus,
                  const LabelAlphabet& alphabet) {
  for (const auto& sentence : corpus) {
    for (std::size_t i = 0; i < sentence.tokens.size(); ++i) {
      out << sentence.tokens[i].surface;
      if (sentence.labels) out << '\t' << alphabet.name((*sentence.labels)[i]);
      out << '\n';
    }
    out << '\n';
  }
}

void save_corpus(const std::filesystem::path& path, std::span<const AlignedSentence> corpus,
                 const LabelAlphabet& alphabet) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write corpus file " + path.string());
  write_corpus(out, corpus, alphabet);
  if (!out) throw DataError("error writing " + path.string());
}

// ---------------------------------------------------------------------------
// Splitting and alignment

AlignedSentence strip_labels(AlignedSentence sentence) {
  sentence.labels.reset();
  return sentence;
}

CorpusSplit split_corpus(std::span<const AlignedSentence> corpus, const SplitSpec& spec) {
  if (!(spec.labeled_fraction > 0.0 && spec.labeled_fraction <= 1.0)) {
    throw ConfigError("labeled fraction must lie in (0, 1], got " +
                      std::to_string(spec.labeled_fraction));
  }
  for (const auto& s : corpus) {
    if (!s.labeled()) throw ContractError("split_corpus requires a fully labeled corpus");
  }
  const std::size_t n = corpus.size();
  const auto n_labeled = std::min<std::size_t>(
      n, static_cast<std::size_t>(std::floor(spec.labeled_fraction * static_cast<double>(n) + 0.5)));

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  auto rng = make_rng(spec.rng_seed, spec.repeat_index);
  shuffle(std::span(order), rng);

  std::vector<char> chosen(n, 0);
  for (std::size_t i = 0; i < n_labeled; ++i) chosen[order[i]] = 1;

  CorpusSplit split;
  for (std::size_t i = 0; i < n; ++i) {
    if (chosen[i]) {
      split.labeled.push_back(corpus[i]);
      split.labeled_indices.push_back(i);
    } else {
      split.unlabeled.push_back(strip_labels(corpus[i]));
      split.unlabeled_gold.push_back(*corpus[i].labels);
      split.unlabeled_indices.push_back(i);
    }
  }
  return split;
}

std::vector<LabelId> monotone_align(std::span<const Token> tokens,
                                    std::span<const std::pair<std::string, std::string>> slots,
                                    const LabelAlphabet& alphabet) {
  std::vector<LabelId> labels(tokens.size(), kNullLabel);
  std::size_t cursor = 0;
  for (const auto& [slot, value] : slots) {
    const auto label = alphabet.find(slot);
    if (!label) throw AlignmentError("slot '" + slot + "' is not in the label alphabet");
    std::size_t pos = cursor;
    while (pos < tokens.size() && tokens[pos].surface != value) ++pos;
    if (pos == tokens.size()) {
      throw AlignmentError("slot '" + slot + "': value '" + value +
                           "' not found at or after position " + std::to_string(cursor));
    }
    labels[pos] = *label;
    cursor = pos + 1;
  }
  return labels;
}

}  // namespace gssl
