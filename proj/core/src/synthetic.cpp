#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "gssl/corpus.hpp"
#include "gssl/errors.hpp"
#include "gssl/random.hpp"

namespace gssl {

namespace {

// Built-in flight-domain grammar. Any change to the word lists, weights or
// expansion order changes the generated corpora: bump
// kSyntheticGrammarVersion when editing.

const std::vector<std::string> kAirlines = {
    "delta",    "united",    "american", "continental", "northwest", "usair",     "twa",
    "lufthansa", "alaska",   "midwest",  "frontier",    "jetblue",   "southwest", "hawaiian",
    "aeromexico", "klm",     "qantas",   "iberia",      "finnair",   "sabena",    "swissair",
    "alitalia", "aerolineas", "varig",   "avianca",     "copa",      "lacsa",     "taca",
    "mexicana", "aloha",     "reno",     "tower",       "carnival",  "midway",    "braniff",
    "eastern",  "pan",       "piedmont", "republic",    "western",   "ozark",     "allegheny",
    "mohawk",   "hughes",    "pacific",  "sunworld",    "vanguard",  "spirit",    "airtran",
    "amtran",   "kiwi",      "markair",  "horizon",     "skywest",   "comair",    "mesaba",
    "atlantic", "wings",     "express",  "condor",      "sabre",     "olympic",   "sterling",
    "emerald",  "capitol",   "southern", "northern",    "central",   "colgan",    "trump",
    "pinnacle", "chautauqua", "freedom", "gulfstream",  "executive", "ameriflight", "peninsula",
    "sierra",   "cascade",   "summit",   "empire",      "harbor",    "island",    "mountain",
    "valley",   "coastal",   "eagle",    "falcon",      "hawk",      "orion",     "polar",
    "trans",    "air",       "jet",      "global",      "royal",     "star",      "sun"};

const std::vector<std::string> kAdjectives = {
    "available", "nonstop",   "direct",   "daily",     "cheap",     "other",      "later",
    "earlier",   "possible",  "regular",  "scheduled", "connecting", "inexpensive", "good",
    "fast",      "quick",     "shortest", "longest",   "next",      "first",      "last",
    "weekly",    "additional", "alternate", "convenient", "reasonable", "comfortable", "special",
    "discount",  "standard",  "cheapest", "latest",    "earliest",  "fastest",   "best",
    "overnight", "redeye",    "reduced",  "lowest",    "express",   "local",     "international",
    "domestic",  "commuter",  "evening",  "one",       "round",     "short",     "long",
    "early"};

const std::vector<std::string> kTimes = {"morning", "afternoon", "evening", "night", "noon",
                                         "midnight", "dawn", "dusk", "daytime", "lunchtime",
                                         "breakfast", "dinnertime"};
const std::vector<std::string> kTimeModifiers = {"early", "late", "mid"};

const std::vector<std::string> kFareClasses = {"first", "business", "economy", "coach", "premium"};

struct Builder {
  std::vector<std::pair<std::string, std::string>> items;  // (surface, label)

  void word(const std::string& w, const std::string& label = "O") { items.emplace_back(w, label); }
  void words(std::initializer_list<const char*> ws) {
    for (const char* w : ws) word(w);
  }
};

// Zipf-distributed pick over a list (rank r has weight 1 / (r + 1)).
const std::string& zipf_pick(const std::vector<std::string>& list, std::mt19937_64& rng) {
  double total = 0.0;
  for (std::size_t r = 0; r < list.size(); ++r) total += 1.0 / static_cast<double>(r + 1);
  double u = uniform_real(rng) * total;
  for (std::size_t r = 0; r < list.size(); ++r) {
    u -= 1.0 / static_cast<double>(r + 1);
    if (u < 0.0) return list[r];
  }
  return list.back();
}

bool coin(std::mt19937_64& rng, double p) { return uniform_real(rng) < p; }

std::size_t choose(std::mt19937_64& rng, std::initializer_list<double> weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  double u = uniform_real(rng) * total;
  std::size_t i = 0;
  for (double w : weights) {
    if (u < w) return i;
    u -= w;
    ++i;
  }
  return weights.size() - 1;
}

void airline(Builder& b, std::mt19937_64& rng, bool allow_suffix) {
  b.word(zipf_pick(kAirlines, rng), "AIRLINE");
  if (allow_suffix && coin(rng, 0.4)) b.word(coin(rng, 0.7) ? "airlines" : "air", "AIRLINE");
}

void time_of_day(Builder& b, std::mt19937_64& rng) {
  if (coin(rng, 0.3)) b.word(zipf_pick(kTimeModifiers, rng), "TIME");
  b.word(zipf_pick(kTimes, rng), "TIME");
}

void flight_noun_phrase(Builder& b, std::mt19937_64& rng) {
  switch (choose(rng, {3, 2, 3, 1})) {
    case 0: break;
    case 1: airline(b, rng, true); break;
    case 2: b.word(zipf_pick(kAdjectives, rng)); break;
    default: time_of_day(b, rng); break;
  }
  b.word(coin(rng, 0.8) ? "flights" : "flight");
}

void route(Builder& b, std::mt19937_64& rng) {
  switch (choose(rng, {5, 2, 3})) {
    case 0:
      b.word("from"); b.word("city_name", "FROMLOC");
      b.word("to"); b.word("city_name", "TOLOC");
      break;
    case 1:
      b.word("between"); b.word("city_name", "FROMLOC");
      b.word("and"); b.word("city_name", "TOLOC");
      break;
    default:
      b.word("to"); b.word("city_name", "TOLOC");
      break;
  }
}

void modifiers(Builder& b, std::mt19937_64& rng) {
  if (coin(rng, 0.5)) {
    b.word("on");
    b.word("day_name", "DATE");
  }
  if (coin(rng, 0.3)) {
    b.words({"in", "the"});
    time_of_day(b, rng);
  }
  if (coin(rng, 0.4)) {
    switch (choose(rng, {2, 2, 1})) {
      case 0: b.word("on"); airline(b, rng, true); break;
      case 1: b.word("with"); airline(b, rng, false); break;
      default: b.word("flying"); airline(b, rng, true); break;
    }
  }
  if (coin(rng, 0.15)) {
    b.word("in");
    const auto& fare = zipf_pick(kFareClasses, rng);
    b.word(fare, "CLASS");
    b.word("class", "CLASS");
  }
}

void sentence(Builder& b, std::mt19937_64& rng) {
  switch (choose(rng, {3, 3, 2, 2, 2})) {
    case 0:
      b.words({"i", "want", "to", "fly"});
      break;
    case 1:
      b.words({"show", "me"});
      flight_noun_phrase(b, rng);
      break;
    case 2:
      b.words({"i", "need"});
      if (coin(rng, 0.5)) b.word("a"); else b.word("the");
      flight_noun_phrase(b, rng);
      break;
    case 3:
      b.words({"what", "are", "the"});
      flight_noun_phrase(b, rng);
      break;
    default:
      b.word("list");
      flight_noun_phrase(b, rng);
      break;
  }
  route(b, rng);
  modifiers(b, rng);
  switch (choose(rng, {6, 2, 1})) {
    case 0: break;
    case 1: b.word("please"); break;
    default: b.words({"if", "possible"}); break;
  }
}

Lexicon synthetic_lexicon() {
  return Lexicon::from_sets({"city_name", "day_name"},
                            {"from", "to", "on", "in", "between", "with", "at", "for"});
}

}  // namespace

SyntheticCorpus generate_synthetic(std::uint64_t grammar_seed, std::size_t n_sentences) {
  if (n_sentences < 1) throw ConfigError("synthetic corpus needs at least one sentence");
  SyntheticCorpus out{{}, LabelAlphabet{}, synthetic_lexicon()};
  for (const char* label : {"FROMLOC", "TOLOC", "DATE", "TIME", "AIRLINE", "CLASS"}) out.alphabet.add(label);

  auto rng = make_rng(grammar_seed, 0x6772616D6D6172ULL);
  out.sentences.reserve(n_sentences);
  for (std::size_t i = 0; i < n_sentences; ++i) {
    Builder b;
    sentence(b, rng);
    AlignedSentence s;
    s.labels.emplace();
    for (const auto& [surface, label] : b.items) {
      s.tokens.push_back(out.lexicon.make_token(surface));
      s.labels->push_back(out.alphabet.lookup(label));
    }
    out.sentences.push_back(std::move(s));
  }
  return out;
}

}  // namespace gssl
