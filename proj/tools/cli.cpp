#include "cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "gssl/config.hpp"
#include "gssl/corpus.hpp"
#include "gssl/crf.hpp"
#include "gssl/errors.hpp"
#include "gssl/eval.hpp"
#include "gssl/graph.hpp"
#include "gssl/ssl_trainer.hpp"

namespace gssl::cli {

namespace {

namespace fs = std::filesystem;

struct Options {
  // generate
  std::uint64_t gen_seed = 1;
  long long gen_count = 0;
  std::string gen_out;
  // shared
  std::string config_path;
  std::string method = "ssl";
  std::string train, test, unlabeled, lexicon, model_out, report_out, out;
  int k = kDefaultNeighbors;
  std::string fractions, methods;
  int repeats = 0;
  std::uint64_t seed = 0;
  bool verbose = false;
};

std::string format_result(Method method, double fraction, const PrfScore& s) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "RESULT method=%s fraction=%.4f P=%.4f R=%.4f F1=%.4f", to_string(method),
                fraction, s.precision, s.recall, s.f1);
  return buf;
}

Lexicon lexicon_or_empty(const std::string& path) { return path.empty() ? Lexicon{} : load_lexicon(path); }

RunConfig base_config(const Options& o) {
  return o.config_path.empty() ? RunConfig{} : load_run_config(o.config_path);
}

void require(const std::string& value, const char* what) {
  if (value.empty()) throw ConfigError(std::string("missing required setting: ") + what);
}

int cmd_generate(const Options& o, std::ostream& out) {
  if (o.gen_count < 1) throw ConfigError("--count must be >= 1");
  const auto corpus = generate_synthetic(o.gen_seed, static_cast<std::size_t>(o.gen_count));
  std::error_code ec;
  fs::create_directories(o.gen_out, ec);
  if (ec) throw DataError("cannot create output directory " + o.gen_out + ": " + ec.message());
  const auto corpus_path = fs::path(o.gen_out) / "corpus.tsv";
  const auto lexicon_path = fs::path(o.gen_out) / "lexicon.txt";
  save_corpus(corpus_path, corpus.sentences, corpus.alphabet);
  save_lexicon(lexicon_path, corpus.lexicon);
  out << "sentences=" << corpus.sentences.size() << " corpus=" << corpus_path.string()
      << " lexicon=" << lexicon_path.string() << '\n';
  return kOk;
}

int cmd_train(const Options& o, std::ostream& out, std::ostream& err) {
  RunConfig config = base_config(o);
  if (!o.train.empty()) config.train = o.train;
  if (!o.test.empty()) config.test = o.test;
  if (!o.unlabeled.empty()) config.unlabeled = o.unlabeled;
  if (!o.lexicon.empty()) config.lexicon = o.lexicon;
  if (!o.model_out.empty()) config.model_out = o.model_out;
  require(config.train, "train");
  require(config.test, "test");
  const Method method = parse_method(o.method);
  config.ssl.validate();

  const auto lexicon = lexicon_or_empty(config.lexicon);
  auto train = load_corpus(config.train, LabelAlphabet{}, lexicon);
  Corpus labeled, unlabeled;
  for (auto& s : train.sentences) (s.labeled() ? labeled : unlabeled).push_back(std::move(s));
  LabelAlphabet alphabet = std::move(train.alphabet);
  if (!config.unlabeled.empty()) {
    auto extra = load_corpus(config.unlabeled, std::move(alphabet), lexicon);
    alphabet = std::move(extra.alphabet);
    for (auto& s : extra.sentences) unlabeled.push_back(strip_labels(std::move(s)));
  }
  auto test = load_corpus(config.test, std::move(alphabet), lexicon);
  alphabet = std::move(test.alphabet);
  if (labeled.empty()) throw DataError("training data contains no labeled sentence");

  RoundCallback log_round;
  if (o.verbose) log_round = [&err](const RoundReport& r) { err << format_round(r) << '\n'; };

  CrfModel model;
  switch (method) {
    case Method::kSupervised:
      model = train_supervised(labeled, alphabet, config.ssl.gamma, config.ssl.optimizer);
      break;
    case Method::kSelfTrain:
      model = self_train(labeled, unlabeled, alphabet, config.ssl, log_round).model;
      break;
    case Method::kSsl:
      model = run_ssl(labeled, unlabeled, alphabet, lexicon, config.ssl, log_round).model;
      break;
  }
  if (!config.model_out.empty()) save_model(config.model_out, model);
  const auto score = evaluate_model(model, test.sentences);
  const double fraction =
      static_cast<double>(labeled.size()) / static_cast<double>(labeled.size() + unlabeled.size());
  out << format_result(method, fraction, score) << '\n';
  return kOk;
}

int cmd_build_graph(const Options& o, std::ostream& out) {
  require(o.train, "--train");
  require(o.out, "--out");
  if (o.k < 1) throw ConfigError("--k must be >= 1");
  const auto lexicon = lexicon_or_empty(o.lexicon);
  auto train = load_corpus(o.train, LabelAlphabet{}, lexicon);
  Corpus corpus = std::move(train.sentences);
  if (!o.unlabeled.empty()) {
    auto extra = load_corpus(o.unlabeled, std::move(train.alphabet), lexicon);
    for (auto& s : extra.sentences) corpus.push_back(strip_labels(std::move(s)));
  }
  auto table = extract_trigrams(corpus, lexicon);
  if (table.nodes.size() < 2 || static_cast<std::size_t>(o.k) >= table.nodes.size()) {
    throw ConfigError("--k " + std::to_string(o.k) + " must be smaller than the node count " +
                      std::to_string(table.nodes.size()));
  }
  const auto counts = collect_features(corpus, table, lexicon);
  const auto vectors = compute_pmi(counts);
  const auto graph = build_knn(std::move(table), vectors, o.k);
  std::ofstream file(o.out, std::ios::binary);
  if (!file) throw DataError("cannot write graph file " + o.out);
  write_graph(file, graph);
  if (!file) throw DataError("error writing " + o.out);
  out << "nodes=" << graph.size() << " edges=" << graph.num_edges() << " out=" << o.out << '\n';
  return kOk;
}

int cmd_experiment(const Options& o, std::ostream& out, std::ostream& err) {
  RunConfig config = base_config(o);
  if (!o.fractions.empty()) config.fractions = parse_double_list(o.fractions);
  if (!o.methods.empty()) config.methods = parse_method_list(o.methods);
  if (o.repeats != 0) config.repeats = o.repeats;
  if (o.seed != 0) config.seed = o.seed;
  if (!o.report_out.empty()) config.report_out = o.report_out;
  if (!o.train.empty()) config.train = o.train;
  if (!o.lexicon.empty()) config.lexicon = o.lexicon;
  require(config.report_out, "report_out");
  const auto experiment = config.experiment();
  experiment.validate();

  Corpus corpus;
  LabelAlphabet alphabet;
  Lexicon lexicon;
  if (config.train.empty()) {
    if (config.synthetic_count < 1) throw ConfigError("synthetic_count must be >= 1");
    auto synthetic = generate_synthetic(config.synthetic_seed, config.synthetic_count);
    corpus = std::move(synthetic.sentences);
    alphabet = std::move(synthetic.alphabet);
    lexicon = std::move(synthetic.lexicon);
  } else {
    lexicon = lexicon_or_empty(config.lexicon);
    auto loaded = load_corpus(config.train, LabelAlphabet{}, lexicon);
    corpus = std::move(loaded.sentences);
    alphabet = std::move(loaded.alphabet);
  }

  RunCallback log_run;
  if (o.verbose) {
    log_run = [&err](const RunRecord& r) {
      err << "run method=" << to_string(r.method) << " fraction=" << r.fraction << " repeat=" << r.repeat
          << " f1=" << r.score.f1 << '\n';
    };
  }
  const auto report = run_experiment(corpus, alphabet, lexicon, experiment, log_run);
  std::ofstream file(config.report_out, std::ios::binary);
  if (!file) throw DataError("cannot write report file " + config.report_out);
  write_report(file, report);
  if (!file) throw DataError("error writing " + config.report_out);
  for (const auto& s : report.summary) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "MEAN method=%s fraction=%.4f runs=%d P=%.4f R=%.4f F1=%.4f\n",
                  to_string(s.method), s.fraction, s.runs, s.precision, s.recall, s.f1);
    out << buf;
  }
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Graph-based semi-supervised CRF training for slot filling", "gssl"};
  app.require_subcommand(1);
  Options o;
  app.add_flag("-v,--verbose", o.verbose, "Log progress to stderr");

  auto* gen = app.add_subcommand("generate", "Write a synthetic corpus and lexicon");
  gen->add_option("--seed", o.gen_seed, "Grammar seed")->default_val(1);
  gen->add_option("--count", o.gen_count, "Number of sentences")->required();
  gen->add_option("--out", o.gen_out, "Output directory")->required();

  auto* train = app.add_subcommand("train", "Train a model and score it on a test corpus");
  train->add_option("--method", o.method, "supervised | selftrain | ssl")->default_val("ssl");
  train->add_option("--config", o.config_path, "key = value config file");
  train->add_option("--train", o.train, "Training corpus (labeled and/or unlabeled sentences)");
  train->add_option("--unlabeled", o.unlabeled, "Additional unlabeled corpus");
  train->add_option("--test", o.test, "Labeled test corpus");
  train->add_option("--lexicon", o.lexicon, "Lexicon file");
  train->add_option("--model-out", o.model_out, "Where to write the trained model");

  auto* graph = app.add_subcommand("build-graph", "Build and dump the trigram similarity graph");
  graph->add_option("--train", o.train, "Labeled corpus")->required();
  graph->add_option("--unlabeled", o.unlabeled, "Unlabeled corpus");
  graph->add_option("--lexicon", o.lexicon, "Lexicon file");
  graph->add_option("--k", o.k, "Nearest neighbours per node")->default_val(kDefaultNeighbors);
  graph->add_option("--out", o.out, "Dump file")->required();

  auto* exp = app.add_subcommand("experiment", "Run the multi-split comparison protocol");
  exp->add_option("--config", o.config_path, "key = value config file");
  exp->add_option("--fractions", o.fractions, "Comma-separated labeled fractions");
  exp->add_option("--repeats", o.repeats, "Splits per fraction");
  exp->add_option("--methods", o.methods, "Comma-separated methods");
  exp->add_option("--seed", o.seed, "Split seed");
  exp->add_option("--train", o.train, "Labeled corpus (default: synthetic)");
  exp->add_option("--lexicon", o.lexicon, "Lexicon file");
  exp->add_option("--report-out", o.report_out, "Report file");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*gen) return cmd_generate(o, out);
    if (*train) return cmd_train(o, out, err);
    if (*graph) return cmd_build_graph(o, out);
    if (*exp) return cmd_experiment(o, out, err);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kNumericalError;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const ContractError& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  }
  return kConfigError;
}

}  // namespace gssl::cli
