#include "gssl/config.hpp"

#include <charconv>
#include <fstream>
#include <istream>

#include "gssl/errors.hpp"

namespace gssl {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value) {
  throw ConfigError("invalid value '" + std::string(value) + "' for key '" + std::string(key) + "'");
}

double to_double(std::string_view key, std::string_view value) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) bad_value(key, value);
  return out;
}

template <typename Int>
Int to_int(std::string_view key, std::string_view value) {
  Int out = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) bad_value(key, value);
  return out;
}

std::vector<std::string_view> split_commas(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto piece = trim(text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (!piece.empty()) out.push_back(piece);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

const std::vector<std::string_view> kRunConfigKeys = {
    "alpha", "eta", "gamma", "mu1", "mu2", "mu3", "mad_max_sweeps", "mad_convergence_eps",
    "knn_k", "max_outer_iterations", "convergence_threshold", "lbfgs_memory",
    "lbfgs_max_iterations", "grad_tolerance", "armijo_c1", "backtrack_shrink",
    "max_line_search_steps", "train", "test", "unlabeled", "lexicon", "model_out", "report_out",
    "seed", "fractions", "repeats", "methods", "test_fraction", "synthetic_seed",
    "synthetic_count"};

std::vector<double> parse_double_list(std::string_view text) {
  std::vector<double> out;
  for (auto piece : split_commas(text)) out.push_back(to_double("fractions", piece));
  if (out.empty()) throw ConfigError("empty list");
  return out;
}

std::vector<Method> parse_method_list(std::string_view text) {
  std::vector<Method> out;
  for (auto piece : split_commas(text)) out.push_back(parse_method(piece));
  if (out.empty()) throw ConfigError("empty method list");
  return out;
}

void RunConfig::set(std::string_view key, std::string_view value) {
  value = trim(value);
  auto& opt = ssl.optimizer;
  if (key == "alpha") ssl.alpha = to_double(key, value);
  else if (key == "eta") ssl.eta = to_double(key, value);
  else if (key == "gamma") ssl.gamma = to_double(key, value);
  else if (key == "mu1") ssl.mad.mu1 = to_double(key, value);
  else if (key == "mu2") ssl.mad.mu2 = to_double(key, value);
  else if (key == "mu3") ssl.mad.mu3 = to_double(key, value);
  else if (key == "mad_max_sweeps") ssl.mad.max_sweeps = to_int<int>(key, value);
  else if (key == "mad_convergence_eps") ssl.mad.convergence_eps = to_double(key, value);
  else if (key == "knn_k") ssl.knn_k = to_int<int>(key, value);
  else if (key == "max_outer_iterations") ssl.max_outer_iterations = to_int<int>(key, value);
  else if (key == "convergence_threshold") ssl.convergence_threshold = to_double(key, value);
  else if (key == "lbfgs_memory") opt.memory = to_int<int>(key, value);
  else if (key == "lbfgs_max_iterations") opt.max_iterations = to_int<int>(key, value);
  else if (key == "grad_tolerance") opt.grad_tolerance = to_double(key, value);
  else if (key == "armijo_c1") opt.armijo_c1 = to_double(key, value);
  else if (key == "backtrack_shrink") opt.backtrack_shrink = to_double(key, value);
  else if (key == "max_line_search_steps") opt.max_line_search_steps = to_int<int>(key, value);
  else if (key == "train") train = value;
  else if (key == "test") test = value;
  else if (key == "unlabeled") unlabeled = value;
  else if (key == "lexicon") lexicon = value;
  else if (key == "model_out") model_out = value;
  else if (key == "report_out") report_out = value;
  else if (key == "seed") seed = to_int<std::uint64_t>(key, value);
  else if (key == "fractions") fractions = parse_double_list(value);
  else if (key == "repeats") repeats = to_int<int>(key, value);
  else if (key == "methods") methods = parse_method_list(value);
  else if (key == "test_fraction") test_fraction = to_double(key, value);
  else if (key == "synthetic_seed") synthetic_seed = to_int<std::uint64_t>(key, value);
  else if (key == "synthetic_count") synthetic_count = to_int<std::size_t>(key, value);
  else throw ConfigError("unknown config key '" + std::string(key) + "'");
}

ExperimentConfig RunConfig::experiment() const {
  ExperimentConfig out;
  out.fractions = fractions;
  out.repeats = repeats;
  out.methods = methods;
  out.ssl = ssl;
  out.seed = seed;
  out.test_fraction = test_fraction;
  return out;
}

RunConfig read_run_config(std::istream& in, const std::string& source) {
  RunConfig config;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = trim(std::string_view(line).substr(0, line.find('#')));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(source + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    try {
      config.set(trim(body.substr(0, eq)), body.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(source + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return config;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  return read_run_config(in, path.string());
}

}  // namespace gssl
