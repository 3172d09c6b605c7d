#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "gssl/eval.hpp"
#include "gssl/ssl_trainer.hpp"

namespace gssl {

// Every setting of a batch run. Read from a flat `key = value` file; keys
// are listed in kRunConfigKeys.
struct RunConfig {
  SslConfig ssl;
  std::string train;
  std::string test;
  std::string unlabeled;
  std::string lexicon;
  std::string model_out;
  std::string report_out;
  std::uint64_t seed = 1;
  // Experiment protocol.
  std::vector<double> fractions{0.1, 0.2, 0.3};
  int repeats = 10;
  std::vector<Method> methods{Method::kSupervised, Method::kSelfTrain, Method::kSsl};
  double test_fraction = 0.2;
  // Synthetic corpus used when no train file is given.
  std::uint64_t synthetic_seed = 1;
  std::size_t synthetic_count = 2000;

  // Throws ConfigError for unknown keys or malformed values.
  void set(std::string_view key, std::string_view value);
  ExperimentConfig experiment() const;
};

extern const std::vector<std::string_view> kRunConfigKeys;

RunConfig read_run_config(std::istream& in, const std::string& source = "<stream>");
RunConfig load_run_config(const std::filesystem::path& path);

std::vector<double> parse_double_list(std::string_view text);
std::vector<Method> parse_method_list(std::string_view text);

}  // namespace gssl
