#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "gssl/corpus.hpp"
#include "gssl/crf.hpp"

namespace gssl {

struct OptimizerConfig {
  int memory = 10;
  int max_iterations = 200;
  double grad_tolerance = 1e-5;  // on the gradient infinity-norm
  double armijo_c1 = 1e-4;
  double backtrack_shrink = 0.5;
  int max_line_search_steps = 30;

  void validate() const;
};

enum class StopReason { kConverged, kMaxIterations, kLineSearchFailed };

const char* to_string(StopReason reason);

struct IterationRecord {
  int iteration = 0;
  double objective = 0.0;
  double grad_inf_norm = 0.0;
  double step = 0.0;
};

// Single-line machine-readable form: "iteration=3 objective=... grad_inf=... step=...".
std::string format_record(const IterationRecord& record);

// Writes the gradient at x into `gradient` (fully overwritten) and returns f(x).
using ObjectiveFunction = std::function<double(std::span<const double> x, std::span<double> gradient)>;
using IterationCallback = std::function<void(const IterationRecord&)>;

struct MinimizeResult {
  std::vector<double> x;
  double value = 0.0;
  double grad_inf_norm = 0.0;
  int iterations = 0;
  StopReason reason = StopReason::kConverged;
  std::vector<IterationRecord> trace;
};

// Limited-memory BFGS with backtracking Armijo line search. Accepted steps
// never increase the objective. Throws NumericalError on NaN/Inf.
MinimizeResult lbfgs_minimize(const ObjectiveFunction& f, std::vector<double> x0,
                              const OptimizerConfig& config, const IterationCallback& on_iteration = {});

// Labeled NLL + eta * decoded-unlabeled NLL + gamma * ||w||^2.
struct TrainingObjective {
  std::span<const AlignedSentence> labeled;
  std::span<const AlignedSentence> unlabeled_decoded;
  double gamma = 0.01;
  double eta = 0.1;
};

// Encodes the objective's sentences once against a model (extending its
// feature index) and evaluates value and gradient at arbitrary weights.
class CrfObjective {
 public:
  CrfObjective(const TrainingObjective& objective, CrfModel& model);

  double operator()(std::span<const double> weights, std::span<double> gradient) const;
  std::size_t dimension() const { return model_->num_weights(); }

 private:
  const CrfModel* model_;
  std::vector<EncodedSentence> labeled_;
  std::vector<EncodedSentence> unlabeled_;
  double gamma_;
  double eta_;
};

struct TrainResult {
  CrfModel model;
  MinimizeResult summary;  // summary.x is left empty; weights live in model
};

// Minimizes the objective starting from `initial` (warm start).
TrainResult minimize(const TrainingObjective& objective, CrfModel initial,
                     const OptimizerConfig& config, const IterationCallback& on_iteration = {});

}  // namespace gssl
