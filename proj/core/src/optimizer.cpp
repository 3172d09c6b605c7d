#include "gssl/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <numeric>

#include "gssl/errors.hpp"

namespace gssl {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double inf_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

struct CorrectionPair {
  std::vector<double> s;
  std::vector<double> y;
  double rho;
};

// Two-loop recursion: returns -H * g.
std::vector<double> search_direction(std::span<const double> g, const std::deque<CorrectionPair>& history) {
  std::vector<double> q(g.begin(), g.end());
  std::vector<double> alpha(history.size());
  for (std::size_t i = history.size(); i-- > 0;) {
    const auto& p = history[i];
    alpha[i] = p.rho * dot(p.s, q);
    for (std::size_t k = 0; k < q.size(); ++k) q[k] -= alpha[i] * p.y[k];
  }
  if (!history.empty()) {
    const auto& last = history.back();
    const double gamma = dot(last.s, last.y) / dot(last.y, last.y);
    for (double& v : q) v *= gamma;
  }
  for (std::size_t i = 0; i < history.size(); ++i) {
    const auto& p = history[i];
    const double beta = p.rho * dot(p.y, q);
    for (std::size_t k = 0; k < q.size(); ++k) q[k] += (alpha[i] - beta) * p.s[k];
  }
  for (double& v : q) v = -v;
  return q;
}

}  // namespace

void OptimizerConfig::validate() const {
  if (memory < 1) throw ConfigError("lbfgs memory must be >= 1");
  if (max_iterations < 1) throw ConfigError("max_iterations must be >= 1");
  if (!(grad_tolerance > 0.0)) throw ConfigError("grad_tolerance must be positive");
  if (!(armijo_c1 > 0.0 && armijo_c1 < 1.0)) throw ConfigError("armijo c1 must lie in (0, 1)");
  if (!(backtrack_shrink > 0.0 && backtrack_shrink < 1.0)) throw ConfigError("backtrack shrink must lie in (0, 1)");
  if (max_line_search_steps < 1) throw ConfigError("max line search steps must be >= 1");
}

const char* to_string(StopReason reason) {
  switch (reason) {
    case StopReason::kConverged: return "converged";
    case StopReason::kMaxIterations: return "max_iterations";
    case StopReason::kLineSearchFailed: return "line_search_failed";
  }
  return "unknown";
}

std::string format_record(const IterationRecord& r) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "iteration=%d objective=%.10g grad_inf=%.6g step=%.6g", r.iteration,
                r.objective, r.grad_inf_norm, r.step);
  return buf;
}

MinimizeResult lbfgs_minimize(const ObjectiveFunction& f, std::vector<double> x0,
                              const OptimizerConfig& config, const IterationCallback& on_iteration) {
  config.validate();
  const std::size_t n = x0.size();
  MinimizeResult result;
  result.x = std::move(x0);
  std::vector<double> g(n), x_new(n), g_new(n);

  double fx = f(result.x, g);
  if (!std::isfinite(fx) || !all_finite(g)) {
    throw NumericalError("non-finite objective at the initial point (iteration 0)");
  }
  result.value = fx;
  result.grad_inf_norm = inf_norm(g);

  std::deque<CorrectionPair> history;
  result.reason = StopReason::kMaxIterations;
  if (result.grad_inf_norm <= config.grad_tolerance) {
    result.reason = StopReason::kConverged;
    return result;
  }

  for (int iter = 1; iter <= config.max_iterations; ++iter) {
    auto d = search_direction(g, history);
    double slope = dot(g, d);
    if (!(slope < 0.0)) {
      history.clear();
      d.assign(g.begin(), g.end());
      for (double& v : d) v = -v;
      slope = dot(g, d);
    }

    double step = history.empty() ? std::min(1.0, 1.0 / std::sqrt(dot(d, d))) : 1.0;
    bool accepted = false;
    double f_new = 0.0;
    for (int ls = 0; ls < config.max_line_search_steps; ++ls) {
      for (std::size_t k = 0; k < n; ++k) x_new[k] = result.x[k] + step * d[k];
      f_new = f(x_new, g_new);
      if (!std::isfinite(f_new) || !all_finite(g_new)) {
        throw NumericalError("non-finite objective during iteration " + std::to_string(iter));
      }
      if (f_new <= fx + config.armijo_c1 * step * slope) {
        accepted = true;
        break;
      }
      step *= config.backtrack_shrink;
    }
    if (!accepted) {
      result.reason = StopReason::kLineSearchFailed;
      break;
    }

    CorrectionPair pair{std::vector<double>(n), std::vector<double>(n), 0.0};
    for (std::size_t k = 0; k < n; ++k) {
      pair.s[k] = x_new[k] - result.x[k];
      pair.y[k] = g_new[k] - g[k];
    }
    const double sy = dot(pair.s, pair.y);
    if (sy > 1e-10 * std::sqrt(dot(pair.s, pair.s) * dot(pair.y, pair.y))) {
      pair.rho = 1.0 / sy;
      history.push_back(std::move(pair));
      if (history.size() > static_cast<std::size_t>(config.memory)) history.pop_front();
    }

    result.x.swap(x_new);
    g.swap(g_new);
    fx = f_new;
    result.value = fx;
    result.grad_inf_norm = inf_norm(g);
    result.iterations = iter;

    IterationRecord record{iter, fx, result.grad_inf_norm, step};
    result.trace.push_back(record);
    if (on_iteration) on_iteration(record);

    if (result.grad_inf_norm <= config.grad_tolerance) {
      result.reason = StopReason::kConverged;
      break;
    }
  }
  return result;
}

// ---------------------------------------------------------------------------

CrfObjective::CrfObjective(const TrainingObjective& objective, CrfModel& model)
    : model_(&model), gamma_(objective.gamma), eta_(objective.eta) {
  if (!(gamma_ >= 0.0) || !std::isfinite(gamma_)) throw ConfigError("gamma must be finite and >= 0");
  if (!(eta_ >= 0.0) || !std::isfinite(eta_)) throw ConfigError("eta must be finite and >= 0");
  labeled_.reserve(objective.labeled.size());
  for (const auto& s : objective.labeled) {
    if (!s.labeled()) throw ContractError("labeled training sentence without labels");
    labeled_.push_back(encode_for_training(s, model));
  }
  unlabeled_.reserve(objective.unlabeled_decoded.size());
  for (const auto& s : objective.unlabeled_decoded) {
    if (!s.labeled()) throw ContractError("decoded unlabeled sentence without estimated labels");
    unlabeled_.push_back(encode_for_training(s, model));
  }
}

double CrfObjective::operator()(std::span<const double> weights, std::span<double> gradient) const {
  std::fill(gradient.begin(), gradient.end(), 0.0);
  double value = accumulate_log_loss(labeled_, *model_, weights, 1.0, gradient);
  value += accumulate_log_loss(unlabeled_, *model_, weights, eta_, gradient);
  if (gamma_ > 0.0) {
    for (std::size_t k = 0; k < weights.size(); ++k) {
      value += gamma_ * weights[k] * weights[k];
      gradient[k] += 2.0 * gamma_ * weights[k];
    }
  }
  return value;
}

TrainResult minimize(const TrainingObjective& objective, CrfModel initial,
                     const OptimizerConfig& config, const IterationCallback& on_iteration) {
  TrainResult out{std::move(initial), {}};
  CrfObjective f(objective, out.model);
  auto summary = lbfgs_minimize(std::cref(f), out.model.weights, config, on_iteration);
  out.model.weights = std::move(summary.x);
  summary.x.clear();
  out.summary = std::move(summary);
  return out;
}

}  // namespace gssl
