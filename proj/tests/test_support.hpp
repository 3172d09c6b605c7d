#pragma once

// Shared oracles and random generators for the unit and acceptance tests.
// Oracles here deliberately avoid the library's inference code.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "gssl/corpus.hpp"
#include "gssl/crf.hpp"
#include "gssl/matrix.hpp"
#include "gssl/random.hpp"

namespace gssl::testing {

inline double uniform(std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * uniform_real(rng); }

inline int uniform_int(std::mt19937_64& rng, int lo, int hi) {  // inclusive
  return lo + static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(hi - lo + 1)));
}

inline Matrix random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols, double scale) {
  Matrix m(rows, cols);
  for (double& x : m.data()) x = uniform(rng, -scale, scale);
  return m;
}

// Calls visit(path) for every label sequence of length T over L labels, in
// lexicographic order.
inline void for_each_path(std::size_t T, std::size_t L, const std::function<void(const std::vector<LabelId>&)>& visit) {
  std::vector<LabelId> path(T, 0);
  if (T == 0) return;
  while (true) {
    visit(path);
    std::size_t i = T;
    while (i > 0) {
      --i;
      if (static_cast<std::size_t>(++path[i]) < L) break;
      path[i] = 0;
      if (i == 0) return;
    }
  }
}

inline double path_score(const Matrix& node, const Matrix& trans, const std::vector<LabelId>& path) {
  double s = 0.0;
  for (std::size_t t = 0; t < path.size(); ++t) {
    s += node(t, static_cast<std::size_t>(path[t]));
    if (t > 0) s += trans(static_cast<std::size_t>(path[t - 1]), static_cast<std::size_t>(path[t]));
  }
  return s;
}

struct BruteForce {
  double log_z = 0.0;
  Matrix marginals;
  std::vector<LabelId> argmax;  // first strict maximum in lexicographic order
};

inline BruteForce enumerate(const Matrix& node, const Matrix& trans) {
  const std::size_t T = node.rows(), L = node.cols();
  std::vector<std::pair<std::vector<LabelId>, double>> paths;
  double best = -std::numeric_limits<double>::infinity();
  BruteForce out;
  for_each_path(T, L, [&](const std::vector<LabelId>& p) {
    const double s = path_score(node, trans, p);
    paths.emplace_back(p, s);
    if (s > best) {
      best = s;
      out.argmax = p;
    }
  });
  double m = -std::numeric_limits<double>::infinity();
  for (const auto& [p, s] : paths) m = std::max(m, s);
  double z = 0.0;
  for (const auto& [p, s] : paths) z += std::exp(s - m);
  out.log_z = m + std::log(z);
  out.marginals = Matrix(T, L, 0.0);
  for (const auto& [p, s] : paths) {
    const double prob = std::exp(s - out.log_z);
    for (std::size_t t = 0; t < T; ++t) out.marginals(t, static_cast<std::size_t>(p[t])) += prob;
  }
  return out;
}

// Argmax of sum_t log max(p, floor) + trans by enumeration.
inline std::vector<LabelId> enumerate_constrained(const Matrix& marginals, const Matrix& trans, double floor) {
  Matrix logp(marginals.rows(), marginals.cols());
  for (std::size_t t = 0; t < marginals.rows(); ++t)
    for (std::size_t y = 0; y < marginals.cols(); ++y) logp(t, y) = std::log(std::max(marginals(t, y), floor));
  return enumerate(logp, trans).argmax;
}

inline Matrix random_distribution_rows(std::mt19937_64& rng, std::size_t rows, std::size_t cols, bool allow_zeros) {
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    double sum = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      double x = uniform(rng, 0.0, 1.0);
      if (allow_zeros && uniform_real(rng) < 0.25) x = 0.0;
      m(r, c) = x;
      sum += x;
    }
    if (sum == 0.0) {
      m(r, 0) = 1.0;
      sum = 1.0;
    }
    for (std::size_t c = 0; c < cols; ++c) m(r, c) /= sum;
  }
  return m;
}

// Random sentence over a small vocabulary, with optional labels from `alphabet`.
inline AlignedSentence random_sentence(std::mt19937_64& rng, const std::vector<std::string>& vocab, const Lexicon& lexicon,
                                       std::size_t min_len, std::size_t max_len, const LabelAlphabet* alphabet) {
  AlignedSentence s;
  const auto n = static_cast<std::size_t>(uniform_int(rng, static_cast<int>(min_len), static_cast<int>(max_len)));
  for (std::size_t i = 0; i < n; ++i) s.tokens.push_back(lexicon.make_token(vocab[uniform_index(rng, vocab.size())]));
  if (alphabet) {
    s.labels.emplace();
    for (std::size_t i = 0; i < n; ++i) s.labels->push_back(static_cast<LabelId>(uniform_index(rng, alphabet->size())));
  }
  return s;
}

inline LabelAlphabet make_alphabet(std::size_t num_labels) {
  LabelAlphabet a;
  for (std::size_t i = 1; i < num_labels; ++i) a.add("L" + std::to_string(i));
  return a;
}

inline Lexicon toy_lexicon() { return Lexicon::from_sets({"city_name", "day_name"}, {"from", "to", "on"}); }

inline const std::vector<std::string>& toy_vocab() {
  static const std::vector<std::string> v = {"from", "to", "on", "city_name", "day_name", "flights", "show", "me", "cheap", "delta"};
  return v;
}

// Central finite difference of f at x along coordinate i.
inline double central_difference(const std::function<double(const std::vector<double>&)>& f, std::vector<double> x,
                                 std::size_t i, double h) {
  const double x0 = x[i];
  x[i] = x0 + h;
  const double fp = f(x);
  x[i] = x0 - h;
  const double fm = f(x);
  return (fp - fm) / (2.0 * h);
}

}  // namespace gssl::testing
