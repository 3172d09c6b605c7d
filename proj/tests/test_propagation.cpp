#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "gssl/errors.hpp"
#include "gssl/propagation.hpp"
#include "mad_oracle.hpp"

namespace gssl {
namespace {

TrigramGraph path_graph(std::size_t n, double w) {
  TrigramGraph g;
  g.nodes.resize(n);
  g.adjacency.resize(n);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    g.adjacency[i].push_back({static_cast<int>(i + 1), w});
    g.adjacency[i + 1].push_back({static_cast<int>(i), w});
  }
  return g;
}

TrigramGraph triangle(double w) {
  TrigramGraph g = path_graph(3, w);
  g.adjacency[0].push_back({2, w});
  g.adjacency[2].insert(g.adjacency[2].begin(), {0, w});
  return g;
}

TEST(MadConfig, Validation) {
  MadConfig c;
  EXPECT_NO_THROW(c.validate());
  c.mu2 = -1;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.mu1 = 0;
  c.mu3 = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.max_sweeps = 0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(SeedGraph, AssignsPriors) {
  TrigramGraph g = path_graph(2, 1.0);
  g.nodes[0].is_labeled = true;
  const std::vector<Distribution> q{{0.3, 0.7}, {0.6, 0.4}};
  const std::vector<std::optional<Distribution>> r{Distribution{1.0, 0.0}, std::nullopt};
  const auto d = seed_graph(g, q, r, uniform_distribution(2));
  EXPECT_EQ(d[0].prior, (Distribution{1.0, 0.0}));
  EXPECT_EQ(d[1].prior, (Distribution{0.5, 0.5}));
  EXPECT_EQ(*d[0].seed, q[0]);
  EXPECT_EQ(d[1].current, q[1]);

  const std::vector<Distribution> missing{{0.3, 0.7}, {}};
  EXPECT_THROW(seed_graph(g, missing, r, uniform_distribution(2)), ContractError);
  const std::vector<std::optional<Distribution>> no_r{std::nullopt, std::nullopt};
  EXPECT_THROW(seed_graph(g, q, no_r, uniform_distribution(2)), ContractError);
}

TEST(Propagate, NoSmoothingClosedForm) {
  std::mt19937_64 rng = make_rng(51);
  const auto g = testing::random_graph(rng, 6, 0.5);
  auto d = testing::random_distributions(rng, 6, 3, false);
  const MadConfig cfg{0.7, 0.0, 0.2, 1, 1e-4};
  const auto copy = d;
  propagate(g, d, cfg);
  for (std::size_t v = 0; v < d.size(); ++v)
    for (std::size_t l = 0; l < 3; ++l)
      EXPECT_EQ(d[v].current[l], (cfg.mu1 * (*copy[v].seed)[l] + cfg.mu3 * copy[v].prior[l]) / (cfg.mu1 + cfg.mu3));
}

TEST(Propagate, TwoNodeLinearSystem) {
  // y0 seeded one-hot, y1 seeded uniform, both with uniform priors.
  const MadConfig cfg{1.0, 0.01, 0.01, 10000, 1e-15};
  const auto g = path_graph(2, 1.0);
  std::vector<NodeDistributions> d(2);
  d[0].seed = Distribution{1.0, 0.0};
  d[1].seed = Distribution{0.5, 0.5};
  for (auto& x : d) {
    x.prior = {0.5, 0.5};
    x.current = *x.seed;
  }
  propagate(g, d, cfg);
  // (1.02) y0 - 0.01 y1 = b0, -0.01 y0 + (1.02) y1 = b1 solved by Cramer's rule
  const double a = 1.0 + 0.01 + 0.01, off = -0.01, det = a * a - off * off;
  for (std::size_t l = 0; l < 2; ++l) {
    const double b0 = (*d[0].seed)[l] + 0.01 * 0.5, b1 = 0.5 + 0.01 * 0.5;
    EXPECT_NEAR(d[0].current[l], (b0 * a - off * b1) / det, 1e-6);
    EXPECT_NEAR(d[1].current[l], (a * b1 - off * b0) / det, 1e-6);
  }
}

TEST(Propagate, MatchesDenseSolve) {
  std::mt19937_64 rng = make_rng(53);
  for (int trial = 0; trial < 100; ++trial) {
    const auto n = static_cast<std::size_t>(testing::uniform_int(rng, 1, 4));
    const auto g = testing::random_graph(rng, n, 0.7);
    auto d = testing::random_distributions(rng, n, 3, true);
    const MadConfig cfg{testing::uniform(rng, 0.1, 2), testing::uniform(rng, 0, 2), testing::uniform(rng, 0.01, 1), 100000,
                        1e-13};
    const auto want = testing::dense_mad_solve(g, d, cfg);
    propagate(g, d, cfg);
    for (std::size_t v = 0; v < n; ++v)
      for (std::size_t l = 0; l < 3; ++l) EXPECT_NEAR(d[v].current[l], want[v][l], 1e-6);
  }
}

TEST(Propagate, ObjectiveNonIncreasing) {
  std::mt19937_64 rng = make_rng(57);
  for (int trial = 0; trial < 30; ++trial) {
    const auto n = static_cast<std::size_t>(testing::uniform_int(rng, 2, 12));
    const auto g = testing::random_graph(rng, n, 0.4);
    auto d = testing::random_distributions(rng, n, 4, true);
    const MadConfig cfg{testing::uniform(rng, 0.1, 2), testing::uniform(rng, 0, 3), testing::uniform(rng, 0.01, 1), 50,
                        1e-12};
    double last = objective_value(g, d, cfg);
    propagate(g, d, cfg, [&](const SweepRecord& r) {
      EXPECT_LE(r.objective, last + 1e-12 * std::abs(last));
      last = r.objective;
    });
  }
}

TEST(Propagate, ConsensusUnderStrongSmoothing) {
  auto g = triangle(1.0);
  g.nodes.resize(4);
  g.adjacency.resize(4);
  g.adjacency[2].push_back({3, 0.5});
  g.adjacency[3].push_back({2, 0.5});
  std::mt19937_64 rng = make_rng(59);
  auto d = testing::random_distributions(rng, 4, 3, false);
  const auto out = propagate(g, d, {1.0, 1e6, 0.01, 5000, 1e-12});
  for (std::size_t v = 1; v < 4; ++v)
    for (std::size_t l = 0; l < 3; ++l) EXPECT_NEAR(out[v][l], out[0][l], 1e-3);
}

TEST(Propagate, ClampingLimit) {
  std::mt19937_64 rng = make_rng(61);
  const auto g = testing::random_graph(rng, 8, 0.6);
  auto d = testing::random_distributions(rng, 8, 3, false);
  const auto copy = d;
  const auto out = propagate(g, d, {1e6, 1.0, 0.0, 100, 1e-12});
  for (std::size_t v = 0; v < 8; ++v)
    for (std::size_t l = 0; l < 3; ++l) EXPECT_NEAR(out[v][l], (*copy[v].seed)[l], 1e-3);
}

TEST(Propagate, ReadOutIsDistribution) {
  std::mt19937_64 rng = make_rng(63);
  for (int trial = 0; trial < 30; ++trial) {
    const auto n = static_cast<std::size_t>(testing::uniform_int(rng, 1, 10));
    const auto g = testing::random_graph(rng, n, 0.5);
    auto d = testing::random_distributions(rng, n, 3, true);
    for (const auto& p : propagate(g, d, MadConfig{})) {
      double sum = 0.0;
      for (double x : p) {
        EXPECT_GE(x, 0.0);
        sum += x;
      }
      EXPECT_NEAR(sum, 1.0, 1e-9);
    }
  }
}

TEST(Propagate, AllZeroFallsBackToUniform) {
  TrigramGraph g;
  g.nodes.resize(1);
  g.adjacency.resize(1);
  std::vector<NodeDistributions> d(1);
  d[0].prior = {1.0, 0.0, 0.0};
  d[0].current = {0.0, 0.0, 0.0};
  const auto out = propagate(g, d, {1.0, 0.01, 0.0, 1, 1e-4});  // unseeded, mu3 = 0
  EXPECT_EQ(out[0], uniform_distribution(3));
}

TEST(Propagate, Errors) {
  auto g = path_graph(2, 1e300);
  std::vector<NodeDistributions> d(2);
  for (auto& x : d) {
    x.seed = Distribution{1.0, 0.0};
    x.prior = {0.5, 0.5};
    x.current = {1e300, 1e300};
  }
  EXPECT_THROW(propagate(g, d, {1.0, 1e300, 0.01, 5, 1e-4}), NumericalError);
  d[0].prior = {0.2, 0.2};
  EXPECT_THROW(propagate(g, d, MadConfig{}), ContractError);
  d.pop_back();
  EXPECT_THROW(propagate(g, d, MadConfig{}), ContractError);
}

TEST(ObjectiveValue, Examples) {
  TrigramGraph g;
  g.nodes.resize(2);
  g.adjacency.resize(2);
  std::vector<NodeDistributions> d(2);
  for (auto& x : d) {
    x.seed = Distribution{0.2, 0.8};
    x.prior = {0.2, 0.8};
    x.current = {0.2, 0.8};
  }
  EXPECT_EQ(objective_value(g, d, MadConfig{}), 0.0);

  g = path_graph(2, 3.0);
  const MadConfig cfg{1.0, 2.0, 0.5, 1, 1e-4};
  // identical endpoints: only seed and prior terms remain, and they vanish here
  EXPECT_EQ(objective_value(g, d, cfg), 0.0);

  d[0].current = {1.0, 0.0};
  d[1].current = {0.0, 1.0};
  d[1].seed.reset();
  // seed:   (0.2-1)^2 + (0.8-0)^2                  = 1.28
  // smooth: 3 * ((1-0)^2 + (0-1)^2)                = 6
  // prior:  1.28 + (0.2-0)^2 + (0.8-1)^2           = 1.36
  EXPECT_NEAR(objective_value(g, d, cfg), 1.0 * 1.28 + 2.0 * 6.0 + 0.5 * 1.36, 1e-12);
}

TEST(FormatSweep, KeyValueLine) { EXPECT_EQ(format_sweep({2, 0.5, 0.25}), "sweep=2 objective=0.5 max_delta=0.25"); }

}  // namespace
}  // namespace gssl
