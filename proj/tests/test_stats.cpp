#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "dirsim/stats.hpp"

namespace dirsim {
namespace {

Ensemble vertices() {
  const std::vector<SimplexState> v{make_state({1.0, 0.0}), make_state({0.0, 1.0}), make_state({0.0, 0.0})};
  return Ensemble::from_states(v);
}

TEST(Moments, ThreeVertices) {
  const auto m = moments(vertices());
  for (std::size_t a = 0; a < 3; ++a) {
    EXPECT_NEAR(m.mean[a], 1.0 / 3, 1e-15);
    EXPECT_NEAR(m.variance(a), 2.0 / 9, 1e-15);
    for (std::size_t b = 0; b < 3; ++b)
      if (a != b) EXPECT_NEAR(m.covariance(a, b), -1.0 / 9, 1e-15);
  }
}

TEST(Moments, SingleAndIdenticalParticles) {
  for (std::size_t count : {1u, 5000u}) {
    const auto m = moments(Ensemble(count, make_state({0.2, 0.3})));
    EXPECT_NEAR(m.mean[0], 0.2, 1e-13);
    EXPECT_NEAR(m.mean[1], 0.3, 1e-13);
    EXPECT_NEAR(m.mean[2], 0.5, 1e-13);
    for (std::size_t a = 0; a < 3; ++a)
      for (std::size_t b = 0; b < 3; ++b) EXPECT_NEAR(m.second_central(a, b), 0.0, 1e-26);
  }
}

TEST(Moments, EmptyEnsembleRejected) {
  EXPECT_THROW(moments(Ensemble::from_states(std::vector<SimplexState>{})), EmptyEnsemble);
}

std::vector<SimplexState> random_states(std::size_t count, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> ex(1.0);
  std::vector<SimplexState> out;
  for (std::size_t i = 0; i < count; ++i) {
    std::vector<double> g(n);
    double s = 0.0;
    for (auto& v : g) s += (v = ex(rng));
    std::vector<double> y(n - 1);
    for (std::size_t a = 0; a + 1 < n; ++a) y[a] = g[a] / s;
    out.push_back(make_state(y));
  }
  return out;
}

TEST(Moments, MatchesNaiveTwoPassAndRowsSumToZero) {
  const auto states = random_states(3001, 4, 9);
  const auto m = moments(Ensemble::from_states(states));
  // Independent oracle: Welford updates on the full vectors.
  std::vector<double> mean(4, 0.0);
  Matrix c(4, 4);
  for (std::size_t k = 0; k < states.size(); ++k) {
    const auto y = full_vector(states[k]);
    std::vector<double> delta(4);
    for (std::size_t a = 0; a < 4; ++a) {
      delta[a] = y[a] - mean[a];
      mean[a] += delta[a] / static_cast<double>(k + 1);
    }
    for (std::size_t a = 0; a < 4; ++a)
      for (std::size_t b = 0; b < 4; ++b) c(a, b) += delta[a] * (y[b] - mean[b]);
  }
  for (std::size_t a = 0; a < 4; ++a) {
    EXPECT_NEAR(m.mean[a], mean[a], 1e-14);
    double row = 0.0;
    for (std::size_t b = 0; b < 4; ++b) {
      EXPECT_NEAR(m.second_central(a, b), c(a, b) / static_cast<double>(states.size()), 1e-14);
      EXPECT_EQ(m.second_central(a, b), m.second_central(b, a));
      row += m.second_central(a, b);
    }
    EXPECT_NEAR(row, 0.0, 1e-15);
  }
}

TEST(Histogram, SingleParticle) {
  const auto h = joint_histogram(Ensemble(1, make_state({0.31, 0.02})), 10);
  EXPECT_EQ(h.total(), 1u);
  EXPECT_EQ(h.count(3, 0), 1u);
  EXPECT_DOUBLE_EQ(h.density(3, 0), 100.0);
}

TEST(Histogram, UpperEdgeGoesToLastBin) {
  const auto h = joint_histogram(Ensemble(1, make_state({1.0, 0.0})), 50);
  EXPECT_EQ(h.count(49, 0), 1u);
  EXPECT_NEAR(h.cell_center(49), 0.99, 1e-15);
}

TEST(Histogram, UniformOnTriangleHasDensityTwo) {
  const auto h = joint_histogram(Ensemble::from_states(random_states(400000, 3, 4)), 10);
  EXPECT_EQ(h.total(), 400000u);
  std::uint64_t total = 0;
  double integral = 0.0;
  for (std::size_t i = 0; i < 10; ++i)
    for (std::size_t j = 0; j < 10; ++j) {
      total += h.count(i, j);
      integral += h.density(i, j) * 0.01;
      if (i + j <= 8) EXPECT_NEAR(h.density(i, j), 2.0, 0.1) << i << "," << j;
      if (i + j >= 10) EXPECT_EQ(h.count(i, j), 0u);
    }
  EXPECT_EQ(total, 400000u);
  EXPECT_NEAR(integral, 1.0, 1e-12);
}

TEST(Histogram, RequiresThreeComponents) {
  EXPECT_THROW(joint_histogram(Ensemble(2, make_state({0.2})), 10), DimensionMismatch);
  EXPECT_THROW(joint_histogram(Ensemble(2, make_state({0.2, 0.1, 0.1})), 10), DimensionMismatch);
  EXPECT_THROW(JointHistogram(0), InvalidArgument);
}

TEST(ComponentSamples, IncludesLastComponent) {
  const auto s = component_samples(Ensemble(2, make_state({0.2, 0.3})), 2);
  EXPECT_DOUBLE_EQ(s[0], 0.5);
  EXPECT_THROW(component_samples(vertices(), 3), InvalidArgument);
}

TEST(Ks, ExactQuantilesAreWithinOneOverN) {
  const std::size_t n = 400;
  std::vector<double> q;
  for (std::size_t i = 0; i < n; ++i) q.push_back(beta_quantile(5, 5, (i + 0.5) / n));
  const double d = ks_statistic(q, [](double x) { return beta_cdf(5, 5, x); });
  EXPECT_LE(d, 1.0 / n + 1e-12);
  EXPECT_NEAR(d, 0.5 / n, 1e-9);
}

TEST(Ks, SinglePoint) {
  for (double x : {0.2, 0.5, 0.9}) {
    const double f = beta_cdf(5, 5, x);
    EXPECT_NEAR(ks_statistic({x}, [](double v) { return beta_cdf(5, 5, v); }), std::max(f, 1.0 - f), 1e-15);
  }
}

TEST(Ks, MarginalOfDirichletSamples) {
  // Dirichlet(1,1,1) samples from normalized exponentials; the first marginal
  // is Beta(1, 2).
  const auto e = Ensemble::from_states(random_states(20000, 3, 11));
  const auto w = DirichletParams::make({1, 1, 1});
  for (std::size_t a = 0; a < 3; ++a) EXPECT_LT(marginal_ks(e, a, w), 0.015);
  EXPECT_GT(marginal_ks(e, 0, DirichletParams::make({2, 1, 1})), 0.1);
}

MomentReport constant_report(double mean0) {
  MomentReport r{{mean0, 1.0 - mean0}, Matrix(2, 2)};
  return r;
}

TEST(Stationarity, ConstantTraceSettlesAfterOneWindow) {
  ConvergenceTrace trace;
  for (int k = 0; k <= 100; ++k) trace.append(k, constant_report(0.3));
  const auto t = stationarity_detector(trace, 10.0, 1e-3);
  ASSERT_TRUE(t);
  EXPECT_DOUBLE_EQ(*t, 10.0);
}

TEST(Stationarity, LinearDriftIsNeverStationary) {
  ConvergenceTrace trace;
  for (int k = 0; k <= 100; ++k) trace.append(k, constant_report(0.001 * k));
  EXPECT_FALSE(stationarity_detector(trace, 10.0, 1e-3));
  EXPECT_TRUE(stationarity_detector(trace, 10.0, 0.011));
}

TEST(Stationarity, RelaxationDetectedAfterTransient) {
  // Mean relaxes as 0.2 + 0.5 exp(-t).
  ConvergenceTrace trace;
  for (int k = 0; k <= 400; ++k) trace.append(0.1 * k, constant_report(0.2 + 0.5 * std::exp(-0.1 * k)));
  const auto t = stationarity_detector(trace, 2.0, 1e-3);
  ASSERT_TRUE(t);
  // Range over [t - 2, t] is 0.5 e^{-(t-2)} (1 - e^{-2}) < 1e-3.
  const double expected = std::log(0.5 * (1 - std::exp(-2.0)) / 1e-3) + 2.0;
  EXPECT_NEAR(*t, expected, 0.11);
}

TEST(Stationarity, InputValidation) {
  ConvergenceTrace trace;
  for (int k = 0; k <= 10; ++k) trace.append(k, constant_report(0.3));
  EXPECT_THROW(stationarity_detector(trace, 6.0, 1e-3), InvalidArgument);
  EXPECT_THROW(stationarity_detector(trace, 0.0, 1e-3), InvalidArgument);
  EXPECT_THROW(trace.append(10.0, constant_report(0.3)), InvalidArgument);
}

}  // namespace
}  // namespace dirsim
