// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "edgegnn/errors.hpp"
#include "edgegnn/objective/objective.hpp"
#include "edgegnn/scenario/scenario.hpp"
#include "test_util.hpp"

namespace edgegnn {
namespace {

ProblemInstance uniform_instance(int M, int K, int N, cdouble h, double P = 1.0, double noise = 1.0) {
  ProblemInstance p(M, K, N);
  for (auto& c : p.channels) c = h;
  p.power_budget.assign(M, P);
  p.noise_power.assign(K, noise);
  return p;
}

TEST(Sinr, SingleUserNoInterference) {
  ProblemInstance p(1, 1, 2);
  p.channels = {1.0, 0.0};
  p.power_budget = {1.0};
  p.noise_power = {1.0};
  Beamformer V(1, 1, 2);
  V.weights = {1.0, 0.0};
  auto s = sinr_per_ue(p, V);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_DOUBLE_EQ(s[0], 1.0);
  EXPECT_DOUBLE_EQ(sum_rate(p, V), 1.0);
}

TEST(Sinr, ZeroBeamformerGivesZero) {
  auto p = sample_instance(3, 2, 2, 1);
  Beamformer V(3, 2, 2);
  for (double s : sinr_per_ue(p, V)) EXPECT_EQ(s, 0.0);
  EXPECT_EQ(sum_rate(p, V), 0.0);
}

TEST(Sinr, TwoByTwoHandEvaluation) {
  auto p = uniform_instance(2, 2, 1, 1.0);
  Beamformer V(2, 2, 1);
  for (auto& v : V.weights) v = 1.0;
  for (double s : sinr_per_ue(p, V)) EXPECT_DOUBLE_EQ(s, 0.8);
  EXPECT_NEAR(sum_rate(p, V), 2 * std::log2(1.8), 1e-12);
  EXPECT_NEAR(sum_rate(p, V), 1.6959, 1e-4);
}

TEST(Sinr, NonNegativeForRandomInputs) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 50; ++t) {
    auto p = sample_instance(3, 3, 2, t);
    auto V = testing::random_beamformer(3, 3, 2, rng);
    for (double s : sinr_per_ue(p, V)) EXPECT_GE(s, 0.0);
  }
}

TEST(Sinr, TapeMatchesPlainEvaluation) {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 10; ++t) {
    auto p = sample_instance(3, 2, 2, t);
    auto V = testing::random_beamformer(3, 2, 2, rng);
    ad::Tape<double> tape;
    auto c = place_instance(tape, p);
    auto r = sum_rate(c, tape.constant(beamformer_tensor<double>(V)));
    EXPECT_NEAR(r.value()[0], sum_rate(p, V), 1e-10 * std::max(1.0, sum_rate(p, V)));
  }
}

TEST(Sinr, ShapeMismatchRejected) {
  auto p = sample_instance(3, 2, 2, 0);
  EXPECT_THROW(sum_rate(p, Beamformer(2, 2, 2)), ArgumentError);
}

TEST(BsPower, ZeroAndUnitNorm) {
  Beamformer V(2, 2, 2);
  for (double p : bs_power(V)) EXPECT_EQ(p, 0.0);
  for (int m = 0; m < 2; ++m)
    for (int k = 0; k < 2; ++k) V.v(m, k, k) = cdouble(0.6, 0.8);
  for (double p : bs_power(V)) EXPECT_NEAR(p, 2.0, 1e-15);
}

TEST(BsPower, MatchesNaiveLoop) {
  std::mt19937_64 rng(3);
  auto V = testing::random_beamformer(4, 3, 5, rng);
  auto got = bs_power(V);
  for (int m = 0; m < 4; ++m) {
    double want = 0;
    for (int k = 0; k < 3; ++k)
      for (int n = 0; n < 5; ++n) want += V.v(m, k, n).real() * V.v(m, k, n).real() + V.v(m, k, n).imag() * V.v(m, k, n).imag();
    EXPECT_NEAR(got[m], want, 1e-12);
  }
}

TEST(ProjectPower, ScalesDownOverBudgetBlocks) {
  Beamformer V(2, 1, 1);
  V.v(0, 0, 0) = 2.0;                // power 4
  V.v(1, 0, 0) = std::sqrt(0.5);     // power 0.5
  const std::vector<double> P{1.0, 1.0};
  auto W = project_power(V, P);
  EXPECT_NEAR(W.v(0, 0, 0).real(), 1.0, 1e-15);
  EXPECT_EQ(W.v(1, 0, 0), V.v(1, 0, 0));
  auto B = project_power(V, P, PowerNormalization::Boundary);
  for (double p : bs_power(B)) EXPECT_NEAR(p, 1.0, 1e-12);
}

TEST(ProjectPower, FeasibleAndIdempotent) {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 50; ++t) {
    auto V = testing::random_beamformer(3, 2, 2, rng, 3.0);
    const std::vector<double> P{0.5, 1.0, 2.0};
    auto W = project_power(V, P);
    auto pw = bs_power(W);
    for (int m = 0; m < 3; ++m) EXPECT_LE(pw[m], P[m] + 1e-6);
    EXPECT_TRUE(is_feasible(W, P));
    auto W2 = project_power(W, P);
    for (std::size_t i = 0; i < W.weights.size(); ++i) EXPECT_NEAR(std::abs(W2.weights[i] - W.weights[i]), 0.0, 1e-14);
  }
}

TEST(ProjectPower, ZeroBlockStaysZero) {
  Beamformer V(1, 2, 2);
  auto W = project_power(V, std::vector<double>{1.0}, PowerNormalization::Boundary);
  EXPECT_EQ(W, V);
}

TEST(Gradient, MatchesFiniteDifferences) {
  std::mt19937_64 rng(5);
  auto p = sample_instance(2, 2, 2, 3);
  auto V = testing::random_beamformer(2, 2, 2, rng, 0.5);
  Beamformer G;
  const double r0 = sum_rate_with_gradient(p, V, G);
  EXPECT_NEAR(r0, sum_rate(p, V), 1e-12);
  const double h = 1e-6;
  for (std::size_t i = 0; i < V.weights.size(); ++i) {
    for (int part = 0; part < 2; ++part) {
      auto Vp = V, Vm = V;
      const cdouble d = part == 0 ? cdouble(h, 0) : cdouble(0, h);
      Vp.weights[i] += d;
      Vm.weights[i] -= d;
      const double fd = (sum_rate(p, Vp) - sum_rate(p, Vm)) / (2 * h);
      const double an = part == 0 ? G.weights[i].real() : G.weights[i].imag();
      EXPECT_NEAR(an, fd, 1e-5 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST(ScaleInvariance, JointRescalingKeepsSinr) {
  std::mt19937_64 rng(6);
  for (int t = 0; t < 20; ++t) {
    auto p = sample_instance(3, 2, 2, t);
    auto V = testing::random_beamformer(3, 2, 2, rng);
    auto q = p;
    const double c = std::exp(std::uniform_real_distribution<double>(-5, 5)(rng));
    for (auto& h : q.channels) h *= c;
    for (auto& s : q.noise_power) s *= c * c;
    auto a = sinr_per_ue(p, V), b = sinr_per_ue(q, V);
    for (int k = 0; k < 2; ++k) EXPECT_LT(testing::rel_diff(a[k], b[k]), 1e-9);
  }
}

TEST(SumRate, GrowsWithSingleUserPower) {
  auto p = uniform_instance(1, 1, 2, cdouble(0.7, 0.2));
  Beamformer V(1, 1, 2);
  double last = -1;
  for (double a : {0.0, 0.1, 0.5, 1.0, 3.0}) {
    V.v(0, 0, 0) = a;
    const double r = sum_rate(p, V);
    EXPECT_GT(r, last);
    last = r;
  }
}

}  // namespace
}  // namespace edgegnn
