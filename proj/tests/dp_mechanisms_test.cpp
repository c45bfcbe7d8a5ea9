//
// Copyright 2026 The Flownorm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "flownorm/dp_mechanisms.hpp"

#include <cmath>
#include <numeric>
#include <vector>

#include "gtest/gtest.h"

namespace flownorm {
namespace {

// Independent reference values, computed offline in double precision.
constexpr double kLn20 = 2.995732273553991;
constexpr double kSigmaEps05Delta1e6 = 10.597605053700947;
constexpr double kZ975 = 1.9599639845400536;

// Brute-force product-form oracle for k independent binary randomized
// responses on one input bit: outcome o has probability
// p^(agreements) (1-p)^(k - agreements), worked in plain probabilities.
double BruteForceComposedRatio(const std::vector<double>& eps) {
  const std::size_t k = eps.size();
  double best = 0.0;
  for (std::uint64_t o = 0; o < (std::uint64_t{1} << k); ++o) {
    double p0 = 1.0;
    double p1 = 1.0;
    for (std::size_t i = 0; i < k; ++i) {
      const double truth = std::exp(eps[i]) / (1.0 + std::exp(eps[i]));
      const int bit = static_cast<int>((o >> i) & 1);
      p0 *= bit == 0 ? truth : 1.0 - truth;
      p1 *= bit == 1 ? truth : 1.0 - truth;
    }
    best = std::max({best, std::log(p0 / p1), std::log(p1 / p0)});
  }
  return best;
}

Dataset Sample(std::vector<double> values, double lo, double hi) {
  return Dataset::Clipped(values, lo, hi);
}

TEST(RandomizedResponseTest, TruthProbabilityAtLn3IsThreeQuarters) {
  // e^ε = 3 exactly, so the probability is 3 / (1 + 3).
  EXPECT_NEAR(RandomizedResponseTruthProbability(std::log(3.0)), 0.75, 1e-15);
}

TEST(RandomizedResponseTest, LargeEpsilonAlmostAlwaysTruthful) {
  EXPECT_GE(RandomizedResponseTruthProbability(50.0), 1.0 - 1e-9);
  int flips = 0;
  for (std::uint64_t s = 0; s < 10000; ++s) {
    flips += RandomizedResponse(1, 50.0, s) != 1;
  }
  EXPECT_EQ(flips, 0);
}

TEST(RandomizedResponseTest, EmpiricalTruthRate) {
  const double eps = std::log(3.0);
  const int n = 100000;
  int truthful = 0;
  for (int s = 0; s < n; ++s) truthful += RandomizedResponse(0, eps, s) == 0;
  const double se = std::sqrt(0.75 * 0.25 / n);
  EXPECT_NEAR(truthful / static_cast<double>(n), 0.75, 5 * se);
}

TEST(RandomizedResponseTest, SeedDeterministic) {
  for (std::uint64_t s = 0; s < 100; ++s) {
    EXPECT_EQ(RandomizedResponse(1, 0.5, s), RandomizedResponse(1, 0.5, s));
  }
}

TEST(RandomizedResponseTest, ParameterErrors) {
  EXPECT_THROW(RandomizedResponse(1, 0.0, 1), MechanismError);
  EXPECT_THROW(RandomizedResponse(1, -1.0, 1), MechanismError);
  EXPECT_THROW(RandomizedResponse(1, kInfinity, 1), MechanismError);
  EXPECT_THROW(RandomizedResponse(2, 1.0, 1), MechanismError);
}

TEST(RandomizedResponseTest, DebiasedMeanRecoversTruth) {
  std::vector<int> bits(1000);
  for (std::size_t i = 0; i < bits.size(); ++i) bits[i] = i % 10 < 3;
  const double eps = std::log(3.0);
  const std::vector<int> reports = RandomizedResponseAll(bits, eps, 99);
  const double p = 0.75;
  const double se =
      std::sqrt(0.5 * 0.5 / 1000.0) / (2 * p - 1);  // worst-case variance
  EXPECT_NEAR(DebiasedMean(reports, eps), 0.3, 3 * se);
}

TEST(VerifyDpTest, ExactRandomizedResponseHitsEpsilon) {
  for (double eps : {0.01, 0.1, 1.0, 8.0}) {
    const auto r = VerifyDp(MechanismSpec::RandomizedResponse(eps),
                            VerificationMethod::Exact());
    EXPECT_NEAR(r.max_log_ratio, eps, 1e-12) << eps;
    EXPECT_TRUE(r.passed);
    EXPECT_EQ(r.mechanism, "randomized_response_binary");
  }
}

TEST(VerifyDpTest, UnderClaimFails) {
  const auto r = VerifyDp(MechanismSpec::RandomizedResponse(0.1),
                          VerificationMethod::Exact(), PrivacyClaim{0.05, 0});
  EXPECT_FALSE(r.passed);
  EXPECT_NEAR(r.max_log_ratio, 0.1, 1e-12);
  EXPECT_EQ(r.epsilon_claimed, 0.05);
}

TEST(VerifyDpTest, ExactWithDeltaSlack) {
  // A positive δ lowers the adjusted ratio below ε.
  const auto r = VerifyDp(MechanismSpec::RandomizedResponse(1.0),
                          VerificationMethod::Exact(), PrivacyClaim{1.0, 0.1});
  EXPECT_TRUE(r.passed);
  EXPECT_LT(r.max_log_ratio, 1.0);
}

TEST(VerifyDpTest, LaplaceAnalyticAtPracticalRegimes) {
  for (double eps : {0.01, 0.1, 1.0, 8.0}) {
    const auto spec = MechanismSpec::LaplaceSum(0.0, 1.0, eps);
    const auto r = VerifyDp(spec, VerificationMethod::Analytic());
    EXPECT_TRUE(r.passed) << eps;
    EXPECT_NEAR(r.max_log_ratio, eps, 1e-9) << eps;
  }
}

TEST(VerifyDpTest, LaplaceGridMatchesClosedForm) {
  EXPECT_NEAR(LaplaceGridMaxLogRatio(3.0, 2.0), 1.5, 1e-12);
  EXPECT_NEAR(LaplaceGridMaxLogRatio(1.0, 1.0 / 8.0), 8.0, 1e-9);
}

TEST(VerifyDpTest, MiscalibratedLaplaceFailsAnalytic) {
  auto spec = MechanismSpec::LaplaceSum(0.0, 1.0, 1.0);
  spec.noise_scale_override = 0.5;
  EXPECT_FALSE(VerifyDp(spec, VerificationMethod::Analytic()).passed);
}

TEST(VerifyDpTest, LaplaceMeanUsesMeanSensitivity) {
  const auto spec = MechanismSpec::LaplaceMean(0.0, 10.0, 100, 0.5);
  EXPECT_DOUBLE_EQ(spec.sensitivity, 0.1);
  EXPECT_DOUBLE_EQ(spec.NoiseScale(), 0.2);
  EXPECT_TRUE(VerifyDp(spec, VerificationMethod::Analytic()).passed);
}

TEST(VerifyDpTest, MonteCarloGaussian) {
  const auto spec = MechanismSpec::GaussianSum(0.0, 1.0, 0.5, 1e-6, 7);
  const auto ok = VerifyDp(spec, VerificationMethod::MonteCarlo(200000));
  EXPECT_TRUE(ok.passed) << ok.max_log_ratio;

  auto weak = spec;
  weak.noise_scale_override = spec.NoiseScale() / 4.0;
  const auto refuted = VerifyDp(weak, VerificationMethod::MonteCarlo(200000));
  EXPECT_FALSE(refuted.passed) << refuted.max_log_ratio;
}

TEST(VerifyDpTest, MonteCarloLaplaceAndRandomizedResponse) {
  EXPECT_TRUE(VerifyDp(MechanismSpec::LaplaceSum(0, 1, 1.0, 3),
                       VerificationMethod::MonteCarlo(100000))
                  .passed);
  EXPECT_TRUE(VerifyDp(MechanismSpec::RandomizedResponse(1.0, 3),
                       VerificationMethod::MonteCarlo(100000))
                  .passed);
  EXPECT_FALSE(VerifyDp(MechanismSpec::RandomizedResponse(2.0, 3),
                        VerificationMethod::MonteCarlo(100000),
                        PrivacyClaim{1.0, 0.0})
                   .passed);
}

TEST(VerifyDpTest, MonteCarloIsSeedDeterministic) {
  const auto spec = MechanismSpec::LaplaceSum(0, 1, 1.0, 11);
  const auto a = VerifyDp(spec, VerificationMethod::MonteCarlo(150000));
  const auto b = VerifyDp(spec, VerificationMethod::MonteCarlo(150000));
  EXPECT_EQ(a.max_log_ratio, b.max_log_ratio);
}

TEST(VerifyDpTest, MethodMismatchRejected) {
  EXPECT_THROW(VerifyDp(MechanismSpec::LaplaceSum(0, 1, 1.0),
                        VerificationMethod::Exact()),
               MechanismError);
  EXPECT_THROW(VerifyDp(MechanismSpec::GaussianSum(0, 1, 0.5, 1e-6),
                        VerificationMethod::Analytic()),
               MechanismError);
  EXPECT_THROW(VerifyDp(MechanismSpec::RandomizedResponse(1.0),
                        VerificationMethod::Analytic()),
               MechanismError);
  EXPECT_THROW(VerifyDp(MechanismSpec::LaplaceSum(0, 1, 1.0),
                        VerificationMethod::MonteCarlo(0)),
               MechanismError);
}

TEST(MechanismSpecTest, Invariants) {
  EXPECT_THROW(MechanismSpec::GaussianSum(0, 1, 0.5, 0.0).Validate(),
               MechanismError);
  EXPECT_THROW(MechanismSpec::GaussianSum(0, 1, 1.5, 1e-6).Validate(),
               MechanismError);
  auto laplace = MechanismSpec::LaplaceSum(0, 1, 1.0);
  laplace.delta = 1e-6;
  EXPECT_THROW(laplace.Validate(), MechanismError);
  EXPECT_THROW(MechanismSpec::LaplaceSum(1, 1, 1.0).Validate(),
               MechanismError);
  EXPECT_THROW(MechanismSpec::LaplaceSum(0, 1, 0.0).Validate(),
               MechanismError);
  EXPECT_EQ(ParseMechanismName("rr"),
            MechanismName::kRandomizedResponseBinary);
  EXPECT_EQ(ParseMechanismName("laplace_sum"), MechanismName::kLaplaceSum);
  EXPECT_EQ(ParseMechanismName("laplace"), std::nullopt);
}

TEST(VerifyCompositionTest, TwoHalvesComposeToOne) {
  const std::vector<MechanismSpec> specs = {
      MechanismSpec::RandomizedResponse(0.5),
      MechanismSpec::RandomizedResponse(0.5)};
  const auto r = VerifyComposition(std::span<const MechanismSpec>(specs), 1.0);
  EXPECT_NEAR(r.max_log_ratio, 1.0, 1e-12);
  EXPECT_NEAR(r.max_log_ratio, BruteForceComposedRatio({0.5, 0.5}), 1e-12);
  EXPECT_TRUE(r.passed);
  EXPECT_FALSE(
      VerifyComposition(std::span<const MechanismSpec>(specs), 0.9).passed);
}

TEST(VerifyCompositionTest, ConstantCostsNothing) {
  const std::vector<FiniteMechanism> ms = {
      FiniteMechanism::RandomizedResponse(1.0), FiniteMechanism::Constant()};
  const auto r = VerifyComposition(std::span<const FiniteMechanism>(ms), 1.0);
  EXPECT_NEAR(r.max_log_ratio, 1.0, 1e-12);
  EXPECT_TRUE(r.passed);
}

TEST(VerifyCompositionTest, ThreeSmallMechanisms) {
  const std::vector<MechanismSpec> specs(3,
                                         MechanismSpec::RandomizedResponse(0.1));
  const auto r = VerifyComposition(std::span<const MechanismSpec>(specs), 0.3);
  EXPECT_NEAR(r.max_log_ratio, 0.3, 1e-12);
  EXPECT_TRUE(r.passed);
}

TEST(VerifyCompositionTest, SumRuleAgainstBruteForce) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> eps(0.01, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    const int k = 1 + static_cast<int>(rng() % 6);
    std::vector<double> es;
    std::vector<MechanismSpec> specs;
    for (int i = 0; i < k; ++i) {
      es.push_back(eps(rng));
      specs.push_back(MechanismSpec::RandomizedResponse(es.back()));
    }
    const double sum = std::accumulate(es.begin(), es.end(), 0.0);
    const auto r =
        VerifyComposition(std::span<const MechanismSpec>(specs), sum);
    EXPECT_NEAR(r.max_log_ratio, BruteForceComposedRatio(es), 1e-9);
    EXPECT_NEAR(r.max_log_ratio, sum, 1e-9);
    EXPECT_TRUE(r.passed);
  }
}

TEST(VerifyCompositionTest, RejectsRealValuedMechanisms) {
  const std::vector<MechanismSpec> specs = {
      MechanismSpec::LaplaceSum(0, 1, 1.0)};
  EXPECT_THROW(VerifyComposition(std::span<const MechanismSpec>(specs), 1.0),
               MechanismError);
}

TEST(LaplaceReleaseTest, MedianDrawLeavesValueUnchanged) {
  EXPECT_EQ(LaplaceInverseCdf(0.5, 1.0), 0.0);
  EXPECT_EQ(10.0 + LaplaceInverseCdf(0.5, 1.0), 10.0);
}

TEST(LaplaceReleaseTest, InverseCdfQuantiles) {
  // F^-1(0.975) = b ln 20 for Laplace(0, b).
  EXPECT_NEAR(LaplaceInverseCdf(0.975, 2.0), 2.0 * kLn20, 1e-12);
  EXPECT_NEAR(LaplaceInverseCdf(0.025, 2.0), -2.0 * kLn20, 1e-12);
}

TEST(LaplaceReleaseTest, HalvingEpsilonDoublesScale) {
  const auto a = MechanismSpec::LaplaceSum(0, 1, 1.0);
  const auto b = MechanismSpec::LaplaceSum(0, 1, 0.5);
  EXPECT_EQ(b.NoiseScale(), 2.0 * a.NoiseScale());
}

TEST(LaplaceReleaseTest, SeedDeterministicAndUnbiased) {
  const Dataset ds = Sample({0.2, 0.9, 1.7, -3.0, 0.5}, 0.0, 1.0);
  EXPECT_DOUBLE_EQ(ds.Sum(), 0.2 + 0.9 + 1.0 + 0.0 + 0.5);
  EXPECT_EQ(LaplaceRelease(ds, Query::kSum, 1.0, 42),
            LaplaceRelease(ds, Query::kSum, 1.0, 42));
  const int n = 100000;
  double sum = 0.0;
  for (int s = 0; s < n; ++s) sum += LaplaceRelease(ds, Query::kSum, 1.0, s);
  const double se = std::sqrt(2.0) * 1.0 / std::sqrt(n);
  EXPECT_NEAR(sum / n, ds.Sum(), 5 * se);

  double mean_sum = 0.0;
  for (int s = 0; s < n; ++s) {
    mean_sum += LaplaceRelease(ds, Query::kMean, 1.0, s);
  }
  EXPECT_NEAR(mean_sum / n, ds.Mean(), 5 * std::sqrt(2.0) * 0.2 / std::sqrt(n));
}

TEST(LaplaceReleaseTest, Errors) {
  const Dataset ds = Sample({1.0}, 0.0, 1.0);
  EXPECT_THROW(LaplaceRelease(ds, Query::kSum, 0.0, 1), MechanismError);
  EXPECT_THROW(LaplaceRelease(ds, Query::kSum, -2.0, 1), MechanismError);
  EXPECT_THROW(Sample({}, 0.0, 1.0), MechanismError);
  EXPECT_THROW(Sample({1.0}, 2.0, 1.0), MechanismError);
}

TEST(GaussianReleaseTest, CalibratedSigma) {
  EXPECT_NEAR(GaussianSigma(1.0, 0.5, 1e-6), kSigmaEps05Delta1e6, 1e-12);
  EXPECT_DOUBLE_EQ(GaussianSigma(1.0, 0.25, 1e-6),
                   2.0 * GaussianSigma(1.0, 0.5, 1e-6));
}

TEST(GaussianReleaseTest, SeedDeterministicAndUnbiased) {
  const Dataset ds = Sample({0.25, 0.75}, 0.0, 1.0);
  EXPECT_EQ(GaussianRelease(ds, Query::kSum, 0.5, 1e-6, 3),
            GaussianRelease(ds, Query::kSum, 0.5, 1e-6, 3));
  const int n = 100000;
  double sum = 0.0;
  double sq = 0.0;
  for (int s = 0; s < n; ++s) {
    const double x = GaussianRelease(ds, Query::kSum, 0.5, 1e-6, s) - 1.0;
    sum += x;
    sq += x * x;
  }
  const double sigma = kSigmaEps05Delta1e6;
  EXPECT_NEAR(sum / n, 0.0, 5 * sigma / std::sqrt(n));
  EXPECT_NEAR(std::sqrt(sq / n) / sigma, 1.0, 0.02);
}

TEST(GaussianReleaseTest, Errors) {
  const Dataset ds = Sample({1.0}, 0.0, 1.0);
  EXPECT_THROW(GaussianRelease(ds, Query::kSum, 1.0, 1e-6, 1), MechanismError);
  EXPECT_THROW(GaussianRelease(ds, Query::kSum, 0.5, 0.0, 1), MechanismError);
  EXPECT_THROW(GaussianRelease(ds, Query::kSum, 0.5, 1.0, 1), MechanismError);
}

TEST(AccuracyBoundTest, LaplaceNinetyFive) {
  const auto spec = MechanismSpec::LaplaceSum(0, 1, 1.0);
  EXPECT_NEAR(AccuracyBound(spec, 0.95), kLn20, 1e-12);
  const int n = 100000;
  int covered = 0;
  for (int s = 0; s < n; ++s) {
    SeededRng rng(static_cast<std::uint64_t>(s));
    covered += std::abs(SampleLaplace(rng, 1.0)) <= kLn20;
  }
  EXPECT_NEAR(covered / static_cast<double>(n), 0.95, 0.005);
}

TEST(AccuracyBoundTest, GaussianUsesNormalQuantile) {
  const auto spec = MechanismSpec::GaussianSum(0, 1, 0.5, 1e-6);
  EXPECT_NEAR(AccuracyBound(spec, 0.95), kSigmaEps05Delta1e6 * kZ975, 1e-9);
}

TEST(AccuracyBoundTest, TradeOff) {
  const double at1 = AccuracyBound(MechanismSpec::LaplaceSum(0, 1, 1.0), 0.95);
  const double at01 =
      AccuracyBound(MechanismSpec::LaplaceSum(0, 1, 0.1), 0.95);
  EXPECT_NEAR(at01 / at1, 10.0, 1e-12);
  double prev = kInfinity;
  for (double eps = 0.001; eps < 20; eps *= 1.5) {
    const double w = AccuracyBound(MechanismSpec::LaplaceSum(0, 1, eps), 0.9);
    EXPECT_LT(w, prev);
    prev = w;
  }
  EXPECT_LT(AccuracyBound(MechanismSpec::LaplaceSum(0, 1, 1.0), 1e-9), 1e-8);
  EXPECT_GT(AccuracyBound(MechanismSpec::LaplaceSum(0, 1, 1e-12), 0.95), 1e12);
}

TEST(AccuracyBoundTest, Errors) {
  EXPECT_THROW(AccuracyBound(MechanismSpec::RandomizedResponse(1.0), 0.95),
               MechanismError);
  EXPECT_THROW(AccuracyBound(MechanismSpec::LaplaceSum(0, 1, 1.0), 1.0),
               MechanismError);
  EXPECT_THROW(AccuracyBound(MechanismSpec::LaplaceSum(0, 1, 1.0), 0.0),
               MechanismError);
}

TEST(DrawReleasesTest, MatchesSequentialChunkReplay) {
  const auto spec = MechanismSpec::LaplaceSum(0, 1, 1.0);
  const std::uint64_t count = 3 * dp_internal::kChunkSize + 17;
  const std::vector<double> parallel =
      dp_internal::DrawReleases(spec, 5.0, count, 77);
  std::vector<double> sequential;
  for (std::uint64_t c = 0; sequential.size() < count; ++c) {
    SeededRng rng(DeriveSeed(77, c));
    for (std::uint64_t i = 0;
         i < dp_internal::kChunkSize && sequential.size() < count; ++i) {
      sequential.push_back(SampleRelease(spec, 5.0, rng));
    }
  }
  EXPECT_EQ(parallel, sequential);
}

TEST(SeededRngTest, OpenUnitInterval) {
  SeededRng rng(0);
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.UniformOpen();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
  EXPECT_NE(DeriveSeed(1, 0), DeriveSeed(1, 1));
  EXPECT_NE(DeriveSeed(1, 0), DeriveSeed(2, 0));
}

}  // namespace
}  // namespace flownorm
