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

// Differential-privacy mechanisms named by transmission properties, and
// verifiers for the (ε, δ) inequality
//
//   Pr[M(X) ∈ S] ≤ e^ε · Pr[M(X') ∈ S] + δ
//
// over adjacent datasets X, X' (change-one-record).
//
// Sensitivity always comes from the declared clipping bounds, never from
// the data. Floating-point side channels (snapping) are not mitigated.

#ifndef FLOWNORM_DP_MECHANISMS_HPP_
#define FLOWNORM_DP_MECHANISMS_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <future>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "flownorm/ci_model.hpp"

namespace flownorm {

class MechanismError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// ---------------------------------------------------------------------------
// Randomness

// splitmix64 finalizer; used to derive independent child seeds.
inline std::uint64_t DeriveSeed(std::uint64_t root, std::uint64_t index) {
  std::uint64_t z = root + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : engine_(seed) {}

  // Uniform on the open interval (0, 1) with 53 bits of resolution.
  double UniformOpen() {
    const std::uint64_t bits = engine_() >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
  }

 private:
  std::mt19937_64 engine_;
};

// Laplace(0, b) quantile function.
inline double LaplaceInverseCdf(double u, double b) {
  const double centered = u - 0.5;
  if (centered == 0.0) return 0.0;
  const double sign = centered < 0 ? -1.0 : 1.0;
  return -b * sign * std::log1p(-2.0 * std::abs(centered));
}

inline double SampleLaplace(SeededRng& rng, double b) {
  return LaplaceInverseCdf(rng.UniformOpen(), b);
}

// Box-Muller, cosine branch only.
inline double SampleGaussian(SeededRng& rng, double sigma) {
  const double u1 = rng.UniformOpen();
  const double u2 = rng.UniformOpen();
  return sigma * std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

// ---------------------------------------------------------------------------
// Datasets and specs

enum class Query { kSum, kMean };

class Dataset {
 public:
  // Records outside [lo, hi] are clipped to the nearest bound.
  static Dataset Clipped(std::span<const double> values, double lo,
                         double hi) {
    if (values.empty()) throw MechanismError("dataset must not be empty");
    if (!(lo <= hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
      throw MechanismError("dataset bounds must satisfy lo <= hi");
    }
    Dataset ds;
    ds.lo_ = lo;
    ds.hi_ = hi;
    ds.records_.reserve(values.size());
    for (double v : values) {
      if (std::isnan(v)) throw MechanismError("dataset record is NaN");
      ds.records_.push_back(std::clamp(v, lo, hi));
    }
    return ds;
  }

  std::span<const double> records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  double lo() const { return lo_; }
  double hi() const { return hi_; }

  double Sum() const {
    double s = 0.0;
    for (double r : records_) s += r;
    return s;
  }
  double Mean() const { return Sum() / static_cast<double>(size()); }
  double Evaluate(Query q) const { return q == Query::kSum ? Sum() : Mean(); }

  // Largest change of the query when one record changes within bounds.
  double Sensitivity(Query q) const {
    const double range = hi_ - lo_;
    return q == Query::kSum ? range : range / static_cast<double>(size());
  }

 private:
  Dataset() = default;

  std::vector<double> records_;
  double lo_ = 0.0;
  double hi_ = 0.0;
};

enum class MechanismName {
  kLaplaceSum,
  kLaplaceMean,
  kGaussianSum,
  kRandomizedResponseBinary,
};

inline std::string_view Name(MechanismName m) {
  return kMechanismNames[static_cast<std::size_t>(m)];
}

// Canonical policy-file names plus the short CLI spellings.
inline std::optional<MechanismName> ParseMechanismName(std::string_view s) {
  for (std::size_t i = 0; i < kMechanismNames.size(); ++i) {
    if (s == kMechanismNames[i]) return static_cast<MechanismName>(i);
  }
  if (s == "laplace-sum") return MechanismName::kLaplaceSum;
  if (s == "laplace-mean") return MechanismName::kLaplaceMean;
  if (s == "gaussian-sum") return MechanismName::kGaussianSum;
  if (s == "rr") return MechanismName::kRandomizedResponseBinary;
  return std::nullopt;
}

inline double LaplaceScale(double sensitivity, double epsilon) {
  return sensitivity / epsilon;
}

// Classical calibration; valid for ε < 1.
inline double GaussianSigma(double sensitivity, double epsilon, double delta) {
  return sensitivity * std::sqrt(2.0 * std::log(1.25 / delta)) / epsilon;
}

struct MechanismSpec {
  MechanismName name = MechanismName::kLaplaceSum;
  double epsilon = 1.0;
  double delta = 0.0;
  double sensitivity = 1.0;
  std::uint64_t rng_seed = 0;
  // Replaces the calibrated noise scale; models a miscalibrated mechanism
  // that still claims (epsilon, delta).
  std::optional<double> noise_scale_override;

  static MechanismSpec LaplaceSum(double lo, double hi, double epsilon,
                                  std::uint64_t seed = 0) {
    return {MechanismName::kLaplaceSum, epsilon, 0.0, hi - lo, seed, {}};
  }
  static MechanismSpec LaplaceMean(double lo, double hi, std::size_t n,
                                   double epsilon, std::uint64_t seed = 0) {
    return {MechanismName::kLaplaceMean, epsilon, 0.0,
            (hi - lo) / static_cast<double>(n), seed, {}};
  }
  static MechanismSpec GaussianSum(double lo, double hi, double epsilon,
                                   double delta, std::uint64_t seed = 0) {
    return {MechanismName::kGaussianSum, epsilon, delta, hi - lo, seed, {}};
  }
  static MechanismSpec RandomizedResponse(double epsilon,
                                          std::uint64_t seed = 0) {
    return {MechanismName::kRandomizedResponseBinary, epsilon, 0.0, 1.0, seed,
            {}};
  }

  bool is_laplace() const {
    return name == MechanismName::kLaplaceSum ||
           name == MechanismName::kLaplaceMean;
  }

  void Validate() const {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
      throw MechanismError("epsilon must be finite and > 0");
    }
    if (!(sensitivity > 0.0) || !std::isfinite(sensitivity)) {
      throw MechanismError("sensitivity must be finite and > 0");
    }
    if (name == MechanismName::kGaussianSum) {
      if (!(epsilon < 1.0)) {
        throw MechanismError("gaussian_sum requires 0 < epsilon < 1");
      }
      if (!(delta > 0.0 && delta < 1.0)) {
        throw MechanismError("gaussian_sum requires 0 < delta < 1");
      }
    } else if (delta != 0.0) {
      throw MechanismError(std::string(Name(name)) + " requires delta = 0");
    }
    if (noise_scale_override && !(*noise_scale_override > 0.0)) {
      throw MechanismError("noise scale must be > 0");
    }
  }

  // Laplace b or Gaussian σ. Undefined for randomized response.
  double NoiseScale() const {
    if (noise_scale_override) return *noise_scale_override;
    if (name == MechanismName::kGaussianSum) {
      return GaussianSigma(sensitivity, epsilon, delta);
    }
    return LaplaceScale(sensitivity, epsilon);
  }
};

// ---------------------------------------------------------------------------
// Mechanisms

// Probability that randomized response reports the true bit.
inline double RandomizedResponseTruthProbability(double epsilon) {
  return 1.0 / (1.0 + std::exp(-epsilon));
}

inline int RandomizedResponse(int bit, double epsilon, std::uint64_t seed) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw MechanismError("randomized response needs finite epsilon > 0");
  }
  if (bit != 0 && bit != 1) throw MechanismError("bit must be 0 or 1");
  SeededRng rng(seed);
  const bool truthful =
      rng.UniformOpen() < RandomizedResponseTruthProbability(epsilon);
  return truthful ? bit : 1 - bit;
}

// One randomized bit per record; record i uses DeriveSeed(seed, i).
inline std::vector<int> RandomizedResponseAll(std::span<const int> bits,
                                              double epsilon,
                                              std::uint64_t seed) {
  std::vector<int> out;
  out.reserve(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    out.push_back(RandomizedResponse(bits[i], epsilon, DeriveSeed(seed, i)));
  }
  return out;
}

// Unbiased estimate of the true fraction of ones from randomized reports.
inline double DebiasedMean(std::span<const int> reports, double epsilon) {
  if (reports.empty()) throw MechanismError("no reports");
  double ones = 0;
  for (int r : reports) ones += r;
  const double observed = ones / static_cast<double>(reports.size());
  const double p = RandomizedResponseTruthProbability(epsilon);
  return (observed - (1.0 - p)) / (2.0 * p - 1.0);
}

inline double LaplaceRelease(const Dataset& ds, Query query, double epsilon,
                             std::uint64_t seed) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw MechanismError("laplace release needs finite epsilon > 0");
  }
  SeededRng rng(seed);
  const double b = LaplaceScale(ds.Sensitivity(query), epsilon);
  return ds.Evaluate(query) + SampleLaplace(rng, b);
}

inline double GaussianRelease(const Dataset& ds, Query query, double epsilon,
                              double delta, std::uint64_t seed) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw MechanismError("gaussian release needs 0 < epsilon < 1");
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    throw MechanismError("gaussian release needs 0 < delta < 1");
  }
  SeededRng rng(seed);
  const double sigma = GaussianSigma(ds.Sensitivity(query), epsilon, delta);
  return ds.Evaluate(query) + SampleGaussian(rng, sigma);
}

// Noise draw for a real-valued spec, centered at `true_value`.
inline double SampleRelease(const MechanismSpec& spec, double true_value,
                            SeededRng& rng) {
  if (spec.name == MechanismName::kGaussianSum) {
    return true_value + SampleGaussian(rng, spec.NoiseScale());
  }
  return true_value + SampleLaplace(rng, spec.NoiseScale());
}

// ---------------------------------------------------------------------------
// Verification

enum class VerificationKind { kExactEnumeration, kAnalyticDensity, kMonteCarlo };

inline std::string_view Name(VerificationKind k) {
  switch (k) {
    case VerificationKind::kExactEnumeration:
      return "exact";
    case VerificationKind::kAnalyticDensity:
      return "analytic";
    case VerificationKind::kMonteCarlo:
      return "mc";
  }
  return "?";
}

struct VerificationMethod {
  VerificationKind kind = VerificationKind::kExactEnumeration;
  std::uint64_t sample_count = 0;
  // Per-event two-sided confidence of the Wilson guard band.
  double confidence = 0.0;

  static VerificationMethod Exact() {
    return {VerificationKind::kExactEnumeration, 0, 0.0};
  }
  static VerificationMethod Analytic() {
    return {VerificationKind::kAnalyticDensity, 0, 0.0};
  }
  static VerificationMethod MonteCarlo(std::uint64_t samples,
                                       double confidence = 1.0 - 1e-6) {
    return {VerificationKind::kMonteCarlo, samples, confidence};
  }

  // Slack allowed between the measured ratio and the claim.
  double tolerance() const {
    switch (kind) {
      case VerificationKind::kExactEnumeration:
        return 1e-12;
      case VerificationKind::kAnalyticDensity:
        return 1e-9;
      case VerificationKind::kMonteCarlo:
        return 0.0;  // the guard band already absorbs sampling error
    }
    return 0.0;
  }
};

struct PrivacyClaim {
  double epsilon = 0.0;
  double delta = 0.0;
};

struct DpVerificationResult {
  std::string mechanism;
  // Sup over tested events and both orderings of the adjacent pair of
  // log((Pr[M(X) ∈ S] - δ) / Pr[M(X') ∈ S]). For Monte Carlo the
  // numerator uses the lower and the denominator the upper confidence
  // bound, so a value above the claim is a refutation and anything else is
  // only a failure to refute.
  double max_log_ratio = -kInfinity;
  double epsilon_claimed = 0.0;
  double delta_claimed = 0.0;
  bool passed = false;
  VerificationMethod method;
};

// A mechanism on one input bit with finitely many outcomes, given by its
// log outcome probabilities for each input.
struct FiniteMechanism {
  std::array<std::vector<double>, 2> log_prob;
  // Privacy cost the mechanism declares.
  double epsilon = 0.0;

  static FiniteMechanism RandomizedResponse(double epsilon) {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
      throw MechanismError("randomized response needs finite epsilon > 0");
    }
    // log p = -log(1 + e^-ε), log(1 - p) = -ε - log(1 + e^-ε).
    const double tail = std::log1p(std::exp(-epsilon));
    const double truth = -tail;
    const double lie = -epsilon - tail;
    FiniteMechanism m;
    m.log_prob[0] = {truth, lie};
    m.log_prob[1] = {lie, truth};
    m.epsilon = epsilon;
    return m;
  }

  // Ignores its input; costs nothing.
  static FiniteMechanism Constant() {
    FiniteMechanism m;
    m.log_prob[0] = {0.0};
    m.log_prob[1] = {0.0};
    return m;
  }

  std::size_t outcome_count() const { return log_prob[0].size(); }
};

namespace dp_internal {

inline constexpr std::size_t kMaxJointOutcomes = std::size_t{1} << 20;
inline constexpr std::size_t kMaxSubsetOutcomes = 16;

inline double LogSumExp(std::span<const double> xs) {
  double hi = -kInfinity;
  for (double x : xs) hi = std::max(hi, x);
  if (std::isinf(hi)) return hi;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - hi);
  return hi + std::log(s);
}

// log((P - δ) / Q) for log-probabilities; -∞ when P ≤ δ.
inline double AdjustedLogRatio(double log_p, double log_q, double delta) {
  if (delta == 0.0) return log_p - log_q;
  const double p = std::exp(log_p);
  if (p <= delta) return -kInfinity;
  return std::log(p - delta) - log_q;
}

// Exact sup over all events of the joint outcome distribution. With δ = 0
// the worst event is a single outcome (a ratio of sums never exceeds the
// largest termwise ratio), so singletons are exhaustive. With δ > 0 every
// subset is enumerated.
inline double ExactMaxLogRatio(const std::array<std::vector<double>, 2>& lp,
                               double delta) {
  const std::size_t n = lp[0].size();
  double best = -kInfinity;
  if (delta == 0.0) {
    for (std::size_t o = 0; o < n; ++o) {
      best = std::max({best, lp[0][o] - lp[1][o], lp[1][o] - lp[0][o]});
    }
    return best;
  }
  if (n > kMaxSubsetOutcomes) {
    throw MechanismError("too many outcomes for exact (eps, delta) check");
  }
  std::vector<double> a, b;
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << n); ++mask) {
    a.clear();
    b.clear();
    for (std::size_t o = 0; o < n; ++o) {
      if (mask & (std::uint64_t{1} << o)) {
        a.push_back(lp[0][o]);
        b.push_back(lp[1][o]);
      }
    }
    const double la = LogSumExp(a);
    const double lb = LogSumExp(b);
    best = std::max({best, AdjustedLogRatio(la, lb, delta),
                     AdjustedLogRatio(lb, la, delta)});
  }
  return best;
}

// Joint log-probabilities of independent mechanisms run on the same bit.
inline std::array<std::vector<double>, 2> JointTable(
    std::span<const FiniteMechanism> mechanisms) {
  std::array<std::vector<double>, 2> joint = {std::vector<double>{0.0},
                                              std::vector<double>{0.0}};
  for (const FiniteMechanism& m : mechanisms) {
    if (m.log_prob[0].size() != m.log_prob[1].size() ||
        m.log_prob[0].empty()) {
      throw MechanismError("malformed finite mechanism");
    }
    if (joint[0].size() * m.outcome_count() > kMaxJointOutcomes) {
      throw MechanismError("joint outcome space too large to enumerate");
    }
    for (int bit = 0; bit < 2; ++bit) {
      std::vector<double> next;
      next.reserve(joint[bit].size() * m.outcome_count());
      for (double prefix : joint[bit]) {
        for (double lp : m.log_prob[bit]) next.push_back(prefix + lp);
      }
      joint[bit] = std::move(next);
    }
  }
  return joint;
}

inline double NormalQuantile(double p) {
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

struct Interval {
  double lo;
  double hi;
};

inline Interval WilsonInterval(std::uint64_t successes, std::uint64_t trials,
                               double z) {
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2 * n)) / denom;
  const double half =
      z * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

// Guard-banded log((lower(P) - δ) / upper(Q)).
inline double GuardedLogRatio(std::uint64_t count_p, std::uint64_t count_q,
                              std::uint64_t n, double z, double delta) {
  const double lower = WilsonInterval(count_p, n, z).lo;
  const double upper = WilsonInterval(count_q, n, z).hi;
  if (lower <= delta) return -kInfinity;
  return std::log(lower - delta) - std::log(upper);
}

inline constexpr std::uint64_t kChunkSize = 1 << 16;

// `count` noisy releases around `center`. Chunk c draws from
// DeriveSeed(seed, c), so the result does not depend on how chunks are
// spread over worker threads.
inline std::vector<double> DrawReleases(const MechanismSpec& spec,
                                        double center, std::uint64_t count,
                                        std::uint64_t seed) {
  std::vector<double> out(count);
  const std::uint64_t chunks = (count + kChunkSize - 1) / kChunkSize;
  auto fill = [&](std::uint64_t first_chunk, std::uint64_t stride) {
    for (std::uint64_t c = first_chunk; c < chunks; c += stride) {
      SeededRng rng(DeriveSeed(seed, c));
      const std::uint64_t end = std::min(count, (c + 1) * kChunkSize);
      for (std::uint64_t i = c * kChunkSize; i < end; ++i) {
        out[i] = SampleRelease(spec, center, rng);
      }
    }
  };
  const std::uint64_t workers = std::min<std::uint64_t>(
      chunks, std::max(1u, std::thread::hardware_concurrency()));
  if (workers <= 1) {
    fill(0, 1);
    return out;
  }
  std::vector<std::future<void>> jobs;
  for (std::uint64_t w = 0; w < workers; ++w) {
    jobs.push_back(std::async(std::launch::async, fill, w, workers));
  }
  for (auto& j : jobs) j.get();
  return out;
}

inline double MonteCarloRealValued(const MechanismSpec& spec,
                                   const VerificationMethod& method,
                                   const PrivacyClaim& claim) {
  const std::uint64_t n = method.sample_count;
  const double gap = spec.sensitivity;
  std::vector<double> x = DrawReleases(spec, 0.0, n, DeriveSeed(spec.rng_seed, 0));
  std::vector<double> y = DrawReleases(spec, gap, n, DeriveSeed(spec.rng_seed, 1));
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double z = NormalQuantile(1.0 - (1.0 - method.confidence) / 2.0);
  const double scale = spec.NoiseScale();
  const double mid = gap / 2.0;
  double best = -kInfinity;
  // Threshold events {out <= t} and their complements on 201 points
  // spanning ±6 noise scales around the midpoint of the pair.
  for (int k = -100; k <= 100; ++k) {
    const double t = mid + 6.0 * scale * k / 100.0;
    const auto below_x = static_cast<std::uint64_t>(
        std::upper_bound(x.begin(), x.end(), t) - x.begin());
    const auto below_y = static_cast<std::uint64_t>(
        std::upper_bound(y.begin(), y.end(), t) - y.begin());
    const std::uint64_t above_x = n - below_x;
    const std::uint64_t above_y = n - below_y;
    best = std::max({best,
                     GuardedLogRatio(below_x, below_y, n, z, claim.delta),
                     GuardedLogRatio(below_y, below_x, n, z, claim.delta),
                     GuardedLogRatio(above_x, above_y, n, z, claim.delta),
                     GuardedLogRatio(above_y, above_x, n, z, claim.delta)});
  }
  return best;
}

inline double MonteCarloRandomizedResponse(const MechanismSpec& spec,
                                           const VerificationMethod& method,
                                           const PrivacyClaim& claim) {
  const std::uint64_t n = method.sample_count;
  const double p = RandomizedResponseTruthProbability(spec.epsilon);
  std::array<std::uint64_t, 2> ones = {0, 0};
  for (int bit = 0; bit < 2; ++bit) {
    SeededRng rng(DeriveSeed(spec.rng_seed, bit));
    for (std::uint64_t i = 0; i < n; ++i) {
      const bool truthful = rng.UniformOpen() < p;
      ones[bit] += static_cast<std::uint64_t>(truthful ? bit : 1 - bit);
    }
  }
  const double z = NormalQuantile(1.0 - (1.0 - method.confidence) / 2.0);
  const std::array<std::uint64_t, 2> zeros = {n - ones[0], n - ones[1]};
  return std::max({GuardedLogRatio(ones[0], ones[1], n, z, claim.delta),
                   GuardedLogRatio(ones[1], ones[0], n, z, claim.delta),
                   GuardedLogRatio(zeros[0], zeros[1], n, z, claim.delta),
                   GuardedLogRatio(zeros[1], zeros[0], n, z, claim.delta)});
}

}  // namespace dp_internal

// Grid evaluation of the Laplace log density ratio between outputs
// centered at 0 and at `gap`, over `points` points spanning six noise
// scales beyond either center. Returns the sup over the grid and both
// orderings; the closed form is gap / b.
inline double LaplaceGridMaxLogRatio(double gap, double b,
                                     std::size_t points = 10000) {
  const double first = -6.0 * b;
  const double last = gap + 6.0 * b;
  double best = -kInfinity;
  for (std::size_t i = 0; i < points; ++i) {
    const double x =
        first + (last - first) * static_cast<double>(i) /
                    static_cast<double>(points - 1);
    // log f_0(x) - log f_gap(x) = (|x - gap| - |x|) / b
    const double r = (std::abs(x - gap) - std::abs(x)) / b;
    best = std::max({best, r, -r});
  }
  return best;
}

// Checks `spec` against `claim` (by default the spec's own ε and δ).
//
//   exact    - randomized response only; enumerates both single-bit
//              inputs and every outcome.
//   analytic - Laplace only; closed-form log density ratio on a grid.
//   mc       - any mechanism; threshold events with Wilson guard bands.
inline DpVerificationResult VerifyDp(const MechanismSpec& spec,
                                     const VerificationMethod& method,
                                     std::optional<PrivacyClaim> claim = {}) {
  spec.Validate();
  const PrivacyClaim c = claim.value_or(PrivacyClaim{spec.epsilon, spec.delta});
  DpVerificationResult result;
  result.mechanism = std::string(Name(spec.name));
  result.epsilon_claimed = c.epsilon;
  result.delta_claimed = c.delta;
  result.method = method;
  const bool rr = spec.name == MechanismName::kRandomizedResponseBinary;
  switch (method.kind) {
    case VerificationKind::kExactEnumeration: {
      if (!rr) {
        throw MechanismError("exact enumeration needs a finite-output "
                             "mechanism");
      }
      const std::array<FiniteMechanism, 1> one = {
          FiniteMechanism::RandomizedResponse(spec.epsilon)};
      result.max_log_ratio = dp_internal::ExactMaxLogRatio(
          dp_internal::JointTable(one), c.delta);
      break;
    }
    case VerificationKind::kAnalyticDensity:
      if (!spec.is_laplace()) {
        throw MechanismError("analytic density check supports Laplace only");
      }
      // Pure-ε density bound; a δ in the claim is slack left unused.
      result.max_log_ratio =
          LaplaceGridMaxLogRatio(spec.sensitivity, spec.NoiseScale());
      break;
    case VerificationKind::kMonteCarlo:
      if (method.sample_count == 0) {
        throw MechanismError("monte carlo needs a positive sample count");
      }
      if (!(method.confidence > 0.0 && method.confidence < 1.0)) {
        throw MechanismError("confidence must lie in (0, 1)");
      }
      result.max_log_ratio =
          rr ? dp_internal::MonteCarloRandomizedResponse(spec, method, c)
             : dp_internal::MonteCarloRealValued(spec, method, c);
      break;
  }
  result.passed = result.max_log_ratio <= c.epsilon + method.tolerance();
  return result;
}

// Exact joint check of mechanisms run on the same bit. Passes iff the
// joint ratio is within both the summed declared costs and the claim.
inline DpVerificationResult VerifyComposition(
    std::span<const FiniteMechanism> mechanisms, double epsilon_claimed) {
  DpVerificationResult result;
  result.mechanism = "composition";
  result.epsilon_claimed = epsilon_claimed;
  result.method = VerificationMethod::Exact();
  result.max_log_ratio =
      dp_internal::ExactMaxLogRatio(dp_internal::JointTable(mechanisms), 0.0);
  double declared = 0.0;
  for (const FiniteMechanism& m : mechanisms) declared += m.epsilon;
  const double tol = result.method.tolerance();
  result.passed = result.max_log_ratio <= declared + tol &&
                  result.max_log_ratio <= epsilon_claimed + tol;
  return result;
}

inline DpVerificationResult VerifyComposition(
    std::span<const MechanismSpec> specs, double epsilon_claimed) {
  std::vector<FiniteMechanism> finite;
  for (const MechanismSpec& s : specs) {
    if (s.name != MechanismName::kRandomizedResponseBinary) {
      throw MechanismError("composition check needs finite-output "
                           "mechanisms");
    }
    s.Validate();
    finite.push_back(FiniteMechanism::RandomizedResponse(s.epsilon));
  }
  return VerifyComposition(std::span<const FiniteMechanism>(finite),
                           epsilon_claimed);
}

// Half-width of the two-sided interval around the true value that holds
// the release with probability `confidence`.
inline double AccuracyBound(const MechanismSpec& spec, double confidence) {
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw MechanismError("confidence must lie in (0, 1)");
  }
  if (spec.name == MechanismName::kRandomizedResponseBinary) {
    throw MechanismError("randomized response has no real-valued release");
  }
  spec.Validate();
  const double scale = spec.NoiseScale();
  if (spec.is_laplace()) return scale * std::log(1.0 / (1.0 - confidence));
  return scale * dp_internal::NormalQuantile((1.0 + confidence) / 2.0);
}

}  // namespace flownorm

#endif  // FLOWNORM_DP_MECHANISMS_HPP_
