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

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "flownorm/cli.hpp"
#include "flownorm/dp_mechanisms.hpp"
#include "flownorm/dsl.hpp"
#include "flownorm/flow_checker.hpp"
#include "test_support.hpp"

namespace flownorm {
namespace {

// Tolerances and limits.
constexpr double kExactTol = 1e-12;
constexpr double kAnalyticTol = 1e-9;
constexpr double kCompositionTol = 1e-12;
constexpr double kCoverageTol = 0.005;
constexpr double kRatioTol = 1e-12;
constexpr double kBudgetTotalTol = 1e-12;
constexpr std::size_t kGridPoints = 10000;
constexpr std::uint64_t kGaussianDraws = 1000000;
constexpr int kMonotoneCases = 1000;
constexpr int kRoundTripCases = 1000;
constexpr int kFuzzCases = 100000;
constexpr std::size_t kFuzzMaxBytes = 4096;
constexpr double kFuzzMaxSeconds = 0.100;
constexpr int kCoverageDraws = 100000;

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool passed;
  std::string detail;
};

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

std::string Fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

Outcome RandomizedResponseExact() {
  const auto start = Clock::now();
  double worst = 0.0;
  bool ok = true;
  for (double eps : {0.01, 0.1, 1.0, 8.0}) {
    const auto r = VerifyDp(MechanismSpec::RandomizedResponse(eps),
                            VerificationMethod::Exact());
    const double err = std::abs(r.max_log_ratio - eps);
    worst = std::max(worst, err);
    ok = ok && r.passed && err <= kExactTol;
  }
  const double t = Seconds(start);
  ok = ok && t < 1.0;
  return {ok, Fmt("max |ratio - eps| = %.3g, %.3f s", worst, t)};
}

Outcome LaplaceAnalytic() {
  const auto start = Clock::now();
  double worst = 0.0;
  bool ok = true;
  for (double eps : {0.01, 0.1, 1.0, 8.0}) {
    const auto spec = MechanismSpec::LaplaceSum(0.0, 1.0, eps);
    const double ratio = LaplaceGridMaxLogRatio(spec.sensitivity,
                                                spec.NoiseScale(), kGridPoints);
    const auto r = VerifyDp(spec, VerificationMethod::Analytic());
    worst = std::max(worst, std::abs(ratio - eps));
    ok = ok && r.passed && ratio <= eps + kAnalyticTol &&
         std::abs(ratio - eps) <= kAnalyticTol;
  }
  const double t = Seconds(start);
  ok = ok && t < 5.0;
  return {ok, Fmt("max |log sup ratio - eps| = %.3g, %.3f s", worst, t)};
}

Outcome CompositionOracle() {
  const auto start = Clock::now();
  const std::vector<MechanismSpec> specs = {
      MechanismSpec::RandomizedResponse(0.5),
      MechanismSpec::RandomizedResponse(0.5)};
  const auto r = VerifyComposition(std::span<const MechanismSpec>(specs), 1.0);
  const double t = Seconds(start);
  const bool ok = r.passed &&
                  std::abs(r.max_log_ratio - 1.0) <= kCompositionTol &&
                  t < 1.0;
  return {ok, Fmt("joint ratio = %.17g, %.3f s", r.max_log_ratio, t)};
}

Outcome GaussianMonteCarlo() {
  const auto start = Clock::now();
  const auto spec = MechanismSpec::GaussianSum(0.0, 1.0, 0.5, 1e-6, 2026);
  const auto method = VerificationMethod::MonteCarlo(kGaussianDraws);
  const auto calibrated = VerifyDp(spec, method);
  auto weak = spec;
  weak.noise_scale_override = spec.NoiseScale() / 4.0;
  const auto refuted = VerifyDp(weak, method);
  const double t = Seconds(start);
  const bool ok = calibrated.passed && !refuted.passed && t < 60.0;
  return {ok, Fmt("calibrated ratio %.4f (not refuted), sigma/4 ratio %.4f "
                  "(refuted), %.1f s",
                  calibrated.max_log_ratio, refuted.max_log_ratio, t)};
}

Outcome CensusCaseStudy() {
  struct Case {
    const char* flows;
    VerdictStatus status;
    std::vector<ReasonCode> reasons;
    MatchOutcome outcome;
    int exit_code;
  };
  const std::vector<Case> cases = {
      {"census_dp.cif", VerdictStatus::kAppropriate, {},
       MatchOutcome::kMatched, kExitOk},
      {"census_swap.cif", VerdictStatus::kInappropriate,
       {ReasonCode::kPropertyKindMismatch},
       MatchOutcome::kApplicableButPropertyFails, kExitViolation},
      {"census_dp_noparam.cif", VerdictStatus::kInappropriate,
       {ReasonCode::kUnspecifiedDpParameters},
       MatchOutcome::kApplicableButPropertyFails, kExitViolation},
  };
  bool ok = true;
  std::string detail;
  const Context ctx = cli_internal::LoadContext(testing::DataPath("census.cip"));
  for (const Case& c : cases) {
    const auto flows = cli_internal::LoadFlows(testing::DataPath(c.flows));
    const AuditReport report = AuditFlows(ctx, flows);
    bool case_ok = report.verdicts.size() == 1;
    if (case_ok) {
      const Verdict& v = report.verdicts[0].verdict;
      case_ok = v.status == c.status && v.reasons == c.reasons &&
                !v.matched_norms.empty() &&
                v.matched_norms[0].outcome == c.outcome;
    }
    RunConfig cfg;
    cfg.subcommand = Subcommand::kCheck;
    cfg.policy_path = testing::DataPath("census.cip");
    cfg.flow_path = testing::DataPath(c.flows);
    std::ostringstream out, err;
    const int code = Run(cfg, out, err);
    case_ok = case_ok && code == c.exit_code;
    ok = ok && case_ok;
    detail += std::string(c.flows) + " exit " + std::to_string(code) +
              (case_ok ? "" : " (unexpected)") + "; ";
  }
  return {ok, detail};
}

Outcome EpsilonMonotonicity() {
  testing::Gen gen(6);
  int regressions = 0;
  int appropriate = 0;
  for (int i = 0; i < kMonotoneCases; ++i) {
    Context ctx = gen.RandomContext();
    ctx.budget_cap.reset();
    ctx.norms.clear();
    InformationNorm n;
    n.id = NormId("dp_norm");
    n.modality = Modality::kPermitted;
    if (gen.Coin(0.3)) n.sender = gen.PatternOver(ctx.roles);
    if (gen.Coin(0.3)) n.receiver = gen.PatternOver(ctx.roles);
    if (gen.Coin(0.3)) n.attributes = gen.PatternOver(ctx.attributes);
    if (gen.Coin(0.3)) n.principles = gen.Subset(ctx.principles);
    std::optional<TrustModel> floor;
    if (gen.Coin()) floor = gen.Model();
    n.property = DpAtMost{floor, gen.Real(0.01, 10.0), gen.Delta()};
    ctx.norms.push_back(n);

    FlowEvent f = gen.RandomFlow(ctx, 1);
    const double eps = gen.Coin(0.1) ? gen.Epsilon() : gen.Real(0.0, 12.0);
    const double delta = gen.Delta();
    const TrustModel model = gen.Model();
    f.property = TransmissionProperty::Dp({model, eps, delta, {}, 1});
    f.dataset = DatasetId("ds");
    const Verdict before = CheckFlow(ctx, BudgetLedger(), f).verdict;
    const double smaller = std::isinf(eps) ? gen.Real(0, 100) : eps * gen.Real(0, 1);
    f.property = TransmissionProperty::Dp({model, smaller, delta, {}, 1});
    const Verdict after = CheckFlow(ctx, BudgetLedger(), f).verdict;
    if (before.status == VerdictStatus::kAppropriate) {
      ++appropriate;
      regressions += after.status != VerdictStatus::kAppropriate;
    }
  }
  const bool ok = regressions == 0 && appropriate > 0;
  return {ok, std::to_string(kMonotoneCases) + " cases, " +
                  std::to_string(appropriate) + " appropriate at eps, " +
                  std::to_string(regressions) + " regressions"};
}

Outcome DslRoundTripAndFuzz() {
  testing::Gen gen(7);
  int mismatches = 0;
  for (int i = 0; i < kRoundTripCases; ++i) {
    const Context ctx = gen.RandomContext();
    const auto first = ParsePolicy(SourceDocument{PrintPolicy(ctx)});
    if (!first.ok()) {
      ++mismatches;
      continue;
    }
    const auto second =
        ParsePolicy(SourceDocument{PrintPolicy(first.value())});
    if (!second.ok() || !(second.value() == first.value()) ||
        !(first.value() == ctx)) {
      ++mismatches;
    }
  }

  std::mt19937_64 rng(8);
  const std::string tokens[] = {
      "context ", "norm ", "flow ", "allow ", "forbid ", "require ", "from ",
      "to ", "about ", "attrs ", "when ", "with ", "dp", "dp_at_most",
      "(", ")", "[", "]", "{", "}", ",", ";", "=", "<=", ">=", "*", "eps",
      "delta", "model", "central", "inf", "1e-6", "0.5", "\"", "#", "\n",
      "\r\n", "x", "budget", "not ", "seq=", "entry ", "ledger "};
  double slowest = 0.0;
  int crashes = 0;
  std::string input;
  for (int i = 0; i < kFuzzCases; ++i) {
    input.clear();
    const std::size_t len = rng() % (kFuzzMaxBytes + 1);
    const bool structured = (i & 1) != 0;
    while (input.size() < len) {
      if (structured && rng() % 4 != 0) {
        input += tokens[rng() % std::size(tokens)];
      } else {
        input.push_back(static_cast<char>(rng() & 0xff));
      }
    }
    input.resize(len);
    const auto start = Clock::now();
    try {
      const SourceDocument doc{input};
      (void)ParsePolicy(doc);
      (void)ParseFlows(doc);
    } catch (...) {
      ++crashes;
    }
    slowest = std::max(slowest, Seconds(start));
  }
  const bool ok =
      mismatches == 0 && crashes == 0 && slowest <= kFuzzMaxSeconds;
  return {ok, std::to_string(mismatches) + " round-trip mismatches in " +
                  std::to_string(kRoundTripCases) + "; " +
                  std::to_string(crashes) + " fuzz exceptions in " +
                  std::to_string(kFuzzCases) +
                  Fmt("; slowest input %.2f ms", slowest * 1000.0)};
}

Outcome BudgetLedgerFlip() {
  const Context ctx = cli_internal::LoadContext(testing::DataPath("census.cip"));
  const auto flows =
      cli_internal::LoadFlows(testing::DataPath("census_budget.cif"));
  const AuditReport report = AuditFlows(ctx, flows);
  bool ok = report.verdicts.size() == 9;
  int first_bad = 0;
  for (std::size_t i = 0; ok && i < report.verdicts.size(); ++i) {
    const Verdict& v = report.verdicts[i].verdict;
    if (v.status != VerdictStatus::kAppropriate && first_bad == 0) {
      first_bad = static_cast<int>(i) + 1;
      ok = v.reasons == std::vector<ReasonCode>{ReasonCode::kBudgetExhausted};
    }
  }
  const double total = report.budget_state.Totals(DatasetId("dec2020")).epsilon;
  ok = ok && first_bad == 9 && std::abs(total - 9.0) <= kBudgetTotalTol;
  return {ok, "first Inappropriate at flow " + std::to_string(first_bad) +
                  Fmt(", eps_total = %.17g", total)};
}

Outcome AccuracyTradeOff() {
  const auto strong = MechanismSpec::LaplaceSum(0.0, 1.0, 0.1);
  const auto weak = MechanismSpec::LaplaceSum(0.0, 1.0, 1.0);
  const double half_width = AccuracyBound(weak, 0.95);
  int covered = 0;
  for (int s = 0; s < kCoverageDraws; ++s) {
    SeededRng rng(DeriveSeed(2026, static_cast<std::uint64_t>(s)));
    covered += std::abs(SampleLaplace(rng, weak.NoiseScale())) <= half_width;
  }
  const double coverage = covered / static_cast<double>(kCoverageDraws);
  const double ratio = AccuracyBound(strong, 0.95) / half_width;
  const bool ok = std::abs(half_width - std::log(20.0)) <= kExactTol &&
                  coverage >= 0.95 - kCoverageTol &&
                  coverage <= 0.95 + kCoverageTol &&
                  std::abs(ratio - 10.0) <= kRatioTol;
  return {ok, Fmt("half-width %.6f, coverage %.4f, width ratio %.17g",
                  half_width, coverage, ratio)};
}

}  // namespace
}  // namespace flownorm

int main() {
  using flownorm::Outcome;
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria =
      {{"1 randomized response exact ratio",
        flownorm::RandomizedResponseExact},
       {"2 laplace analytic density ratio", flownorm::LaplaceAnalytic},
       {"3 composition oracle", flownorm::CompositionOracle},
       {"4 gaussian monte carlo claim", flownorm::GaussianMonteCarlo},
       {"5 census case study", flownorm::CensusCaseStudy},
       {"6 epsilon monotonicity", flownorm::EpsilonMonotonicity},
       {"7 dsl round trip and fuzz", flownorm::DslRoundTripAndFuzz},
       {"8 budget ledger", flownorm::BudgetLedgerFlip},
       {"9 accuracy trade-off", flownorm::AccuracyTradeOff}};
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o{false, ""};
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.passed;
    std::printf("%s [%s] %s\n", o.passed ? "PASS" : "FAIL", name,
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
