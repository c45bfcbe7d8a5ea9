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

#ifndef FLOWNORM_FLOW_CHECKER_HPP_
#define FLOWNORM_FLOW_CHECKER_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "flownorm/ci_model.hpp"

namespace flownorm {

// Raised when a flow cannot be evaluated at all (unresolved ids, malformed
// parameters). Not a verdict.
class FlowCheckError : public std::runtime_error {
 public:
  explicit FlowCheckError(std::vector<Defect> defects)
      : std::runtime_error(Summarize(defects)), defects_(std::move(defects)) {}

  const std::vector<Defect>& defects() const { return defects_; }

 private:
  static std::string Summarize(const std::vector<Defect>& defects) {
    std::string out = "flow cannot be checked:";
    for (const Defect& d : defects) out += " " + d.ToString() + ";";
    return out;
  }

  std::vector<Defect> defects_;
};

struct PrivacySpend {
  double epsilon = 0.0;
  double delta = 0.0;
  bool operator==(const PrivacySpend&) const = default;
};

// Basic sequential composition: ε adds (∞ absorbs), δ adds and saturates
// at 1.
inline PrivacySpend ComposeBudget(std::span<const PrivacySpend> entries) {
  PrivacySpend total;
  for (const PrivacySpend& e : entries) {
    total.epsilon += e.epsilon;
    total.delta += e.delta;
  }
  total.delta = std::min(1.0, total.delta);
  return total;
}

struct LedgerEntry {
  double epsilon = 0.0;
  double delta = 0.0;
  std::uint64_t seq = 0;
  bool operator==(const LedgerEntry&) const = default;
};

// Relative slack on cap comparisons so that, e.g., ten releases at ε=0.1
// fit a cap of 1 despite binary rounding.
inline constexpr double kBudgetSlack = 1e-12;

class BudgetLedger {
 public:
  BudgetLedger() = default;
  explicit BudgetLedger(std::optional<BudgetCap> cap) : cap_(cap) {}

  const std::optional<BudgetCap>& cap() const { return cap_; }
  void set_cap(std::optional<BudgetCap> cap) { cap_ = cap; }

  const std::map<DatasetId, std::vector<LedgerEntry>>& entries() const {
    return entries_;
  }

  void Record(const DatasetId& dataset, LedgerEntry entry) {
    entries_[dataset].push_back(entry);
  }

  PrivacySpend Totals(const DatasetId& dataset) const {
    auto it = entries_.find(dataset);
    if (it == entries_.end()) return {};
    std::vector<PrivacySpend> spends;
    spends.reserve(it->second.size());
    for (const LedgerEntry& e : it->second) {
      spends.push_back({e.epsilon, e.delta});
    }
    return ComposeBudget(spends);
  }

  bool Exceeded(const DatasetId& dataset) const {
    if (!cap_) return false;
    const PrivacySpend t = Totals(dataset);
    return OverCap(t.epsilon, cap_->epsilon) || OverCap(t.delta, cap_->delta);
  }

  bool operator==(const BudgetLedger&) const = default;

 private:
  static bool OverCap(double total, double cap) {
    if (std::isinf(cap)) return false;
    return total > cap + kBudgetSlack * std::max(1.0, cap);
  }

  std::optional<BudgetCap> cap_;
  std::map<DatasetId, std::vector<LedgerEntry>> entries_;
};

// The six-slot comparison of one norm against one flow. The subject and
// attribute patterns must cover every subject and attribute of the flow.
inline MatchOutcome MatchNorm(const InformationNorm& norm,
                              const FlowEvent& flow) {
  if (!norm.sender.Covers(flow.sender) ||
      !norm.receiver.Covers(flow.receiver) ||
      !norm.subject.CoversAll(flow.subjects) ||
      !norm.attributes.CoversAll(flow.attributes)) {
    return MatchOutcome::kNotApplicable;
  }
  const bool principles_met = std::includes(
      flow.asserted_principles.begin(), flow.asserted_principles.end(),
      norm.principles.begin(), norm.principles.end());
  if (!principles_met) return MatchOutcome::kApplicableButPrincipleMissing;
  if (!PropertySatisfies(flow.property, norm.property)) {
    return MatchOutcome::kApplicableButPropertyFails;
  }
  return MatchOutcome::kMatched;
}

struct CheckResult {
  Verdict verdict;
  BudgetLedger ledger;
};

// Decision procedure, first rule that fires wins:
//   1. a Forbidden norm matches              -> Inappropriate
//   2. the DP release overflows the cap      -> Inappropriate (still charged)
//   3. a Permitted/Required norm matches     -> Appropriate
//   4. one applies but its conditions fail   -> Inappropriate
//   5. otherwise                             -> Undetermined
// Required norms describe flows that must happen, so they also license the
// flows they match.
inline CheckResult CheckFlow(const Context& ctx, BudgetLedger ledger,
                             const FlowEvent& flow) {
  if (auto defects = ValidateFlow(ctx, flow); !defects.empty()) {
    throw FlowCheckError(std::move(defects));
  }
  CheckResult result{{}, std::move(ledger)};
  Verdict& v = result.verdict;

  bool forbidden = false;
  bool permitted = false;
  std::vector<ReasonCode> failures;
  for (const InformationNorm& norm : ctx.norms) {
    const MatchOutcome outcome = MatchNorm(norm, flow);
    if (outcome == MatchOutcome::kNotApplicable) continue;
    v.matched_norms.push_back({norm.id, outcome});
    if (norm.modality == Modality::kForbidden) {
      forbidden = forbidden || outcome == MatchOutcome::kMatched;
      continue;
    }
    switch (outcome) {
      case MatchOutcome::kMatched:
        permitted = true;
        break;
      case MatchOutcome::kApplicableButPrincipleMissing:
        failures.push_back(ReasonCode::kPrincipleMissing);
        break;
      case MatchOutcome::kApplicableButPropertyFails:
        failures.push_back(*PropertyFailure(flow.property, norm.property));
        break;
      case MatchOutcome::kNotApplicable:
        break;
    }
  }

  if (forbidden) {
    v.status = VerdictStatus::kInappropriate;
    v.reasons.push_back(ReasonCode::kForbiddenNormMatched);
  }

  // Spent budget is spent: the charge is recorded whatever the verdict.
  const DpGuarantee* dp = flow.property.dp();
  bool exhausted = false;
  if (dp != nullptr && dp->fully_specified() && flow.dataset) {
    const double count = dp->composed_release_count;
    result.ledger.Record(*flow.dataset,
                         {*dp->epsilon * count, *dp->delta * count, flow.seq});
    exhausted = result.ledger.Exceeded(*flow.dataset);
  }
  if (forbidden) return result;

  if (exhausted) {
    v.status = VerdictStatus::kInappropriate;
    v.reasons.push_back(ReasonCode::kBudgetExhausted);
  } else if (permitted) {
    v.status = VerdictStatus::kAppropriate;
  } else if (!failures.empty()) {
    v.status = VerdictStatus::kInappropriate;
    for (ReasonCode r : failures) {
      if (!v.HasReason(r)) v.reasons.push_back(r);
    }
  } else {
    v.status = VerdictStatus::kUndetermined;
    v.reasons.push_back(ReasonCode::kNoMatchingNorm);
  }
  return result;
}

struct FlowVerdict {
  FlowEvent flow;
  Verdict verdict;
  // Composed spend on the flow's dataset right after this flow.
  std::optional<PrivacySpend> dataset_totals;
};

struct AuditReport {
  std::vector<FlowVerdict> verdicts;
  std::vector<NormId> missing_required;
  BudgetLedger budget_state;
};

// Folds CheckFlow over `flows` starting from `initial` (by default a fresh
// ledger under the context cap), then lists Required norms that no flow
// matched.
inline AuditReport AuditFlows(const Context& ctx,
                              std::span<const FlowEvent> flows,
                              std::optional<BudgetLedger> initial = {}) {
  AuditReport report;
  BudgetLedger ledger =
      initial ? std::move(*initial) : BudgetLedger(ctx.budget_cap);
  ledger.set_cap(ctx.budget_cap);
  std::vector<bool> satisfied(ctx.norms.size(), false);
  for (const FlowEvent& flow : flows) {
    CheckResult r = CheckFlow(ctx, std::move(ledger), flow);
    ledger = std::move(r.ledger);
    for (std::size_t i = 0; i < ctx.norms.size(); ++i) {
      if (ctx.norms[i].modality == Modality::kRequired && !satisfied[i] &&
          MatchNorm(ctx.norms[i], flow) == MatchOutcome::kMatched) {
        satisfied[i] = true;
      }
    }
    std::optional<PrivacySpend> totals;
    if (flow.dataset) totals = ledger.Totals(*flow.dataset);
    report.verdicts.push_back({flow, std::move(r.verdict), totals});
  }
  for (std::size_t i = 0; i < ctx.norms.size(); ++i) {
    if (ctx.norms[i].modality == Modality::kRequired && !satisfied[i]) {
      report.missing_required.push_back(ctx.norms[i].id);
    }
  }
  report.budget_state = std::move(ledger);
  return report;
}

}  // namespace flownorm

#endif  // FLOWNORM_FLOW_CHECKER_HPP_
