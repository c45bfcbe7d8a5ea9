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

// Line-delimited JSON records for verdicts, audit summaries, and
// verification results. Infinite values are written as the string "inf"
// since JSON has no infinity.

#ifndef FLOWNORM_RECORDS_HPP_
#define FLOWNORM_RECORDS_HPP_

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>

#include "json.hpp"

#include "flownorm/ci_model.hpp"
#include "flownorm/dp_mechanisms.hpp"
#include "flownorm/flow_checker.hpp"
#include "flownorm/numbers.hpp"

namespace flownorm {

inline nlohmann::json JsonNumber(double v) {
  if (std::isfinite(v)) return v;
  return FormatNumber(v);
}

inline nlohmann::json VerdictRecord(const FlowVerdict& fv,
                                    std::uint64_t seed) {
  const FlowEvent& flow = fv.flow;
  const Verdict& v = fv.verdict;
  nlohmann::json rec;
  rec["record"] = "verdict";
  rec["flow_seq"] = flow.seq;
  rec["status"] = Name(v.status);
  rec["reasons"] = nlohmann::json::array();
  for (ReasonCode r : v.reasons) rec["reasons"].push_back(Name(r));
  rec["matched_norms"] = nlohmann::json::array();
  for (const NormOutcome& m : v.matched_norms) {
    rec["matched_norms"].push_back(
        {{"norm", m.norm.str()}, {"outcome", Name(m.outcome)}});
  }
  if (flow.dataset && fv.dataset_totals) {
    rec["dataset"] = flow.dataset->str();
    rec["eps_total"] = JsonNumber(fv.dataset_totals->epsilon);
    rec["delta_total"] = JsonNumber(fv.dataset_totals->delta);
  } else {
    rec["dataset"] = nullptr;
    rec["eps_total"] = nullptr;
    rec["delta_total"] = nullptr;
  }
  rec["seed"] = seed;
  return rec;
}

inline nlohmann::json BudgetRecord(const BudgetLedger& ledger) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& [dataset, entries] : ledger.entries()) {
    const PrivacySpend t = ledger.Totals(dataset);
    nlohmann::json d = {{"dataset", dataset.str()},
                        {"releases", entries.size()},
                        {"eps_total", JsonNumber(t.epsilon)},
                        {"delta_total", JsonNumber(t.delta)},
                        {"exhausted", ledger.Exceeded(dataset)}};
    if (ledger.cap()) {
      d["eps_cap"] = JsonNumber(ledger.cap()->epsilon);
      d["delta_cap"] = JsonNumber(ledger.cap()->delta);
    } else {
      d["eps_cap"] = nullptr;
      d["delta_cap"] = nullptr;
    }
    out.push_back(std::move(d));
  }
  return out;
}

inline nlohmann::json SummaryRecord(const AuditReport& report,
                                    std::uint64_t seed) {
  nlohmann::json rec;
  rec["record"] = "summary";
  rec["budget"] = BudgetRecord(report.budget_state);
  rec["missing_required"] = nlohmann::json::array();
  for (const NormId& id : report.missing_required) {
    rec["missing_required"].push_back(id.str());
  }
  rec["seed"] = seed;
  return rec;
}

inline nlohmann::json VerificationRecord(const DpVerificationResult& r,
                                         std::uint64_t seed) {
  nlohmann::json rec;
  rec["record"] = "verification";
  rec["mechanism"] = r.mechanism;
  rec["method"] = Name(r.method.kind);
  rec["max_log_ratio"] = JsonNumber(r.max_log_ratio);
  rec["epsilon_claimed"] = JsonNumber(r.epsilon_claimed);
  rec["delta_claimed"] = JsonNumber(r.delta_claimed);
  rec["passed"] = r.passed;
  if (r.method.kind == VerificationKind::kMonteCarlo) {
    rec["sample_count"] = r.method.sample_count;
    rec["confidence"] = r.method.confidence;
    // Monte Carlo can only refute or fail to refute.
    rec["conclusion"] = r.passed ? "not_refuted" : "refuted";
  }
  rec["seed"] = seed;
  return rec;
}

}  // namespace flownorm

#endif  // FLOWNORM_RECORDS_HPP_
