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

// Subcommands behind the `flownorm` executable. Each takes a RunConfig and
// writes to the given streams, returning the process exit status:
//
//   0  every flow Appropriate / verification passed / formatted
//   1  input error (unreadable file, parse error, invalid context)
//   2  some flow Inappropriate, a Required flow missing, budget exceeded,
//      or verification failed
//   3  some flow Undetermined and none Inappropriate

#ifndef FLOWNORM_CLI_HPP_
#define FLOWNORM_CLI_HPP_

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "flownorm/ci_model.hpp"
#include "flownorm/dp_mechanisms.hpp"
#include "flownorm/dsl.hpp"
#include "flownorm/flow_checker.hpp"
#include "flownorm/ledger_io.hpp"
#include "flownorm/numbers.hpp"
#include "flownorm/records.hpp"

namespace flownorm {

enum class Subcommand { kCheck, kAudit, kBudget, kMechSample, kMechVerify, kFmt };
enum class OutputFormat { kHuman, kRecords };

inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 1;
inline constexpr int kExitViolation = 2;
inline constexpr int kExitUndetermined = 3;

struct RunConfig {
  Subcommand subcommand = Subcommand::kCheck;
  std::string policy_path;
  std::string flow_path;
  std::optional<std::string> ledger_path;
  std::uint64_t seed = 0;
  OutputFormat output = OutputFormat::kHuman;

  // mech-sample / mech-verify
  std::string mechanism;
  double epsilon = 1.0;
  double delta = 0.0;
  // Parameter the mechanism actually runs with, when it differs from the
  // claimed epsilon.
  std::optional<double> actual_epsilon;
  std::optional<double> noise_scale;
  VerificationKind method = VerificationKind::kExactEnumeration;
  std::uint64_t samples = 0;
  double confidence = 1.0 - 1e-6;
  double lo = 0.0;
  double hi = 1.0;
  std::size_t n = 1;
  std::optional<std::string> data_path;
  std::vector<double> values;
};

namespace cli_internal {

class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string RenderErrors(const std::vector<ParseError>& errors,
                                const std::string& origin) {
  std::string out;
  for (const ParseError& e : errors) out += e.ToString(origin) + "\n";
  return out;
}

inline Context LoadContext(const std::string& path) {
  const SourceDocument doc = LoadSource(path);
  ParseResult<Context> parsed = ParsePolicy(doc);
  if (!parsed) throw InputError(RenderErrors(parsed.errors(), doc.origin));
  if (auto defects = ValidateContext(parsed.value()); !defects.empty()) {
    std::string msg;
    for (const Defect& d : defects) {
      msg += doc.origin + ": invalid context: " + d.ToString() + "\n";
    }
    throw InputError(msg);
  }
  return std::move(parsed.value());
}

inline std::vector<FlowEvent> LoadFlows(const std::string& path) {
  const SourceDocument doc = LoadSource(path);
  ParseResult<std::vector<FlowEvent>> parsed = ParseFlows(doc);
  if (!parsed) throw InputError(RenderErrors(parsed.errors(), doc.origin));
  return std::move(parsed.value());
}

inline std::optional<BudgetLedger> LoadLedger(const RunConfig& cfg) {
  if (!cfg.ledger_path || !std::filesystem::exists(*cfg.ledger_path)) {
    return std::nullopt;
  }
  const SourceDocument doc = LoadSource(*cfg.ledger_path);
  ParseResult<BudgetLedger> parsed = ParseLedger(doc);
  if (!parsed) throw InputError(RenderErrors(parsed.errors(), doc.origin));
  return std::move(parsed.value());
}

inline void StoreLedger(const RunConfig& cfg, const BudgetLedger& ledger) {
  if (!cfg.ledger_path) return;
  std::ofstream out(*cfg.ledger_path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + *cfg.ledger_path);
  out << PrintLedger(ledger);
}

inline std::string HumanVerdict(const FlowVerdict& fv) {
  const Verdict& v = fv.verdict;
  std::ostringstream out;
  out << "flow " << fv.flow.seq << ": " << Name(v.status);
  out << " reasons=[";
  for (std::size_t i = 0; i < v.reasons.size(); ++i) {
    out << (i ? ", " : "") << Name(v.reasons[i]);
  }
  out << "] norms=[";
  for (std::size_t i = 0; i < v.matched_norms.size(); ++i) {
    out << (i ? ", " : "") << v.matched_norms[i].norm.str() << ':'
        << Name(v.matched_norms[i].outcome);
  }
  out << "]";
  if (fv.flow.dataset && fv.dataset_totals) {
    out << " dataset=" << fv.flow.dataset->str()
        << " eps_total=" << FormatNumber(fv.dataset_totals->epsilon)
        << " delta_total=" << FormatNumber(fv.dataset_totals->delta);
  }
  return out.str();
}

inline void PrintBudgetHuman(const BudgetLedger& ledger, std::ostream& out) {
  for (const auto& [dataset, entries] : ledger.entries()) {
    const PrivacySpend t = ledger.Totals(dataset);
    out << "budget " << dataset.str() << ": releases=" << entries.size()
        << " eps_total=" << FormatNumber(t.epsilon)
        << " delta_total=" << FormatNumber(t.delta);
    if (ledger.cap()) {
      out << " eps_cap=" << FormatNumber(ledger.cap()->epsilon)
          << " delta_cap=" << FormatNumber(ledger.cap()->delta);
    }
    if (ledger.Exceeded(dataset)) out << " EXHAUSTED";
    out << "\n";
  }
}

inline int ExitCodeFor(const AuditReport& report, bool count_missing) {
  bool inappropriate = count_missing && !report.missing_required.empty();
  bool undetermined = false;
  for (const FlowVerdict& fv : report.verdicts) {
    inappropriate |= fv.verdict.status == VerdictStatus::kInappropriate;
    undetermined |= fv.verdict.status == VerdictStatus::kUndetermined;
  }
  if (inappropriate) return kExitViolation;
  if (undetermined) return kExitUndetermined;
  return kExitOk;
}

// Shared by check, audit, and budget: evaluates the flows and emits one
// line per verdict (unless `quiet`).
inline AuditReport Evaluate(const RunConfig& cfg, std::ostream& out,
                            bool quiet) {
  const Context ctx = LoadContext(cfg.policy_path);
  const std::vector<FlowEvent> flows = LoadFlows(cfg.flow_path);
  AuditReport report;
  try {
    report = AuditFlows(ctx, flows, LoadLedger(cfg));
  } catch (const FlowCheckError& e) {
    throw InputError(cfg.flow_path + ": " + e.what());
  }
  StoreLedger(cfg, report.budget_state);
  if (cfg.output == OutputFormat::kHuman) out << "# seed=" << cfg.seed << "\n";
  if (quiet) return report;
  for (const FlowVerdict& fv : report.verdicts) {
    if (cfg.output == OutputFormat::kRecords) {
      out << VerdictRecord(fv, cfg.seed).dump() << "\n";
    } else {
      out << HumanVerdict(fv) << "\n";
    }
  }
  return report;
}

inline Dataset LoadDataset(const RunConfig& cfg) {
  std::vector<double> values = cfg.values;
  if (cfg.data_path) {
    std::ifstream in(*cfg.data_path);
    if (!in) throw InputError("cannot open " + *cfg.data_path);
    std::string word;
    while (in >> word) {
      const std::optional<double> v = ParseNumber(word);
      if (!v) throw InputError("bad number `" + word + "` in data file");
      values.push_back(*v);
    }
  }
  if (values.empty()) throw InputError("no data: pass --data or --values");
  return Dataset::Clipped(values, cfg.lo, cfg.hi);
}

inline MechanismName RequireMechanism(const RunConfig& cfg) {
  const std::optional<MechanismName> name = ParseMechanismName(cfg.mechanism);
  if (!name) throw InputError("unknown mechanism `" + cfg.mechanism + "`");
  return *name;
}

}  // namespace cli_internal

inline int RunCheck(const RunConfig& cfg, std::ostream& out) {
  const AuditReport report = cli_internal::Evaluate(cfg, out, false);
  return cli_internal::ExitCodeFor(report, false);
}

inline int RunAudit(const RunConfig& cfg, std::ostream& out) {
  const AuditReport report = cli_internal::Evaluate(cfg, out, false);
  if (cfg.output == OutputFormat::kRecords) {
    out << SummaryRecord(report, cfg.seed).dump() << "\n";
  } else {
    cli_internal::PrintBudgetHuman(report.budget_state, out);
    out << "missing_required: [";
    for (std::size_t i = 0; i < report.missing_required.size(); ++i) {
      out << (i ? ", " : "") << report.missing_required[i].str();
    }
    out << "]\n";
  }
  return cli_internal::ExitCodeFor(report, true);
}

inline int RunBudget(const RunConfig& cfg, std::ostream& out) {
  const AuditReport report = cli_internal::Evaluate(cfg, out, true);
  if (cfg.output == OutputFormat::kRecords) {
    nlohmann::json rec = {{"record", "budget"},
                          {"budget", BudgetRecord(report.budget_state)},
                          {"seed", cfg.seed}};
    out << rec.dump() << "\n";
  } else {
    cli_internal::PrintBudgetHuman(report.budget_state, out);
  }
  for (const auto& [dataset, entries] : report.budget_state.entries()) {
    if (report.budget_state.Exceeded(dataset)) return kExitViolation;
  }
  return kExitOk;
}

inline int RunFmt(const RunConfig& cfg, std::ostream& out) {
  const SourceDocument doc = LoadSource(cfg.policy_path);
  ParseResult<Context> parsed = ParsePolicy(doc);
  if (!parsed) {
    throw cli_internal::InputError(
        cli_internal::RenderErrors(parsed.errors(), doc.origin));
  }
  out << PrintPolicy(parsed.value());
  return kExitOk;
}

inline int RunMechVerify(const RunConfig& cfg, std::ostream& out) {
  const MechanismName name = cli_internal::RequireMechanism(cfg);
  const double actual = cfg.actual_epsilon.value_or(cfg.epsilon);
  MechanismSpec spec;
  switch (name) {
    case MechanismName::kLaplaceSum:
      spec = MechanismSpec::LaplaceSum(cfg.lo, cfg.hi, actual, cfg.seed);
      break;
    case MechanismName::kLaplaceMean:
      spec = MechanismSpec::LaplaceMean(cfg.lo, cfg.hi, cfg.n, actual,
                                        cfg.seed);
      break;
    case MechanismName::kGaussianSum:
      spec = MechanismSpec::GaussianSum(cfg.lo, cfg.hi, actual, cfg.delta,
                                        cfg.seed);
      break;
    case MechanismName::kRandomizedResponseBinary:
      spec = MechanismSpec::RandomizedResponse(actual, cfg.seed);
      break;
  }
  spec.noise_scale_override = cfg.noise_scale;
  VerificationMethod method;
  switch (cfg.method) {
    case VerificationKind::kExactEnumeration:
      method = VerificationMethod::Exact();
      break;
    case VerificationKind::kAnalyticDensity:
      method = VerificationMethod::Analytic();
      break;
    case VerificationKind::kMonteCarlo:
      method = VerificationMethod::MonteCarlo(
          cfg.samples ? cfg.samples : 1000000, cfg.confidence);
      break;
  }
  const DpVerificationResult r =
      VerifyDp(spec, method, PrivacyClaim{cfg.epsilon, cfg.delta});
  if (cfg.output == OutputFormat::kRecords) {
    out << VerificationRecord(r, cfg.seed).dump() << "\n";
  } else {
    out << "mechanism=" << r.mechanism << " method=" << Name(r.method.kind)
        << " max_log_ratio=" << FormatNumber(r.max_log_ratio)
        << " epsilon_claimed=" << FormatNumber(r.epsilon_claimed)
        << " delta_claimed=" << FormatNumber(r.delta_claimed);
    if (r.method.kind == VerificationKind::kMonteCarlo) {
      out << " samples=" << r.method.sample_count
          << " confidence=" << FormatNumber(r.method.confidence);
    }
    out << " passed=" << (r.passed ? "true" : "false")
        << " seed=" << cfg.seed << "\n";
  }
  return r.passed ? kExitOk : kExitViolation;
}

// Laplace/Gaussian: `samples` releases of the query, release i seeded with
// DeriveSeed(seed, i). Randomized response: one report per record of a 0/1
// dataset, then the debiased mean.
inline int RunMechSample(const RunConfig& cfg, std::ostream& out) {
  const MechanismName name = cli_internal::RequireMechanism(cfg);
  const bool records = cfg.output == OutputFormat::kRecords;
  const Dataset ds = cli_internal::LoadDataset(cfg);
  if (!records) {
    out << "# mechanism=" << Name(name) << " eps=" << FormatNumber(cfg.epsilon)
        << " delta=" << FormatNumber(cfg.delta) << " seed=" << cfg.seed
        << "\n";
  }
  auto emit = [&](std::uint64_t index, double value) {
    if (records) {
      nlohmann::json rec = {{"record", "sample"},
                            {"index", index},
                            {"value", JsonNumber(value)},
                            {"seed", cfg.seed}};
      out << rec.dump() << "\n";
    } else {
      out << FormatNumber(value) << "\n";
    }
  };
  if (name == MechanismName::kRandomizedResponseBinary) {
    std::vector<int> bits;
    for (double v : ds.records()) {
      if (v != 0.0 && v != 1.0) {
        throw cli_internal::InputError("randomized response needs 0/1 data");
      }
      bits.push_back(static_cast<int>(v));
    }
    const std::vector<int> reports =
        RandomizedResponseAll(bits, cfg.epsilon, cfg.seed);
    for (std::size_t i = 0; i < reports.size(); ++i) emit(i, reports[i]);
    const double estimate = DebiasedMean(reports, cfg.epsilon);
    if (records) {
      nlohmann::json rec = {{"record", "estimate"},
                            {"debiased_mean", JsonNumber(estimate)},
                            {"seed", cfg.seed}};
      out << rec.dump() << "\n";
    } else {
      out << "# debiased_mean=" << FormatNumber(estimate) << "\n";
    }
    return kExitOk;
  }
  const std::uint64_t count = cfg.samples ? cfg.samples : 1;
  const Query query =
      name == MechanismName::kLaplaceMean ? Query::kMean : Query::kSum;
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::uint64_t seed = DeriveSeed(cfg.seed, i);
    const double v =
        name == MechanismName::kGaussianSum
            ? GaussianRelease(ds, query, cfg.epsilon, cfg.delta, seed)
            : LaplaceRelease(ds, query, cfg.epsilon, seed);
    emit(i, v);
  }
  return kExitOk;
}

// Dispatches `cfg` and maps input errors to exit status 1 with a message
// on `err`.
inline int Run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    switch (cfg.subcommand) {
      case Subcommand::kCheck:
        return RunCheck(cfg, out);
      case Subcommand::kAudit:
        return RunAudit(cfg, out);
      case Subcommand::kBudget:
        return RunBudget(cfg, out);
      case Subcommand::kMechSample:
        return RunMechSample(cfg, out);
      case Subcommand::kMechVerify:
        return RunMechVerify(cfg, out);
      case Subcommand::kFmt:
        return RunFmt(cfg, out);
    }
  } catch (const cli_internal::InputError& e) {
    err << e.what();
    if (std::string_view(e.what()).ends_with('\n') == false) err << "\n";
  } catch (const MechanismError& e) {
    err << "error: " << e.what() << "\n";
  } catch (const std::runtime_error& e) {
    err << "error: " << e.what() << "\n";
  }
  return kExitInputError;
}

}  // namespace flownorm

#endif  // FLOWNORM_CLI_HPP_
