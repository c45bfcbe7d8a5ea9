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

// flownorm: command-line front end for the policy engine.

#include <cstdint>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "flownorm/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Evaluate information flows against contextual norms with "
               "differential-privacy transmission properties"};
  app.require_subcommand(1);

  flownorm::RunConfig cfg;
  std::string output = "human";
  std::string method = "exact";
  std::optional<double> actual_eps;
  std::optional<double> noise_scale;
  std::optional<std::string> ledger;
  std::optional<std::string> data;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--seed", cfg.seed, "Random seed (echoed in output)")
        ->envname("FLOWNORM_SEED");
    cmd->add_option("--output", output, "Output format")
        ->check(CLI::IsMember({"human", "records"}));
  };
  auto add_flow_inputs = [&](CLI::App* cmd) {
    cmd->add_option("--policy", cfg.policy_path, "Policy file (.cip)")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--flows", cfg.flow_path, "Flow log (.cif)")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--ledger", ledger, "Persisted budget ledger (.ledger)");
    add_common(cmd);
  };
  auto add_mechanism = [&](CLI::App* cmd) {
    cmd->add_option("mechanism", cfg.mechanism,
                    "rr | laplace-sum | laplace-mean | gaussian-sum")
        ->required();
    cmd->add_option("--eps", cfg.epsilon, "Epsilon (claimed)");
    cmd->add_option("--delta", cfg.delta, "Delta");
    cmd->add_option("--lo", cfg.lo, "Lower clipping bound");
    cmd->add_option("--hi", cfg.hi, "Upper clipping bound");
    cmd->add_option("--samples", cfg.samples, "Sample count");
    add_common(cmd);
  };

  auto* check = app.add_subcommand("check", "Judge each flow in a flow log");
  add_flow_inputs(check);
  auto* audit = app.add_subcommand(
      "audit", "Judge flows, report missing required flows and budget state");
  add_flow_inputs(audit);
  auto* budget = app.add_subcommand("budget", "Report composed DP budgets");
  add_flow_inputs(budget);

  auto* verify = app.add_subcommand("mech-verify",
                                    "Verify a mechanism's (eps, delta) claim");
  add_mechanism(verify);
  verify->add_option("--method", method, "Verification method")
      ->check(CLI::IsMember({"exact", "analytic", "mc"}));
  verify->add_option("--actual-eps", actual_eps,
                     "Epsilon the mechanism really runs with");
  verify->add_option("--noise-scale", noise_scale,
                     "Override the calibrated noise scale");
  verify->add_option("--n", cfg.n, "Record count (laplace-mean)");
  verify->add_option("--confidence", cfg.confidence,
                     "Per-event confidence of the Monte Carlo guard band");

  auto* sample = app.add_subcommand("mech-sample", "Draw mechanism releases");
  add_mechanism(sample);
  sample->add_option("--data", data, "File of whitespace-separated values")
      ->check(CLI::ExistingFile);
  sample->add_option("--values", cfg.values, "Inline values")->delimiter(',');

  auto* fmt = app.add_subcommand("fmt", "Print a policy in canonical form");
  std::string fmt_file;
  fmt->add_option("file", fmt_file, "Policy file (.cip)")
      ->check(CLI::ExistingFile);
  fmt->add_option("--policy", cfg.policy_path, "Policy file (.cip)")
      ->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : flownorm::kExitInputError;
  }

  static const std::map<const CLI::App*, flownorm::Subcommand> kSubcommands = {
      {check, flownorm::Subcommand::kCheck},
      {audit, flownorm::Subcommand::kAudit},
      {budget, flownorm::Subcommand::kBudget},
      {verify, flownorm::Subcommand::kMechVerify},
      {sample, flownorm::Subcommand::kMechSample},
      {fmt, flownorm::Subcommand::kFmt},
  };
  for (const auto& [cmd, sub] : kSubcommands) {
    if (cmd->parsed()) cfg.subcommand = sub;
  }
  if (cfg.policy_path.empty()) cfg.policy_path = fmt_file;
  if (cfg.subcommand == flownorm::Subcommand::kFmt &&
      cfg.policy_path.empty()) {
    std::cerr << "fmt: a policy file is required\n";
    return flownorm::kExitInputError;
  }
  cfg.output = output == "records" ? flownorm::OutputFormat::kRecords
                                   : flownorm::OutputFormat::kHuman;
  cfg.method = method == "analytic" ? flownorm::VerificationKind::kAnalyticDensity
               : method == "mc"     ? flownorm::VerificationKind::kMonteCarlo
                                    : flownorm::VerificationKind::kExactEnumeration;
  cfg.actual_epsilon = actual_eps;
  cfg.noise_scale = noise_scale;
  cfg.ledger_path = ledger;
  cfg.data_path = data;
  return flownorm::Run(cfg, std::cout, std::cerr);
}
