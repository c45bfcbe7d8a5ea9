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

// Domain vocabulary for contexts, augmented information norms, and flows.
//
// A context bundles purposes, agent roles, information attributes,
// transmission principles (normative), transmission properties
// (descriptive), and an ordered list of norms. A norm is the tuple
// (sender, receiver, subject, attributes, principle, property) plus a
// modality. Every type here is an immutable value once built.

#ifndef FLOWNORM_CI_MODEL_HPP_
#define FLOWNORM_CI_MODEL_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "flownorm/numbers.hpp"

namespace flownorm {

template <class Tag>
class Identifier {
 public:
  Identifier() = default;
  explicit Identifier(std::string value) : value_(std::move(value)) {}

  const std::string& str() const { return value_; }

  auto operator<=>(const Identifier&) const = default;
  bool operator==(const Identifier&) const = default;

 private:
  std::string value_;
};

using ContextId = Identifier<struct ContextTag>;
using NormId = Identifier<struct NormTag>;
using RoleId = Identifier<struct RoleTag>;
using AttributeId = Identifier<struct AttributeTag>;
using PrincipleId = Identifier<struct PrincipleTag>;
using DatasetId = Identifier<struct DatasetTag>;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Either the wildcard `*` or an explicit set of declared ids. A single id
// is a one-element set.
template <class Id>
class Pattern {
 public:
  static Pattern Any() { return Pattern(); }
  static Pattern Of(std::set<Id> ids) {
    Pattern p;
    p.any_ = false;
    p.ids_ = std::move(ids);
    return p;
  }
  static Pattern One(Id id) { return Of({std::move(id)}); }

  bool is_any() const { return any_; }
  const std::set<Id>& ids() const { return ids_; }

  bool Covers(const Id& id) const { return any_ || ids_.contains(id); }

  bool CoversAll(const std::set<Id>& ids) const {
    return std::all_of(ids.begin(), ids.end(),
                       [this](const Id& id) { return Covers(id); });
  }

  bool operator==(const Pattern&) const = default;

 private:
  Pattern() = default;

  bool any_ = true;
  std::set<Id> ids_;
};

using RolePattern = Pattern<RoleId>;
using AttributePattern = Pattern<AttributeId>;

enum class Modality { kPermitted, kForbidden, kRequired };

// Ordered by how little the data holder is trusted: a local-model release
// reveals less to the curator than a shuffled one, which reveals less than
// a central one.
enum class TrustModel { kCentral, kShuffle, kLocal };

inline int TrustRank(TrustModel model) {
  switch (model) {
    case TrustModel::kCentral:
      return 0;
    case TrustModel::kShuffle:
      return 1;
    case TrustModel::kLocal:
      return 2;
  }
  return 0;
}

enum class PetKind { kNoPet, kDp, kSwapping, kEncryption, kSmpc, kCustom };

// A kind of transmission property, as named in the context vocabulary and
// in kind-level norm requirements. `custom_name` is only meaningful for
// PetKind::kCustom.
struct PropertySpec {
  PetKind kind = PetKind::kNoPet;
  std::string custom_name;

  static PropertySpec Of(PetKind kind) { return {kind, {}}; }
  static PropertySpec Custom(std::string name) {
    return {PetKind::kCustom, std::move(name)};
  }

  auto operator<=>(const PropertySpec&) const = default;
  bool operator==(const PropertySpec&) const = default;
};

// Mechanism names shared between policy files and the mechanism library.
inline constexpr std::array<std::string_view, 4> kMechanismNames = {
    "laplace_sum", "laplace_mean", "gaussian_sum",
    "randomized_response_binary"};

inline bool IsKnownMechanism(std::string_view name) {
  return std::find(kMechanismNames.begin(), kMechanismNames.end(), name) !=
         kMechanismNames.end();
}

// The descriptive DP parameters of a flow. An absent epsilon or delta is
// the "with differential privacy" case where the parameters were never
// stated; it is distinct from any numeric value.
struct DpGuarantee {
  TrustModel model = TrustModel::kCentral;
  std::optional<double> epsilon;
  std::optional<double> delta;
  std::optional<std::string> mechanism;
  std::uint32_t composed_release_count = 1;

  bool fully_specified() const {
    return epsilon.has_value() && delta.has_value();
  }

  bool operator==(const DpGuarantee&) const = default;
};

class TransmissionProperty {
 public:
  TransmissionProperty() = default;

  static TransmissionProperty NoPet() { return TransmissionProperty(); }
  static TransmissionProperty Swapping() { return OfKind(PetKind::kSwapping); }
  static TransmissionProperty Encryption() {
    return OfKind(PetKind::kEncryption);
  }
  static TransmissionProperty Smpc() { return OfKind(PetKind::kSmpc); }
  static TransmissionProperty Custom(std::string name) {
    TransmissionProperty p;
    p.spec_ = PropertySpec::Custom(std::move(name));
    return p;
  }
  static TransmissionProperty Dp(DpGuarantee guarantee) {
    TransmissionProperty p;
    p.spec_ = PropertySpec::Of(PetKind::kDp);
    p.dp_ = std::move(guarantee);
    return p;
  }

  PetKind kind() const { return spec_.kind; }
  const PropertySpec& spec() const { return spec_; }
  // Non-null exactly when kind() == PetKind::kDp.
  const DpGuarantee* dp() const { return dp_ ? &*dp_ : nullptr; }

  bool operator==(const TransmissionProperty&) const = default;

 private:
  static TransmissionProperty OfKind(PetKind kind) {
    TransmissionProperty p;
    p.spec_ = PropertySpec::Of(kind);
    return p;
  }

  PropertySpec spec_;
  std::optional<DpGuarantee> dp_;
};

struct AnyProperty {
  bool operator==(const AnyProperty&) const = default;
};

struct ExactKind {
  PropertySpec kind;
  bool operator==(const ExactKind&) const = default;
};

// Threshold requirement: a DP flow in at least `model_min` trust (nullopt
// means any model) with both parameters stated and within the limits.
struct DpAtMost {
  std::optional<TrustModel> model_min;
  double epsilon_max = 0.0;
  double delta_max = 0.0;
  bool operator==(const DpAtMost&) const = default;
};

struct NotKind {
  std::set<PropertySpec> kinds;
  bool operator==(const NotKind&) const = default;
};

using PropertyRequirement = std::variant<AnyProperty, ExactKind, DpAtMost,
                                         NotKind>;

struct InformationNorm {
  NormId id;
  Modality modality = Modality::kPermitted;
  RolePattern sender = RolePattern::Any();
  RolePattern receiver = RolePattern::Any();
  RolePattern subject = RolePattern::Any();
  AttributePattern attributes = AttributePattern::Any();
  // Every listed principle must be asserted by the flow.
  std::set<PrincipleId> principles;
  PropertyRequirement property = AnyProperty{};

  bool operator==(const InformationNorm&) const = default;
};

struct BudgetCap {
  double epsilon = 0.0;
  double delta = 0.0;
  bool operator==(const BudgetCap&) const = default;
};

struct Context {
  ContextId id;
  std::set<std::string> purposes;
  std::set<RoleId> roles;
  std::set<AttributeId> attributes;
  std::set<PrincipleId> principles;
  std::set<PropertySpec> properties;
  std::vector<InformationNorm> norms;
  std::optional<BudgetCap> budget_cap;

  const InformationNorm* FindNorm(const NormId& id) const {
    auto it = std::find_if(norms.begin(), norms.end(),
                           [&](const InformationNorm& n) { return n.id == id; });
    return it == norms.end() ? nullptr : &*it;
  }

  bool operator==(const Context&) const = default;
};

struct FlowEvent {
  RoleId sender;
  RoleId receiver;
  std::set<RoleId> subjects;
  std::set<AttributeId> attributes;
  std::set<PrincipleId> asserted_principles;
  TransmissionProperty property;
  std::optional<DatasetId> dataset;
  std::uint64_t seq = 0;

  bool operator==(const FlowEvent&) const = default;
};

enum class MatchOutcome {
  kMatched,
  kNotApplicable,
  kApplicableButPropertyFails,
  kApplicableButPrincipleMissing,
};

enum class VerdictStatus { kAppropriate, kInappropriate, kUndetermined };

enum class ReasonCode {
  kForbiddenNormMatched,
  kBudgetExhausted,
  kNoMatchingNorm,
  kPrincipleMissing,
  kPropertyKindMismatch,
  kTrustModelTooWeak,
  kUnspecifiedDpParameters,
  kEpsilonExceedsMax,
  kDeltaExceedsMax,
};

struct NormOutcome {
  NormId norm;
  MatchOutcome outcome = MatchOutcome::kNotApplicable;
  bool operator==(const NormOutcome&) const = default;
};

struct Verdict {
  VerdictStatus status = VerdictStatus::kUndetermined;
  // Outcomes of every norm that was applicable to the flow, in norm order.
  std::vector<NormOutcome> matched_norms;
  std::vector<ReasonCode> reasons;

  bool HasReason(ReasonCode code) const {
    return std::find(reasons.begin(), reasons.end(), code) != reasons.end();
  }

  bool operator==(const Verdict&) const = default;
};

inline std::string_view Name(Modality m) {
  switch (m) {
    case Modality::kPermitted:
      return "Permitted";
    case Modality::kForbidden:
      return "Forbidden";
    case Modality::kRequired:
      return "Required";
  }
  return "?";
}

inline std::string_view Name(TrustModel m) {
  switch (m) {
    case TrustModel::kCentral:
      return "central";
    case TrustModel::kShuffle:
      return "shuffle";
    case TrustModel::kLocal:
      return "local";
  }
  return "?";
}

inline std::string_view Name(PetKind k) {
  switch (k) {
    case PetKind::kNoPet:
      return "none";
    case PetKind::kDp:
      return "dp";
    case PetKind::kSwapping:
      return "swapping";
    case PetKind::kEncryption:
      return "encryption";
    case PetKind::kSmpc:
      return "smpc";
    case PetKind::kCustom:
      return "custom";
  }
  return "?";
}

inline std::string_view Name(MatchOutcome m) {
  switch (m) {
    case MatchOutcome::kMatched:
      return "Matched";
    case MatchOutcome::kNotApplicable:
      return "NotApplicable";
    case MatchOutcome::kApplicableButPropertyFails:
      return "ApplicableButPropertyFails";
    case MatchOutcome::kApplicableButPrincipleMissing:
      return "ApplicableButPrincipleMissing";
  }
  return "?";
}

inline std::string_view Name(VerdictStatus s) {
  switch (s) {
    case VerdictStatus::kAppropriate:
      return "Appropriate";
    case VerdictStatus::kInappropriate:
      return "Inappropriate";
    case VerdictStatus::kUndetermined:
      return "Undetermined";
  }
  return "?";
}

inline std::string_view Name(ReasonCode r) {
  switch (r) {
    case ReasonCode::kForbiddenNormMatched:
      return "ForbiddenNormMatched";
    case ReasonCode::kBudgetExhausted:
      return "BudgetExhausted";
    case ReasonCode::kNoMatchingNorm:
      return "NoMatchingNorm";
    case ReasonCode::kPrincipleMissing:
      return "PrincipleMissing";
    case ReasonCode::kPropertyKindMismatch:
      return "PropertyKindMismatch";
    case ReasonCode::kTrustModelTooWeak:
      return "TrustModelTooWeak";
    case ReasonCode::kUnspecifiedDpParameters:
      return "UnspecifiedDpParameters";
    case ReasonCode::kEpsilonExceedsMax:
      return "EpsilonExceedsMax";
    case ReasonCode::kDeltaExceedsMax:
      return "DeltaExceedsMax";
  }
  return "?";
}

inline std::string DisplayName(const PropertySpec& spec) {
  if (spec.kind == PetKind::kCustom) return "custom(" + spec.custom_name + ")";
  return std::string(Name(spec.kind));
}

// Why `p` fails `req`, or nullopt when it satisfies it. Checks run in a
// fixed order (kind, model, missing parameters, epsilon, delta) so the
// reported reason is stable.
inline std::optional<ReasonCode> PropertyFailure(
    const TransmissionProperty& p, const PropertyRequirement& req) {
  struct Visitor {
    const TransmissionProperty& p;

    std::optional<ReasonCode> operator()(const AnyProperty&) const {
      return std::nullopt;
    }
    std::optional<ReasonCode> operator()(const ExactKind& r) const {
      if (p.spec() == r.kind) return std::nullopt;
      return ReasonCode::kPropertyKindMismatch;
    }
    std::optional<ReasonCode> operator()(const NotKind& r) const {
      if (r.kinds.contains(p.spec())) return ReasonCode::kPropertyKindMismatch;
      return std::nullopt;
    }
    std::optional<ReasonCode> operator()(const DpAtMost& r) const {
      const DpGuarantee* dp = p.dp();
      if (dp == nullptr) return ReasonCode::kPropertyKindMismatch;
      if (r.model_min && TrustRank(dp->model) < TrustRank(*r.model_min)) {
        return ReasonCode::kTrustModelTooWeak;
      }
      if (!dp->fully_specified()) return ReasonCode::kUnspecifiedDpParameters;
      // Written as negations so NaN never satisfies a threshold.
      if (!(*dp->epsilon <= r.epsilon_max)) {
        return ReasonCode::kEpsilonExceedsMax;
      }
      if (!(*dp->delta <= r.delta_max)) return ReasonCode::kDeltaExceedsMax;
      return std::nullopt;
    }
  };
  return std::visit(Visitor{p}, req);
}

inline bool PropertySatisfies(const TransmissionProperty& p,
                              const PropertyRequirement& req) {
  return !PropertyFailure(p, req).has_value();
}

// ---------------------------------------------------------------------------
// Validation

enum class DefectKind {
  kUndeclaredRole,
  kUndeclaredAttribute,
  kUndeclaredPrinciple,
  kDuplicateNormId,
  kEmptyPattern,
  kRequiredNormWildcard,
  kEpsilonOutOfRange,
  kDeltaOutOfRange,
  kInvalidReleaseCount,
  kUnknownMechanism,
  kMechanismParameterMismatch,
  kEmptySubjects,
  kEmptyAttributes,
  kMissingDataset,
};

inline std::string_view Name(DefectKind k) {
  switch (k) {
    case DefectKind::kUndeclaredRole:
      return "UndeclaredRole";
    case DefectKind::kUndeclaredAttribute:
      return "UndeclaredAttribute";
    case DefectKind::kUndeclaredPrinciple:
      return "UndeclaredPrinciple";
    case DefectKind::kDuplicateNormId:
      return "DuplicateNormId";
    case DefectKind::kEmptyPattern:
      return "EmptyPattern";
    case DefectKind::kRequiredNormWildcard:
      return "RequiredNormWildcard";
    case DefectKind::kEpsilonOutOfRange:
      return "EpsilonOutOfRange";
    case DefectKind::kDeltaOutOfRange:
      return "DeltaOutOfRange";
    case DefectKind::kInvalidReleaseCount:
      return "InvalidReleaseCount";
    case DefectKind::kUnknownMechanism:
      return "UnknownMechanism";
    case DefectKind::kMechanismParameterMismatch:
      return "MechanismParameterMismatch";
    case DefectKind::kEmptySubjects:
      return "EmptySubjects";
    case DefectKind::kEmptyAttributes:
      return "EmptyAttributes";
    case DefectKind::kMissingDataset:
      return "MissingDataset";
  }
  return "?";
}

struct Defect {
  DefectKind kind;
  // The offending symbol or value, if any.
  std::string detail;
  // Where it was found, e.g. "norm publish" or "budget".
  std::string location;

  std::string ToString() const {
    std::string out(Name(kind));
    if (!detail.empty()) out += "(\"" + detail + "\")";
    if (!location.empty()) out += " in " + location;
    return out;
  }

  bool operator==(const Defect&) const = default;
};

namespace internal {

inline bool ValidEpsilon(double eps) { return eps >= 0.0; }  // NaN fails.
inline bool ValidDelta(double delta) { return delta >= 0.0 && delta < 1.0; }

template <class Id>
void CheckDeclared(const Pattern<Id>& pattern, const std::set<Id>& declared,
                   DefectKind kind, const std::string& where,
                   std::vector<Defect>& out) {
  if (pattern.is_any()) return;
  if (pattern.ids().empty()) {
    out.push_back({DefectKind::kEmptyPattern, "", where});
  }
  for (const Id& id : pattern.ids()) {
    if (!declared.contains(id)) out.push_back({kind, id.str(), where});
  }
}

inline void CheckRequirement(const PropertyRequirement& req,
                             const std::string& where,
                             std::vector<Defect>& out) {
  if (const auto* dp = std::get_if<DpAtMost>(&req)) {
    if (!ValidEpsilon(dp->epsilon_max)) {
      out.push_back({DefectKind::kEpsilonOutOfRange,
                     FormatNumber(dp->epsilon_max), where});
    }
    if (!ValidDelta(dp->delta_max)) {
      out.push_back({DefectKind::kDeltaOutOfRange,
                     FormatNumber(dp->delta_max), where});
    }
  }
}

}  // namespace internal

// Internal consistency of a concrete transmission property. Shuffle-model
// guarantees are accepted as declared; only their parameters are checked.
inline std::vector<Defect> ValidateProperty(const TransmissionProperty& p,
                                            const std::string& where = "") {
  std::vector<Defect> out;
  const DpGuarantee* dp = p.dp();
  if (dp == nullptr) return out;
  if (dp->epsilon && !internal::ValidEpsilon(*dp->epsilon)) {
    out.push_back({DefectKind::kEpsilonOutOfRange,
                   FormatNumber(*dp->epsilon), where});
  }
  if (dp->delta && !internal::ValidDelta(*dp->delta)) {
    out.push_back({DefectKind::kDeltaOutOfRange,
                   FormatNumber(*dp->delta), where});
  }
  if (dp->composed_release_count == 0) {
    out.push_back({DefectKind::kInvalidReleaseCount, "0", where});
  }
  if (dp->mechanism) {
    if (!IsKnownMechanism(*dp->mechanism)) {
      out.push_back({DefectKind::kUnknownMechanism, *dp->mechanism, where});
    } else if (dp->delta) {
      const bool gaussian = *dp->mechanism == "gaussian_sum";
      if (gaussian != (*dp->delta > 0.0)) {
        out.push_back(
            {DefectKind::kMechanismParameterMismatch, *dp->mechanism, where});
      }
    }
  }
  return out;
}

// Every invariant violation in `ctx`. An empty result means the context is
// valid.
inline std::vector<Defect> ValidateContext(const Context& ctx) {
  std::vector<Defect> out;
  if (ctx.budget_cap) {
    if (!internal::ValidEpsilon(ctx.budget_cap->epsilon)) {
      out.push_back({DefectKind::kEpsilonOutOfRange,
                     FormatNumber(ctx.budget_cap->epsilon), "budget"});
    }
    if (!internal::ValidDelta(ctx.budget_cap->delta)) {
      out.push_back({DefectKind::kDeltaOutOfRange,
                     FormatNumber(ctx.budget_cap->delta), "budget"});
    }
  }
  std::set<NormId> seen;
  for (const InformationNorm& norm : ctx.norms) {
    const std::string where = "norm " + norm.id.str();
    if (!seen.insert(norm.id).second) {
      out.push_back({DefectKind::kDuplicateNormId, norm.id.str(), where});
    }
    internal::CheckDeclared(norm.sender, ctx.roles, DefectKind::kUndeclaredRole,
                            where, out);
    internal::CheckDeclared(norm.receiver, ctx.roles,
                            DefectKind::kUndeclaredRole, where, out);
    internal::CheckDeclared(norm.subject, ctx.roles,
                            DefectKind::kUndeclaredRole, where, out);
    internal::CheckDeclared(norm.attributes, ctx.attributes,
                            DefectKind::kUndeclaredAttribute, where, out);
    for (const PrincipleId& p : norm.principles) {
      if (!ctx.principles.contains(p)) {
        out.push_back({DefectKind::kUndeclaredPrinciple, p.str(), where});
      }
    }
    if (norm.modality == Modality::kRequired &&
        (norm.sender.is_any() || norm.receiver.is_any())) {
      out.push_back({DefectKind::kRequiredNormWildcard, "", where});
    }
    internal::CheckRequirement(norm.property, where, out);
  }
  return out;
}

// Resolution of a flow against the context it is checked in.
inline std::vector<Defect> ValidateFlow(const Context& ctx,
                                        const FlowEvent& flow) {
  std::vector<Defect> out;
  const std::string where = "flow " + std::to_string(flow.seq);
  auto role = [&](const RoleId& r) {
    if (!ctx.roles.contains(r)) {
      out.push_back({DefectKind::kUndeclaredRole, r.str(), where});
    }
  };
  role(flow.sender);
  role(flow.receiver);
  if (flow.subjects.empty()) {
    out.push_back({DefectKind::kEmptySubjects, "", where});
  }
  for (const RoleId& s : flow.subjects) role(s);
  if (flow.attributes.empty()) {
    out.push_back({DefectKind::kEmptyAttributes, "", where});
  }
  for (const AttributeId& a : flow.attributes) {
    if (!ctx.attributes.contains(a)) {
      out.push_back({DefectKind::kUndeclaredAttribute, a.str(), where});
    }
  }
  for (const PrincipleId& p : flow.asserted_principles) {
    if (!ctx.principles.contains(p)) {
      out.push_back({DefectKind::kUndeclaredPrinciple, p.str(), where});
    }
  }
  if (flow.property.kind() == PetKind::kDp && !flow.dataset) {
    out.push_back({DefectKind::kMissingDataset, "", where});
  }
  for (Defect& d : ValidateProperty(flow.property, where)) {
    out.push_back(std::move(d));
  }
  return out;
}

}  // namespace flownorm

#endif  // FLOWNORM_CI_MODEL_HPP_
