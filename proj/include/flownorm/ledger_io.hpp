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

// Text form of a budget ledger (.ledger), in the same syntax family as
// policies:
//
//   ledger {
//     budget(eps=8, delta=1e-05);
//     entry dec2020(eps=1, delta=1e-06, seq=1);
//   }

#ifndef FLOWNORM_LEDGER_IO_HPP_
#define FLOWNORM_LEDGER_IO_HPP_

#include <sstream>
#include <string>
#include <vector>

#include "flownorm/dsl.hpp"
#include "flownorm/flow_checker.hpp"
#include "flownorm/numbers.hpp"

namespace flownorm {

inline std::string PrintLedger(const BudgetLedger& ledger) {
  std::ostringstream out;
  out << "# cip-version: 1\n";
  out << "ledger {\n";
  if (ledger.cap()) {
    out << "  budget(eps=" << FormatNumber(ledger.cap()->epsilon)
        << ", delta=" << FormatNumber(ledger.cap()->delta) << ");\n";
  }
  for (const auto& [dataset, entries] : ledger.entries()) {
    for (const LedgerEntry& e : entries) {
      out << "  entry " << dataset.str() << "(eps=" << FormatNumber(e.epsilon)
          << ", delta=" << FormatNumber(e.delta) << ", seq=" << e.seq
          << ");\n";
    }
  }
  out << "}\n";
  return out.str();
}

inline ParseResult<BudgetLedger> ParseLedger(const SourceDocument& doc) {
  using dsl_internal::Tok;
  dsl_internal::Parser p(doc);
  BudgetLedger ledger;
  try {
    p.ExpectKeyword("ledger");
    p.Expect(Tok::kLBrace, "`{`");
    const int depth = p.depth();
    while (!p.At(Tok::kRBrace) && !p.AtEnd()) {
      try {
        if (p.AcceptKeyword("budget")) {
          BudgetCap cap;
          p.Expect(Tok::kLParen, "`(`");
          p.ExpectKeyword("eps");
          p.Expect(Tok::kEquals, "`=`");
          cap.epsilon = p.ExpectNumber("epsilon");
          p.Expect(Tok::kComma, "`,`");
          p.ExpectKeyword("delta");
          p.Expect(Tok::kEquals, "`=`");
          cap.delta = p.ExpectNumber("delta");
          p.Expect(Tok::kRParen, "`)`");
          ledger.set_cap(cap);
        } else if (p.AcceptKeyword("entry")) {
          const DatasetId dataset(p.ExpectIdent("dataset id"));
          LedgerEntry e;
          p.Expect(Tok::kLParen, "`(`");
          p.ExpectKeyword("eps");
          p.Expect(Tok::kEquals, "`=`");
          e.epsilon = p.ExpectNumber("epsilon");
          p.Expect(Tok::kComma, "`,`");
          p.ExpectKeyword("delta");
          p.Expect(Tok::kEquals, "`=`");
          e.delta = p.ExpectNumber("delta");
          p.Expect(Tok::kComma, "`,`");
          p.ExpectKeyword("seq");
          p.Expect(Tok::kEquals, "`=`");
          e.seq = p.ExpectInteger("sequence number");
          p.Expect(Tok::kRParen, "`)`");
          ledger.Record(dataset, e);
        } else {
          p.Advance();
          p.Fail("`budget` or `entry`");
        }
        p.Expect(Tok::kSemicolon, "`;`");
      } catch (const dsl_internal::SyntaxAbort&) {
        p.RecoverSection(depth);
      }
    }
    p.Expect(Tok::kRBrace, "`}`");
    if (!p.AtEnd()) p.Fail("end of input");
  } catch (const dsl_internal::SyntaxAbort&) {
  } catch (const dsl_internal::TooManyErrors&) {
  }
  if (!p.errors().empty()) return std::move(p.errors());
  return ledger;
}

}  // namespace flownorm

#endif  // FLOWNORM_LEDGER_IO_HPP_
