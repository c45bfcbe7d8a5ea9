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

// Policy language for contexts (.cip) and flow logs (.cif).
//
//   context <id> {
//     purposes [...]; roles [...]; attrs [...]; principles [...];
//     properties [...]; budget(eps=<num>, delta=<num>);
//     norm <id> {
//       (allow|forbid|require) from <pat> to <pat> about <pat> attrs <pat>
//       when [<principle>*] with <requirement>
//     }
//   }
//
//   flow { from <role> to <role> subjects <ids> attrs <ids>
//          assert [<principle>*] with <property> seq=<int> }
//
// Identifiers are `[a-z_][a-z0-9_]*`, `*` is the wildcard, `#` starts a
// comment. The parser is a single-token-lookahead recursive descent that
// recovers at block granularity and never throws to the caller.

#ifndef FLOWNORM_DSL_HPP_
#define FLOWNORM_DSL_HPP_

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "flownorm/ci_model.hpp"
#include "flownorm/numbers.hpp"

namespace flownorm {

struct SourceDocument {
  std::string text;
  std::string origin = "<inline>";
};

inline SourceDocument LoadSource(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return {buf.str(), path};
}

struct ParseError {
  int line = 1;
  int column = 1;
  std::string expected;
  std::string found;
  std::string message;

  std::string ToString(std::string_view origin = "<inline>") const {
    std::ostringstream out;
    out << origin << ':' << line << ':' << column << ": error: " << message;
    return out.str();
  }
};

template <class T>
class ParseResult {
 public:
  ParseResult(T value) : state_(std::move(value)) {}
  ParseResult(std::vector<ParseError> errors) : state_(std::move(errors)) {}

  bool ok() const { return state_.index() == 0; }
  explicit operator bool() const { return ok(); }

  const T& value() const { return std::get<0>(state_); }
  T& value() { return std::get<0>(state_); }
  const std::vector<ParseError>& errors() const { return std::get<1>(state_); }

 private:
  std::variant<T, std::vector<ParseError>> state_;
};

namespace dsl_internal {

// Beyond this many errors the parser stops; later errors are noise.
inline constexpr std::size_t kMaxErrors = 64;

enum class Tok {
  kIdent,
  kNumber,
  kString,
  kLBrace,
  kRBrace,
  kLBracket,
  kRBracket,
  kLParen,
  kRParen,
  kComma,
  kSemicolon,
  kEquals,
  kLessEq,
  kGreaterEq,
  kStar,
  kEnd,
};

struct Token {
  Tok kind = Tok::kEnd;
  std::string text;
  int line = 1;
  int column = 1;
};

inline std::string Describe(const Token& t) {
  switch (t.kind) {
    case Tok::kEnd:
      return "end of input";
    case Tok::kString:
      return "string \"" + t.text + "\"";
    default:
      return "`" + t.text + "`";
  }
}

inline bool IsIdentStart(char c) { return (c >= 'a' && c <= 'z') || c == '_'; }
inline bool IsIdentChar(char c) {
  return IsIdentStart(c) || (c >= '0' && c <= '9');
}
inline bool IsWordChar(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}
inline bool IsDigit(char c) { return c >= '0' && c <= '9'; }

inline bool IsIdentifier(std::string_view s) {
  return !s.empty() && IsIdentStart(s.front()) &&
         std::all_of(s.begin(), s.end(), IsIdentChar);
}

class Lexer {
 public:
  Lexer(std::string_view text, std::vector<ParseError>& errors)
      : text_(text), errors_(errors) {}

  std::vector<Token> Run() {
    std::vector<Token> out;
    while (true) {
      SkipTrivia();
      if (pos_ >= text_.size()) break;
      if (errors_.size() >= kMaxErrors) break;
      const int line = line_;
      const int column = column_;
      const char c = text_[pos_];
      auto single = [&](Tok kind) {
        out.push_back({kind, std::string(1, c), line, column});
        Bump();
      };
      switch (c) {
        case '{':
          single(Tok::kLBrace);
          continue;
        case '}':
          single(Tok::kRBrace);
          continue;
        case '[':
          single(Tok::kLBracket);
          continue;
        case ']':
          single(Tok::kRBracket);
          continue;
        case '(':
          single(Tok::kLParen);
          continue;
        case ')':
          single(Tok::kRParen);
          continue;
        case ',':
          single(Tok::kComma);
          continue;
        case ';':
          single(Tok::kSemicolon);
          continue;
        case '=':
          single(Tok::kEquals);
          continue;
        case '*':
          single(Tok::kStar);
          continue;
        case '<':
        case '>':
          if (Peek(1) == '=') {
            out.push_back({c == '<' ? Tok::kLessEq : Tok::kGreaterEq,
                           std::string{c, '='}, line, column});
            Bump();
            Bump();
          } else {
            Error(line, column, std::string(1, c),
                  std::string("unexpected `") + c + "`, did you mean `" + c +
                      "=`?");
            Bump();
          }
          continue;
        case '"':
          LexString(out);
          continue;
        default:
          break;
      }
      if (IsDigit(c) || (c == '-' && (IsDigit(Peek(1)) || Peek(1) == 'i'))) {
        LexNumber(out);
      } else if (IsWordChar(c)) {
        LexWord(out);
      } else {
        std::string shown = (static_cast<unsigned char>(c) < 0x20 ||
                             static_cast<unsigned char>(c) >= 0x7f)
                                ? HexByte(c)
                                : std::string(1, c);
        Error(line, column, shown, "unexpected character `" + shown + "`");
        Bump();
      }
    }
    out.push_back({Tok::kEnd, "", line_, column_});
    return out;
  }

 private:
  static std::string HexByte(char c) {
    static constexpr char kDigits[] = "0123456789abcdef";
    const auto b = static_cast<unsigned char>(c);
    return std::string("\\x") + kDigits[b >> 4] + kDigits[b & 0xf];
  }

  char Peek(std::size_t k) const {
    return pos_ + k < text_.size() ? text_[pos_ + k] : '\0';
  }

  void Bump() {
    if (text_[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++pos_;
  }

  void SkipTrivia() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
        Bump();
      } else if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') Bump();
      } else {
        break;
      }
    }
  }

  void Error(int line, int column, std::string found, std::string message) {
    errors_.push_back(
        {line, column, "token", std::move(found), std::move(message)});
  }

  void LexWord(std::vector<Token>& out) {
    const int line = line_;
    const int column = column_;
    const std::size_t start = pos_;
    while (pos_ < text_.size() && IsWordChar(text_[pos_])) Bump();
    std::string word(text_.substr(start, pos_ - start));
    if (!IsIdentifier(word)) {
      Error(line, column, word,
            "invalid identifier `" + word + "`, expected [a-z_][a-z0-9_]*");
    }
    out.push_back({Tok::kIdent, std::move(word), line, column});
  }

  void LexNumber(std::vector<Token>& out) {
    const int line = line_;
    const int column = column_;
    const std::size_t start = pos_;
    if (text_[pos_] == '-') Bump();
    if (Peek(0) == 'i') {
      while (pos_ < text_.size() && IsWordChar(text_[pos_])) Bump();
    } else {
      while (IsDigit(Peek(0))) Bump();
      if (Peek(0) == '.' && IsDigit(Peek(1))) {
        Bump();
        while (IsDigit(Peek(0))) Bump();
      }
      if (Peek(0) == 'e' || Peek(0) == 'E') {
        const std::size_t sign = (Peek(1) == '+' || Peek(1) == '-') ? 1 : 0;
        if (IsDigit(Peek(1 + sign))) {
          Bump();
          if (sign) Bump();
          while (IsDigit(Peek(0))) Bump();
        }
      }
    }
    std::string text(text_.substr(start, pos_ - start));
    if (!ParseNumber(text)) {
      Error(line, column, text, "malformed number `" + text + "`");
      return;
    }
    out.push_back({Tok::kNumber, std::move(text), line, column});
  }

  void LexString(std::vector<Token>& out) {
    const int line = line_;
    const int column = column_;
    Bump();  // opening quote
    std::string value;
    while (true) {
      if (pos_ >= text_.size() || text_[pos_] == '\n') {
        Error(line, column, "\"", "unterminated string literal");
        return;
      }
      const char c = text_[pos_];
      if (c == '"') {
        Bump();
        break;
      }
      if (c == '\\') {
        const char next = Peek(1);
        if (next != '"' && next != '\\') {
          Error(line_, column_, "\\", "unknown escape in string literal");
          Bump();
          continue;
        }
        Bump();
        value.push_back(next);
        Bump();
        continue;
      }
      value.push_back(c);
      Bump();
    }
    out.push_back({Tok::kString, std::move(value), line, column});
  }

  std::string_view text_;
  std::vector<ParseError>& errors_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int column_ = 1;
};

// Thrown after a syntax error has been recorded; caught at the nearest
// recovery point.
struct SyntaxAbort {};
// Thrown once the error budget is spent; unwinds the whole parse.
struct TooManyErrors {};

class Parser {
 public:
  explicit Parser(const SourceDocument& doc) {
    tokens_ = Lexer(doc.text, errors_).Run();
  }

  std::vector<ParseError>& errors() { return errors_; }

  const Token& Peek() const { return tokens_[pos_]; }
  bool AtEnd() const { return Peek().kind == Tok::kEnd; }
  bool At(Tok kind) const { return Peek().kind == kind; }
  bool AtKeyword(std::string_view kw) const {
    return Peek().kind == Tok::kIdent && Peek().text == kw;
  }

  Token Advance() {
    Token t = tokens_[pos_];
    if (t.kind == Tok::kLBrace) ++depth_;
    if (t.kind == Tok::kRBrace) --depth_;
    if (t.kind != Tok::kEnd) ++pos_;
    return t;
  }

  bool Accept(Tok kind) {
    if (!At(kind)) return false;
    Advance();
    return true;
  }
  bool AcceptKeyword(std::string_view kw) {
    if (!AtKeyword(kw)) return false;
    Advance();
    return true;
  }

  [[noreturn]] void Fail(std::string expected, std::string message = "") {
    Fail(Peek(), std::move(expected), std::move(message));
  }

  [[noreturn]] void Fail(const Token& at, std::string expected,
                         std::string message = "") {
    if (message.empty()) {
      message = "expected " + expected + ", found " + Describe(at);
    }
    errors_.push_back(
        {at.line, at.column, std::move(expected), Describe(at), message});
    if (errors_.size() >= kMaxErrors) throw TooManyErrors{};
    throw SyntaxAbort{};
  }

  Token Expect(Tok kind, std::string_view expected) {
    if (!At(kind)) Fail(std::string(expected));
    return Advance();
  }

  void ExpectKeyword(std::string_view kw) {
    if (!AtKeyword(kw)) Fail("`" + std::string(kw) + "`");
    Advance();
  }

  std::string ExpectIdent(std::string_view what) {
    if (!At(Tok::kIdent) || !IsIdentifier(Peek().text)) {
      Fail(std::string(what));
    }
    return Advance().text;
  }

  double ExpectNumber(std::string_view what) {
    if (At(Tok::kNumber) || AtKeyword("inf")) {
      return *ParseNumber(Advance().text);
    }
    Fail(std::string(what));
  }

  std::uint64_t ExpectInteger(std::string_view what) {
    if (!At(Tok::kNumber)) Fail(std::string(what));
    const Token& t = Peek();
    if (!std::all_of(t.text.begin(), t.text.end(), IsDigit) ||
        t.text.size() > 18) {
      Fail(std::string(what));
    }
    return std::stoull(Advance().text);
  }

  // `[a, b, c]` of identifiers; trailing comma tolerated. `open`/`close`
  // allow the `{}` spelling for principle sets.
  std::vector<std::string> IdentList(std::string_view what) {
    Tok close = Tok::kRBracket;
    if (At(Tok::kLBrace)) {
      close = Tok::kRBrace;
    } else if (!At(Tok::kLBracket)) {
      Fail("`[`");
    }
    Advance();
    std::vector<std::string> out;
    while (!At(close)) {
      out.push_back(ExpectIdent(what));
      if (!Accept(Tok::kComma)) break;
    }
    if (!At(close)) Fail(close == Tok::kRBracket ? "`,` or `]`" : "`,` or `}`");
    Advance();
    return out;
  }

  // A single identifier or an identifier list.
  std::vector<std::string> IdentOrList(std::string_view what) {
    if (At(Tok::kLBracket)) return IdentList(what);
    return {ExpectIdent(what)};
  }

  template <class Id>
  Pattern<Id> ParsePattern(std::string_view what) {
    if (Accept(Tok::kStar)) return Pattern<Id>::Any();
    if (!At(Tok::kLBracket) && !At(Tok::kIdent)) {
      Fail("`*`, " + std::string(what) + ", or `[`");
    }
    std::set<Id> ids;
    for (std::string& s : IdentOrList(what)) ids.insert(Id(std::move(s)));
    return Pattern<Id>::Of(std::move(ids));
  }

  TrustModel ParseModel() {
    const Token at = Peek();
    const std::string m = ExpectIdent("trust model");
    if (m == "central") return TrustModel::kCentral;
    if (m == "shuffle") return TrustModel::kShuffle;
    if (m == "local") return TrustModel::kLocal;
    Fail(at, "`central`, `shuffle`, or `local`");
  }

  // none | dp | swapping | encryption | smpc | custom(<id>)
  PropertySpec ParseKind() {
    const Token at = Peek();
    const std::string k = ExpectIdent("property kind");
    if (k == "none") return PropertySpec::Of(PetKind::kNoPet);
    if (k == "dp") return PropertySpec::Of(PetKind::kDp);
    if (k == "swapping") return PropertySpec::Of(PetKind::kSwapping);
    if (k == "encryption") return PropertySpec::Of(PetKind::kEncryption);
    if (k == "smpc") return PropertySpec::Of(PetKind::kSmpc);
    if (k == "custom") {
      Expect(Tok::kLParen, "`(`");
      std::string name = ExpectIdent("custom property name");
      Expect(Tok::kRParen, "`)`");
      return PropertySpec::Custom(std::move(name));
    }
    Fail(at, "property kind");
  }

  std::set<PropertySpec> KindList() {
    Expect(Tok::kLBracket, "`[`");
    std::set<PropertySpec> out;
    while (!At(Tok::kRBracket)) {
      out.insert(ParseKind());
      if (!Accept(Tok::kComma)) break;
    }
    Expect(Tok::kRBracket, "`,` or `]`");
    return out;
  }

  PropertyRequirement ParseRequirement() {
    if (AcceptKeyword("any")) return AnyProperty{};
    if (AcceptKeyword("not")) return NotKind{KindList()};
    if (AcceptKeyword("dp_at_most")) {
      DpAtMost req;
      Expect(Tok::kLParen, "`(`");
      ExpectKeyword("model");
      Expect(Tok::kGreaterEq, "`>=`");
      if (AcceptKeyword("any")) {
        req.model_min = std::nullopt;
      } else {
        req.model_min = ParseModel();
      }
      Expect(Tok::kComma, "`,`");
      ExpectKeyword("eps");
      Expect(Tok::kLessEq, "`<=`");
      req.epsilon_max = ExpectNumber("epsilon bound");
      Expect(Tok::kComma, "`,`");
      ExpectKeyword("delta");
      Expect(Tok::kLessEq, "`<=`");
      req.delta_max = ExpectNumber("delta bound");
      Expect(Tok::kRParen, "`)`");
      return req;
    }
    if (AtKeyword("dp") && tokens_[pos_ + 1].kind == Tok::kLParen) {
      // dp(model=m, eps=e, delta=d) as a requirement is shorthand for
      // dp_at_most(model>=m, eps<=e, delta<=d).
      Advance();
      Advance();
      DpAtMost req;
      ExpectKeyword("model");
      Expect(Tok::kEquals, "`=`");
      req.model_min = ParseModel();
      Expect(Tok::kComma, "`,`");
      ExpectKeyword("eps");
      Expect(Tok::kEquals, "`=`");
      req.epsilon_max = ExpectNumber("epsilon");
      Expect(Tok::kComma, "`,`");
      ExpectKeyword("delta");
      Expect(Tok::kEquals, "`=`");
      req.delta_max = ExpectNumber("delta");
      Expect(Tok::kRParen, "`)`");
      return req;
    }
    if (!At(Tok::kIdent)) Fail("property requirement");
    return ExactKind{ParseKind()};
  }

  // Concrete property of a flow. `dataset=` inside dp(...) is returned
  // through `dataset`.
  TransmissionProperty ParseProperty(std::optional<DatasetId>& dataset) {
    const Token at = Peek();
    if (AcceptKeyword("dp")) {
      DpGuarantee dp;
      if (Accept(Tok::kLParen)) {
        std::set<std::string> seen;
        while (!At(Tok::kRParen)) {
          const Token key_tok = Peek();
          const std::string key = ExpectIdent("dp parameter");
          if (!seen.insert(key).second) {
            Fail(key_tok, "dp parameter",
                 "duplicate dp parameter `" + key + "`");
          }
          Expect(Tok::kEquals, "`=`");
          if (key == "model") {
            dp.model = ParseModel();
          } else if (key == "eps") {
            dp.epsilon = ExpectNumber("epsilon");
          } else if (key == "delta") {
            dp.delta = ExpectNumber("delta");
          } else if (key == "mechanism") {
            const Token mech_tok = Peek();
            std::string mech = ExpectIdent("mechanism name");
            if (!IsKnownMechanism(mech)) {
              Fail(mech_tok, "mechanism name",
                   "unknown mechanism `" + mech + "`");
            }
            dp.mechanism = std::move(mech);
          } else if (key == "releases") {
            const Token n_tok = Peek();
            const std::uint64_t n = ExpectInteger("release count");
            if (n == 0 || n > 0xffffffffu) {
              Fail(n_tok, "positive release count");
            }
            dp.composed_release_count = static_cast<std::uint32_t>(n);
          } else if (key == "dataset") {
            dataset = DatasetId(ExpectIdent("dataset id"));
          } else {
            Fail(key_tok,
                 "`model`, `eps`, `delta`, `mechanism`, `releases`, or "
                 "`dataset`");
          }
          if (!Accept(Tok::kComma)) break;
        }
        Expect(Tok::kRParen, "`,` or `)`");
      }
      return TransmissionProperty::Dp(std::move(dp));
    }
    const PropertySpec spec = ParseKind();
    switch (spec.kind) {
      case PetKind::kNoPet:
        return TransmissionProperty::NoPet();
      case PetKind::kSwapping:
        return TransmissionProperty::Swapping();
      case PetKind::kEncryption:
        return TransmissionProperty::Encryption();
      case PetKind::kSmpc:
        return TransmissionProperty::Smpc();
      case PetKind::kCustom:
        return TransmissionProperty::Custom(spec.custom_name);
      case PetKind::kDp:
        break;
    }
    Fail(at, "transmission property");
  }

  // Skips to the end of the block that was open at `start_depth`: consumes
  // through the `}` that returns to `start_depth`, but never consumes a
  // `}` that would close an enclosing block.
  void RecoverBlock(int start_depth) {
    while (!AtEnd()) {
      if (At(Tok::kRBrace)) {
        if (depth_ <= start_depth) return;
        Advance();
        if (depth_ == start_depth) return;
        continue;
      }
      Advance();
    }
  }

  // Skips past the next `;` at `depth`, stopping early before a `norm`
  // keyword or a closing brace at that depth.
  void RecoverSection(int depth) {
    while (!AtEnd()) {
      if (depth_ == depth) {
        if (At(Tok::kRBrace) || AtKeyword("norm")) return;
        if (At(Tok::kSemicolon)) {
          Advance();
          return;
        }
      }
      if (At(Tok::kRBrace) && depth_ < depth) return;
      Advance();
    }
  }

  int depth() const { return depth_; }

 private:
  std::vector<Token> tokens_;
  std::vector<ParseError> errors_;
  std::size_t pos_ = 0;
  int depth_ = 0;
};

inline InformationNorm ParseNormBody(Parser& p) {
  InformationNorm norm;
  p.ExpectKeyword("norm");
  norm.id = NormId(p.ExpectIdent("norm id"));
  p.Expect(Tok::kLBrace, "`{`");
  if (p.AcceptKeyword("allow")) {
    norm.modality = Modality::kPermitted;
  } else if (p.AcceptKeyword("forbid")) {
    norm.modality = Modality::kForbidden;
  } else if (p.AcceptKeyword("require")) {
    norm.modality = Modality::kRequired;
  } else {
    p.Fail("`allow`, `forbid`, or `require`");
  }
  p.ExpectKeyword("from");
  norm.sender = p.ParsePattern<RoleId>("role");
  p.ExpectKeyword("to");
  norm.receiver = p.ParsePattern<RoleId>("role");
  p.ExpectKeyword("about");
  norm.subject = p.ParsePattern<RoleId>("role");
  p.ExpectKeyword("attrs");
  norm.attributes = p.ParsePattern<AttributeId>("attribute");
  if (p.AcceptKeyword("when")) {
    for (std::string& s : p.IdentList("principle")) {
      norm.principles.insert(PrincipleId(std::move(s)));
    }
  }
  if (p.AcceptKeyword("with")) norm.property = p.ParseRequirement();
  p.Expect(Tok::kRBrace, "`}`");
  return norm;
}

inline Context ParseContextDocument(Parser& p) {
  Context ctx;
  p.ExpectKeyword("context");
  ctx.id = ContextId(p.ExpectIdent("context id"));
  p.Expect(Tok::kLBrace, "`{`");
  const int body_depth = p.depth();
  std::set<std::string> sections;
  while (!p.At(Tok::kRBrace) && !p.AtEnd()) {
    if (p.AtKeyword("norm")) {
      const int norm_depth = p.depth();
      try {
        ctx.norms.push_back(ParseNormBody(p));
      } catch (const SyntaxAbort&) {
        p.RecoverBlock(norm_depth);
      }
      continue;
    }
    const Token head = p.Peek();
    try {
      if (head.kind != Tok::kIdent) {
        p.Advance();
        p.Fail(head, "section keyword or `norm`");
      }
      const std::string& kw = head.text;
      const bool known = kw == "purposes" || kw == "roles" || kw == "attrs" ||
                         kw == "principles" || kw == "properties" ||
                         kw == "budget";
      p.Advance();
      if (!known) p.Fail(head, "section keyword or `norm`");
      if (!sections.insert(kw).second) {
        p.Fail(head, "section keyword or `norm`",
               "duplicate `" + kw + "` section");
      }
      if (kw == "purposes") {
        p.Expect(Tok::kLBracket, "`[`");
        while (!p.At(Tok::kRBracket)) {
          if (p.At(Tok::kString) || p.At(Tok::kIdent)) {
            ctx.purposes.insert(p.Advance().text);
          } else {
            p.Fail("purpose tag");
          }
          if (!p.Accept(Tok::kComma)) break;
        }
        p.Expect(Tok::kRBracket, "`,` or `]`");
      } else if (kw == "roles") {
        for (std::string& s : p.IdentList("role")) {
          ctx.roles.insert(RoleId(std::move(s)));
        }
      } else if (kw == "attrs") {
        for (std::string& s : p.IdentList("attribute")) {
          ctx.attributes.insert(AttributeId(std::move(s)));
        }
      } else if (kw == "principles") {
        for (std::string& s : p.IdentList("principle")) {
          ctx.principles.insert(PrincipleId(std::move(s)));
        }
      } else if (kw == "properties") {
        ctx.properties = p.KindList();
      } else {
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
        ctx.budget_cap = cap;
      }
      p.Expect(Tok::kSemicolon, "`;`");
    } catch (const SyntaxAbort&) {
      p.RecoverSection(body_depth);
    }
  }
  p.Expect(Tok::kRBrace, "`}`");
  if (!p.AtEnd()) p.Fail("end of input");
  return ctx;
}

inline FlowEvent ParseFlowBody(Parser& p, std::uint64_t default_seq,
                               std::uint64_t min_seq) {
  FlowEvent flow;
  flow.seq = default_seq;
  p.ExpectKeyword("flow");
  p.Expect(Tok::kLBrace, "`{`");
  std::set<std::string> seen;
  while (!p.At(Tok::kRBrace)) {
    const Token head = p.Peek();
    if (head.kind != Tok::kIdent) p.Fail("flow clause or `}`");
    const std::string kw = head.text;
    p.Advance();
    if (!seen.insert(kw).second) {
      p.Fail(head, "flow clause", "duplicate `" + kw + "` clause");
    }
    if (kw == "from") {
      flow.sender = RoleId(p.ExpectIdent("role"));
    } else if (kw == "to") {
      flow.receiver = RoleId(p.ExpectIdent("role"));
    } else if (kw == "subjects") {
      for (std::string& s : p.IdentOrList("role")) {
        flow.subjects.insert(RoleId(std::move(s)));
      }
    } else if (kw == "attrs") {
      for (std::string& s : p.IdentOrList("attribute")) {
        flow.attributes.insert(AttributeId(std::move(s)));
      }
    } else if (kw == "assert") {
      for (std::string& s : p.IdentOrList("principle")) {
        flow.asserted_principles.insert(PrincipleId(std::move(s)));
      }
    } else if (kw == "with") {
      std::optional<DatasetId> dataset;
      flow.property = p.ParseProperty(dataset);
      if (dataset) {
        if (flow.dataset) p.Fail(head, "flow clause", "dataset given twice");
        flow.dataset = std::move(dataset);
      }
    } else if (kw == "dataset") {
      if (flow.dataset) p.Fail(head, "flow clause", "dataset given twice");
      flow.dataset = DatasetId(p.ExpectIdent("dataset id"));
    } else if (kw == "seq") {
      p.Expect(Tok::kEquals, "`=`");
      const Token at = p.Peek();
      flow.seq = p.ExpectInteger("sequence number");
      if (flow.seq < min_seq) {
        p.Fail(at, "sequence number",
               "sequence number " + std::to_string(flow.seq) +
                   " must be at least " + std::to_string(min_seq));
      }
    } else {
      p.Fail(head,
             "`from`, `to`, `subjects`, `attrs`, `assert`, `with`, "
             "`dataset`, or `seq`");
    }
  }
  const Token close = p.Peek();
  for (const char* required : {"from", "to", "subjects", "attrs"}) {
    if (!seen.contains(required)) {
      p.Fail(close, "`" + std::string(required) + "`",
             "flow is missing its `" + std::string(required) + "` clause");
    }
  }
  p.Advance();
  return flow;
}

// ---------------------------------------------------------------------------
// Printing helpers

template <class Range, class Fn>
std::string JoinSorted(const Range& items, Fn&& to_text) {
  std::vector<std::string> texts;
  for (const auto& item : items) texts.push_back(to_text(item));
  std::sort(texts.begin(), texts.end());
  std::string out = "[";
  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (i) out += ", ";
    out += texts[i];
  }
  return out + "]";
}

template <class Id>
std::string IdList(const std::set<Id>& ids) {
  return JoinSorted(ids, [](const Id& id) { return id.str(); });
}

template <class Id>
std::string IdOrList(const std::set<Id>& ids) {
  if (ids.size() == 1) return ids.begin()->str();
  return IdList(ids);
}

template <class Id>
std::string PrintPattern(const Pattern<Id>& p) {
  if (p.is_any()) return "*";
  return IdOrList(p.ids());
}

inline std::string QuoteIfNeeded(const std::string& s) {
  if (IsIdentifier(s)) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out + "\"";
}

inline std::string PrintRequirement(const PropertyRequirement& req) {
  struct Visitor {
    std::string operator()(const AnyProperty&) const { return "any"; }
    std::string operator()(const ExactKind& r) const {
      return DisplayName(r.kind);
    }
    std::string operator()(const NotKind& r) const {
      return "not " + JoinSorted(r.kinds, DisplayName);
    }
    std::string operator()(const DpAtMost& r) const {
      return "dp_at_most(model>=" +
             std::string(r.model_min ? Name(*r.model_min) : "any") +
             ", eps<=" + FormatNumber(r.epsilon_max) +
             ", delta<=" + FormatNumber(r.delta_max) + ")";
    }
  };
  return std::visit(Visitor{}, req);
}

inline std::string PrintProperty(const TransmissionProperty& p,
                                 const std::optional<DatasetId>& dataset) {
  const DpGuarantee* dp = p.dp();
  if (dp == nullptr) return DisplayName(p.spec());
  std::string out = "dp(model=" + std::string(Name(dp->model));
  if (dp->epsilon) out += ", eps=" + FormatNumber(*dp->epsilon);
  if (dp->delta) out += ", delta=" + FormatNumber(*dp->delta);
  if (dp->mechanism) out += ", mechanism=" + *dp->mechanism;
  if (dp->composed_release_count != 1) {
    out += ", releases=" + std::to_string(dp->composed_release_count);
  }
  if (dataset) out += ", dataset=" + dataset->str();
  return out + ")";
}

inline std::string_view ModalityKeyword(Modality m) {
  switch (m) {
    case Modality::kPermitted:
      return "allow";
    case Modality::kForbidden:
      return "forbid";
    case Modality::kRequired:
      return "require";
  }
  return "allow";
}

}  // namespace dsl_internal

inline ParseResult<Context> ParsePolicy(const SourceDocument& doc) {
  dsl_internal::Parser p(doc);
  Context ctx;
  try {
    ctx = dsl_internal::ParseContextDocument(p);
  } catch (const dsl_internal::SyntaxAbort&) {
  } catch (const dsl_internal::TooManyErrors&) {
  }
  if (!p.errors().empty()) return std::move(p.errors());
  return ctx;
}

// Flows in document order. A flow without `seq=` gets the previous
// sequence number plus one (the first flow gets 1); explicit numbers must
// strictly increase.
inline ParseResult<std::vector<FlowEvent>> ParseFlows(
    const SourceDocument& doc) {
  using dsl_internal::Tok;
  dsl_internal::Parser p(doc);
  std::vector<FlowEvent> flows;
  std::uint64_t last_seq = 0;
  try {
    while (!p.AtEnd()) {
      if (!p.AtKeyword("flow")) {
        try {
          p.Fail("`flow`");
        } catch (const dsl_internal::SyntaxAbort&) {
          // Skip to the next `flow` keyword at top level.
          p.Advance();
          while (!p.AtEnd() && !(p.depth() == 0 && p.AtKeyword("flow"))) {
            p.Advance();
          }
        }
        continue;
      }
      const int depth = p.depth();
      try {
        FlowEvent f = dsl_internal::ParseFlowBody(p, last_seq + 1,
                                                  last_seq + 1);
        last_seq = f.seq;
        flows.push_back(std::move(f));
      } catch (const dsl_internal::SyntaxAbort&) {
        p.RecoverBlock(depth);
        ++last_seq;
      }
    }
  } catch (const dsl_internal::TooManyErrors&) {
  }
  if (!p.errors().empty()) return std::move(p.errors());
  return flows;
}

// Canonical text: declarations sorted, norms in their original order,
// numbers in shortest round-trip form, LF line endings.
inline std::string PrintPolicy(const Context& ctx) {
  using namespace dsl_internal;
  std::ostringstream out;
  out << "# cip-version: 1\n";
  out << "context " << ctx.id.str() << " {\n";
  out << "  purposes " << JoinSorted(ctx.purposes, QuoteIfNeeded) << ";\n";
  out << "  roles " << IdList(ctx.roles) << ";\n";
  out << "  attrs " << IdList(ctx.attributes) << ";\n";
  out << "  principles " << IdList(ctx.principles) << ";\n";
  if (!ctx.properties.empty()) {
    out << "  properties " << JoinSorted(ctx.properties, DisplayName)
        << ";\n";
  }
  if (ctx.budget_cap) {
    out << "  budget(eps=" << FormatNumber(ctx.budget_cap->epsilon)
        << ", delta=" << FormatNumber(ctx.budget_cap->delta) << ");\n";
  }
  for (const InformationNorm& norm : ctx.norms) {
    out << "\n  norm " << norm.id.str() << " {\n";
    out << "    " << ModalityKeyword(norm.modality) << "\n";
    out << "    from " << PrintPattern(norm.sender) << "\n";
    out << "    to " << PrintPattern(norm.receiver) << "\n";
    out << "    about " << PrintPattern(norm.subject) << "\n";
    out << "    attrs " << PrintPattern(norm.attributes) << "\n";
    out << "    when " << IdList(norm.principles) << "\n";
    out << "    with " << PrintRequirement(norm.property) << "\n";
    out << "  }\n";
  }
  out << "}\n";
  return out.str();
}

inline std::string PrintFlows(const std::vector<FlowEvent>& flows) {
  using namespace dsl_internal;
  std::ostringstream out;
  out << "# cip-version: 1\n";
  std::uint64_t last_seq = 0;
  for (const FlowEvent& f : flows) {
    out << "flow {\n";
    out << "  from " << f.sender.str() << "\n";
    out << "  to " << f.receiver.str() << "\n";
    out << "  subjects " << IdOrList(f.subjects) << "\n";
    out << "  attrs " << IdList(f.attributes) << "\n";
    out << "  assert " << IdList(f.asserted_principles) << "\n";
    const bool dataset_inline = f.property.kind() == PetKind::kDp;
    out << "  with "
        << PrintProperty(f.property,
                         dataset_inline ? f.dataset : std::nullopt)
        << "\n";
    if (f.dataset && !dataset_inline) {
      out << "  dataset " << f.dataset->str() << "\n";
    }
    if (f.seq != last_seq + 1) out << "  seq=" << f.seq << "\n";
    out << "}\n";
    last_seq = f.seq;
  }
  return out.str();
}

}  // namespace flownorm

#endif  // FLOWNORM_DSL_HPP_
