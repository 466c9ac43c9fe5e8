// Copyright 2026 The solverank Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "solverank/logic.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <unordered_set>
#include <utility>

#include <fmt/format.h>

namespace solverank::logic {

namespace {

constexpr std::array<std::string_view, 20> kReserved = {
    "theory", "goal",  "lemma", "axiom",  "function", "predicate", "and",
    "or",     "not",   "->",    "<->",    "ite",      "let",       "as",
    "eps",    "match", "forall", "exists", "true",    "false"};

bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_alpha(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}
bool is_symbol_char(char c) {
  return std::string_view("-+*/<>=%&|^~@:$!?").find(c) !=
         std::string_view::npos;
}

bool is_int_literal(std::string_view w) {
  return !w.empty() && std::all_of(w.begin(), w.end(), is_digit);
}

bool is_float_literal(std::string_view w) {
  const auto dot = w.find('.');
  if (dot == std::string_view::npos) return false;
  return is_int_literal(w.substr(0, dot)) && is_int_literal(w.substr(dot + 1));
}

enum class TokenType { LParen, RParen, Atom, End };

struct Token {
  TokenType type;
  std::string text;
  std::size_t line;
  std::size_t column;
};

std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> tokens;
  std::size_t line = 1, column = 1, i = 0;
  auto advance = [&](char c) {
    ++i;
    if (c == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  };
  while (i < src.size()) {
    const char c = src[i];
    if (static_cast<unsigned char>(c) >= 0x80) {
      throw ParseError(ParseErrorKind::Lexical, line, column,
                       "non-ASCII character");
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(c);
      continue;
    }
    if (c == ';') {
      while (i < src.size() && src[i] != '\n') advance(src[i]);
      continue;
    }
    if (c == '(' || c == ')') {
      tokens.push_back({c == '(' ? TokenType::LParen : TokenType::RParen,
                        std::string(1, c), line, column});
      advance(c);
      continue;
    }
    const std::size_t start = i, start_line = line, start_col = column;
    while (i < src.size()) {
      const char d = src[i];
      if (std::isspace(static_cast<unsigned char>(d)) || d == '(' ||
          d == ')' || d == ';' || static_cast<unsigned char>(d) >= 0x80)
        break;
      advance(d);
    }
    std::string word(src.substr(start, i - start));
    if (!(word == "_" || is_int_literal(word) || is_float_literal(word) ||
          is_reserved_word(word) || is_identifier(word))) {
      throw ParseError(ParseErrorKind::Lexical, start_line, start_col,
                       fmt::format("invalid token '{}'", word));
    }
    tokens.push_back({TokenType::Atom, std::move(word), start_line, start_col});
  }
  tokens.push_back({TokenType::End, "", line, column});
  return tokens;
}

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  std::vector<Theory> parse_theories() {
    std::vector<Theory> theories;
    std::unordered_set<std::string> names;
    while (peek().type != TokenType::End) {
      const Token& open = expect(TokenType::LParen, "'(' to start a theory");
      expect_keyword("theory");
      const Token& name = expect_identifier("theory name");
      if (!names.insert(name.text).second) {
        throw error(ParseErrorKind::Duplicate, name,
                    fmt::format("duplicate theory '{}'", name.text));
      }
      Theory theory{name.text, {}};
      std::unordered_set<std::string> decl_names;
      while (peek().type == TokenType::LParen) {
        Declaration decl = parse_declaration(decl_names);
        theory.decls.push_back(std::move(decl));
      }
      expect_close(open);
      theories.push_back(std::move(theory));
    }
    return theories;
  }

 private:
  const Token& peek() const { return tokens_[pos_]; }
  const Token& next() { return tokens_[pos_ < tokens_.size() - 1 ? pos_++ : pos_]; }

  static ParseError error(ParseErrorKind kind, const Token& at,
                          const std::string& msg) {
    return ParseError(kind, at.line, at.column, msg);
  }

  const Token& expect(TokenType type, const char* what) {
    const Token& t = peek();
    if (t.type != type) {
      throw error(ParseErrorKind::Syntax, t,
                  fmt::format("expected {}, found {}", what, describe(t)));
    }
    return next();
  }

  void expect_close(const Token& open) {
    const Token& t = peek();
    if (t.type == TokenType::End) {
      throw error(ParseErrorKind::Syntax, t,
                  fmt::format("unclosed '(' opened at {}:{}", open.line,
                              open.column));
    }
    expect(TokenType::RParen, "')'");
  }

  void expect_keyword(std::string_view kw) {
    const Token& t = peek();
    if (t.type != TokenType::Atom || t.text != kw) {
      throw error(ParseErrorKind::Syntax, t,
                  fmt::format("expected '{}', found {}", kw, describe(t)));
    }
    next();
  }

  const Token& expect_identifier(const char* what) {
    const Token& t = peek();
    if (t.type != TokenType::Atom || !is_identifier(t.text)) {
      throw error(ParseErrorKind::Syntax, t,
                  fmt::format("expected {}, found {}", what, describe(t)));
    }
    return next();
  }

  static std::string describe(const Token& t) {
    switch (t.type) {
      case TokenType::LParen: return "'('";
      case TokenType::RParen: return "')'";
      case TokenType::End: return "end of input";
      case TokenType::Atom: break;
    }
    return fmt::format("'{}'", t.text);
  }

  Declaration parse_declaration(std::unordered_set<std::string>& names) {
    const Token& open = expect(TokenType::LParen, "'(' to start a declaration");
    const Token& kw = peek();
    Declaration decl;
    if (kw.text == "goal") {
      decl.kind = DeclKind::Goal;
    } else if (kw.text == "lemma") {
      decl.kind = DeclKind::Lemma;
    } else if (kw.text == "axiom") {
      decl.kind = DeclKind::Axiom;
    } else if (kw.text == "function") {
      decl.kind = DeclKind::Function;
    } else if (kw.text == "predicate") {
      decl.kind = DeclKind::Predicate;
    } else {
      throw error(ParseErrorKind::Syntax, kw,
                  fmt::format("expected a declaration keyword, found {}",
                              describe(kw)));
    }
    next();
    const Token& name = expect_identifier("declaration name");
    if (!names.insert(name.text).second) {
      throw error(ParseErrorKind::Duplicate, name,
                  fmt::format("duplicate declaration '{}'", name.text));
    }
    decl.name = name.text;
    if (decl.kind == DeclKind::Function || decl.kind == DeclKind::Predicate) {
      const Token& popen = expect(TokenType::LParen, "'(' to start parameters");
      decl.params = parse_binder_names(popen, /*allow_empty=*/true);
      if (peek().type != TokenType::RParen) {
        ScopeGuard guard(scope_, decl.params);
        decl.body = parse_term(Mode::Term);
      }
    } else {
      if (peek().type == TokenType::RParen) {
        throw error(ParseErrorKind::Arity, open,
                    fmt::format("{} '{}' requires a body", to_string(decl.kind),
                                decl.name));
      }
      decl.body = parse_term(Mode::Term);
    }
    expect_close(open);
    return decl;
  }

  // Reads "IDENT* )" after an already-consumed '('.
  std::vector<std::string> parse_binder_names(const Token& open,
                                              bool allow_empty) {
    std::vector<std::string> names;
    while (peek().type != TokenType::RParen) {
      const Token& t = expect_identifier("a binder name");
      if (std::find(names.begin(), names.end(), t.text) != names.end()) {
        throw error(ParseErrorKind::Duplicate, t,
                    fmt::format("duplicate binder '{}'", t.text));
      }
      names.push_back(t.text);
    }
    expect_close(open);
    if (names.empty() && !allow_empty) {
      throw error(ParseErrorKind::Arity, open,
                  "binder list needs at least one name");
    }
    return names;
  }

  enum class Mode { Term, Pattern };

  struct ScopeGuard {
    ScopeGuard(std::vector<std::string>& scope,
               const std::vector<std::string>& names)
        : scope_(scope), count_(names.size()) {
      scope_.insert(scope_.end(), names.begin(), names.end());
    }
    ~ScopeGuard() { scope_.resize(scope_.size() - count_); }
    ScopeGuard(const ScopeGuard&) = delete;
    ScopeGuard& operator=(const ScopeGuard&) = delete;

    std::vector<std::string>& scope_;
    std::size_t count_;
  };

  bool is_bound(const std::string& name, std::size_t from = 0) const {
    return std::find(scope_.begin() + static_cast<std::ptrdiff_t>(from),
                     scope_.end(), name) != scope_.end();
  }

  Term parse_atom(const Token& t, Mode mode) {
    if (t.text == "true") return Term::leaf(TermKind::True);
    if (t.text == "false") return Term::leaf(TermKind::False);
    if (t.text == "_") return Term::leaf(TermKind::Wildcard);
    if (is_int_literal(t.text)) return Term::leaf(TermKind::IntLit, t.text);
    if (is_float_literal(t.text)) return Term::leaf(TermKind::FloatLit, t.text);
    if (!is_identifier(t.text)) {
      throw error(ParseErrorKind::Syntax, t,
                  fmt::format("unexpected keyword '{}'", t.text));
    }
    if (mode == Mode::Pattern && !is_bound(t.text, pattern_base_) &&
        is_pattern_variable_name(t.text)) {
      if (std::find(pattern_vars_.begin(), pattern_vars_.end(), t.text) !=
          pattern_vars_.end()) {
        throw error(ParseErrorKind::Duplicate, t,
                    fmt::format("pattern variable '{}' bound twice", t.text));
      }
      pattern_vars_.push_back(t.text);
      return Term::leaf(TermKind::Var, t.text);
    }
    if (mode == Mode::Pattern) {
      return Term::leaf(is_bound(t.text, pattern_base_) ? TermKind::Var
                                                        : TermKind::ConstRef,
                        t.text);
    }
    return Term::leaf(is_bound(t.text) ? TermKind::Var : TermKind::ConstRef,
                      t.text);
  }

  // Parses terms up to the closing paren of `open`.
  std::vector<Term> parse_term_list(const Token& open, Mode mode) {
    std::vector<Term> out;
    while (peek().type != TokenType::RParen && peek().type != TokenType::End) {
      out.push_back(parse_term(mode));
    }
    expect_close(open);
    return out;
  }

  void check_arity(const Token& open, std::string_view head, std::size_t got,
                   std::size_t min, std::size_t max) {
    if (got < min || got > max) {
      std::string want =
          min == max ? fmt::format("exactly {}", min)
                     : fmt::format("at least {}", min);
      throw error(ParseErrorKind::Arity, open,
                  fmt::format("'{}' takes {} argument(s), got {}", head, want,
                              got));
    }
  }

  Term parse_term(Mode mode) {
    const Token& t = peek();
    if (t.type == TokenType::Atom) return parse_atom(next(), mode);
    if (t.type != TokenType::LParen) {
      throw error(ParseErrorKind::Syntax, t,
                  fmt::format("expected a term, found {}", describe(t)));
    }
    const Token& open = next();
    const Token& head = peek();
    if (head.type != TokenType::Atom) {
      throw error(ParseErrorKind::Syntax, head,
                  fmt::format("expected an operator, found {}", describe(head)));
    }
    next();
    const std::string& h = head.text;
    constexpr std::size_t kMany = static_cast<std::size_t>(-1);

    auto simple = [&](TermKind kind, std::size_t min, std::size_t max) {
      std::vector<Term> args = parse_term_list(open, mode);
      check_arity(open, h, args.size(), min, max);
      return Term::node(kind, std::move(args));
    };

    if (h == "and") return simple(TermKind::And, 2, kMany);
    if (h == "or") return simple(TermKind::Or, 2, kMany);
    if (h == "not") return simple(TermKind::Not, 1, 1);
    if (h == "->") return simple(TermKind::Imp, 2, 2);
    if (h == "<->") return simple(TermKind::Iff, 2, 2);
    if (h == "ite") return simple(TermKind::Ite, 3, 3);
    if (h == "let") {
      const Token& binder = expect_identifier("a let binder");
      Term value = parse_term(mode);
      if (peek().type == TokenType::RParen) {
        throw error(ParseErrorKind::Arity, open, "'let' requires a body");
      }
      Term body;
      {
        ScopeGuard guard(scope_, {binder.text});
        body = parse_term(mode);
      }
      expect_close(open);
      Term out = Term::node(TermKind::Let, {std::move(value), std::move(body)});
      out.binders = {binder.text};
      return out;
    }
    if (h == "as") {
      if (peek().type == TokenType::RParen) {
        throw error(ParseErrorKind::Arity, open, "'as' requires a term");
      }
      Term inner = parse_term(mode);
      const Token& type = expect_identifier("a type name");
      expect_close(open);
      Term out = Term::node(TermKind::Cast, {std::move(inner)});
      out.text = type.text;
      return out;
    }
    if (h == "eps") {
      const Token& binder = expect_identifier("an eps binder");
      if (peek().type == TokenType::RParen) {
        throw error(ParseErrorKind::Arity, open, "'eps' requires a body");
      }
      Term body;
      {
        ScopeGuard guard(scope_, {binder.text});
        body = parse_term(mode);
      }
      expect_close(open);
      Term out = Term::node(TermKind::Eps, {std::move(body)});
      out.binders = {binder.text};
      return out;
    }
    if (h == "forall" || h == "exists") {
      const Token& lopen = expect(TokenType::LParen, "'(' to start binders");
      std::vector<std::string> binders =
          parse_binder_names(lopen, /*allow_empty=*/false);
      std::vector<Term> body;
      {
        ScopeGuard guard(scope_, binders);
        body = parse_term_list(open, mode);
      }
      check_arity(open, h, body.size(), 1, 1);
      Term out = Term::node(h == "forall" ? TermKind::Forall : TermKind::Exists,
                            std::move(body));
      out.binders = std::move(binders);
      return out;
    }
    if (h == "match") {
      if (peek().type == TokenType::RParen) {
        throw error(ParseErrorKind::Arity, open, "'match' requires a scrutinee");
      }
      std::vector<Term> children;
      children.push_back(parse_term(mode));
      while (peek().type == TokenType::LParen) {
        const Token& bopen = next();
        auto saved_vars = std::move(pattern_vars_);
        const auto saved_base = pattern_base_;
        pattern_vars_.clear();
        pattern_base_ = scope_.size();
        Term pattern = parse_term(Mode::Pattern);
        std::vector<std::string> bound = std::move(pattern_vars_);
        pattern_vars_ = std::move(saved_vars);
        pattern_base_ = saved_base;
        if (peek().type == TokenType::RParen) {
          throw error(ParseErrorKind::Arity, bopen,
                      "match branch needs a pattern and a body");
        }
        Term body;
        {
          ScopeGuard guard(scope_, bound);
          body = parse_term(mode);
        }
        expect_close(bopen);
        children.push_back(std::move(pattern));
        children.push_back(std::move(body));
      }
      if (peek().type != TokenType::RParen) {
        throw error(ParseErrorKind::Syntax, peek(),
                    fmt::format("expected a match branch, found {}",
                                describe(peek())));
      }
      expect_close(open);
      if (children.size() < 3) {
        throw error(ParseErrorKind::Arity, open,
                    "'match' needs at least one branch");
      }
      return Term::node(TermKind::Match, std::move(children));
    }
    if (!is_identifier(h)) {
      throw error(ParseErrorKind::Syntax, head,
                  fmt::format("'{}' cannot be applied", h));
    }
    if (is_bound(h)) {
      throw error(ParseErrorKind::Binding, head,
                  fmt::format("bound variable '{}' used as a function symbol",
                              h));
    }
    std::vector<Term> args = parse_term_list(open, mode);
    check_arity(open, h, args.size(), 1, kMany);
    Term out = Term::node(TermKind::Apply, std::move(args));
    out.text = h;
    return out;
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  std::vector<std::string> scope_;
  std::vector<std::string> pattern_vars_;
  std::size_t pattern_base_ = 0;
};

void print_term_to(const Term& t, std::string& out) {
  auto children = [&](std::size_t from) {
    for (std::size_t i = from; i < t.children.size(); ++i) {
      out += ' ';
      print_term_to(t.children[i], out);
    }
  };
  auto binder_list = [&] {
    out += '(';
    for (std::size_t i = 0; i < t.binders.size(); ++i) {
      if (i) out += ' ';
      out += t.binders[i];
    }
    out += ')';
  };
  switch (t.kind) {
    case TermKind::True: out += "true"; return;
    case TermKind::False: out += "false"; return;
    case TermKind::Wildcard: out += "_"; return;
    case TermKind::IntLit:
    case TermKind::FloatLit:
    case TermKind::Var:
    case TermKind::ConstRef: out += t.text; return;
    case TermKind::And: out += "(and"; children(0); break;
    case TermKind::Or: out += "(or"; children(0); break;
    case TermKind::Not: out += "(not"; children(0); break;
    case TermKind::Imp: out += "(->"; children(0); break;
    case TermKind::Iff: out += "(<->"; children(0); break;
    case TermKind::Ite: out += "(ite"; children(0); break;
    case TermKind::Apply: out += '(' + t.text; children(0); break;
    case TermKind::Let:
      out += "(let " + t.binders.at(0);
      children(0);
      break;
    case TermKind::Eps:
      out += "(eps " + t.binders.at(0);
      children(0);
      break;
    case TermKind::Cast:
      out += "(as ";
      print_term_to(t.children.at(0), out);
      out += ' ' + t.text;
      break;
    case TermKind::Forall:
    case TermKind::Exists:
      out += t.kind == TermKind::Forall ? "(forall " : "(exists ";
      binder_list();
      children(0);
      break;
    case TermKind::Match:
      out += "(match ";
      print_term_to(t.children.at(0), out);
      for (std::size_t i = 1; i + 1 < t.children.size(); i += 2) {
        out += " (";
        print_term_to(t.children[i], out);
        out += ' ';
        print_term_to(t.children[i + 1], out);
        out += ')';
      }
      break;
  }
  out += ')';
}

}  // namespace

std::string_view to_string(TermKind kind) {
  switch (kind) {
    case TermKind::And: return "and";
    case TermKind::Or: return "or";
    case TermKind::Not: return "not";
    case TermKind::Imp: return "imp";
    case TermKind::Iff: return "iff";
    case TermKind::Ite: return "ite";
    case TermKind::Let: return "let";
    case TermKind::Cast: return "cast";
    case TermKind::Eps: return "eps";
    case TermKind::Match: return "match";
    case TermKind::Forall: return "forall";
    case TermKind::Exists: return "exists";
    case TermKind::Apply: return "apply";
    case TermKind::Var: return "var";
    case TermKind::True: return "true";
    case TermKind::False: return "false";
    case TermKind::Wildcard: return "wildcard";
    case TermKind::IntLit: return "int-lit";
    case TermKind::FloatLit: return "float-lit";
    case TermKind::ConstRef: return "const-ref";
  }
  return "?";
}

std::string_view to_string(DeclKind kind) {
  switch (kind) {
    case DeclKind::Goal: return "goal";
    case DeclKind::Lemma: return "lemma";
    case DeclKind::Axiom: return "axiom";
    case DeclKind::Function: return "function";
    case DeclKind::Predicate: return "predicate";
  }
  return "?";
}

Term Term::leaf(TermKind kind, std::string text) {
  Term t;
  t.kind = kind;
  t.text = std::move(text);
  return t;
}

Term Term::node(TermKind kind, std::vector<Term> children) {
  Term t;
  t.kind = kind;
  t.children = std::move(children);
  return t;
}

ParseError::ParseError(ParseErrorKind kind, std::size_t line,
                       std::size_t column, const std::string& message)
    : Error(fmt::format("{}:{}: {}", line, column, message)),
      kind_(kind),
      line_(line),
      column_(column) {}

bool is_reserved_word(std::string_view word) {
  return std::find(kReserved.begin(), kReserved.end(), word) != kReserved.end();
}

bool is_identifier(std::string_view w) {
  if (w.empty() || w == "_" || is_reserved_word(w)) return false;
  if (is_alpha(w[0]) || w[0] == '_') {
    return std::all_of(w.begin() + 1, w.end(), [](char c) {
      return is_alpha(c) || is_digit(c) ||
             std::string_view("_'.!?").find(c) != std::string_view::npos;
    });
  }
  return std::all_of(w.begin(), w.end(), is_symbol_char);
}

bool is_pattern_variable_name(std::string_view name) {
  return !name.empty() && ((name[0] >= 'a' && name[0] <= 'z') || name[0] == '_');
}

Document parse_document(std::string_view source, std::string path) {
  Parser parser(tokenize(source));
  Document doc;
  doc.path = std::move(path);
  doc.theories = parser.parse_theories();
  return doc;
}

std::string print_term(const Term& term) {
  std::string out;
  print_term_to(term, out);
  return out;
}

std::string print_document(const Document& doc) {
  std::string out;
  for (const Theory& th : doc.theories) {
    out += "(theory " + th.name;
    for (const Declaration& d : th.decls) {
      out += "\n  (";
      out += to_string(d.kind);
      out += ' ' + d.name;
      if (d.kind == DeclKind::Function || d.kind == DeclKind::Predicate) {
        out += " (";
        for (std::size_t i = 0; i < d.params.size(); ++i) {
          if (i) out += ' ';
          out += d.params[i];
        }
        out += ')';
      }
      if (d.body) {
        out += ' ';
        print_term_to(*d.body, out);
      }
      out += ')';
    }
    out += ")\n";
  }
  return out;
}

}  // namespace solverank::logic
