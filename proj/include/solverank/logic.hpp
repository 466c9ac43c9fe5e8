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

// A small S-expression goal language: documents hold theories, theories hold
// declarations, and goal/lemma/axiom bodies are first-order terms. Every term
// node kind corresponds to exactly one syntactic feature counter.

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "solverank/error.hpp"

namespace solverank::logic {

enum class TermKind {
  And,
  Or,
  Not,
  Imp,
  Iff,
  Ite,
  Let,
  Cast,
  Eps,
  Match,
  Forall,
  Exists,
  Apply,
  Var,
  True,
  False,
  Wildcard,
  IntLit,
  FloatLit,
  ConstRef,
};

std::string_view to_string(TermKind kind);

// A term node.
//
//   text      symbol name (Apply, Var, ConstRef), literal text (IntLit,
//             FloatLit) or target type name (Cast)
//   binders   bound names (Let/Eps: one; Forall/Exists: one or more)
//   children  Let: {value, body}; Match: {scrutinee, pat_1, body_1, ...};
//             Ite: {cond, then, else}; Cast/Eps/quantifiers: {body}
struct Term {
  TermKind kind = TermKind::True;
  std::string text;
  std::vector<std::string> binders;
  std::vector<Term> children;

  static Term leaf(TermKind kind, std::string text = {});
  static Term node(TermKind kind, std::vector<Term> children);

  friend bool operator==(const Term&, const Term&) = default;
};

enum class DeclKind { Goal, Lemma, Axiom, Function, Predicate };

std::string_view to_string(DeclKind kind);

struct Declaration {
  DeclKind kind = DeclKind::Goal;
  std::string name;
  std::vector<std::string> params;  // function/predicate only
  std::optional<Term> body;         // absent only for undefined symbols

  friend bool operator==(const Declaration&, const Declaration&) = default;
};

struct Theory {
  std::string name;
  std::vector<Declaration> decls;

  friend bool operator==(const Theory&, const Theory&) = default;
};

struct Document {
  std::string path;
  std::vector<Theory> theories;

  // Structural equality ignores the path.
  friend bool operator==(const Document& a, const Document& b) {
    return a.theories == b.theories;
  }
};

enum class ParseErrorKind { Lexical, Syntax, Arity, Binding, Duplicate };

class ParseError : public Error {
 public:
  ParseError(ParseErrorKind kind, std::size_t line, std::size_t column,
             const std::string& message);

  ParseErrorKind kind() const { return kind_; }
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  ParseErrorKind kind_;
  std::size_t line_;
  std::size_t column_;
};

Document parse_document(std::string_view source, std::string path = {});

// Canonical text form; parse_document(print_document(d)) == d.
std::string print_document(const Document& doc);
std::string print_term(const Term& term);

// True for identifiers that name a pattern variable when they occur as a
// leaf inside a match pattern (lowercase initial or leading underscore).
bool is_pattern_variable_name(std::string_view name);

bool is_reserved_word(std::string_view word);
bool is_identifier(std::string_view word);

}  // namespace solverank::logic
