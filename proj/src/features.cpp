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

#include "solverank/features.hpp"

#include <algorithm>
#include <istream>
#include <ostream>

#include <fmt/format.h>

#include "solverank/error.hpp"
#include "solverank/io_util.hpp"

namespace solverank::features {

namespace {

std::uint64_t sum_of(const FeatureVector& v, std::initializer_list<Counter> cs) {
  std::uint64_t total = 0;
  for (Counter c : cs) total += v.count(c);
  return total;
}

struct Accumulator {
  FeatureVector v;
  std::uint64_t arguments = 0;

  // Returns the depth of the subtree rooted at t.
  std::uint64_t visit(const logic::Term& t) {
    ++v.counts[static_cast<std::size_t>(counter_for(t.kind))];
    if (t.kind == logic::TermKind::Apply) arguments += t.children.size();
    std::uint64_t deepest = 0;
    for (const logic::Term& child : t.children) {
      deepest = std::max(deepest, visit(child));
    }
    return deepest + 1;
  }

  void add_tree(const logic::Term& root) {
    v.depth = std::max(v.depth, visit(root));
  }
};

}  // namespace

Counter counter_for(logic::TermKind kind) {
  using logic::TermKind;
  switch (kind) {
    case TermKind::And: return Counter::And;
    case TermKind::Or: return Counter::Or;
    case TermKind::Not: return Counter::Not;
    case TermKind::Let: return Counter::Let;
    case TermKind::Cast: return Counter::As;
    case TermKind::Eps: return Counter::Eps;
    case TermKind::Apply: return Counter::Func;
    case TermKind::Ite: return Counter::If;
    case TermKind::Iff: return Counter::Iff;
    case TermKind::Imp: return Counter::Imp;
    case TermKind::Match: return Counter::Case;
    case TermKind::Var: return Counter::Var;
    case TermKind::True: return Counter::True;
    case TermKind::False: return Counter::False;
    case TermKind::Wildcard: return Counter::Wild;
    case TermKind::ConstRef: return Counter::ZeroAr;
    case TermKind::IntLit: return Counter::Int;
    case TermKind::FloatLit: return Counter::Float;
    case TermKind::Forall: return Counter::Forall;
    case TermKind::Exists: return Counter::Exists;
  }
  throw Error("unknown term kind");
}

std::uint64_t FeatureVector::divisor() const {
  return sum_of(*this, {Counter::And, Counter::Or, Counter::Not, Counter::Let,
                        Counter::As, Counter::Eps, Counter::Func});
}
std::uint64_t FeatureVector::conds() const {
  return sum_of(*this, {Counter::If, Counter::Iff, Counter::Imp, Counter::Case});
}
std::uint64_t FeatureVector::ops() const { return divisor() + conds(); }
std::uint64_t FeatureVector::leaves() const {
  return sum_of(*this, {Counter::Var, Counter::True, Counter::False,
                        Counter::Wild, Counter::ZeroAr, Counter::Int,
                        Counter::Float});
}
std::uint64_t FeatureVector::quants() const {
  return sum_of(*this, {Counter::Forall, Counter::Exists});
}
std::uint64_t FeatureVector::size() const { return ops() + leaves() + quants(); }

FeatureVector extract_task_features(const TaskScope& scope) {
  Accumulator acc;
  for (const logic::Declaration& lemma : scope.context) {
    if (lemma.body) acc.add_tree(*lemma.body);
  }
  if (scope.goal.body) acc.add_tree(*scope.goal.body);
  const std::uint64_t funcs = acc.v.count(Counter::Func);
  acc.v.avg_arity = funcs == 0 ? 0.0
                               : static_cast<double>(acc.arguments) /
                                     static_cast<double>(funcs);
  return acc.v;
}

std::vector<TaskScope> task_scopes(const logic::Theory& theory) {
  std::vector<TaskScope> scopes;
  std::vector<logic::Declaration> lemmas;
  for (const logic::Declaration& d : theory.decls) {
    if (d.kind == logic::DeclKind::Lemma) {
      lemmas.push_back(d);
    } else if (d.kind == logic::DeclKind::Goal) {
      scopes.push_back(TaskScope{d, lemmas});
    }
  }
  return scopes;
}

std::string make_task_id(std::string_view file, std::string_view theory,
                         std::string_view goal) {
  return fmt::format("{}:{}:{}", file, theory, goal);
}

std::vector<TaskFeatures> extract_document_features(const logic::Document& doc,
                                                    unsigned jobs) {
  std::vector<TaskFeatures> out;
  std::vector<TaskScope> scopes;
  for (const logic::Theory& th : doc.theories) {
    for (TaskScope& s : task_scopes(th)) {
      out.push_back({make_task_id(doc.path, th.name, s.goal.name), {}});
      scopes.push_back(std::move(s));
    }
  }
  io::parallel_for(scopes.size(), jobs, [&](std::size_t i) {
    out[i].features = extract_task_features(scopes[i]);
  });
  return out;
}

FeatureArray to_array(const FeatureVector& v) {
  FeatureArray a{};
  for (std::size_t i = 0; i < kCounterCount; ++i) {
    a[i] = static_cast<double>(v.counts[i]);
  }
  a[20] = static_cast<double>(v.depth);
  a[21] = v.avg_arity;
  a[22] = static_cast<double>(v.divisor());
  a[23] = static_cast<double>(v.conds());
  a[24] = static_cast<double>(v.ops());
  a[25] = static_cast<double>(v.leaves());
  a[26] = static_cast<double>(v.quants());
  a[27] = static_cast<double>(v.size());
  return a;
}

FeatureVector from_array(const FeatureArray& a) {
  auto as_count = [&](std::size_t i) {
    const double x = a[i];
    if (!(x >= 0.0) || x != static_cast<double>(static_cast<std::uint64_t>(x))) {
      throw DataError(fmt::format("feature '{}' must be a non-negative integer, got {}",
                                  feature_names()[i], x));
    }
    return static_cast<std::uint64_t>(x);
  };
  FeatureVector v;
  for (std::size_t i = 0; i < kCounterCount; ++i) v.counts[i] = as_count(i);
  v.depth = as_count(20);
  if (!(a[21] >= 0.0)) {
    throw DataError(fmt::format("feature 'avg_arity' must be non-negative, got {}",
                                a[21]));
  }
  v.avg_arity = a[21];
  const std::uint64_t expected[] = {v.divisor(), v.conds(),  v.ops(),
                                    v.leaves(),  v.quants(), v.size()};
  for (std::size_t k = 0; k < 6; ++k) {
    if (as_count(22 + k) != expected[k]) {
      throw DataError(fmt::format(
          "aggregate '{}' is {} but its counters sum to {}",
          feature_names()[22 + k], a[22 + k], expected[k]));
    }
  }
  return v;
}

const std::array<std::string_view, kFeatureCount>& feature_names() {
  static const std::array<std::string_view, kFeatureCount> names = {
      "and",    "or",     "not",  "let",     "as",     "eps",   "func",
      "if",     "iff",    "imp",  "case",    "var",    "true",  "false",
      "wild",   "zero_ar", "int", "float",   "forall", "exists", "depth",
      "avg_arity", "divisor", "conds", "ops", "leaves", "quants", "size"};
  return names;
}

void write_features_csv(std::ostream& out,
                        const std::vector<TaskFeatures>& rows) {
  out << "task_id";
  for (auto name : feature_names()) out << ',' << name;
  out << '\n';
  for (const TaskFeatures& row : rows) {
    out << row.task_id;
    const FeatureArray a = to_array(row.features);
    for (double x : a) out << ',' << io::format_double(x);
    out << '\n';
  }
}

std::vector<TaskFeatures> read_features_csv(std::istream& in,
                                            const std::string& source_name) {
  std::string line;
  if (!std::getline(in, line)) {
    throw DataError(fmt::format("{}: empty features file", source_name));
  }
  io::chomp(line);
  std::string expected = "task_id";
  for (auto name : feature_names()) expected += fmt::format(",{}", name);
  if (line != expected) {
    throw DataError(fmt::format("{}:1: unexpected header", source_name));
  }
  std::vector<TaskFeatures> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    io::chomp(line);
    if (line.empty()) continue;
    const auto fields = io::split_csv_line(line);
    if (fields.size() != kFeatureCount + 1) {
      throw DataError(fmt::format("{}:{}: expected {} fields, got {}",
                                  source_name, lineno, kFeatureCount + 1,
                                  fields.size()));
    }
    FeatureArray a{};
    try {
      for (std::size_t i = 0; i < kFeatureCount; ++i) {
        a[i] = io::parse_double(fields[i + 1], feature_names()[i]);
      }
      rows.push_back({fields[0], from_array(a)});
    } catch (const DataError& e) {
      throw DataError(fmt::format("{}:{}: {}", source_name, lineno, e.what()));
    }
  }
  return rows;
}

}  // namespace solverank::features
