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

#include <doctest.h>

#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "solverank/error.hpp"
#include "solverank/features.hpp"

using namespace solverank;
using namespace solverank::features;

namespace {

FeatureVector features_of(const std::string& source) {
  const auto doc = logic::parse_document(source, "t.lang");
  return extract_task_features(task_scopes(doc.theories.at(0)).at(0));
}

std::size_t column(std::string_view name) {
  const auto& names = feature_names();
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return i;
  }
  FAIL("no column " << name);
  return 0;
}

}  // namespace

TEST_SUITE("features") {
  TEST_CASE("a lone true leaf") {
    const FeatureArray a = to_array(features_of("(theory T (goal g true))"));
    std::size_t nonzero = 0;
    for (double v : a) nonzero += v != 0.0;
    // true, depth, leaves and size.
    CHECK(nonzero == 4);
    CHECK(a[column("true")] == 1);
    CHECK(a[column("depth")] == 1);
    CHECK(a[column("leaves")] == 1);
    CHECK(a[column("size")] == 1);
  }

  TEST_CASE("counts of a hand-counted goal") {
    const FeatureVector v = features_of("(theory T (goal g (= (add 1 2) (add 2 1))))");
    CHECK(v.count(Counter::Func) == 3);
    CHECK(v.count(Counter::Int) == 4);
    CHECK(v.depth == 3);
    CHECK(v.avg_arity == doctest::Approx(2.0));
    CHECK(v.size() == 7);
  }

  TEST_CASE("lemmas declared earlier in the theory join the goal's scope") {
    const auto doc = logic::parse_document(
        "(theory T (goal a true) (lemma l (not true)) (axiom x false) (goal b true))");
    const auto scopes = task_scopes(doc.theories[0]);
    REQUIRE(scopes.size() == 2);
    CHECK(scopes[0].context.empty());
    REQUIRE(scopes[1].context.size() == 1);
    CHECK(scopes[1].context[0].name == "l");
    const auto v = extract_task_features(scopes[1]);
    CHECK(v.count(Counter::Not) == 1);
    CHECK(v.count(Counter::True) == 2);
    CHECK(v.count(Counter::False) == 0);
  }

  TEST_CASE("counts agree with an independent walk on random documents") {
    std::mt19937_64 rng(21);
    for (int i = 0; i < 200; ++i) {
      const auto doc = oracle::random_document(rng);
      for (const auto& th : doc.theories) {
        for (const auto& scope : task_scopes(th)) {
          std::map<std::string, std::uint64_t> expected;
          std::size_t height = 0;
          std::uint64_t args = 0;
          auto add = [&](const logic::Term& t) {
            for (const auto& [k, n] : oracle::count_nodes(t)) expected[k] += n;
            height = std::max(height, oracle::height(t));
            args += oracle::apply_arguments(t);
          };
          for (const auto& l : scope.context) add(*l.body);
          add(*scope.goal.body);
          const FeatureArray a = to_array(extract_task_features(scope));
          for (std::size_t c = 0; c < kCounterCount; ++c) {
            const std::string name(feature_names()[c]);
            CHECK(a[c] == static_cast<double>(expected[name]));
          }
          CHECK(a[column("depth")] == static_cast<double>(height));
          const double funcs = static_cast<double>(expected["func"]);
          CHECK(a[column("avg_arity")] ==
                doctest::Approx(funcs == 0 ? 0.0 : static_cast<double>(args) / funcs));
        }
      }
    }
  }

  TEST_CASE("aggregate columns are sums of their counters") {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 200; ++i) {
      const auto doc = oracle::random_document(rng);
      for (const auto& tf : extract_document_features(doc)) {
        const FeatureArray a = to_array(tf.features);
        auto sum = [&](std::initializer_list<const char*> cols) {
          double s = 0;
          for (const char* c : cols) s += a[column(c)];
          return s;
        };
        CHECK(a[column("divisor")] == sum({"and", "or", "not", "let", "as", "eps", "func"}));
        CHECK(a[column("conds")] == sum({"if", "iff", "imp", "case"}));
        CHECK(a[column("ops")] == sum({"divisor", "conds"}));
        CHECK(a[column("leaves")] ==
              sum({"var", "true", "false", "wild", "zero_ar", "int", "float"}));
        CHECK(a[column("quants")] == sum({"forall", "exists"}));
        CHECK(a[column("size")] == sum({"ops", "leaves", "quants"}));
      }
    }
  }

  TEST_CASE("task ids and header") {
    CHECK(make_task_id("a.lang", "T", "g") == "a.lang:T:g");
    std::ostringstream out;
    write_features_csv(out, {});
    CHECK(out.str() ==
          "task_id,and,or,not,let,as,eps,func,if,iff,imp,case,var,true,false,wild,"
          "zero_ar,int,float,forall,exists,depth,avg_arity,divisor,conds,ops,leaves,"
          "quants,size\n");
  }

  TEST_CASE("CSV round-trip of the fixture corpus") {
    std::vector<TaskFeatures> rows;
    for (const auto& p : fixtures::corpus_paths()) {
      auto more = extract_document_features(fixtures::load_document(p));
      rows.insert(rows.end(), more.begin(), more.end());
    }
    CHECK(rows.size() == 12);
    std::stringstream ss;
    write_features_csv(ss, rows);
    const auto back = read_features_csv(ss, "mem.csv");
    REQUIRE(back.size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      CHECK(back[i].task_id == rows[i].task_id);
      CHECK(back[i].features == rows[i].features);
    }
  }

  TEST_CASE("inconsistent aggregates are rejected") {
    FeatureArray a = to_array(features_of("(theory T (goal g (not true)))"));
    CHECK_NOTHROW(from_array(a));
    a[column("size")] += 1;
    CHECK_THROWS_AS(from_array(a), DataError);
    std::stringstream bad("task_id,and\nx,1\n");
    CHECK_THROWS_AS(read_features_csv(bad, "bad.csv"), DataError);
  }

  TEST_CASE("parallel extraction matches sequential") {
    std::mt19937_64 rng(8);
    const auto doc = oracle::random_document(rng, {3, 5, 6});
    const auto one = extract_document_features(doc, 1);
    const auto four = extract_document_features(doc, 4);
    REQUIRE(one.size() == four.size());
    for (std::size_t i = 0; i < one.size(); ++i) {
      CHECK(one[i].task_id == four[i].task_id);
      CHECK(one[i].features == four[i].features);
    }
  }
}
