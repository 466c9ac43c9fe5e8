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

#include <sstream>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "solverank/cost_model.hpp"
#include "solverank/error.hpp"

using namespace solverank;
using namespace solverank::cost;

namespace {

ResultsTable parse(const std::string& text, std::optional<double> timeout = 10.0) {
  std::istringstream in(text);
  return read_results_csv(in, "mem.csv", timeout);
}

const char* kHeader = "file,theory,goal,solver,answer,time_s\n";

}  // namespace

TEST_SUITE("cost_model") {
  TEST_CASE("three-case cost") {
    const CostConfig cfg{10.0};
    CHECK(cost::cost({Answer::Valid, 0.3}, cfg) == 0.3);
    CHECK(cost::cost({Answer::Invalid, 2.0}, cfg) == 2.0);
    CHECK(cost::cost({Answer::Unknown, 1.0}, cfg) == 11.0);
    CHECK(cost::cost({Answer::Timeout, 10.0}, cfg) == 30.0);
    CHECK(cost::cost({Answer::Failure, 0.0}, cfg) == 20.0);
    for (const char* a : {"valid", "invalid", "unknown", "timeout", "failure"}) {
      for (double t : {0.0, 0.5, 9.9, 10.0}) {
        CHECK(cost::cost({parse_answer(a), t}, cfg) == oracle::cost(a, t, 10.0));
      }
    }
  }

  TEST_CASE("answers and utilities") {
    CHECK(utility(Answer::Valid) == utility(Answer::Invalid));
    CHECK(utility(Answer::Valid) > utility(Answer::Unknown));
    CHECK(utility(Answer::Unknown) > utility(Answer::Timeout));
    CHECK(utility(Answer::Timeout) == utility(Answer::Failure));
    for (Answer a : {Answer::Valid, Answer::Invalid, Answer::Unknown, Answer::Timeout,
                     Answer::Failure}) {
      CHECK(parse_answer(to_string(a)) == a);
    }
    CHECK_THROWS_AS(parse_answer("proved"), DataError);
  }

  TEST_CASE("solver ids split at the last dash before a digit") {
    CHECK(SolverId::parse("Alt-Ergo-1.01") == SolverId{"Alt-Ergo", "1.01"});
    CHECK(SolverId::parse("Z3-4.4.1") == SolverId{"Z3", "4.4.1"});
    CHECK(SolverId::parse("CVC4") == SolverId{"CVC4", ""});
    CHECK(SolverId::parse("veriT").display() == "veriT");
    CHECK(SolverId{"Alt-Ergo", "0.95.2"}.display() == "Alt-Ergo-0.95.2");
  }

  TEST_CASE("fixture table shape") {
    const ResultsTable t = fixtures::results();
    CHECK(t.task_count() == 12);
    REQUIRE(t.solver_count() == 8);
    CHECK(t.roster()[1].display() == "Alt-Ergo-1.01");
    CHECK(t.tasks()[0].id() == "a.lang:Arith:add_comm");
    CHECK(t.at(0, 1) == SolverOutcome{Answer::Valid, 0.5});
    CHECK(t.find_task("d.lang:Logic:choice") == 11u);
    CHECK_FALSE(t.find_task("nope").has_value());
  }

  TEST_CASE("ground truth orders by cost with ties kept in roster order") {
    const ResultsTable t = fixtures::results();
    const CostConfig cfg{10.0};
    CHECK(ground_truth_ranking(t, "a.lang:Arith:add_comm", cfg) ==
          SolverRanking{1, 0, 2, 3, 7, 5, 6, 4});
    CHECK(ground_truth_ranking(t, "b.lang:Sets:subset_trans", cfg) ==
          SolverRanking{1, 0, 2, 3, 4, 5, 6, 7});
    CHECK(rank_by_cost(std::vector<double>{3, 1, 2, 1}) == SolverRanking{1, 3, 2, 0});
  }

  TEST_CASE("static ranking by conclusive count") {
    const ResultsTable t = fixtures::results();
    CHECK(static_solver_ranking(t) == SolverRanking{1, 2, 3, 5, 6, 7, 0, 4});
  }

  TEST_CASE("choose single on the fixture") {
    const LevelReport r = choose_single_report(fixtures::results());
    CHECK(r.goal.proved == 10);
    CHECK(r.goal.total == 12);
    CHECK(r.goal.avg_time == doctest::Approx(2.425));
    CHECK(r.theory.proved == 5);
    CHECK(r.theory.total == 8);
    CHECK(r.theory.avg_time == doctest::Approx(1.85));
    CHECK(r.file.proved == 0);
    CHECK(r.file.total == 4);
    CHECK(r.file.percent == 0.0);
  }

  TEST_CASE("aggregation requires every goal of a unit") {
    const ResultsTable t = fixtures::results();
    // Alt-Ergo-1.01 proves both Arith goals: 0.5 + 2.5.
    const LevelReport r = aggregate_report(t, single_solver_outcomes(t, 1));
    CHECK(r.goal.proved == 4);
    CHECK(r.theory.proved == 1);
    CHECK(r.theory.avg_time == 3.0);
    CHECK(r.file.proved == 0);
  }

  TEST_CASE("calibration picks the smallest time reaching the coverage") {
    std::string csv = kHeader;
    for (int i = 1; i <= 10; ++i) {
      csv += "f,T,g" + std::to_string(i) + ",S,valid," + std::to_string(i) + "\n";
      csv += "f,T,g" + std::to_string(i) + ",R,failure,0\n";
    }
    const ResultsTable t = parse(csv, 60.0);
    CHECK(calibrate_timeout(t, 0.9) == std::vector<double>{9.0, 0.0});
    CHECK(calibrate_timeout(t, 0.95) == std::vector<double>{10.0, 0.0});
    CHECK(calibrate_timeout(t, 0.1) == std::vector<double>{1.0, 0.0});
    CHECK_THROWS_AS(calibrate_timeout(t, 0.0), ConfigError);
  }

  TEST_CASE("malformed results are rejected") {
    CHECK_THROWS_AS(parse("file,theory,goal,solver,answer\n"), DataError);
    CHECK_THROWS_AS(parse(std::string(kHeader) + "f,T,g,S,valid,1e2\n"), DataError);
    CHECK_THROWS_AS(parse(std::string(kHeader) + "f,T,g,S,valid,-1\n"), DataError);
    CHECK_THROWS_AS(parse(std::string(kHeader) + "f,T,g,S,valid,0.1234567\n"), DataError);
    CHECK_THROWS_AS(parse(std::string(kHeader) + "f,T,g,S,maybe,1\n"), DataError);
    CHECK_THROWS_AS(parse(std::string(kHeader) + "f,T,g,S,valid,1\nf,T,g,S,valid,1\n"),
                    DataError);
    // g2 lacks a row for R.
    CHECK_THROWS_AS(parse(std::string(kHeader) +
                          "f,T,g,S,valid,1\nf,T,g,R,valid,1\nf,T,g2,S,valid,1\n"),
                    DataError);
    // Timeouts must be recorded near the timeout.
    CHECK_THROWS_AS(parse(std::string(kHeader) + "f,T,g,S,timeout,9\n"), DataError);
    CHECK_NOTHROW(parse(std::string(kHeader) + "f,T,g,S,timeout,9.5\n"));
  }

  TEST_CASE("errors name the source") {
    try {
      parse(std::string(kHeader) + "f,T,g,S,valid,x\n");
      FAIL("accepted");
    } catch (const DataError& e) {
      CHECK(std::string(e.what()).find("mem.csv") != std::string::npos);
    }
  }

  TEST_CASE("write then read reproduces the table") {
    const ResultsTable t = fixtures::results();
    std::stringstream ss;
    write_results_csv(ss, t);
    const ResultsTable back = read_results_csv(ss, "mem.csv", 10.0);
    REQUIRE(back.task_count() == t.task_count());
    CHECK(back.roster() == t.roster());
    for (std::size_t i = 0; i < t.task_count(); ++i) {
      for (std::size_t s = 0; s < t.solver_count(); ++s) CHECK(back.at(i, s) == t.at(i, s));
    }
  }
}
