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

// Solver answers, the timeout-penalised cost function, recorded result
// tables, and per-file/theory/goal aggregation.

#pragma once

#include <compare>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace solverank::cost {

enum class Answer { Valid, Invalid, Unknown, Timeout, Failure };

// {Valid, Invalid} > Unknown > {Timeout, Failure}.
int utility(Answer a);
inline bool is_conclusive(Answer a) {
  return a == Answer::Valid || a == Answer::Invalid;
}

std::string_view to_string(Answer a);
// Lowercase CSV spelling; throws DataError on anything else.
Answer parse_answer(std::string_view text);

struct SolverOutcome {
  Answer answer = Answer::Failure;
  double cpu_time = 0.0;

  friend bool operator==(const SolverOutcome&, const SolverOutcome&) = default;
};

struct SolverId {
  std::string name;
  std::string version;

  // "Alt-Ergo-1.01" for {Alt-Ergo, 1.01}; bare name when unversioned.
  std::string display() const;
  // Splits at the last '-' that is followed by a digit.
  static SolverId parse(std::string_view text);

  friend auto operator<=>(const SolverId&, const SolverId&) = default;
};

struct TaskKey {
  std::string file;
  std::string theory;
  std::string goal;

  std::string id() const;
  friend bool operator==(const TaskKey&, const TaskKey&) = default;
};

// Roster indices ordered best first.
using SolverRanking = std::vector<std::size_t>;

// Complete (task x solver) table of recorded outcomes.
class ResultsTable {
 public:
  ResultsTable() = default;
  // outcomes is row-major: outcomes[task * roster.size() + solver].
  ResultsTable(std::vector<SolverId> roster, std::vector<TaskKey> tasks,
               std::vector<SolverOutcome> outcomes);

  const std::vector<SolverId>& roster() const { return roster_; }
  const std::vector<TaskKey>& tasks() const { return tasks_; }
  std::size_t task_count() const { return tasks_.size(); }
  std::size_t solver_count() const { return roster_.size(); }

  const SolverOutcome& at(std::size_t task, std::size_t solver) const {
    return outcomes_[task * roster_.size() + solver];
  }
  std::span<const SolverOutcome> row(std::size_t task) const {
    return {outcomes_.data() + task * roster_.size(), roster_.size()};
  }

  std::optional<std::size_t> find_task(std::string_view id) const;
  // Throws DataError for unknown ids.
  std::size_t task_index(std::string_view id) const;
  std::optional<std::size_t> find_solver(const SolverId& id) const;

 private:
  std::vector<SolverId> roster_;
  std::vector<TaskKey> tasks_;
  std::vector<SolverOutcome> outcomes_;
  std::unordered_map<std::string, std::size_t> task_index_;
};

struct CostConfig {
  double timeout = 10.0;
};

double cost(const SolverOutcome& o, const CostConfig& cfg);
std::vector<double> cost_vector(const ResultsTable& t, std::size_t task,
                                const CostConfig& cfg);

// Stable ascending sort of roster indices by cost.
SolverRanking rank_by_cost(std::span<const double> costs);

SolverRanking ground_truth_ranking(const ResultsTable& t, std::size_t task,
                                   const CostConfig& cfg);
SolverRanking ground_truth_ranking(const ResultsTable& t,
                                   std::string_view task_id,
                                   const CostConfig& cfg);

// Solvers by descending number of Valid/Invalid answers, ties in roster order.
SolverRanking static_solver_ranking(const ResultsTable& t);

enum class Level { File, Theory, Goal };

struct LevelStats {
  std::size_t proved = 0;
  std::size_t total = 0;
  double percent = 0.0;   // 100 * proved / total
  double avg_time = 0.0;  // mean over proved units; 0 when none proved
};

struct LevelReport {
  LevelStats file;
  LevelStats theory;
  LevelStats goal;

  const LevelStats& at(Level level) const;
};

// Best single solver per unit: at goal level any Valid/Invalid solver, at
// theory/file level a solver proving every goal of the unit (time summed).
LevelStats choose_single(const ResultsTable& t, Level level);
LevelReport choose_single_report(const ResultsTable& t);

struct GoalOutcome {
  cost::Answer answer = Answer::Failure;
  double time = 0.0;
};

// Rolls per-goal outcomes (indexed like t.tasks()) up to theories and files.
LevelReport aggregate_report(const ResultsTable& t,
                             std::span<const GoalOutcome> per_goal);

// Outcome of running solver `solver` alone on every goal.
std::vector<GoalOutcome> single_solver_outcomes(const ResultsTable& t,
                                                std::size_t solver);

// Per-solver smallest time covering `coverage` of its useful
// (Valid/Invalid/Unknown) responses; 0 for solvers with none.
std::vector<double> calibrate_timeout(const ResultsTable& t, double coverage);

// Dataset CSV: header file,theory,goal,solver,answer,time_s. When
// recording_timeout is given, Timeout rows must report at least 95% of it.
ResultsTable read_results_csv(std::istream& in, const std::string& source_name,
                              std::optional<double> recording_timeout = {});
void write_results_csv(std::ostream& out, const ResultsTable& t);

}  // namespace solverank::cost
