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

// Ranking-quality metrics, theoretical strategies and replay of rankings
// against recorded results.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "solverank/cost_model.hpp"
#include "solverank/forest.hpp"

namespace solverank::evaluation {

using cost::SolverRanking;
using Matrix = std::vector<std::vector<double>>;

// Relevance of the solver at 1-based ground-truth position j among p:
// LinearDescending gives p - j + 1, Reciprocal gives 1 / j.
enum class RelevanceMap { LinearDescending, Reciprocal };

double relevance(std::size_t truth_position, std::size_t p, RelevanceMap map);

// Throws DataError unless both are permutations of 0..p-1 of equal length.
void check_rankings(const SolverRanking& ranking, const SolverRanking& truth);

double dcg(const SolverRanking& ranking, const SolverRanking& truth,
           RelevanceMap map = RelevanceMap::LinearDescending);
double ndcg_raw(const SolverRanking& ranking, const SolverRanking& truth,
                RelevanceMap map = RelevanceMap::LinearDescending);

// Minimum raw nDCG over all rankings of length p. Enumerated (and cached)
// for p <= 8; larger p use the reversed ranking, which attains the minimum
// for any decreasing relevance map.
double ndcg_lower_bound(std::size_t p,
                        RelevanceMap map = RelevanceMap::LinearDescending);

// Raw nDCG rescaled so the worst ranking scores 0 and the truth scores 1.
double ndcg_normalized(const SolverRanking& ranking, const SolverRanking& truth,
                       RelevanceMap map = RelevanceMap::LinearDescending);

// Mean absolute displacement between predicted and true positions.
double mae_rank(const SolverRanking& ranking, const SolverRanking& truth);

// Expectations over uniformly random rankings of length p (exact
// enumeration).
double expected_random_ndcg(std::size_t p,
                            RelevanceMap map = RelevanceMap::LinearDescending);
double expected_random_mae(std::size_t p);

struct R2Result {
  double score = 0.0;  // NaN when every column was excluded
  std::vector<std::size_t> excluded_columns;
};

// Uniform mean over output columns of the coefficient of determination.
// Zero-variance columns score 1 when predicted exactly and are excluded
// otherwise.
R2Result r2_score(const Matrix& predicted, const Matrix& truth);

double regression_error(const Matrix& predicted, const Matrix& truth);

// Costs implied by a ranking: the k-th ranked solver receives the k-th
// smallest observed cost.
std::vector<double> implied_costs(const SolverRanking& ranking,
                                  const std::vector<double>& true_costs);

enum class StrategyKind { Best, Random, Worst, Fixed, Learned };

struct Strategy {
  StrategyKind kind = StrategyKind::Best;
  std::uint64_t seed = 0;               // Random
  SolverRanking fixed;                  // Fixed
  const forest::ForestModel* model = nullptr;  // Learned

  static Strategy best() { return with_kind(StrategyKind::Best); }
  static Strategy worst() { return with_kind(StrategyKind::Worst); }
  static Strategy random(std::uint64_t seed) {
    Strategy s = with_kind(StrategyKind::Random);
    s.seed = seed;
    return s;
  }
  static Strategy fixed_order(SolverRanking r) {
    Strategy s = with_kind(StrategyKind::Fixed);
    s.fixed = std::move(r);
    return s;
  }
  static Strategy learned(const forest::ForestModel& m) {
    Strategy s = with_kind(StrategyKind::Learned);
    s.model = &m;
    return s;
  }

 private:
  static Strategy with_kind(StrategyKind k) {
    Strategy s;
    s.kind = k;
    return s;
  }
};

std::string strategy_name(StrategyKind kind);

// Learned needs `features`; Random draws from seed + task.
SolverRanking strategy_ranking(const Strategy& s, const cost::ResultsTable& t,
                               std::size_t task, const cost::CostConfig& cfg,
                               const forest::FeatureArray* features = nullptr);

struct TaskReplay {
  cost::Answer answer = cost::Answer::Failure;
  double cumulative_time = 0.0;
  std::vector<std::size_t> solvers_called;
};

// Calls solvers in ranked order using recorded times until one answers
// Valid/Invalid; keeps the first answer of highest utility.
TaskReplay replay_ranking(const cost::ResultsTable& t, std::size_t task,
                          const SolverRanking& ranking);

// Permutations enumerated exactly up to this many; sampled beyond.
inline constexpr std::size_t kMaxEnumeratedPermutations = 50000;
inline constexpr std::size_t kRandomSamples = 10000;

// Expected replay time over uniformly random rankings.
double expected_random_replay_time(const cost::ResultsTable& t, std::size_t task,
                                   std::uint64_t seed);

struct StrategyReport {
  std::string strategy;
  double mean_time = 0.0;             // over all tasks
  double mean_time_conclusive = 0.0;  // over tasks answered Valid/Invalid
  double ndcg = 0.0;
  std::optional<double> r2;           // regression models only
  double mae = 0.0;
  double reg_error = 0.0;
};

struct StrategyEvaluation {
  StrategyReport report;
  std::vector<TaskReplay> replays;
  cost::LevelReport levels;
};

// Evaluates one ranking per task. When predicted costs are supplied they
// drive R^2 and the regression error; otherwise the implied costs do.
StrategyEvaluation evaluate_rankings(
    const std::string& name, const cost::ResultsTable& t,
    const std::vector<SolverRanking>& rankings, const cost::CostConfig& cfg,
    const std::optional<Matrix>& predicted_costs = std::nullopt,
    RelevanceMap map = RelevanceMap::LinearDescending);

// The Random row: exact expectations over all rankings.
StrategyEvaluation evaluate_random_expectation(
    const cost::ResultsTable& t, const cost::CostConfig& cfg,
    std::uint64_t seed, RelevanceMap map = RelevanceMap::LinearDescending);

// Step curve of (time, number of Valid/Invalid tasks finished by then).
std::vector<std::pair<double, std::size_t>> cumulative_curve(
    const std::vector<TaskReplay>& replays);

}  // namespace solverank::evaluation
