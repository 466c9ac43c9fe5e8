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

#include "solverank/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "solverank/error.hpp"

namespace solverank::evaluation {

namespace {

std::vector<std::size_t> positions_of(const SolverRanking& r) {
  std::vector<std::size_t> pos(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) pos[r[i]] = i;
  return pos;
}

SolverRanking identity(std::size_t p) {
  SolverRanking r(p);
  std::iota(r.begin(), r.end(), std::size_t{0});
  return r;
}

std::size_t factorial_capped(std::size_t p, std::size_t cap) {
  std::size_t f = 1;
  for (std::size_t i = 2; i <= p; ++i) {
    f *= i;
    if (f > cap) return cap + 1;
  }
  return f;
}

void check_matrices(const Matrix& predicted, const Matrix& truth,
                    std::size_t min_rows) {
  if (predicted.size() != truth.size()) {
    throw DataError(fmt::format("prediction has {} rows, truth has {}",
                                predicted.size(), truth.size()));
  }
  if (truth.size() < min_rows) {
    throw DataError(fmt::format("need at least {} rows, got {}", min_rows,
                                truth.size()));
  }
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (predicted[i].size() != truth[i].size() ||
        truth[i].size() != truth.front().size()) {
      throw DataError(fmt::format("row {} has mismatched width", i));
    }
  }
}

double mean_of(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  return std::accumulate(xs.begin(), xs.end(), 0.0) /
         static_cast<double>(xs.size());
}

}  // namespace

double relevance(std::size_t truth_position, std::size_t p, RelevanceMap map) {
  switch (map) {
    case RelevanceMap::LinearDescending:
      return static_cast<double>(p - truth_position + 1);
    case RelevanceMap::Reciprocal:
      return 1.0 / static_cast<double>(truth_position);
  }
  return 0.0;
}

void check_rankings(const SolverRanking& ranking, const SolverRanking& truth) {
  auto is_permutation = [](const SolverRanking& r) {
    std::vector<bool> seen(r.size(), false);
    for (std::size_t s : r) {
      if (s >= r.size() || seen[s]) return false;
      seen[s] = true;
    }
    return true;
  };
  if (ranking.size() != truth.size() || ranking.empty() ||
      !is_permutation(ranking) || !is_permutation(truth)) {
    throw DataError("rankings are not permutations of the same roster");
  }
}

double dcg(const SolverRanking& ranking, const SolverRanking& truth,
           RelevanceMap map) {
  check_rankings(ranking, truth);
  const std::size_t p = truth.size();
  const auto truth_pos = positions_of(truth);
  double total = 0.0;
  for (std::size_t i = 0; i < p; ++i) {
    const double rel = relevance(truth_pos[ranking[i]] + 1, p, map);
    total += (std::exp2(rel) - 1.0) / std::log2(static_cast<double>(i) + 2.0);
  }
  return total;
}

double ndcg_raw(const SolverRanking& ranking, const SolverRanking& truth,
                RelevanceMap map) {
  return dcg(ranking, truth, map) / dcg(truth, truth, map);
}

double ndcg_lower_bound(std::size_t p, RelevanceMap map) {
  if (p == 0) throw DataError("empty roster");
  static std::mutex mutex;
  static std::map<std::pair<std::size_t, RelevanceMap>, double> cache;
  std::lock_guard lock(mutex);
  if (auto it = cache.find({p, map}); it != cache.end()) return it->second;
  const SolverRanking truth = identity(p);
  double lowest;
  if (p <= 8) {
    SolverRanking r = truth;
    lowest = std::numeric_limits<double>::infinity();
    do {
      lowest = std::min(lowest, ndcg_raw(r, truth, map));
    } while (std::next_permutation(r.begin(), r.end()));
  } else {
    SolverRanking reversed(truth.rbegin(), truth.rend());
    lowest = ndcg_raw(reversed, truth, map);
  }
  cache[{p, map}] = lowest;
  return lowest;
}

double ndcg_normalized(const SolverRanking& ranking, const SolverRanking& truth,
                       RelevanceMap map) {
  const double raw = ndcg_raw(ranking, truth, map);
  const double lower = ndcg_lower_bound(truth.size(), map);
  if (lower >= 1.0) return 1.0;  // p == 1
  return std::clamp((raw - lower) / (1.0 - lower), 0.0, 1.0);
}

double mae_rank(const SolverRanking& ranking, const SolverRanking& truth) {
  check_rankings(ranking, truth);
  const auto a = positions_of(ranking);
  const auto b = positions_of(truth);
  double total = 0.0;
  for (std::size_t s = 0; s < a.size(); ++s) {
    total += std::abs(static_cast<double>(a[s]) - static_cast<double>(b[s]));
  }
  return total / static_cast<double>(a.size());
}

double expected_random_ndcg(std::size_t p, RelevanceMap map) {
  const SolverRanking truth = identity(p);
  if (p <= 8) {
    SolverRanking r = truth;
    double total = 0.0;
    std::size_t count = 0;
    do {
      total += ndcg_normalized(r, truth, map);
      ++count;
    } while (std::next_permutation(r.begin(), r.end()));
    return total / static_cast<double>(count);
  }
  // Linearity of expectation: every gain is equally likely at every slot.
  double mean_gain = 0.0, discount = 0.0;
  for (std::size_t j = 1; j <= p; ++j) {
    mean_gain += std::exp2(relevance(j, p, map)) - 1.0;
  }
  mean_gain /= static_cast<double>(p);
  for (std::size_t i = 0; i < p; ++i) {
    discount += 1.0 / std::log2(static_cast<double>(i) + 2.0);
  }
  const double raw = mean_gain * discount / dcg(truth, truth, map);
  const double lower = ndcg_lower_bound(p, map);
  return (raw - lower) / (1.0 - lower);
}

double expected_random_mae(std::size_t p) {
  const SolverRanking truth = identity(p);
  if (p <= 8) {
    SolverRanking r = truth;
    double total = 0.0;
    std::size_t count = 0;
    do {
      total += mae_rank(r, truth);
      ++count;
    } while (std::next_permutation(r.begin(), r.end()));
    return total / static_cast<double>(count);
  }
  const double n = static_cast<double>(p);
  return (n * n - 1.0) / (3.0 * n);
}

R2Result r2_score(const Matrix& predicted, const Matrix& truth) {
  check_matrices(predicted, truth, 2);
  const std::size_t rows = truth.size();
  const std::size_t cols = truth.front().size();
  R2Result result;
  std::vector<double> scores;
  for (std::size_t j = 0; j < cols; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < rows; ++i) mean += truth[i][j];
    mean /= static_cast<double>(rows);
    double ss_tot = 0.0, ss_res = 0.0;
    for (std::size_t i = 0; i < rows; ++i) {
      ss_tot += (truth[i][j] - mean) * (truth[i][j] - mean);
      ss_res += (truth[i][j] - predicted[i][j]) * (truth[i][j] - predicted[i][j]);
    }
    if (ss_tot == 0.0) {
      if (ss_res == 0.0) {
        scores.push_back(1.0);
      } else {
        result.excluded_columns.push_back(j);
      }
      continue;
    }
    scores.push_back(1.0 - ss_res / ss_tot);
  }
  result.score = scores.empty() ? std::numeric_limits<double>::quiet_NaN()
                                : mean_of(scores);
  return result;
}

double regression_error(const Matrix& predicted, const Matrix& truth) {
  check_matrices(predicted, truth, 1);
  double total = 0.0;
  std::size_t cells = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    for (std::size_t j = 0; j < truth[i].size(); ++j) {
      total += std::abs(predicted[i][j] - truth[i][j]);
      ++cells;
    }
  }
  return cells == 0 ? 0.0 : total / static_cast<double>(cells);
}

std::vector<double> implied_costs(const SolverRanking& ranking,
                                  const std::vector<double>& true_costs) {
  if (ranking.size() != true_costs.size()) {
    throw DataError("ranking and cost vector differ in length");
  }
  std::vector<double> sorted = true_costs;
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> out(true_costs.size());
  for (std::size_t k = 0; k < ranking.size(); ++k) out[ranking[k]] = sorted[k];
  return out;
}

std::string strategy_name(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::Best: return "Best";
    case StrategyKind::Random: return "Random";
    case StrategyKind::Worst: return "Worst";
    case StrategyKind::Fixed: return "Fixed";
    case StrategyKind::Learned: return "Learned";
  }
  return "?";
}

SolverRanking strategy_ranking(const Strategy& s, const cost::ResultsTable& t,
                               std::size_t task, const cost::CostConfig& cfg,
                               const forest::FeatureArray* features) {
  switch (s.kind) {
    case StrategyKind::Best: return cost::ground_truth_ranking(t, task, cfg);
    case StrategyKind::Worst: {
      SolverRanking r = cost::ground_truth_ranking(t, task, cfg);
      std::reverse(r.begin(), r.end());
      return r;
    }
    case StrategyKind::Random: {
      SolverRanking r = identity(t.solver_count());
      std::mt19937_64 rng(s.seed + task);
      for (std::size_t i = r.size(); i > 1; --i) {
        std::swap(r[i - 1], r[forest::uniform_index(rng, i)]);
      }
      return r;
    }
    case StrategyKind::Fixed:
      if (s.fixed.size() != t.solver_count()) {
        throw DataError("fixed ranking does not cover the roster");
      }
      return s.fixed;
    case StrategyKind::Learned:
      if (s.model == nullptr) throw ConfigError("learned strategy needs a model");
      if (features == nullptr) {
        throw DataError(fmt::format("no features for task '{}'", t.tasks()[task].id()));
      }
      return forest::predict_ranking(*s.model, *features);
  }
  throw ConfigError("unknown strategy");
}

TaskReplay replay_ranking(const cost::ResultsTable& t, std::size_t task,
                          const SolverRanking& ranking) {
  TaskReplay out;
  bool any = false;
  for (std::size_t s : ranking) {
    const cost::SolverOutcome& o = t.at(task, s);
    out.cumulative_time += o.cpu_time;
    out.solvers_called.push_back(s);
    if (!any || cost::utility(o.answer) > cost::utility(out.answer)) {
      out.answer = o.answer;
      any = true;
    }
    if (cost::is_conclusive(o.answer)) break;
  }
  return out;
}

double expected_random_replay_time(const cost::ResultsTable& t, std::size_t task,
                                   std::uint64_t seed) {
  const std::size_t p = t.solver_count();
  SolverRanking r = identity(p);
  double total = 0.0;
  std::size_t count = 0;
  if (factorial_capped(p, kMaxEnumeratedPermutations) <= kMaxEnumeratedPermutations) {
    do {
      total += replay_ranking(t, task, r).cumulative_time;
      ++count;
    } while (std::next_permutation(r.begin(), r.end()));
  } else {
    std::mt19937_64 rng(seed + task);
    for (; count < kRandomSamples; ++count) {
      for (std::size_t i = r.size(); i > 1; --i) {
        std::swap(r[i - 1], r[forest::uniform_index(rng, i)]);
      }
      total += replay_ranking(t, task, r).cumulative_time;
    }
  }
  return total / static_cast<double>(count);
}

StrategyEvaluation evaluate_rankings(const std::string& name,
                                     const cost::ResultsTable& t,
                                     const std::vector<SolverRanking>& rankings,
                                     const cost::CostConfig& cfg,
                                     const std::optional<Matrix>& predicted_costs,
                                     RelevanceMap map) {
  if (rankings.size() != t.task_count()) {
    throw DataError(fmt::format("{} rankings for {} tasks", rankings.size(),
                                t.task_count()));
  }
  StrategyEvaluation ev;
  ev.report.strategy = name;
  Matrix truth_costs, predicted;
  std::vector<double> ndcgs, maes, times, conclusive_times;
  std::vector<cost::GoalOutcome> goals;
  for (std::size_t i = 0; i < t.task_count(); ++i) {
    const SolverRanking truth = cost::ground_truth_ranking(t, i, cfg);
    ndcgs.push_back(ndcg_normalized(rankings[i], truth, map));
    maes.push_back(mae_rank(rankings[i], truth));
    truth_costs.push_back(cost::cost_vector(t, i, cfg));
    predicted.push_back(predicted_costs ? predicted_costs->at(i)
                                        : implied_costs(rankings[i], truth_costs.back()));
    TaskReplay replay = replay_ranking(t, i, rankings[i]);
    times.push_back(replay.cumulative_time);
    if (cost::is_conclusive(replay.answer)) {
      conclusive_times.push_back(replay.cumulative_time);
    }
    goals.push_back({replay.answer, replay.cumulative_time});
    ev.replays.push_back(std::move(replay));
  }
  ev.report.mean_time = mean_of(times);
  ev.report.mean_time_conclusive = mean_of(conclusive_times);
  ev.report.ndcg = mean_of(ndcgs);
  ev.report.mae = mean_of(maes);
  ev.report.reg_error = regression_error(predicted, truth_costs);
  if (predicted_costs && t.task_count() >= 2) {
    ev.report.r2 = r2_score(predicted, truth_costs).score;
  }
  ev.levels = cost::aggregate_report(t, goals);
  return ev;
}

StrategyEvaluation evaluate_random_expectation(const cost::ResultsTable& t,
                                               const cost::CostConfig& cfg,
                                               std::uint64_t seed,
                                               RelevanceMap map) {
  StrategyEvaluation ev;
  ev.report.strategy = "Random";
  const std::size_t p = t.solver_count();
  std::vector<double> times, conclusive_times, reg_errors;
  std::vector<cost::GoalOutcome> goals;
  for (std::size_t i = 0; i < t.task_count(); ++i) {
    const SolverRanking truth = cost::ground_truth_ranking(t, i, cfg);
    // Every ranking eventually reaches the same best answer; only the time
    // varies.
    TaskReplay replay = replay_ranking(t, i, truth);
    replay.solvers_called.clear();
    replay.cumulative_time = expected_random_replay_time(t, i, seed);
    times.push_back(replay.cumulative_time);
    if (cost::is_conclusive(replay.answer)) {
      conclusive_times.push_back(replay.cumulative_time);
    }
    // Each solver's implied cost is uniform over the observed costs.
    const auto costs = cost::cost_vector(t, i, cfg);
    double err = 0.0;
    for (double truth_cost : costs) {
      for (double implied : costs) err += std::abs(implied - truth_cost);
    }
    reg_errors.push_back(err / static_cast<double>(p * p));
    goals.push_back({replay.answer, replay.cumulative_time});
    ev.replays.push_back(std::move(replay));
  }
  ev.report.mean_time = mean_of(times);
  ev.report.mean_time_conclusive = mean_of(conclusive_times);
  ev.report.ndcg = expected_random_ndcg(p, map);
  ev.report.mae = expected_random_mae(p);
  ev.report.reg_error = mean_of(reg_errors);
  ev.levels = cost::aggregate_report(t, goals);
  return ev;
}

std::vector<std::pair<double, std::size_t>> cumulative_curve(
    const std::vector<TaskReplay>& replays) {
  std::vector<double> times;
  for (const TaskReplay& r : replays) {
    if (cost::is_conclusive(r.answer)) times.push_back(r.cumulative_time);
  }
  std::sort(times.begin(), times.end());
  std::vector<std::pair<double, std::size_t>> curve;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!curve.empty() && curve.back().first == times[i]) {
      curve.back().second = i + 1;
    } else {
      curve.emplace_back(times[i], i + 1);
    }
  }
  return curve;
}

}  // namespace solverank::evaluation
