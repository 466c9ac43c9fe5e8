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

#include <cmath>
#include <numeric>
#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "solverank/evaluation.hpp"

using namespace solverank;
using namespace solverank::evaluation;

namespace {

SolverRanking identity(std::size_t p) {
  SolverRanking r(p);
  std::iota(r.begin(), r.end(), std::size_t{0});
  return r;
}

SolverRanking shuffled(std::size_t p, std::mt19937_64& rng) {
  SolverRanking r = identity(p);
  std::shuffle(r.begin(), r.end(), rng);
  return r;
}

// Two-pass R^2 averaged over columns with nonzero variance.
double r2_oracle(const Matrix& pred, const Matrix& truth) {
  double sum = 0.0;
  int cols = 0;
  for (std::size_t j = 0; j < truth[0].size(); ++j) {
    double mean = 0.0;
    for (const auto& row : truth) mean += row[j];
    mean /= static_cast<double>(truth.size());
    double tot = 0.0, res = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      tot += std::pow(truth[i][j] - mean, 2);
      res += std::pow(truth[i][j] - pred[i][j], 2);
    }
    sum += 1.0 - res / tot;
    ++cols;
  }
  return sum / cols;
}

}  // namespace

TEST_SUITE("evaluation") {
  TEST_CASE("relevance maps") {
    CHECK(relevance(1, 8, RelevanceMap::LinearDescending) == 8.0);
    CHECK(relevance(8, 8, RelevanceMap::LinearDescending) == 1.0);
    CHECK(relevance(4, 8, RelevanceMap::Reciprocal) == 0.25);
  }

  TEST_CASE("raw nDCG agrees with the oracle") {
    std::mt19937_64 rng(1);
    for (int i = 0; i < 300; ++i) {
      const std::size_t p = 2 + rng() % 7;
      const SolverRanking truth = shuffled(p, rng);
      const SolverRanking r = shuffled(p, rng);
      CHECK(ndcg_raw(r, truth) ==
            doctest::Approx(oracle::ndcg(r, truth, oracle::linear_relevance)).epsilon(1e-12));
      CHECK(ndcg_raw(r, truth, RelevanceMap::Reciprocal) ==
            doctest::Approx(oracle::ndcg(r, truth, oracle::reciprocal_relevance))
                .epsilon(1e-12));
    }
  }

  TEST_CASE("lower bounds match enumeration and the reverse attains them for small p") {
    for (std::size_t p = 2; p <= 7; ++p) {
      const double lin = oracle::ndcg_minimum(p, oracle::linear_relevance);
      CHECK(ndcg_lower_bound(p) == doctest::Approx(lin).epsilon(1e-12));
      if (p <= 4) {
        const SolverRanking truth = identity(p);
        const SolverRanking rev(truth.rbegin(), truth.rend());
        CHECK(oracle::ndcg(rev, truth, oracle::linear_relevance) ==
              doctest::Approx(lin).epsilon(1e-12));
        CHECK(oracle::ndcg(rev, truth, oracle::reciprocal_relevance) ==
              doctest::Approx(oracle::ndcg_minimum(p, oracle::reciprocal_relevance))
                  .epsilon(1e-12));
      }
    }
  }

  TEST_CASE("normalized nDCG is in [0,1] and is 1 only for the truth") {
    const SolverRanking truth = {2, 0, 4, 1, 3};
    oracle::for_each_permutation(5, [&](const oracle::Ranking& r) {
      const double v = ndcg_normalized(r, truth);
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
      CHECK((v == 1.0) == (r == truth));
    });
    const SolverRanking rev(truth.rbegin(), truth.rend());
    CHECK(ndcg_normalized(rev, truth) == 0.0);
  }

  TEST_CASE("mae properties") {
    const SolverRanking truth = identity(8);
    const SolverRanking rev(truth.rbegin(), truth.rend());
    CHECK(mae_rank(rev, truth) == 4.0);
    CHECK(mae_rank(truth, truth) == 0.0);
    std::mt19937_64 rng(2);
    for (int i = 0; i < 200; ++i) {
      const SolverRanking a = shuffled(6, rng), b = shuffled(6, rng), relabel = shuffled(6, rng);
      CHECK(mae_rank(a, b) == mae_rank(b, a));
      CHECK(mae_rank(a, b) == oracle::mae(a, b));
      SolverRanking ra, rb;
      for (auto s : a) ra.push_back(relabel[s]);
      for (auto s : b) rb.push_back(relabel[s]);
      CHECK(mae_rank(ra, rb) == mae_rank(a, b));
    }
  }

  TEST_CASE("random expectations") {
    CHECK(expected_random_mae(8) == 2.625);
    CHECK(expected_random_mae(12) == doctest::Approx((144.0 - 1.0) / 36.0));
    double sum = 0.0;
    const double low = oracle::ndcg_minimum(6, oracle::linear_relevance);
    int n = 0;
    oracle::for_each_permutation(6, [&](const oracle::Ranking& r) {
      sum += (oracle::ndcg(r, identity(6), oracle::linear_relevance) - low) / (1 - low);
      ++n;
    });
    CHECK(expected_random_ndcg(6) == doctest::Approx(sum / n).epsilon(1e-12));
  }

  TEST_CASE("regression metrics") {
    const Matrix y = {{1, 2, 3}, {4, 0, 6}, {7, 8, 1}};
    CHECK(r2_score(y, y).score == 1.0);
    CHECK(regression_error(y, y) == 0.0);
    Matrix shifted = y;
    for (auto& row : shifted) for (auto& v : row) v += 2.5;
    CHECK(regression_error(shifted, y) == 2.5);
    Matrix means(3, std::vector<double>{4, 10.0 / 3, 10.0 / 3});
    CHECK(r2_score(means, y).score == doctest::Approx(0.0).epsilon(1e-12));
    const Matrix guess = {{2, 2, 2}, {3, 1, 5}, {8, 6, 2}};
    CHECK(r2_score(guess, y).score == doctest::Approx(r2_oracle(guess, y)).epsilon(1e-12));
    // Hand sum: |1|+0+|1| + |1|+|1|+|1| + |1|+|2|+|1| = 9 over 9 cells.
    CHECK(regression_error(guess, y) == 1.0);
  }

  TEST_CASE("zero-variance columns") {
    const Matrix y = {{1, 5}, {3, 5}};
    const auto exact = r2_score(y, y);
    CHECK(exact.score == 1.0);
    CHECK(exact.excluded_columns.empty());
    const auto off = r2_score(Matrix{{1, 4}, {3, 4}}, y);
    CHECK(off.excluded_columns == std::vector<std::size_t>{1});
    CHECK(off.score == 1.0);
    const auto none = r2_score(Matrix{{0}, {0}}, Matrix{{5}, {5}});
    CHECK(std::isnan(none.score));
  }

  TEST_CASE("replay walks the ranking") {
    const auto t = fixtures::results();
    // add_comm: Alt-Ergo-1.01 proves it at 0.5.
    const TaskReplay first = replay_ranking(t, 0, {1, 0, 2, 3, 4, 5, 6, 7});
    CHECK(first.answer == cost::Answer::Valid);
    CHECK(first.cumulative_time == 0.5);
    CHECK(first.solvers_called.size() == 1);
    // empty_subset: nothing conclusive, all eight recorded times are paid.
    const std::size_t task = t.task_index("b.lang:Sets:empty_subset");
    const TaskReplay all = replay_ranking(t, task, identity(8));
    CHECK(all.answer == cost::Answer::Unknown);
    CHECK(all.cumulative_time == 0.5 + 0.75 + 0.25 + 10 + 1.5 + 0.0625 + 10 + 2);
    CHECK(all.solvers_called.size() == 8);
  }

  TEST_CASE("expected random replay time equals enumeration") {
    const auto t = fixtures::results();
    for (std::size_t task : {0u, 4u, 9u}) {
      double total = 0.0;
      int n = 0;
      oracle::for_each_permutation(8, [&](const oracle::Ranking& r) {
        double time = 0.0;
        for (std::size_t s : r) {
          time += t.at(task, s).cpu_time;
          if (cost::is_conclusive(t.at(task, s).answer)) break;
        }
        total += time;
        ++n;
      });
      CHECK(expected_random_replay_time(t, task, 0) ==
            doctest::Approx(total / n).epsilon(1e-12));
    }
  }

  TEST_CASE("strategy rankings") {
    const auto t = fixtures::results();
    const cost::CostConfig cfg{10.0};
    const auto best = strategy_ranking(Strategy::best(), t, 0, cfg);
    auto worst = strategy_ranking(Strategy::worst(), t, 0, cfg);
    std::reverse(worst.begin(), worst.end());
    CHECK(best == worst);
    CHECK(strategy_ranking(Strategy::random(3), t, 2, cfg) ==
          strategy_ranking(Strategy::random(3), t, 2, cfg));
    const auto m = fixtures::model();
    CHECK_THROWS(strategy_ranking(Strategy::learned(m), t, 0, cfg));
  }

  TEST_CASE("best and worst reports") {
    const auto t = fixtures::results();
    const cost::CostConfig cfg{10.0};
    std::vector<SolverRanking> best, worst;
    for (std::size_t i = 0; i < t.task_count(); ++i) {
      best.push_back(strategy_ranking(Strategy::best(), t, i, cfg));
      worst.push_back(strategy_ranking(Strategy::worst(), t, i, cfg));
    }
    const auto b = evaluate_rankings("Best", t, best, cfg);
    CHECK(b.report.ndcg == 1.0);
    CHECK(b.report.mae == 0.0);
    CHECK(b.report.reg_error == 0.0);
    CHECK_FALSE(b.report.r2.has_value());
    const auto w = evaluate_rankings("Worst", t, worst, cfg);
    CHECK(w.report.ndcg == 0.0);
    CHECK(w.report.mae == 4.0);
    CHECK(w.report.mean_time >= b.report.mean_time);
    const auto r = evaluate_random_expectation(t, cfg, 0);
    CHECK(r.report.mae == 2.625);
  }

  TEST_CASE("cumulative curves") {
    std::vector<TaskReplay> ones(5);
    for (auto& r : ones) {
      r.answer = cost::Answer::Valid;
      r.cumulative_time = 1.0;
    }
    const auto curve = cumulative_curve(ones);
    REQUIRE(curve.size() == 1);
    CHECK(curve[0] == std::pair<double, std::size_t>{1.0, 5});
    std::vector<TaskReplay> none(3);
    CHECK(cumulative_curve(none).empty());
    std::vector<TaskReplay> mixed(3);
    mixed[0] = {cost::Answer::Valid, 2.0, {}};
    mixed[1] = {cost::Answer::Unknown, 1.0, {}};
    mixed[2] = {cost::Answer::Invalid, 0.5, {}};
    CHECK(cumulative_curve(mixed) ==
          std::vector<std::pair<double, std::size_t>>{{0.5, 1}, {2.0, 2}});
  }
}
