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

#include "solverank/cost_model.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>

#include <fmt/format.h>

#include "solverank/error.hpp"
#include "solverank/io_util.hpp"

namespace solverank::cost {

namespace {

// Task indices grouped by unit, units in order of first appearance.
std::vector<std::vector<std::size_t>> group_units(const ResultsTable& t,
                                                  Level level) {
  std::vector<std::vector<std::size_t>> units;
  std::map<std::pair<std::string, std::string>, std::size_t> index;
  for (std::size_t i = 0; i < t.task_count(); ++i) {
    const TaskKey& k = t.tasks()[i];
    std::pair<std::string, std::string> key;
    switch (level) {
      case Level::Goal: units.push_back({i}); continue;
      case Level::Theory: key = {k.file, k.theory}; break;
      case Level::File: key = {k.file, ""}; break;
    }
    auto [it, inserted] = index.try_emplace(key, units.size());
    if (inserted) units.emplace_back();
    units[it->second].push_back(i);
  }
  return units;
}

LevelStats finish(std::size_t proved, std::size_t total, double time_sum) {
  LevelStats s;
  s.proved = proved;
  s.total = total;
  s.percent = total == 0 ? 0.0 : 100.0 * static_cast<double>(proved) /
                                     static_cast<double>(total);
  s.avg_time = proved == 0 ? 0.0 : time_sum / static_cast<double>(proved);
  return s;
}

bool valid_time_text(std::string_view s) {
  const auto dot = s.find('.');
  auto digits = [](std::string_view d) {
    return !d.empty() && std::all_of(d.begin(), d.end(),
                                     [](char c) { return c >= '0' && c <= '9'; });
  };
  if (dot == std::string_view::npos) return digits(s);
  const auto frac = s.substr(dot + 1);
  return digits(s.substr(0, dot)) && digits(frac) && frac.size() <= 6;
}

}  // namespace

int utility(Answer a) {
  switch (a) {
    case Answer::Valid:
    case Answer::Invalid: return 2;
    case Answer::Unknown: return 1;
    case Answer::Timeout:
    case Answer::Failure: return 0;
  }
  return 0;
}

std::string_view to_string(Answer a) {
  switch (a) {
    case Answer::Valid: return "valid";
    case Answer::Invalid: return "invalid";
    case Answer::Unknown: return "unknown";
    case Answer::Timeout: return "timeout";
    case Answer::Failure: return "failure";
  }
  return "failure";
}

Answer parse_answer(std::string_view text) {
  for (Answer a : {Answer::Valid, Answer::Invalid, Answer::Unknown,
                   Answer::Timeout, Answer::Failure}) {
    if (text == to_string(a)) return a;
  }
  throw DataError(fmt::format("unknown answer '{}'", text));
}

std::string SolverId::display() const {
  return version.empty() ? name : name + "-" + version;
}

SolverId SolverId::parse(std::string_view text) {
  for (std::size_t i = text.size(); i-- > 0;) {
    if (text[i] == '-' && i + 1 < text.size() && text[i + 1] >= '0' &&
        text[i + 1] <= '9' && i > 0) {
      return {std::string(text.substr(0, i)), std::string(text.substr(i + 1))};
    }
  }
  return {std::string(text), ""};
}

std::string TaskKey::id() const {
  return fmt::format("{}:{}:{}", file, theory, goal);
}

ResultsTable::ResultsTable(std::vector<SolverId> roster,
                           std::vector<TaskKey> tasks,
                           std::vector<SolverOutcome> outcomes)
    : roster_(std::move(roster)),
      tasks_(std::move(tasks)),
      outcomes_(std::move(outcomes)) {
  if (outcomes_.size() != roster_.size() * tasks_.size()) {
    throw DataError(fmt::format(
        "results table has {} cells, expected {} tasks x {} solvers",
        outcomes_.size(), tasks_.size(), roster_.size()));
  }
  for (std::size_t i = 0; i < roster_.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (roster_[i] == roster_[j]) {
        throw DataError(
            fmt::format("solver '{}' listed twice", roster_[i].display()));
      }
    }
  }
  for (std::size_t i = 0; i < tasks_.size(); ++i) {
    if (!task_index_.try_emplace(tasks_[i].id(), i).second) {
      throw DataError(fmt::format("task '{}' listed twice", tasks_[i].id()));
    }
  }
  for (const SolverOutcome& o : outcomes_) {
    if (!(o.cpu_time >= 0.0) || !std::isfinite(o.cpu_time)) {
      throw DataError(fmt::format("invalid cpu time {}", o.cpu_time));
    }
  }
}

std::optional<std::size_t> ResultsTable::find_task(std::string_view id) const {
  auto it = task_index_.find(std::string(id));
  if (it == task_index_.end()) return std::nullopt;
  return it->second;
}

std::size_t ResultsTable::task_index(std::string_view id) const {
  if (auto i = find_task(id)) return *i;
  throw DataError(fmt::format("unknown task '{}'", id));
}

std::optional<std::size_t> ResultsTable::find_solver(const SolverId& id) const {
  auto it = std::find(roster_.begin(), roster_.end(), id);
  if (it == roster_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - roster_.begin());
}

double cost(const SolverOutcome& o, const CostConfig& cfg) {
  switch (o.answer) {
    case Answer::Valid:
    case Answer::Invalid: return o.cpu_time;
    case Answer::Unknown: return o.cpu_time + cfg.timeout;
    case Answer::Timeout:
    case Answer::Failure: return o.cpu_time + cfg.timeout * 2;
  }
  return o.cpu_time + cfg.timeout * 2;
}

std::vector<double> cost_vector(const ResultsTable& t, std::size_t task,
                                const CostConfig& cfg) {
  std::vector<double> costs;
  costs.reserve(t.solver_count());
  for (const SolverOutcome& o : t.row(task)) costs.push_back(cost(o, cfg));
  return costs;
}

SolverRanking rank_by_cost(std::span<const double> costs) {
  SolverRanking r(costs.size());
  std::iota(r.begin(), r.end(), std::size_t{0});
  std::stable_sort(r.begin(), r.end(), [&](std::size_t a, std::size_t b) {
    return costs[a] < costs[b];
  });
  return r;
}

SolverRanking ground_truth_ranking(const ResultsTable& t, std::size_t task,
                                   const CostConfig& cfg) {
  const auto costs = cost_vector(t, task, cfg);
  return rank_by_cost(costs);
}

SolverRanking ground_truth_ranking(const ResultsTable& t,
                                   std::string_view task_id,
                                   const CostConfig& cfg) {
  return ground_truth_ranking(t, t.task_index(task_id), cfg);
}

SolverRanking static_solver_ranking(const ResultsTable& t) {
  std::vector<std::size_t> proved(t.solver_count(), 0);
  for (std::size_t i = 0; i < t.task_count(); ++i) {
    for (std::size_t s = 0; s < t.solver_count(); ++s) {
      if (is_conclusive(t.at(i, s).answer)) ++proved[s];
    }
  }
  SolverRanking r(t.solver_count());
  std::iota(r.begin(), r.end(), std::size_t{0});
  std::stable_sort(r.begin(), r.end(), [&](std::size_t a, std::size_t b) {
    return proved[a] > proved[b];
  });
  return r;
}

const LevelStats& LevelReport::at(Level level) const {
  switch (level) {
    case Level::File: return file;
    case Level::Theory: return theory;
    case Level::Goal: return goal;
  }
  return goal;
}

LevelStats choose_single(const ResultsTable& t, Level level) {
  const auto units = group_units(t, level);
  std::size_t proved = 0;
  double time_sum = 0.0;
  for (const auto& unit : units) {
    std::optional<double> best;
    for (std::size_t s = 0; s < t.solver_count(); ++s) {
      double total = 0.0;
      bool all = true;
      for (std::size_t task : unit) {
        const SolverOutcome& o = t.at(task, s);
        if (!is_conclusive(o.answer)) {
          all = false;
          break;
        }
        total += o.cpu_time;
      }
      if (all && (!best || total < *best)) best = total;
    }
    if (best) {
      ++proved;
      time_sum += *best;
    }
  }
  return finish(proved, units.size(), time_sum);
}

LevelReport choose_single_report(const ResultsTable& t) {
  return {choose_single(t, Level::File), choose_single(t, Level::Theory),
          choose_single(t, Level::Goal)};
}

LevelReport aggregate_report(const ResultsTable& t,
                             std::span<const GoalOutcome> per_goal) {
  if (per_goal.size() != t.task_count()) {
    throw DataError(fmt::format("expected {} goal outcomes, got {}",
                                t.task_count(), per_goal.size()));
  }
  auto level_stats = [&](Level level) {
    const auto units = group_units(t, level);
    std::size_t proved = 0;
    double time_sum = 0.0;
    for (const auto& unit : units) {
      bool all = true;
      double total = 0.0;
      for (std::size_t task : unit) {
        all = all && is_conclusive(per_goal[task].answer);
        total += per_goal[task].time;
      }
      if (all) {
        ++proved;
        time_sum += total;
      }
    }
    return finish(proved, units.size(), time_sum);
  };
  return {level_stats(Level::File), level_stats(Level::Theory),
          level_stats(Level::Goal)};
}

std::vector<GoalOutcome> single_solver_outcomes(const ResultsTable& t,
                                                std::size_t solver) {
  std::vector<GoalOutcome> out;
  out.reserve(t.task_count());
  for (std::size_t i = 0; i < t.task_count(); ++i) {
    out.push_back({t.at(i, solver).answer, t.at(i, solver).cpu_time});
  }
  return out;
}

std::vector<double> calibrate_timeout(const ResultsTable& t, double coverage) {
  if (!(coverage > 0.0 && coverage <= 1.0)) {
    throw ConfigError(fmt::format("coverage must be in (0, 1], got {}", coverage));
  }
  std::vector<double> thresholds;
  for (std::size_t s = 0; s < t.solver_count(); ++s) {
    std::vector<double> useful;
    for (std::size_t i = 0; i < t.task_count(); ++i) {
      const SolverOutcome& o = t.at(i, s);
      if (utility(o.answer) >= 1) useful.push_back(o.cpu_time);
    }
    if (useful.empty()) {
      thresholds.push_back(0.0);
      continue;
    }
    std::sort(useful.begin(), useful.end());
    const double needed = coverage * static_cast<double>(useful.size());
    std::size_t k = 1;
    while (static_cast<double>(k) < needed) ++k;
    thresholds.push_back(useful[k - 1]);
  }
  return thresholds;
}

ResultsTable read_results_csv(std::istream& in, const std::string& source_name,
                              std::optional<double> recording_timeout) {
  std::string line;
  if (!std::getline(in, line)) {
    throw DataError(fmt::format("{}: empty results file", source_name));
  }
  io::chomp(line);
  if (line != "file,theory,goal,solver,answer,time_s") {
    throw DataError(fmt::format(
        "{}:1: expected header 'file,theory,goal,solver,answer,time_s'",
        source_name));
  }
  std::vector<SolverId> roster;
  std::map<std::string, std::size_t> solver_index;
  std::vector<TaskKey> tasks;
  std::map<std::string, std::size_t> task_index;
  struct Cell {
    std::size_t task, solver;
    SolverOutcome outcome;
    std::size_t line;
  };
  std::vector<Cell> cells;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    io::chomp(line);
    if (line.empty()) continue;
    auto where = [&] { return fmt::format("{}:{}", source_name, lineno); };
    const auto f = io::split_csv_line(line);
    if (f.size() != 6) {
      throw DataError(fmt::format("{}: expected 6 fields, got {}", where(), f.size()));
    }
    for (std::size_t k = 0; k < 4; ++k) {
      if (f[k].empty()) throw DataError(fmt::format("{}: empty field {}", where(), k + 1));
    }
    Answer answer;
    try {
      answer = parse_answer(f[4]);
    } catch (const DataError& e) {
      throw DataError(fmt::format("{}: {}", where(), e.what()));
    }
    if (!valid_time_text(f[5])) {
      throw DataError(fmt::format(
          "{}: time_s '{}' is not a decimal with at most 6 fractional digits",
          where(), f[5]));
    }
    const double time = io::parse_double(f[5], "time_s");
    if (recording_timeout && answer == Answer::Timeout &&
        time < 0.95 * *recording_timeout) {
      throw DataError(fmt::format(
          "{}: timeout recorded after {}s, below the {}s limit", where(), f[5],
          *recording_timeout));
    }
    auto [sit, snew] = solver_index.try_emplace(f[3], roster.size());
    if (snew) roster.push_back(SolverId::parse(f[3]));
    TaskKey key{f[0], f[1], f[2]};
    auto [tit, tnew] = task_index.try_emplace(key.id(), tasks.size());
    if (tnew) tasks.push_back(std::move(key));
    cells.push_back({tit->second, sit->second, {answer, time}, lineno});
  }
  const std::size_t width = roster.size();
  std::vector<SolverOutcome> outcomes(tasks.size() * width);
  std::vector<bool> seen(outcomes.size(), false);
  for (const Cell& c : cells) {
    const std::size_t at = c.task * width + c.solver;
    if (seen[at]) {
      throw DataError(fmt::format("{}:{}: duplicate row for task '{}' and solver '{}'",
                                  source_name, c.line, tasks[c.task].id(),
                                  roster[c.solver].display()));
    }
    seen[at] = true;
    outcomes[at] = c.outcome;
  }
  std::size_t missing = 0;
  std::string first_missing;
  for (std::size_t i = 0; i < seen.size(); ++i) {
    if (!seen[i]) {
      if (missing++ == 0) {
        first_missing = fmt::format("task '{}' / solver '{}'",
                                    tasks[i / width].id(),
                                    roster[i % width].display());
      }
    }
  }
  if (missing > 0) {
    throw DataError(fmt::format("{}: incomplete table, {} missing cell(s), first: {}",
                                source_name, missing, first_missing));
  }
  return ResultsTable(std::move(roster), std::move(tasks), std::move(outcomes));
}

void write_results_csv(std::ostream& out, const ResultsTable& t) {
  out << "file,theory,goal,solver,answer,time_s\n";
  for (std::size_t i = 0; i < t.task_count(); ++i) {
    const TaskKey& k = t.tasks()[i];
    for (std::size_t s = 0; s < t.solver_count(); ++s) {
      const SolverOutcome& o = t.at(i, s);
      out << k.file << ',' << k.theory << ',' << k.goal << ','
          << t.roster()[s].display() << ',' << to_string(o.answer) << ','
          << io::format_seconds(o.cpu_time) << '\n';
    }
  }
}

}  // namespace solverank::cost
