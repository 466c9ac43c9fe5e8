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

#include "solverank/scheduler.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/normal.hpp>
#include <fmt/format.h>

namespace solverank::scheduler {

namespace {

CallRecord guarded_call(const SolverBackend& backend, const ProofTask& task,
                        const SolverId& solver, double timeout) {
  CallRecord rec{solver, timeout, {cost::Answer::Failure, 0.0}};
  try {
    rec.outcome = backend.call(task, solver, timeout);
  } catch (const std::exception&) {
    rec.outcome = {cost::Answer::Failure, 0.0};
  }
  return rec;
}

features::FeatureArray task_features(const ProofTask& task) {
  if (const auto* scope = std::get_if<features::TaskScope>(&task.source)) {
    return features::to_array(features::extract_task_features(*scope));
  }
  return std::get<features::FeatureArray>(task.source);
}

ProveResult run_schedule(const ProofTask& task, const SchedulerConfig& cfg,
                         const SolverBackend& backend, bool use_threshold) {
  cfg.validate();
  if (use_threshold && !cfg.cost_threshold) {
    throw ConfigError("prove_with_threshold needs a cost threshold");
  }
  const auto known = backend.roster();
  for (const SolverId& s : cfg.model->roster) {
    if (std::find(known.begin(), known.end(), s) == known.end()) {
      throw ConfigError(fmt::format(
          "model solver '{}' is not configured in the backend", s.display()));
    }
  }

  ProveResult result;
  auto record = [&](CallRecord rec) {
    result.time += rec.outcome.cpu_time;
    if (result.trace.empty() ||
        cost::utility(rec.outcome.answer) > cost::utility(result.answer)) {
      result.answer = rec.outcome.answer;
    }
    result.trace.push_back(std::move(rec));
  };

  const SolverId pre_solver = best_installed(cfg.static_ranking, backend);
  record(guarded_call(backend, task, pre_solver, cfg.pre_solve_timeout));
  if (cost::is_conclusive(result.answer)) return result;

  const auto started = std::chrono::steady_clock::now();
  const auto costs = forest::predict(*cfg.model, task_features(task));
  const auto order = cost::rank_by_cost(costs);
  result.overhead_s = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - started)
                          .count();

  std::vector<SolverId> remaining;
  for (std::size_t s : order) {
    if (use_threshold && !(costs[s] <= *cfg.cost_threshold)) continue;
    if (cfg.skip_presolver_in_ranking && cfg.model->roster[s] == pre_solver) continue;
    remaining.push_back(cfg.model->roster[s]);
  }

  while (!cost::is_conclusive(result.answer) && !remaining.empty()) {
    auto next = std::find_if(remaining.begin(), remaining.end(),
                             [&](const SolverId& s) { return backend.installed(s); });
    if (next == remaining.end()) break;  // only uninstalled solvers left
    record(guarded_call(backend, task, *next, cfg.timeout));
    remaining.erase(next);
  }
  return result;
}

}  // namespace

std::vector<ProofTask> tasks_from_document(const logic::Document& doc,
                                           const std::string& file,
                                           const std::string& path) {
  std::vector<ProofTask> tasks;
  for (const logic::Theory& th : doc.theories) {
    for (features::TaskScope& scope : features::task_scopes(th)) {
      cost::TaskKey key{file, th.name, scope.goal.name};
      tasks.push_back({std::move(key), path, std::move(scope)});
    }
  }
  return tasks;
}

ReplayBackend::ReplayBackend(cost::ResultsTable table, double recording_timeout)
    : table_(std::move(table)), recording_timeout_(recording_timeout) {}

cost::SolverOutcome ReplayBackend::call(const ProofTask& task,
                                        const SolverId& solver,
                                        double timeout) const {
  const auto t = table_.find_task(task.key.id());
  const auto s = table_.find_solver(solver);
  if (!t || !s) return {cost::Answer::Failure, 0.0};
  const cost::SolverOutcome& recorded = table_.at(*t, *s);
  if (recorded.cpu_time > timeout) return {cost::Answer::Timeout, timeout};
  return recorded;
}

bool ReplayBackend::installed(const SolverId& solver) const {
  return table_.find_solver(solver).has_value() && !uninstalled_.contains(solver);
}

void SchedulerConfig::validate() const {
  if (!(timeout > 0.0)) {
    throw ConfigError(fmt::format("timeout must be positive, got {}", timeout));
  }
  if (!(pre_solve_timeout > 0.0)) {
    throw ConfigError(fmt::format("pre-solve timeout must be positive, got {}",
                                  pre_solve_timeout));
  }
  if (static_ranking.empty()) throw ConfigError("static ranking is empty");
  if (model == nullptr) throw ConfigError("no model configured");
  if (cost_threshold && std::isnan(*cost_threshold)) {
    throw ConfigError("cost threshold is NaN");
  }
}

SolverId best_installed(const std::vector<SolverId>& ranking,
                        const SolverBackend& backend) {
  for (const SolverId& s : ranking) {
    if (backend.installed(s)) return s;
  }
  throw ConfigError("none of the ranked solvers is installed");
}

ProveResult prove(const ProofTask& task, const SchedulerConfig& cfg,
                  const SolverBackend& backend) {
  return run_schedule(task, cfg, backend, /*use_threshold=*/false);
}

ProveResult prove_with_threshold(const ProofTask& task, const SchedulerConfig& cfg,
                                 const SolverBackend& backend) {
  return run_schedule(task, cfg, backend, /*use_threshold=*/true);
}

std::vector<PredictedTask> predict_only(const logic::Document& doc,
                                        const forest::ForestModel& model) {
  std::vector<PredictedTask> out;
  for (const auto& tf : features::extract_document_features(doc)) {
    PredictedTask p;
    p.task_id = tf.task_id;
    p.costs = forest::predict(model, features::to_array(tf.features));
    p.ranking = cost::rank_by_cost(p.costs);
    out.push_back(std::move(p));
  }
  return out;
}

MeanTimeResult measure_mean_time(const std::function<double()>& sample,
                                 const MeasureOptions& options) {
  if (!(options.confidence > 0.0 && options.confidence < 1.0)) {
    throw ConfigError("confidence must be in (0, 1)");
  }
  if (options.min_runs < 2 || options.max_runs < options.min_runs) {
    throw ConfigError("need 2 <= min_runs <= max_runs");
  }
  const boost::math::normal standard;
  const double z = boost::math::quantile(standard, (1.0 + options.confidence) / 2.0);
  std::vector<double> xs;
  MeanTimeResult r;
  auto update = [&] {
    const double n = static_cast<double>(xs.size());
    r.runs = xs.size();
    r.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : xs) ss += (x - r.mean) * (x - r.mean);
    r.stddev = xs.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    r.half_width = z * r.stddev / std::sqrt(n);
  };
  while (xs.size() < options.max_runs) {
    double x;
    try {
      x = sample();
    } catch (const std::exception& e) {
      if (!xs.empty()) update();
      throw MeasurementError(
          fmt::format("measurement aborted after {} run(s): {}", xs.size(), e.what()),
          r);
    }
    xs.push_back(x);
    if (xs.size() < options.min_runs) continue;
    update();
    if (r.half_width <= options.allowed_error * std::abs(r.mean)) {
      r.converged = true;
      return r;
    }
  }
  return r;
}

MeanTimeResult measure_solver_time(const SolverBackend& backend,
                                   const ProofTask& task, const SolverId& solver,
                                   double timeout, const MeasureOptions& options) {
  return measure_mean_time(
      [&] {
        const auto o = backend.call(task, solver, timeout);
        if (o.answer == cost::Answer::Failure) {
          throw Error(fmt::format("solver '{}' failed on '{}'", solver.display(),
                                  task.key.id()));
        }
        return o.cpu_time;
      },
      options);
}

}  // namespace solverank::scheduler
