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

// Ranked solver scheduling with a pre-solver, over pluggable backends.

#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "solverank/cost_model.hpp"
#include "solverank/error.hpp"
#include "solverank/features.hpp"
#include "solverank/forest.hpp"
#include "solverank/logic.hpp"

namespace solverank::scheduler {

using cost::SolverId;

struct ProofTask {
  cost::TaskKey key;
  std::string path;  // source document, for process backends
  // Either the syntax to extract features from, or precomputed features.
  std::variant<features::TaskScope, features::FeatureArray> source;
};

// One ProofTask per goal, keyed by `file` (normally the document's file
// name) and located at `path`.
std::vector<ProofTask> tasks_from_document(const logic::Document& doc,
                                           const std::string& file,
                                           const std::string& path);

class SolverBackend {
 public:
  virtual ~SolverBackend() = default;

  // Runs `solver` on `task` with a time limit. Implementations report
  // failures as Answer::Failure rather than throwing.
  virtual cost::SolverOutcome call(const ProofTask& task, const SolverId& solver,
                                   double timeout) const = 0;
  virtual bool installed(const SolverId& solver) const = 0;
  virtual std::vector<SolverId> roster() const = 0;
};

// Answers from a recorded table. A recorded time above the requested limit
// comes back as (Timeout, limit); limits above the recording limit return
// the recording unchanged.
class ReplayBackend : public SolverBackend {
 public:
  explicit ReplayBackend(cost::ResultsTable table, double recording_timeout = 10.0);

  cost::SolverOutcome call(const ProofTask& task, const SolverId& solver,
                           double timeout) const override;
  bool installed(const SolverId& solver) const override;
  std::vector<SolverId> roster() const override { return table_.roster(); }

  void mark_uninstalled(const SolverId& solver) { uninstalled_.insert(solver); }
  const cost::ResultsTable& table() const { return table_; }
  double recording_timeout() const { return recording_timeout_; }

 private:
  cost::ResultsTable table_;
  double recording_timeout_;
  std::set<SolverId> uninstalled_;
};

struct SchedulerConfig {
  double timeout = 10.0;           // per ranked call
  double pre_solve_timeout = 1.0;  // pre-solver call
  std::vector<SolverId> static_ranking;
  std::optional<double> cost_threshold;
  const forest::ForestModel* model = nullptr;
  // Drop the pre-solver from the predicted ranking instead of possibly
  // calling it a second time.
  bool skip_presolver_in_ranking = false;

  void validate() const;
};

// First solver of `ranking` the backend has installed; ConfigError if none.
SolverId best_installed(const std::vector<SolverId>& ranking,
                        const SolverBackend& backend);

struct CallRecord {
  SolverId solver;
  double timeout = 0.0;
  cost::SolverOutcome outcome;

  friend bool operator==(const CallRecord&, const CallRecord&) = default;
};

struct ProveResult {
  cost::Answer answer = cost::Answer::Failure;
  double time = 0.0;  // solver CPU time only; equals the sum over trace
  std::vector<CallRecord> trace;
  double overhead_s = 0.0;  // feature extraction and prediction, wall clock
};

ProveResult prove(const ProofTask& task, const SchedulerConfig& cfg,
                  const SolverBackend& backend);

// As prove, but only solvers with predicted cost <= cfg.cost_threshold are
// called after pre-solving.
ProveResult prove_with_threshold(const ProofTask& task, const SchedulerConfig& cfg,
                                 const SolverBackend& backend);

struct PredictedTask {
  std::string task_id;
  std::vector<double> costs;
  cost::SolverRanking ranking;  // indices into the model roster
};

std::vector<PredictedTask> predict_only(const logic::Document& doc,
                                        const forest::ForestModel& model);

struct MeasureOptions {
  double confidence = 0.90;
  double allowed_error = 0.035;  // relative half-width
  std::size_t min_runs = 3;
  std::size_t max_runs = 30;
};

struct MeanTimeResult {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation
  double half_width = 0.0;
  std::size_t runs = 0;
  bool converged = false;  // false: max_runs hit with a wide interval
};

class MeasurementError : public Error {
 public:
  MeasurementError(const std::string& what, MeanTimeResult partial)
      : Error(what), partial_(partial) {}
  const MeanTimeResult& partial() const { return partial_; }

 private:
  MeanTimeResult partial_;
};

// Repeats `sample` until the normal-approximation confidence interval
// half-width is within allowed_error of the mean, or max_runs is reached.
MeanTimeResult measure_mean_time(const std::function<double()>& sample,
                                 const MeasureOptions& options = {});

// Mean CPU time of one solver on one task; a Failure answer aborts.
MeanTimeResult measure_solver_time(const SolverBackend& backend,
                                   const ProofTask& task, const SolverId& solver,
                                   double timeout,
                                   const MeasureOptions& options = {});

}  // namespace solverank::scheduler
