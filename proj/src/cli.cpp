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

#include "solverank/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "solverank/cost_model.hpp"
#include "solverank/error.hpp"
#include "solverank/evaluation.hpp"
#include "solverank/features.hpp"
#include "solverank/forest.hpp"
#include "solverank/io_util.hpp"
#include "solverank/logic.hpp"
#include "solverank/process_backend.hpp"
#include "solverank/scheduler.hpp"

namespace solverank::cli {

namespace {

namespace fs = std::filesystem;
using cost::SolverId;

enum class Format { Csv, Json };

// Rectangular output rendered either as CSV or as a JSON array of objects.
struct Table {
  std::vector<std::string> columns;
  std::vector<bool> numeric;
  std::vector<std::vector<std::string>> rows;

  void add_column(std::string name, bool is_numeric) {
    columns.push_back(std::move(name));
    numeric.push_back(is_numeric);
  }

  std::string render(Format format) const {
    if (format == Format::Csv) {
      std::string text = fmt::format("{}\n", fmt::join(columns, ","));
      for (const auto& row : rows) text += fmt::format("{}\n", fmt::join(row, ","));
      return text;
    }
    auto array = nlohmann::ordered_json::array();
    for (const auto& row : rows) {
      nlohmann::ordered_json obj = nlohmann::ordered_json::object();
      for (std::size_t c = 0; c < columns.size(); ++c) {
        const std::string& cell = row[c];
        if (cell.empty()) {
          obj[columns[c]] = nullptr;
        } else if (numeric[c]) {
          char* end = nullptr;
          const double v = std::strtod(cell.c_str(), &end);
          if (std::isfinite(v) && *end == '\0') {
            obj[columns[c]] = v;
          } else {
            obj[columns[c]] = cell;
          }
        } else {
          obj[columns[c]] = cell;
        }
      }
      array.push_back(std::move(obj));
    }
    return array.dump(2) + "\n";
  }
};

std::string num(double v) { return io::format_double(v); }

void emit(const std::string& text, const std::string& out_path, std::ostream& out) {
  if (out_path.empty()) {
    out << text;
  } else {
    io::write_file_atomic(out_path, text);
  }
}

Format parse_format(const std::string& text) {
  if (text == "csv") return Format::Csv;
  if (text == "json") return Format::Json;
  throw ConfigError(fmt::format("--format: expected csv or json, got '{}'", text));
}

std::string extension(Format f) { return f == Format::Csv ? ".csv" : ".json"; }

logic::Document load_document(const std::string& path) {
  const std::string text = io::read_file(path);
  try {
    return logic::parse_document(text, fs::path(path).filename().string());
  } catch (const logic::ParseError& e) {
    throw DataError(fmt::format("{}:{}", path, e.what()));
  }
}

cost::ResultsTable load_results(const std::string& path,
                                std::optional<double> recording_timeout) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(fmt::format("{}: cannot open", path));
  return cost::read_results_csv(in, path, recording_timeout);
}

std::vector<features::TaskFeatures> load_features(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(fmt::format("{}: cannot open", path));
  return features::read_features_csv(in, path);
}

forest::ForestModel load_model(const std::string& path) {
  const std::string text = io::read_file(path);
  try {
    return forest::deserialize(text);
  } catch (const DataError& e) {
    throw DataError(fmt::format("{}: {}", path, e.what()));
  }
}

void sort_by_task_id(std::vector<features::TaskFeatures>& rows) {
  std::stable_sort(rows.begin(), rows.end(),
                   [](const auto& a, const auto& b) { return a.task_id < b.task_id; });
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].task_id == rows[i - 1].task_id) {
      throw DataError(fmt::format("task '{}' occurs in more than one input document",
                                  rows[i].task_id));
    }
  }
}

std::vector<features::TaskFeatures> extract_all(const std::vector<std::string>& paths,
                                                unsigned jobs) {
  std::vector<features::TaskFeatures> all;
  for (const auto& path : paths) {
    auto rows = features::extract_document_features(load_document(path), jobs);
    std::move(rows.begin(), rows.end(), std::back_inserter(all));
  }
  sort_by_task_id(all);
  return all;
}

void check_roster(const forest::ForestModel& model, const cost::ResultsTable& t,
                  const std::string& model_path, const std::string& results_path) {
  if (model.roster != t.roster()) {
    throw DataError(fmt::format("{}: solver roster differs from {}", model_path,
                                results_path));
  }
}

struct HyperFlags {
  std::size_t trees = 100;
  std::size_t max_depth = 0;  // 0 = unlimited
  std::size_t min_samples_leaf = 1;
  std::size_t max_features = features::kFeatureCount;
  bool no_bootstrap = false;
  bool unweighted = false;

  void attach(CLI::App* sub) {
    sub->add_option("--trees", trees, "Number of trees")->capture_default_str();
    sub->add_option("--max-depth", max_depth, "Maximum tree depth, 0 for unlimited")
        ->capture_default_str();
    sub->add_option("--min-samples-leaf", min_samples_leaf, "Minimum rows per leaf")
        ->capture_default_str();
    sub->add_option("--max-features", max_features, "Features examined per split")
        ->capture_default_str();
    sub->add_flag("--no-bootstrap", no_bootstrap, "Train every tree on all rows");
    sub->add_flag("--unweighted", unweighted, "Give every training row weight 1");
  }

  forest::Hyperparameters get() const {
    if (trees == 0) throw ConfigError("--trees: must be at least 1");
    if (min_samples_leaf == 0) throw ConfigError("--min-samples-leaf: must be at least 1");
    if (max_features == 0 || max_features > features::kFeatureCount) {
      throw ConfigError(fmt::format("--max-features: must be in [1, {}]",
                                    features::kFeatureCount));
    }
    forest::Hyperparameters hp;
    hp.trees = trees;
    if (max_depth > 0) hp.max_depth = max_depth;
    hp.min_samples_leaf = min_samples_leaf;
    hp.max_features = max_features;
    hp.bootstrap = !no_bootstrap;
    return hp;
  }
};

void require_positive(double value, const char* flag) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw ConfigError(fmt::format("{}: must be a positive number", flag));
  }
}

struct Options {
  std::uint64_t seed = 0;
  double timeout = 10.0;
  unsigned jobs = 1;
  std::string format = "csv";
  std::string out;
  std::string out_dir = ".";
  std::vector<std::string> inputs;
  std::string features_path;
  std::string results_path;
  std::string model_path;
  std::string backend = "process";
  std::string static_ranking;
  std::optional<double> recording_timeout;
  double pre_solve_timeout = 1.0;
  double threshold = 0.0;
  bool has_threshold = false;
  bool skip_presolver = false;
  bool report_overhead = false;
  std::size_t folds = 0;
  std::string relevance = "linear";
  std::vector<double> thresholds;
  double coverage = 0.99;
  double calibrate_timeout = 60.0;
  HyperFlags hyper;
};

// ---- extract ----------------------------------------------------------------

int cmd_extract(const Options& o, std::ostream& out) {
  const Format format = parse_format(o.format);
  const auto rows = extract_all(o.inputs, o.jobs);
  std::string text;
  if (format == Format::Csv) {
    std::ostringstream ss;
    features::write_features_csv(ss, rows);
    text = ss.str();
  } else {
    Table t;
    t.add_column("task_id", false);
    for (auto name : features::feature_names()) t.add_column(std::string(name), true);
    for (const auto& r : rows) {
      std::vector<std::string> cells{r.task_id};
      for (double v : features::to_array(r.features)) cells.push_back(num(v));
      t.rows.push_back(std::move(cells));
    }
    text = t.render(format);
  }
  emit(text, o.out, out);
  return kExitOk;
}

// ---- train ------------------------------------------------------------------

int cmd_train(const Options& o, std::ostream& out) {
  require_positive(o.timeout, "--timeout");
  const forest::Hyperparameters hp = o.hyper.get();
  const auto feats = load_features(o.features_path);
  const auto table = load_results(o.results_path, o.recording_timeout);
  const auto ts = forest::make_training_set(feats, table, {o.timeout}, !o.hyper.unweighted);
  const auto model = forest::train_forest(ts, hp, o.seed, o.jobs);
  std::string text = forest::serialize(model);
  if (text.empty() || text.back() != '\n') text += '\n';
  emit(text, o.out, out);
  return kExitOk;
}

// ---- predict ----------------------------------------------------------------

int cmd_predict(const Options& o, std::ostream& out) {
  const Format format = parse_format(o.format);
  const auto model = load_model(o.model_path);
  std::vector<scheduler::PredictedTask> all;
  for (const auto& path : o.inputs) {
    auto rows = scheduler::predict_only(load_document(path), model);
    std::move(rows.begin(), rows.end(), std::back_inserter(all));
  }
  std::stable_sort(all.begin(), all.end(),
                   [](const auto& a, const auto& b) { return a.task_id < b.task_id; });
  Table t;
  t.add_column("task_id", false);
  for (std::size_t j = 0; j < model.roster.size(); ++j) {
    t.add_column(fmt::format("rank_{}", j + 1), false);
  }
  for (const auto& s : model.roster) t.add_column("cost_" + s.display(), true);
  for (const auto& p : all) {
    std::vector<std::string> cells{p.task_id};
    for (std::size_t s : p.ranking) cells.push_back(model.roster[s].display());
    for (double c : p.costs) cells.push_back(num(c));
    t.rows.push_back(std::move(cells));
  }
  emit(t.render(format), o.out, out);
  return kExitOk;
}

// ---- prove ------------------------------------------------------------------

struct BackendChoice {
  std::unique_ptr<scheduler::SolverBackend> backend;
  std::optional<cost::ResultsTable> table;  // replay only
};

BackendChoice make_backend(const Options& o) {
  BackendChoice choice;
  const std::string& backend = o.backend;
  if (backend.rfind("replay:", 0) == 0) {
    const std::string path = backend.substr(7);
    if (path.empty()) throw ConfigError("--backend: replay needs a results file");
    const double recording = o.recording_timeout.value_or(o.timeout);
    choice.table = load_results(path, recording);
    choice.backend = std::make_unique<scheduler::ReplayBackend>(*choice.table, recording);
    return choice;
  }
  if (backend == "process" || backend.rfind("process:", 0) == 0) {
    std::string path = backend.size() > 8 ? backend.substr(8) : "portfolio.ini";
    if (const char* env = std::getenv("PORTFOLIO_CONFIG"); env != nullptr && *env) {
      path = env;
    }
    if (!fs::exists(path)) throw ConfigError(fmt::format("{}: backend configuration not found", path));
    choice.backend = std::make_unique<scheduler::ProcessBackend>(
        scheduler::ProcessBackend::from_config(path));
    return choice;
  }
  throw ConfigError(fmt::format(
      "--backend: expected replay:<results.csv> or process[:<config.ini>], got '{}'", backend));
}

std::vector<SolverId> parse_solver_list(const std::string& text, const char* flag) {
  std::vector<SolverId> out;
  for (const auto& item : io::split_csv_line(text)) {
    if (item.empty()) throw ConfigError(fmt::format("{}: empty solver name", flag));
    out.push_back(SolverId::parse(item));
  }
  return out;
}

std::vector<SolverId> ids_of(const cost::ResultsTable& t, const cost::SolverRanking& r) {
  std::vector<SolverId> out;
  for (std::size_t s : r) out.push_back(t.roster()[s]);
  return out;
}

std::string format_trace(const std::vector<scheduler::CallRecord>& trace) {
  std::vector<std::string> parts;
  for (const auto& c : trace) {
    parts.push_back(fmt::format("{}@{}:{}:{}", c.solver.display(), num(c.timeout),
                                cost::to_string(c.outcome.answer), num(c.outcome.cpu_time)));
  }
  return fmt::format("{}", fmt::join(parts, ";"));
}

int cmd_prove(const Options& o, std::ostream& out) {
  const Format format = parse_format(o.format);
  require_positive(o.timeout, "--timeout");
  require_positive(o.pre_solve_timeout, "--pre-solve-timeout");
  const auto model = load_model(o.model_path);
  BackendChoice choice = make_backend(o);

  scheduler::SchedulerConfig cfg;
  cfg.timeout = o.timeout;
  cfg.pre_solve_timeout = o.pre_solve_timeout;
  cfg.model = &model;
  cfg.skip_presolver_in_ranking = o.skip_presolver;
  if (o.has_threshold) cfg.cost_threshold = o.threshold;
  if (!o.static_ranking.empty()) {
    cfg.static_ranking = parse_solver_list(o.static_ranking, "--static-ranking");
  } else if (choice.table) {
    cfg.static_ranking = ids_of(*choice.table, cost::static_solver_ranking(*choice.table));
  } else {
    cfg.static_ranking = model.roster;
  }
  cfg.validate();

  std::vector<scheduler::ProofTask> tasks;
  for (const auto& path : o.inputs) {
    auto doc = load_document(path);
    auto more = scheduler::tasks_from_document(doc, doc.path, path);
    std::move(more.begin(), more.end(), std::back_inserter(tasks));
  }
  std::stable_sort(tasks.begin(), tasks.end(), [](const auto& a, const auto& b) {
    return a.key.id() < b.key.id();
  });

  std::vector<scheduler::ProveResult> results(tasks.size());
  io::parallel_for(tasks.size(), o.jobs, [&](std::size_t i) {
    results[i] = cfg.cost_threshold
                     ? scheduler::prove_with_threshold(tasks[i], cfg, *choice.backend)
                     : scheduler::prove(tasks[i], cfg, *choice.backend);
  });

  Table t;
  t.add_column("task_id", false);
  t.add_column("answer", false);
  t.add_column("time_s", true);
  t.add_column("calls", true);
  t.add_column("trace", false);
  if (o.report_overhead) t.add_column("overhead_s", true);
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const auto& r = results[i];
    std::vector<std::string> cells{tasks[i].key.id(), std::string(cost::to_string(r.answer)),
                                   num(r.time), std::to_string(r.trace.size()),
                                   format_trace(r.trace)};
    if (o.report_overhead) cells.push_back(num(r.overhead_s));
    t.rows.push_back(std::move(cells));
  }
  emit(t.render(format), o.out, out);
  return kExitOk;
}

// ---- eval -------------------------------------------------------------------

std::string lowercase(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

void add_level_row(Table& t, const std::string& name, const cost::LevelReport& r) {
  std::vector<std::string> cells{name};
  for (cost::Level level : {cost::Level::File, cost::Level::Theory, cost::Level::Goal}) {
    const auto& s = r.at(level);
    cells.push_back(std::to_string(s.proved));
    cells.push_back(std::to_string(s.total));
    cells.push_back(num(s.percent));
    cells.push_back(num(s.avg_time));
  }
  t.rows.push_back(std::move(cells));
}

// Learned predictions for every results task, in table order.
struct LearnedRun {
  std::vector<forest::ForestModel> models;
  std::vector<std::size_t> model_of_task;
  std::vector<features::FeatureArray> features_of_task;
  evaluation::Matrix predicted;
};

LearnedRun run_learned(const Options& o, const cost::ResultsTable& table,
                       const std::vector<features::TaskFeatures>& feats) {
  const cost::CostConfig cc{o.timeout};
  const auto ts = forest::make_training_set(feats, table, cc, !o.hyper.unweighted);
  std::map<std::string, std::size_t> row_of;
  for (std::size_t r = 0; r < ts.rows.size(); ++r) row_of[ts.rows[r].task_id] = r;

  LearnedRun run;
  std::vector<std::size_t> model_of_row(ts.rows.size(), 0);
  if (o.folds > 0) {
    const forest::Hyperparameters hp =
        o.model_path.empty() ? o.hyper.get() : load_model(o.model_path).hyperparameters;
    const auto splits = forest::kfold_splits(ts, o.folds, o.seed);
    for (std::size_t f = 0; f < splits.size(); ++f) {
      run.models.push_back(
          forest::train_forest(forest::subset(ts, splits[f].train), hp, o.seed + f, o.jobs));
      for (std::size_t r : splits[f].validation) model_of_row[r] = f;
    }
  } else {
    run.models.push_back(load_model(o.model_path));
    check_roster(run.models.back(), table, o.model_path, o.results_path);
  }
  for (const auto& key : table.tasks()) {
    const std::size_t r = row_of.at(key.id());
    run.model_of_task.push_back(model_of_row[r]);
    run.features_of_task.push_back(ts.rows[r].features);
    run.predicted.push_back(forest::predict(run.models[model_of_row[r]], ts.rows[r].features));
  }
  return run;
}

std::vector<double> default_thresholds(double timeout) {
  std::vector<double> out;
  for (int k = 0; k <= 30; ++k) out.push_back(timeout * k / 10.0);
  out.push_back(std::numeric_limits<double>::infinity());
  return out;
}

Table threshold_sweep(const Options& o, const cost::ResultsTable& table,
                      const LearnedRun& run) {
  const double recording = o.recording_timeout.value_or(o.timeout);
  const scheduler::ReplayBackend backend(table, recording);
  std::vector<scheduler::ProofTask> tasks;
  for (std::size_t i = 0; i < table.task_count(); ++i) {
    tasks.push_back({table.tasks()[i], "", run.features_of_task[i]});
  }
  const auto static_ids = ids_of(table, cost::static_solver_ranking(table));

  Table t;
  t.add_column("threshold", true);
  for (const char* c : {"valid", "invalid", "unknown", "timeout", "failure", "calls"}) {
    t.add_column(c, true);
  }
  t.add_column("mean_time_s", true);
  const auto thresholds = o.thresholds.empty() ? default_thresholds(o.timeout) : o.thresholds;
  for (double threshold : thresholds) {
    std::vector<scheduler::ProveResult> results(tasks.size());
    io::parallel_for(tasks.size(), o.jobs, [&](std::size_t i) {
      scheduler::SchedulerConfig cfg;
      cfg.timeout = o.timeout;
      cfg.pre_solve_timeout = o.pre_solve_timeout;
      cfg.static_ranking = static_ids;
      cfg.cost_threshold = threshold;
      cfg.model = &run.models[run.model_of_task[i]];
      cfg.skip_presolver_in_ranking = o.skip_presolver;
      results[i] = scheduler::prove_with_threshold(tasks[i], cfg, backend);
    });
    std::array<std::size_t, 5> counts{};
    std::size_t calls = 0;
    double total = 0.0;
    for (const auto& r : results) {
      ++counts[static_cast<std::size_t>(r.answer)];
      calls += r.trace.size();
      total += r.time;
    }
    std::vector<std::string> cells{num(threshold)};
    for (std::size_t c : counts) cells.push_back(std::to_string(c));
    cells.push_back(std::to_string(calls));
    cells.push_back(num(results.empty() ? 0.0 : total / static_cast<double>(results.size())));
    t.rows.push_back(std::move(cells));
  }
  return t;
}

int cmd_eval(const Options& o, std::ostream& /*out*/, std::ostream& err) {
  const Format format = parse_format(o.format);
  require_positive(o.timeout, "--timeout");
  evaluation::RelevanceMap map;
  if (o.relevance == "linear") {
    map = evaluation::RelevanceMap::LinearDescending;
  } else if (o.relevance == "reciprocal") {
    map = evaluation::RelevanceMap::Reciprocal;
  } else {
    throw ConfigError(fmt::format("--relevance: expected linear or reciprocal, got '{}'",
                                  o.relevance));
  }
  if (o.folds == 1) throw ConfigError("--folds: must be at least 2");
  const bool have_features = !o.features_path.empty() || !o.inputs.empty();
  if (!o.features_path.empty() && !o.inputs.empty()) {
    throw ConfigError("--features: give either a features file or documents, not both");
  }
  const bool learned = have_features && (o.folds > 0 || !o.model_path.empty());
  if (have_features && !learned) {
    throw ConfigError("--model or --folds is required to evaluate the learned strategy");
  }
  if (!have_features && (o.folds > 0 || !o.model_path.empty())) {
    err << "solverank: no --features or documents given; skipping the learned strategy\n";
  }
  if (o.folds == 0 && !o.model_path.empty() && !have_features) {
    load_model(o.model_path);  // still validated
  }

  const auto table = load_results(o.results_path, o.recording_timeout.value_or(o.timeout));
  const cost::CostConfig cc{o.timeout};
  std::vector<evaluation::StrategyEvaluation> evals;

  auto rank_all = [&](const evaluation::Strategy& s) {
    std::vector<cost::SolverRanking> r(table.task_count());
    for (std::size_t i = 0; i < r.size(); ++i) {
      r[i] = evaluation::strategy_ranking(s, table, i, cc);
    }
    return r;
  };
  evals.push_back(evaluation::evaluate_rankings("Best", table,
                                                rank_all(evaluation::Strategy::best()), cc,
                                                std::nullopt, map));
  evals.push_back(evaluation::evaluate_random_expectation(table, cc, o.seed, map));
  evals.push_back(evaluation::evaluate_rankings("Worst", table,
                                                rank_all(evaluation::Strategy::worst()), cc,
                                                std::nullopt, map));
  evals.push_back(evaluation::evaluate_rankings(
      "Static", table,
      rank_all(evaluation::Strategy::fixed_order(cost::static_solver_ranking(table))), cc,
      std::nullopt, map));

  std::optional<LearnedRun> run;
  if (learned) {
    const auto feats = o.features_path.empty() ? extract_all(o.inputs, o.jobs)
                                               : load_features(o.features_path);
    run = run_learned(o, table, feats);
    std::vector<cost::SolverRanking> rankings;
    for (const auto& costs : run->predicted) rankings.push_back(cost::rank_by_cost(costs));
    evals.push_back(
        evaluation::evaluate_rankings("Learned", table, rankings, cc, run->predicted, map));
  }

  fs::create_directories(o.out_dir);
  const fs::path dir(o.out_dir);

  Table report;
  report.add_column("strategy", false);
  for (const char* c : {"mean_time_s", "ndcg", "r2", "mae", "reg_error",
                        "mean_time_conclusive_s"}) {
    report.add_column(c, true);
  }
  for (const auto& ev : evals) {
    const auto& r = ev.report;
    report.rows.push_back({r.strategy, num(r.mean_time), num(r.ndcg),
                           r.r2 ? num(*r.r2) : std::string(), num(r.mae), num(r.reg_error),
                           num(r.mean_time_conclusive)});
  }
  io::write_file_atomic(dir / ("strategy_report" + extension(format)), report.render(format));

  Table levels;
  levels.add_column("name", false);
  for (const char* level : {"file", "theory", "goal"}) {
    levels.add_column(fmt::format("{}_proved", level), true);
    levels.add_column(fmt::format("{}_total", level), true);
    levels.add_column(fmt::format("{}_percent", level), true);
    levels.add_column(fmt::format("{}_avg_time_s", level), true);
  }
  for (std::size_t s = 0; s < table.solver_count(); ++s) {
    const auto outcomes = cost::single_solver_outcomes(table, s);
    add_level_row(levels, table.roster()[s].display(), cost::aggregate_report(table, outcomes));
  }
  add_level_row(levels, "Choose Single", cost::choose_single_report(table));
  for (const auto& ev : evals) add_level_row(levels, ev.report.strategy, ev.levels);
  io::write_file_atomic(dir / ("level_report" + extension(format)), levels.render(format));

  for (const auto& ev : evals) {
    Table curve;
    curve.add_column("time_s", true);
    curve.add_column("cumulative_conclusive", true);
    for (const auto& [time, count] : evaluation::cumulative_curve(ev.replays)) {
      curve.rows.push_back({num(time), std::to_string(count)});
    }
    io::write_file_atomic(dir / ("curve_" + lowercase(ev.report.strategy) + extension(format)),
                          curve.render(format));
  }

  if (run) {
    io::write_file_atomic(dir / ("threshold_sweep" + extension(format)),
                          threshold_sweep(o, table, *run).render(format));
  }
  return kExitOk;
}

// ---- calibrate --------------------------------------------------------------

int cmd_calibrate(const Options& o, std::ostream& out) {
  const Format format = parse_format(o.format);
  require_positive(o.calibrate_timeout, "--timeout");
  if (!(o.coverage > 0.0 && o.coverage <= 1.0)) {
    throw ConfigError("--coverage: must be in (0, 1]");
  }
  const auto table = load_results(o.results_path, o.calibrate_timeout);
  const auto thresholds = cost::calibrate_timeout(table, o.coverage);
  Table t;
  t.add_column("solver", false);
  t.add_column("threshold_s", true);
  for (std::size_t s = 0; s < table.solver_count(); ++s) {
    t.rows.push_back({table.roster()[s].display(), num(thresholds[s])});
  }
  emit(t.render(format), o.out, out);
  return kExitOk;
}

void add_common(CLI::App* sub, Options& o, bool with_out) {
  sub->add_option("--seed", o.seed, "Random seed")->capture_default_str();
  sub->add_option("--jobs", o.jobs, "Worker threads")
      ->capture_default_str()
      ->check(CLI::Range(1u, 1024u));
  sub->add_option("--format", o.format, "Output format: csv or json")
      ->capture_default_str()
      ->check(CLI::IsMember({"csv", "json"}));
  if (with_out) sub->add_option("--out", o.out, "Output file; standard output if omitted");
}

void add_timeout(CLI::App* sub, Options& o) {
  sub->add_option("--timeout", o.timeout, "Per-call timeout in seconds")->capture_default_str();
  sub->add_option("--recording-timeout", o.recording_timeout,
                  "Timeout the results file was recorded with; defaults to --timeout");
}

}  // namespace

int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Per-goal solver ranking and scheduling for proof obligations", "solverank"};
  app.require_subcommand(1);

  auto* extract = app.add_subcommand("extract", "Write one feature row per goal");
  add_common(extract, o, true);
  extract->add_option("documents", o.inputs, "Input documents")->required();

  auto* train = app.add_subcommand("train", "Fit a cost model to features and results");
  add_common(train, o, true);
  add_timeout(train, o);
  train->add_option("--features", o.features_path, "Features CSV")->required();
  train->add_option("--results", o.results_path, "Results CSV")->required();
  train->get_option("--out")->required();
  o.hyper.attach(train);

  auto* predict = app.add_subcommand("predict", "Rank solvers per goal without calling any");
  add_common(predict, o, true);
  predict->add_option("--model", o.model_path, "Model JSON")->required();
  predict->add_option("documents", o.inputs, "Input documents")->required();

  auto* prove = app.add_subcommand("prove", "Schedule solvers on every goal");
  add_common(prove, o, true);
  add_timeout(prove, o);
  prove->add_option("--model", o.model_path, "Model JSON")->required();
  prove->add_option("--backend", o.backend, "replay:<results.csv> or process[:<config.ini>]")
      ->capture_default_str();
  prove->add_option("--pre-solve-timeout", o.pre_solve_timeout, "Pre-solver timeout")
      ->capture_default_str();
  prove->add_option("--static-ranking", o.static_ranking,
                    "Comma-separated solver order used to pick the pre-solver");
  auto* threshold_opt =
      prove->add_option("--threshold", o.threshold, "Skip solvers predicted above this cost");
  prove->add_flag("--skip-presolver-in-ranking", o.skip_presolver,
                  "Do not call the pre-solver again after prediction");
  prove->add_flag("--report-overhead", o.report_overhead,
                  "Add wall-clock prediction overhead per goal");
  prove->add_option("documents", o.inputs, "Input documents")->required();

  auto* eval = app.add_subcommand("eval", "Compare ranking strategies on recorded results");
  add_common(eval, o, false);
  add_timeout(eval, o);
  eval->add_option("--results", o.results_path, "Results CSV")->required();
  eval->add_option("--features", o.features_path, "Features CSV");
  eval->add_option("--model", o.model_path,
                   "Model JSON; with --folds only its hyperparameters are used");
  eval->add_option("--folds", o.folds, "Cross-validate with this many per-file folds");
  eval->add_option("--out-dir", o.out_dir, "Report directory")->capture_default_str();
  eval->add_option("--relevance", o.relevance, "nDCG relevance: linear or reciprocal")
      ->capture_default_str()
      ->check(CLI::IsMember({"linear", "reciprocal"}));
  eval->add_option("--thresholds", o.thresholds, "Cost thresholds to sweep")->delimiter(',');
  eval->add_option("--pre-solve-timeout", o.pre_solve_timeout, "Pre-solver timeout")
      ->capture_default_str();
  eval->add_flag("--skip-presolver-in-ranking", o.skip_presolver,
                 "Do not call the pre-solver again after prediction");
  eval->add_option("documents", o.inputs, "Documents to extract features from");
  o.hyper.attach(eval);

  auto* calibrate = app.add_subcommand("calibrate", "Per-solver timeouts covering useful answers");
  add_common(calibrate, o, true);
  calibrate->add_option("--results", o.results_path, "Results CSV")->required();
  calibrate->add_option("--timeout", o.calibrate_timeout,
                         "Timeout the results were recorded with")
      ->capture_default_str();
  calibrate->add_option("--coverage", o.coverage, "Fraction of useful answers to keep")
      ->capture_default_str();

  std::vector<const char*> cargv;
  for (const auto& a : argv) cargv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(cargv.size()), cargv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }
  o.has_threshold = threshold_opt->count() > 0;

  try {
    if (extract->parsed()) return cmd_extract(o, out);
    if (train->parsed()) return cmd_train(o, out);
    if (predict->parsed()) return cmd_predict(o, out);
    if (prove->parsed()) return cmd_prove(o, out);
    if (eval->parsed()) return cmd_eval(o, out, err);
    if (calibrate->parsed()) return cmd_calibrate(o, out);
  } catch (const ConfigError& e) {
    err << "solverank: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "solverank: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

int run(int argc, char** argv) {
  return run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}

}  // namespace solverank::cli
