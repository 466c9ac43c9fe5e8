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

// Loaders for the bundled corpus, replay table, model and expected traces.

#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "solverank/cost_model.hpp"
#include "solverank/forest.hpp"
#include "solverank/io_util.hpp"
#include "solverank/logic.hpp"
#include "solverank/scheduler.hpp"

namespace fixtures {

inline std::filesystem::path dir() { return SOLVERANK_FIXTURE_DIR; }

inline std::vector<std::filesystem::path> corpus_paths() {
  std::vector<std::filesystem::path> out;
  for (const char* name : {"a.lang", "b.lang", "c.lang", "d.lang"}) {
    out.push_back(dir() / "corpus" / name);
  }
  return out;
}

inline solverank::logic::Document load_document(const std::filesystem::path& p) {
  return solverank::logic::parse_document(solverank::io::read_file(p),
                                          p.filename().string());
}

inline solverank::cost::ResultsTable results() {
  std::ifstream in(dir() / "results.csv");
  return solverank::cost::read_results_csv(in, "results.csv", 10.0);
}

inline solverank::forest::ForestModel model() {
  return solverank::forest::deserialize(solverank::io::read_file(dir() / "model.json"));
}

// Proof tasks of the whole corpus keyed like the results table.
inline std::vector<solverank::scheduler::ProofTask> tasks() {
  std::vector<solverank::scheduler::ProofTask> out;
  for (const auto& p : corpus_paths()) {
    auto doc = load_document(p);
    auto more = solverank::scheduler::tasks_from_document(doc, doc.path, p.string());
    out.insert(out.end(), more.begin(), more.end());
  }
  return out;
}

struct ExpectedTrace {
  std::string task_id;
  solverank::cost::Answer answer;
  double time;
  std::size_t calls;
  std::vector<solverank::scheduler::CallRecord> trace;
};

// Parses "solver@timeout:answer:time;..." as written by hand in the fixture.
inline std::vector<ExpectedTrace> expected_traces() {
  std::ifstream in(dir() / "expected_traces.csv");
  std::string line;
  std::getline(in, line);
  std::vector<ExpectedTrace> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = solverank::io::split_csv_line(line);
    ExpectedTrace e;
    e.task_id = cells.at(0);
    e.answer = solverank::cost::parse_answer(cells.at(1));
    e.time = std::stod(cells.at(2));
    e.calls = std::stoul(cells.at(3));
    std::stringstream calls(cells.at(4));
    for (std::string call; std::getline(calls, call, ';');) {
      const auto at = call.find('@');
      const auto c1 = call.find(':', at);
      const auto c2 = call.find(':', c1 + 1);
      solverank::scheduler::CallRecord r;
      r.solver = solverank::cost::SolverId::parse(call.substr(0, at));
      r.timeout = std::stod(call.substr(at + 1, c1 - at - 1));
      r.outcome.answer = solverank::cost::parse_answer(call.substr(c1 + 1, c2 - c1 - 1));
      r.outcome.cpu_time = std::stod(call.substr(c2 + 1));
      e.trace.push_back(r);
    }
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace fixtures
