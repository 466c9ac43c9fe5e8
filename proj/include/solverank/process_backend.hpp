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

// Runs real solver executables as child processes with a hard time limit.

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "solverank/scheduler.hpp"

namespace solverank::scheduler {

struct SolverCommand {
  SolverId id;
  // Whitespace-separated argv template; {file}, {timeout}, {theory} and
  // {goal} are substituted per call.
  std::string command;
  // POSIX basic regular expressions matched against each line of standard
  // output.
  std::string valid_pattern;
  std::string invalid_pattern;
  std::string unknown_pattern;
};

struct ProcessResult {
  int exit_code = -1;
  bool timed_out = false;
  double cpu_seconds = 0.0;  // user + system time of the child
  double wall_seconds = 0.0;
  std::string output;        // standard output
};

// Spawns argv in its own process group and kills the group once the wall
// clock passes timeout_s.
ProcessResult run_process(const std::vector<std::string>& argv, double timeout_s,
                          const std::filesystem::path& working_dir = {});

std::vector<std::string> expand_command(const SolverCommand& cmd,
                                        const ProofTask& task, double timeout);

// Valid, Invalid, Unknown patterns are tried in that order; no match is a
// Failure.
cost::Answer classify_output(const SolverCommand& cmd, std::string_view output);

class ProcessBackend : public SolverBackend {
 public:
  explicit ProcessBackend(std::vector<SolverCommand> solvers,
                          std::filesystem::path working_dir = {});

  // INI file: one section per solver with keys name, version, command,
  // valid_pattern, invalid_pattern, unknown_pattern.
  static ProcessBackend from_config(const std::filesystem::path& ini_path);

  cost::SolverOutcome call(const ProofTask& task, const SolverId& solver,
                           double timeout) const override;
  bool installed(const SolverId& solver) const override;
  std::vector<SolverId> roster() const override;

  const std::vector<SolverCommand>& solvers() const { return solvers_; }

 private:
  const SolverCommand* find(const SolverId& solver) const;

  std::vector<SolverCommand> solvers_;
  std::filesystem::path working_dir_;
};

}  // namespace solverank::scheduler
