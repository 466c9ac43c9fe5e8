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

#include <chrono>
#include <filesystem>
#include <fstream>

#include "fixtures.hpp"
#include "solverank/error.hpp"
#include "solverank/process_backend.hpp"

using namespace solverank;
using namespace solverank::scheduler;
using cost::Answer;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("solverank_pb_" + std::to_string(std::chrono::steady_clock::now()
                                                  .time_since_epoch()
                                                  .count()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  fs::path script(const std::string& name, const std::string& body) const {
    const fs::path p = path / name;
    std::ofstream(p) << "#!/bin/sh\n" << body << "\n";
    fs::permissions(p, fs::perms::owner_all);
    return p;
  }
};

SolverCommand command(const std::string& name, const fs::path& exe) {
  return {{name, "1.0"}, exe.string() + " {file} {timeout}", "^Valid", "^Invalid",
          "^Unknown"};
}

ProofTask some_task() { return fixtures::tasks().front(); }

}  // namespace

TEST_SUITE("process_backend") {
  TEST_CASE("output classification order") {
    const SolverCommand c{{"S", ""}, "s", "^Valid", "^Invalid", "Unknown"};
    CHECK(classify_output(c, "Valid\n") == Answer::Valid);
    CHECK(classify_output(c, "noise\nInvalid\n") == Answer::Invalid);
    CHECK(classify_output(c, "Unknown Valid") == Answer::Unknown);
    CHECK(classify_output(c, "") == Answer::Failure);
  }

  TEST_CASE("placeholders are substituted per argument") {
    const SolverCommand c{{"S", ""}, "solver --t={timeout} {file} {theory}.{goal}", "", "",
                          ""};
    const ProofTask t = some_task();
    const auto argv = expand_command(c, t, 2.5);
    REQUIRE(argv.size() == 4);
    CHECK(argv[0] == "solver");
    CHECK(argv[1] == "--t=2.5");
    CHECK(argv[2] == t.path);
    CHECK(argv[3] == t.key.theory + "." + t.key.goal);
  }

  TEST_CASE("answers from child processes") {
    TempDir d;
    const ProcessBackend b({command("Yes", d.script("yes.sh", "echo Valid")),
                            command("No", d.script("no.sh", "echo Invalid")),
                            command("Maybe", d.script("maybe.sh", "echo Unknown")),
                            command("Crash", d.script("crash.sh", "echo oops; exit 3"))});
    const ProofTask t = some_task();
    CHECK(b.call(t, {"Yes", "1.0"}, 5).answer == Answer::Valid);
    CHECK(b.call(t, {"No", "1.0"}, 5).answer == Answer::Invalid);
    CHECK(b.call(t, {"Maybe", "1.0"}, 5).answer == Answer::Unknown);
    const auto crash = b.call(t, {"Crash", "1.0"}, 5);
    CHECK(crash.answer == Answer::Failure);
    CHECK(crash.cpu_time >= 0.0);
    CHECK(b.call(t, {"Absent", ""}, 5).answer == Answer::Failure);
  }

  TEST_CASE("a slow solver is killed at the limit") {
    TempDir d;
    const ProcessBackend b({command("Slow", d.script("slow.sh", "sleep 5; echo Valid"))});
    const auto start = std::chrono::steady_clock::now();
    const auto r = b.call(some_task(), {"Slow", "1.0"}, 0.3);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    CHECK(r == cost::SolverOutcome{Answer::Timeout, 0.3});
    CHECK(wall < 3.0);
  }

  TEST_CASE("run_process reports exit status and output") {
    const auto r = run_process({"/bin/sh", "-c", "echo hi; exit 4"}, 5);
    CHECK_FALSE(r.timed_out);
    CHECK(r.exit_code == 4);
    CHECK(r.output == "hi\n");
    const auto missing = run_process({"/nonexistent/solver"}, 5);
    CHECK(missing.exit_code != 0);
  }

  TEST_CASE("configuration file") {
    TempDir d;
    const fs::path exe = d.script("z.sh", "echo sat");
    const fs::path ini = d.path / "portfolio.ini";
    std::ofstream(ini) << "working_directory = " << d.path.string() << "\n"
                       << "[z3]\nname = Z3\nversion = 4.4.1\ncommand = " << exe.string()
                       << " {file}\nvalid_pattern = ^unsat\ninvalid_pattern = ^sat\n"
                       << "[ghost]\ncommand = /no/such/binary {file}\n";
    const ProcessBackend b = ProcessBackend::from_config(ini);
    REQUIRE(b.solvers().size() == 2);
    CHECK(b.roster() == std::vector<SolverId>{{"Z3", "4.4.1"}, {"ghost", ""}});
    CHECK(b.installed({"Z3", "4.4.1"}));
    CHECK_FALSE(b.installed({"ghost", ""}));
    CHECK_FALSE(b.installed({"Z3", "4.3.2"}));
    CHECK(b.call(some_task(), {"Z3", "4.4.1"}, 5).answer == Answer::Invalid);

    const fs::path bad = d.path / "bad.ini";
    std::ofstream(bad) << "[s]\nname = S\n";
    CHECK_THROWS_AS(ProcessBackend::from_config(bad), ConfigError);
    CHECK_THROWS_AS(ProcessBackend::from_config(d.path / "missing.ini"), ConfigError);
  }
}
