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

#include "solverank/process_backend.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/resource.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstdlib>
#include <regex>
#include <sstream>
#include <thread>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "solverank/io_util.hpp"

namespace solverank::scheduler {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_of(const timeval& tv) {
  return static_cast<double>(tv.tv_sec) + static_cast<double>(tv.tv_usec) * 1e-6;
}

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  for (std::size_t pos = s.find(from); pos != std::string::npos;
       pos = s.find(from, pos + to.size())) {
    s.replace(pos, from.size(), to);
  }
}

bool is_executable(const std::filesystem::path& p) {
  return ::access(p.c_str(), X_OK) == 0 && !std::filesystem::is_directory(p);
}

bool pattern_matches(const std::string& pattern, std::string_view text) {
  if (pattern.empty()) return false;
  const std::regex re(pattern, std::regex::basic);
  // Anchors apply per line.
  while (true) {
    const auto nl = text.find('\n');
    const std::string_view line = text.substr(0, nl);
    if (std::regex_search(line.begin(), line.end(), re)) return true;
    if (nl == std::string_view::npos) return false;
    text.remove_prefix(nl + 1);
  }
}

}  // namespace

ProcessResult run_process(const std::vector<std::string>& argv, double timeout_s,
                          const std::filesystem::path& working_dir) {
  if (argv.empty()) throw ConfigError("empty command");
  int pipefd[2];
  if (::pipe(pipefd) != 0) throw Error("pipe() failed");

  std::vector<char*> cargv;
  for (const auto& a : argv) cargv.push_back(const_cast<char*>(a.c_str()));
  cargv.push_back(nullptr);

  const auto started = Clock::now();
  const pid_t pid = ::fork();
  if (pid < 0) {
    ::close(pipefd[0]);
    ::close(pipefd[1]);
    throw Error("fork() failed");
  }
  if (pid == 0) {
    ::setpgid(0, 0);
    ::dup2(pipefd[1], STDOUT_FILENO);
    const int devnull = ::open("/dev/null", O_WRONLY);
    if (devnull >= 0) ::dup2(devnull, STDERR_FILENO);
    ::close(pipefd[0]);
    ::close(pipefd[1]);
    if (!working_dir.empty() && ::chdir(working_dir.c_str()) != 0) ::_exit(127);
    ::execvp(cargv[0], cargv.data());
    ::_exit(127);
  }
  ::setpgid(pid, pid);
  ::close(pipefd[1]);

  ProcessResult result;
  const auto deadline =
      started + std::chrono::duration_cast<Clock::duration>(
                    std::chrono::duration<double>(timeout_s));
  auto kill_group = [&] {
    result.timed_out = true;
    ::kill(-pid, SIGKILL);
    ::kill(pid, SIGKILL);
  };

  char buffer[4096];
  bool eof = false;
  while (!eof && !result.timed_out) {
    const auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - Clock::now());
    if (remaining.count() <= 0) {
      kill_group();
      break;
    }
    pollfd pfd{pipefd[0], POLLIN, 0};
    const int ready = ::poll(&pfd, 1, static_cast<int>(std::min<long>(remaining.count(), 100)));
    if (ready < 0 && errno != EINTR) break;
    if (ready > 0) {
      const ssize_t n = ::read(pipefd[0], buffer, sizeof buffer);
      if (n > 0) {
        result.output.append(buffer, static_cast<std::size_t>(n));
      } else if (n == 0 || errno != EINTR) {
        eof = true;
      }
    }
  }
  ::close(pipefd[0]);

  int status = 0;
  rusage usage{};
  while (true) {
    const pid_t done = ::wait4(pid, &status, result.timed_out ? 0 : WNOHANG, &usage);
    if (done == pid) break;
    if (done < 0 && errno != EINTR) break;
    if (Clock::now() >= deadline && !result.timed_out) kill_group();
    if (!result.timed_out) std::this_thread::sleep_for(std::chrono::milliseconds(1));
  }
  result.wall_seconds = std::chrono::duration<double>(Clock::now() - started).count();
  result.cpu_seconds = seconds_of(usage.ru_utime) + seconds_of(usage.ru_stime);
  if (WIFEXITED(status)) result.exit_code = WEXITSTATUS(status);
  return result;
}

std::vector<std::string> expand_command(const SolverCommand& cmd,
                                        const ProofTask& task, double timeout) {
  std::vector<std::string> argv;
  std::istringstream words(cmd.command);
  for (std::string w; words >> w;) {
    replace_all(w, "{file}", task.path);
    replace_all(w, "{timeout}", io::format_double(timeout));
    replace_all(w, "{theory}", task.key.theory);
    replace_all(w, "{goal}", task.key.goal);
    argv.push_back(std::move(w));
  }
  return argv;
}

cost::Answer classify_output(const SolverCommand& cmd, std::string_view output) {
  if (pattern_matches(cmd.valid_pattern, output)) return cost::Answer::Valid;
  if (pattern_matches(cmd.invalid_pattern, output)) return cost::Answer::Invalid;
  if (pattern_matches(cmd.unknown_pattern, output)) return cost::Answer::Unknown;
  return cost::Answer::Failure;
}

ProcessBackend::ProcessBackend(std::vector<SolverCommand> solvers,
                               std::filesystem::path working_dir)
    : solvers_(std::move(solvers)), working_dir_(std::move(working_dir)) {
  for (const auto& s : solvers_) {
    if (s.command.empty()) {
      throw ConfigError(fmt::format("solver '{}' has no command", s.id.display()));
    }
    for (const auto* p : {&s.valid_pattern, &s.invalid_pattern, &s.unknown_pattern}) {
      try {
        if (!p->empty()) std::regex(*p, std::regex::basic);
      } catch (const std::regex_error& e) {
        throw ConfigError(fmt::format("solver '{}': bad pattern '{}': {}",
                                      s.id.display(), *p, e.what()));
      }
    }
  }
}

ProcessBackend ProcessBackend::from_config(const std::filesystem::path& ini_path) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(ini_path.string(), tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(fmt::format("{}: {}", ini_path.string(), e.what()));
  }
  std::vector<SolverCommand> solvers;
  for (const auto& [section, body] : tree) {
    if (body.empty()) continue;  // top-level key
    SolverCommand cmd;
    cmd.id.name = body.get<std::string>("name", section);
    cmd.id.version = body.get<std::string>("version", "");
    cmd.command = body.get<std::string>("command", "");
    cmd.valid_pattern = body.get<std::string>("valid_pattern", "");
    cmd.invalid_pattern = body.get<std::string>("invalid_pattern", "");
    cmd.unknown_pattern = body.get<std::string>("unknown_pattern", "");
    if (cmd.command.empty()) {
      throw ConfigError(fmt::format("{}: section [{}] has no command",
                                    ini_path.string(), section));
    }
    solvers.push_back(std::move(cmd));
  }
  if (solvers.empty()) {
    throw ConfigError(fmt::format("{}: no solver sections", ini_path.string()));
  }
  std::filesystem::path dir = tree.get<std::string>("working_directory", "");
  return ProcessBackend(std::move(solvers), std::move(dir));
}

const SolverCommand* ProcessBackend::find(const SolverId& solver) const {
  for (const auto& s : solvers_) {
    if (s.id == solver) return &s;
  }
  return nullptr;
}

cost::SolverOutcome ProcessBackend::call(const ProofTask& task,
                                         const SolverId& solver,
                                         double timeout) const {
  const SolverCommand* cmd = find(solver);
  if (cmd == nullptr) return {cost::Answer::Failure, 0.0};
  ProcessResult r;
  try {
    r = run_process(expand_command(*cmd, task, timeout), timeout, working_dir_);
  } catch (const std::exception&) {
    return {cost::Answer::Failure, 0.0};
  }
  if (r.timed_out) return {cost::Answer::Timeout, timeout};
  return {classify_output(*cmd, r.output), r.cpu_seconds};
}

bool ProcessBackend::installed(const SolverId& solver) const {
  const SolverCommand* cmd = find(solver);
  if (cmd == nullptr) return false;
  std::istringstream words(cmd->command);
  std::string exe;
  words >> exe;
  if (exe.empty()) return false;
  if (exe.find('/') != std::string::npos) {
    std::filesystem::path p(exe);
    if (p.is_relative() && !working_dir_.empty()) p = working_dir_ / p;
    return is_executable(p);
  }
  const char* path_env = std::getenv("PATH");
  std::istringstream dirs(path_env ? path_env : "");
  for (std::string dir; std::getline(dirs, dir, ':');) {
    if (!dir.empty() && is_executable(std::filesystem::path(dir) / exe)) return true;
  }
  return false;
}

std::vector<SolverId> ProcessBackend::roster() const {
  std::vector<SolverId> out;
  for (const auto& s : solvers_) out.push_back(s.id);
  return out;
}

}  // namespace solverank::scheduler
