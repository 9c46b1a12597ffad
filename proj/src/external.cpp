#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "gridrestore/milp.hpp"
#include "gridrestore/mps.hpp"

namespace gridrestore {

namespace fs = std::filesystem;

ExternalBackendConfig external_backend_from_env(ExternalBackendConfig fallback) {
  if (const char* env = std::getenv(kExternalCommandEnv); env != nullptr && *env != '\0')
    fallback.command_template = env;
  return fallback;
}

MipSolution parse_external_solution(const MixedIntegerProgram& mip, const std::string& text) {
  const LinearProgram& lp = mip.base;
  std::unordered_map<std::string, std::size_t> column;
  for (std::size_t j = 0; j < lp.num_variables(); ++j) column.emplace(mps_column_name(j), j);

  MipSolution sol;
  std::vector<double> primal(lp.num_variables(), 0.0);
  std::vector<bool> seen(lp.num_variables(), false);
  std::string status = "optimal";
  bool have_objective = false;
  bool have_bound = false;
  double file_bound = 0.0;

  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::string key;
    if (!(fields >> key) || key.starts_with('#')) continue;
    std::string value_text;
    if (!(fields >> value_text))
      throw std::runtime_error("solution line " + std::to_string(line_no) + ": missing value");
    if (key == "status") {
      status = value_text;
      continue;
    }
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(value_text, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != value_text.size())
      throw std::runtime_error("solution line " + std::to_string(line_no) + ": bad number '" + value_text + "'");
    if (key == "objective") {
      have_objective = true;
    } else if (key == "bound") {
      have_bound = true;
      file_bound = value;
    } else {
      auto it = column.find(key);
      if (it == column.end()) throw std::runtime_error("solution names unknown column '" + key + "'");
      primal[it->second] = value;
      seen[it->second] = true;
    }
  }

  if (status == "infeasible") {
    sol.status = MipStatus::infeasible;
    return sol;
  }
  if (status == "failure") {
    sol.status = MipStatus::failure;
    return sol;
  }
  if (status != "optimal" && status != "feasible") throw std::runtime_error("unknown status '" + status + "'");
  if (!have_objective) throw std::runtime_error("solution has no objective line");
  for (std::size_t j = 0; j < seen.size(); ++j)
    if (!seen[j]) throw std::runtime_error("solution misses column " + mps_column_name(j));

  const double tol = 1e-6;
  if (lp.max_row_violation(primal) > tol || lp.max_bound_violation(primal) > tol)
    throw std::runtime_error("external assignment violates the model");
  sol.binaries.resize(mip.binary_vars.size());
  for (std::size_t b = 0; b < mip.binary_vars.size(); ++b) {
    const double x = primal[mip.binary_vars[b]];
    if (std::abs(x - std::round(x)) > tol) throw std::runtime_error("external assignment is fractional");
    sol.binaries[b] = std::round(x);
  }
  sol.has_incumbent = true;
  sol.primal = std::move(primal);
  sol.objective = lp.objective_value(sol.primal);
  // The file's numbers are in the MPS minimization sense.
  const double sign = lp.objective().sense == Sense::maximize ? -1.0 : 1.0;
  sol.best_bound = have_bound ? sign * file_bound : sol.objective;
  sol.gap = relative_gap(sol.best_bound, sol.objective);
  sol.status = status == "optimal" ? MipStatus::optimal_within_gap : MipStatus::feasible_time_limit;
  return sol;
}

namespace {

std::string substitute(std::string text, const std::string& key, const std::string& value) {
  for (auto pos = text.find(key); pos != std::string::npos; pos = text.find(key, pos + value.size()))
    text.replace(pos, key.size(), value);
  return text;
}

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'')
      out += "'\\''";
    else
      out += c;
  }
  return out + "'";
}

fs::path make_work_dir() {
  static std::atomic<unsigned> counter{0};
  const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
  fs::path dir = fs::temp_directory_path() /
                 ("gridrestore-" + std::to_string(::getpid()) + "-" + std::to_string(stamp) + "-" +
                  std::to_string(counter++));
  fs::create_directories(dir);
  return dir;
}

// Runs `command` through /bin/sh; returns the exit status or -1 on spawn
// failure, timeout, or abnormal termination.
int run_with_timeout(const std::string& command, double timeout_seconds) {
  const pid_t pid = ::fork();
  if (pid < 0) return -1;
  if (pid == 0) {
    ::setpgid(0, 0);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                                               std::chrono::duration<double>(timeout_seconds));
  int status = 0;
  while (true) {
    const pid_t done = ::waitpid(pid, &status, WNOHANG);
    if (done == pid) break;
    if (done < 0) return -1;
    if (std::chrono::steady_clock::now() >= deadline) {
      ::kill(-pid, SIGKILL);
      ::kill(pid, SIGKILL);
      ::waitpid(pid, &status, 0);
      return -1;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  if (!WIFEXITED(status)) return -1;
  return WEXITSTATUS(status);
}

}  // namespace

MipSolution solve_external(const MixedIntegerProgram& mip, const SolveOptions& options,
                           const ExternalBackendConfig& backend) {
  const auto start = std::chrono::steady_clock::now();
  MipSolution failure;
  failure.status = MipStatus::failure;
  auto finish = [&](MipSolution sol) {
    sol.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return sol;
  };
  if (backend.command_template.empty()) return finish(failure);

  fs::path dir;
  try {
    dir = make_work_dir();
  } catch (const fs::filesystem_error&) {
    return finish(failure);
  }
  const fs::path mps_path = dir / "model.mps";
  const fs::path sol_path = dir / "model.sol";
  {
    std::ofstream out(mps_path, std::ios::binary);
    out << write_mps(mip);
    if (!out) return finish(failure);
  }

  char number[64];
  std::string command = backend.command_template;
  command = substitute(command, "{mps}", shell_quote(mps_path.string()));
  command = substitute(command, "{solfile}", shell_quote(sol_path.string()));
  std::snprintf(number, sizeof number, "%.17g", options.time_limit);
  command = substitute(command, "{timelimit}", number);
  std::snprintf(number, sizeof number, "%.17g", options.rel_gap);
  command = substitute(command, "{gap}", number);

  MipSolution result = failure;
  const int exit_code = run_with_timeout(command, options.time_limit + backend.grace_seconds);
  if (exit_code == 0) {
    std::ifstream in(sol_path, std::ios::binary);
    if (in) {
      std::ostringstream text;
      text << in.rdbuf();
      try {
        result = parse_external_solution(mip, text.str());
      } catch (const std::exception&) {
        result = failure;
      }
    }
  }
  if (!backend.keep_files) {
    std::error_code ec;
    fs::remove_all(dir, ec);
  }
  return finish(result);
}

}  // namespace gridrestore
