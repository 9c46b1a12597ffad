// Command-line front end: solve, compare, sweep, convert.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gridrestore/bench.hpp"
#include "gridrestore/case_io.hpp"

using namespace gridrestore;

namespace {

template <class T, class F>
std::vector<T> split_list(const std::string& text, F&& convert) {
  std::vector<T> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ','))
    if (!item.empty()) out.push_back(convert(item));
  return out;
}

std::vector<Algorithm> parse_algorithms(const std::string& text) {
  return split_list<Algorithm>(text, [](const std::string& s) { return parse_algorithm(s); });
}

struct ScenarioFlags {
  std::string damage_lines;
  std::string algo = "util";
  std::string backend = "internal";
  int n_periods = 0;
};

void add_scenario_options(CLI::App& cmd, RunConfig& config, ScenarioFlags& flags, bool with_damage) {
  cmd.add_option("--case", config.case_path, "MATPOWER .m or JSON network")->required()->check(CLI::ExistingFile);
  if (with_damage) {
    auto* fraction = cmd.add_option("--damage-fraction", config.damage_fraction, "share of lines damaged at random")
                         ->check(CLI::Range(0.0, 1.0));
    auto* lines = cmd.add_option("--damage-lines", flags.damage_lines, "comma-separated damaged line ids");
    fraction->excludes(lines);
    cmd.add_option("--seed", config.seed, "damage and search seed");
  }
  cmd.add_option("--time-limit", config.time_limit, "algorithm time limit in seconds");
  cmd.add_option("--rel-gap", config.rel_gap, "relative optimality gap for ordering MILPs");
  cmd.add_option("--periods", flags.n_periods, "restoration periods (default: one per damaged line)");
  cmd.add_option("--out", config.output_dir, "output directory");
  cmd.add_option("--backend", flags.backend, "internal or external")->check(CLI::IsMember({"internal", "external"}));
  cmd.add_option("--external-command", config.external_command,
                 "command template with {mps} {solfile} {timelimit} {gap} placeholders");
  cmd.add_flag("--parallel", config.parallel, "solve the two recursive halves concurrently");
  cmd.add_flag("!--raw", config.post_process, "report raw series without post-processing");
  cmd.add_option("--rad-min", config.rad.min_partition, "smallest block size");
  cmd.add_option("--rad-max", config.rad.max_partition, "initial largest block size");
  cmd.add_option("--rad-stall", config.rad.stall_limit, "iterations without improvement before stopping");
}

void finish_config(RunConfig& config, const ScenarioFlags& flags) {
  if (!flags.damage_lines.empty())
    config.damage_lines =
        split_list<LineId>(flags.damage_lines, [](const std::string& s) { return static_cast<LineId>(std::stoi(s)); });
  if (flags.n_periods > 0) config.n_periods = flags.n_periods;
  config.external = flags.backend == "external";
  config.algorithm = parse_algorithm(flags.algo);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Repair ordering for damaged transmission grids"};
  app.require_subcommand(1);

  RunConfig solve_config;
  ScenarioFlags solve_flags;
  auto* solve = app.add_subcommand("solve", "order the repairs of one damage scenario");
  add_scenario_options(*solve, solve_config, solve_flags, true);
  solve->add_option("--algo", solve_flags.algo, "util, rrr, rad, rop or oracle")
      ->check(CLI::IsMember({"util", "rrr", "rad", "rop", "oracle"}));

  RunConfig compare_config;
  ScenarioFlags compare_flags;
  std::string compare_algos = "util,rrr,rad,rop";
  auto* compare = app.add_subcommand("compare", "run several algorithms on one scenario");
  add_scenario_options(*compare, compare_config, compare_flags, true);
  compare->add_option("--algos", compare_algos, "comma-separated algorithms");

  RunConfig sweep_config;
  ScenarioFlags sweep_flags;
  std::string fractions = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1.0";
  std::string seeds = "1";
  std::string sweep_algos = "util,rrr";
  std::size_t workers = 0;
  auto* sweep = app.add_subcommand("sweep", "factorial benchmark over damage fractions, seeds and algorithms");
  add_scenario_options(*sweep, sweep_config, sweep_flags, false);
  sweep->add_option("--fractions", fractions, "comma-separated damage fractions");
  sweep->add_option("--seeds", seeds, "comma-separated seeds");
  sweep->add_option("--algos", sweep_algos, "comma-separated algorithms");
  sweep->add_option("--workers", workers, "parallel cells (default: logical cores)");

  std::string convert_in, convert_out;
  auto* convert = app.add_subcommand("convert", "write a MATPOWER case as JSON");
  convert->add_option("input", convert_in)->required()->check(CLI::ExistingFile);
  convert->add_option("output", convert_out, "destination (default: standard output)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*solve) {
      finish_config(solve_config, solve_flags);
      return cmd_solve(solve_config, std::cout, std::cerr);
    }
    if (*compare) {
      compare_flags.algo = "util";
      finish_config(compare_config, compare_flags);
      return cmd_compare(compare_config, parse_algorithms(compare_algos), std::cout, std::cerr);
    }
    if (*sweep) {
      sweep_flags.algo = "util";
      finish_config(sweep_config, sweep_flags);
      SweepConfig config;
      config.base = sweep_config;
      config.base.damage_fraction = 0.0;
      config.fractions = split_list<double>(fractions, [](const std::string& s) { return std::stod(s); });
      config.seeds = split_list<std::uint64_t>(seeds, [](const std::string& s) { return std::stoull(s); });
      config.algorithms = parse_algorithms(sweep_algos);
      config.workers = workers;
      const SweepSummary summary = cmd_sweep(config, std::cerr);
      std::cout << "cells: " << summary.computed << " computed, " << summary.cached << " cached, " << summary.failed
                << " failed\n";
      return summary.failed ? kExitSolverFailure : kExitOk;
    }
    if (*convert) {
      const std::string text = to_json(read_case_file(convert_in)).dump(2) + "\n";
      if (convert_out.empty())
        std::cout << text;
      else
        write_file_atomic(convert_out, text);
      return kExitOk;
    }
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitParseError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitBadConfig;
  }
  return kExitOk;
}
