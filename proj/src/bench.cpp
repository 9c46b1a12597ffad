#include "gridrestore/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "gridrestore/case_io.hpp"

namespace gridrestore {

namespace fs = std::filesystem;
using nlohmann::json;

const char* to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::util: return "util";
    case Algorithm::rrr: return "rrr";
    case Algorithm::rad: return "rad";
    case Algorithm::rop: return "rop";
    case Algorithm::oracle: return "oracle";
  }
  return "unknown";
}

Algorithm parse_algorithm(std::string_view name) {
  for (Algorithm a : {Algorithm::util, Algorithm::rrr, Algorithm::rad, Algorithm::rop, Algorithm::oracle})
    if (name == to_string(a)) return a;
  throw std::invalid_argument("unknown algorithm '" + std::string(name) + "'");
}

void RunConfig::validate() const {
  if (damage_fraction.has_value() == !damage_lines.empty())
    throw ConfigError("give exactly one of a damage fraction or a damaged-line list");
  if (damage_fraction && !(*damage_fraction > 0.0 && *damage_fraction <= 1.0))
    throw ConfigError("damage fraction must lie in (0, 1]");
  if (!(time_limit > 0.0) || !std::isfinite(time_limit)) throw ConfigError("time limit must be positive");
  if (!(rel_gap >= 0.0 && rel_gap < 1.0)) throw ConfigError("relative gap must lie in [0, 1)");
  if (n_periods && *n_periods < 1) throw ConfigError("number of periods must be positive");
  try {
    rad.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

DamageScenario RunConfig::damage(const Network& network) const {
  try {
    if (damage_fraction) return random_damage(network, *damage_fraction, seed);
    return make_damage(network, damage_lines);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

PeriodSchedule RunConfig::schedule(const DamageScenario& damage) const {
  const int n = static_cast<int>(damage.size());
  const int periods = n_periods.value_or(std::max(n, 1));
  return build_schedule(n, periods);
}

RestorationPlan bucket_sequence(std::span<const LineId> order, const PeriodSchedule& schedule) {
  if (schedule.repair_budget.empty() || schedule.repair_budget.back() != static_cast<int>(order.size()))
    throw std::invalid_argument("final repair budget must equal the ordering length");
  RestorationPlan plan;
  int prev = 0;
  for (int cumulative : schedule.repair_budget) {
    std::vector<LineId> period(order.begin() + prev, order.begin() + cumulative);
    std::sort(period.begin(), period.end());
    plan.periods.push_back(std::move(period));
    prev = cumulative;
  }
  return plan;
}

namespace {

MipBackend backend_for(const RunConfig& config) {
  if (!config.external) return internal_backend();
  ExternalBackendConfig ext = external_backend_from_env({config.external_command});
  if (ext.command_template.empty())
    throw ConfigError(std::string("external backend needs a command template (flag or ") + kExternalCommandEnv + ")");
  return external_backend(std::move(ext));
}

}  // namespace

RunResult run_algorithm(const Network& network, const RunConfig& config) {
  config.validate();
  RunResult result;
  result.damage = config.damage(network);
  result.schedule = config.schedule(result.damage);
  const DamageScenario& damage = result.damage;
  const PeriodSchedule& schedule = result.schedule;
  const MipBackend backend = backend_for(config);
  const AlgoBudget budget{config.time_limit, config.rel_gap, config.seed};

  const auto start = std::chrono::steady_clock::now();
  RestorationPlan plan;
  switch (config.algorithm) {
    case Algorithm::util:
      plan = bucket_sequence(util_sequence(network, damage.damaged_lines), schedule);
      break;
    case Algorithm::rrr: {
      RrrOptions options;
      options.backend = backend;
      options.parallel = config.parallel;
      plan = bucket_sequence(rrr(network, damage, budget, options).sequence(), schedule);
      break;
    }
    case Algorithm::rad: {
      const RestorationPlan initial = util_order(network, damage);
      plan = bucket_sequence(rad(network, damage, budget, config.rad, initial, backend).sequence(), schedule);
      break;
    }
    case Algorithm::rop: {
      const RopArtifacts rop = build_rop(network, damage, schedule);
      SolveOptions options;
      options.time_limit = config.time_limit;
      options.rel_gap = config.rel_gap;
      options.warm_start =
          plan_assignment(rop, network, bucket_sequence(util_sequence(network, damage.damaged_lines), schedule));
      const MipSolution sol = backend(rop.program, options);
      if (!sol.has_incumbent) {
        if (sol.status == MipStatus::infeasible) throw InfeasibleModel("ordering model is infeasible");
        throw SolverFailure(std::string("ordering model solve ended with ") + to_string(sol.status));
      }
      plan = extract_plan(rop, network, sol);
      result.gap = sol.gap;
      result.status = to_string(sol.status);
      break;
    }
    case Algorithm::oracle:
      if (damage.size() > kBruteForceMaxLines)
        throw ConfigError("oracle supports at most " + std::to_string(kBruteForceMaxLines) + " damaged lines");
      plan = brute_force_optimal(network, damage, schedule).first;
      break;
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  result.report = make_report(network, damage, plan, schedule, to_string(config.algorithm), wall, config.post_process);
  return result;
}

void write_file_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp-" + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

namespace {

json summary_json(const RunConfig& config, const RunResult& r) {
  json j;
  j["algorithm"] = r.report.algorithm;
  j["case"] = config.case_path.filename().string();
  j["damage"] = to_json(r.damage);
  j["schedule"] = to_json(r.schedule);
  j["status"] = r.status;
  j["gap"] = r.gap ? json(*r.gap) : json(nullptr);
  j["total_energy"] = r.report.total_energy;
  j["post_processed"] = r.report.post_processed;
  j["plan"] = to_json(r.report.plan);
  j["time_limit"] = config.time_limit;
  j["rel_gap"] = config.rel_gap;
  j["seed"] = config.seed;
  return j;
}

template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitParseError;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitBadConfig;
  } catch (const InfeasibleModel& e) {
    err << "error: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitSolverFailure;
  }
}

std::string fixed(double value, int digits) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << value;
  return s.str();
}

}  // namespace

int cmd_solve(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    config.validate();
    const Network network = read_case_file(config.case_path);
    const RunResult r = run_algorithm(network, config);

    std::ostringstream csv;
    write_report_csv(csv, r.report);
    write_file_atomic(config.output_dir / "report.csv", csv.str());
    write_file_atomic(config.output_dir / "summary.json", summary_json(config, r).dump(2) + "\n");
    write_file_atomic(config.output_dir / "timing.json",
                      json{{"wall_seconds", r.report.wall_seconds}}.dump(2) + "\n");

    out << r.report.algorithm << ": energy " << format_double(r.report.total_energy) << " pu-h over "
        << r.report.plan.n_periods() << " periods, " << r.damage.size() << " damaged lines, " << fixed(r.report.wall_seconds, 3)
        << " s";
    if (r.gap) out << ", gap " << fixed(*r.gap * 100.0, 3) << "%";
    out << '\n';
    return kExitOk;
  });
}

int cmd_compare(const RunConfig& config, const std::vector<Algorithm>& algorithms, std::ostream& out,
                std::ostream& err) {
  return guarded(err, [&]() -> int {
    if (algorithms.size() < 2) throw ConfigError("compare needs at least two algorithms");
    config.validate();
    const Network network = read_case_file(config.case_path);

    struct Row {
      Algorithm algorithm;
      std::optional<RunResult> result;
      std::string error;
      int code = kExitOk;
    };
    std::vector<Row> rows;
    for (Algorithm a : algorithms) {
      RunConfig c = config;
      c.algorithm = a;
      Row row{a, std::nullopt, {}, kExitOk};
      std::ostringstream sink;
      row.code = guarded(sink, [&] {
        row.result = run_algorithm(network, c);
        return kExitOk;
      });
      row.error = sink.str();
      if (!row.error.empty() && row.error.back() == '\n') row.error.pop_back();
      rows.push_back(std::move(row));
    }

    double best = -kInf;
    for (const Row& row : rows)
      if (row.result) best = std::max(best, row.result->report.total_energy);
    auto flag = [&](double energy) -> std::string {
      if (energy >= best - 1e-9 * std::max(1.0, std::abs(best))) return "best";
      if (energy >= 0.99 * best) return "within_1pct";
      return "";
    };

    std::ostringstream csv;
    csv << "algorithm,status,total_energy,wall_seconds,gap,flag\n";
    out << std::left << std::setw(8) << "algo" << std::right << std::setw(16) << "energy_pu_h" << std::setw(11)
        << "wall_s" << std::setw(10) << "gap_%" << "  flag\n";
    int code = kExitOk;
    for (const Row& row : rows) {
      const std::string name = to_string(row.algorithm);
      if (!row.result) {
        csv << name << ",failed,,,,\n";
        out << std::left << std::setw(8) << name << "  failed: " << row.error << '\n';
        if (code == kExitOk) code = row.code;
        continue;
      }
      const RunResult& r = *row.result;
      const std::string f = flag(r.report.total_energy);
      csv << name << ',' << r.status << ',' << format_double(r.report.total_energy) << ','
          << format_double(r.report.wall_seconds) << ',' << (r.gap ? format_double(*r.gap) : "") << ',' << f << '\n';
      out << std::left << std::setw(8) << name << std::right << std::setw(16) << fixed(r.report.total_energy, 6)
          << std::setw(11) << fixed(r.report.wall_seconds, 3) << std::setw(10)
          << (r.gap ? fixed(*r.gap * 100.0, 3) : std::string("-")) << "  " << (f == "best" ? "*" : f.empty() ? "" : "~")
          << '\n';
    }
    write_file_atomic(config.output_dir / "compare.csv", csv.str());
    return code;
  });
}

namespace {

struct CellKey {
  double fraction;
  std::uint64_t seed;
  Algorithm algorithm;
};

std::string cell_file_name(const std::string& stem, const CellKey& key) {
  return stem + "__f" + format_double(key.fraction) + "__s" + std::to_string(key.seed) + "__" +
         to_string(key.algorithm) + ".json";
}

bool cell_matches(const json& cell, const SweepConfig& config, const CellKey& key) {
  return cell.is_object() && cell.value("fraction", -1.0) == key.fraction &&
         cell.value("seed", std::uint64_t{0}) == key.seed && cell.value("algorithm", "") == to_string(key.algorithm) &&
         cell.value("time_limit", -1.0) == config.base.time_limit && cell.value("rel_gap", -1.0) == config.base.rel_gap &&
         cell.contains("status");
}

}  // namespace

SweepSummary cmd_sweep(const SweepConfig& config, std::ostream& log) {
  if (config.fractions.empty() || config.seeds.empty() || config.algorithms.empty())
    throw ConfigError("sweep needs at least one fraction, seed, and algorithm");
  for (double f : config.fractions)
    if (!(f > 0.0 && f <= 1.0)) throw ConfigError("damage fraction must lie in (0, 1]");
  const Network network = read_case_file(config.base.case_path);
  const std::string case_name = config.base.case_path.filename().string();
  const std::string stem = config.base.case_path.stem().string();
  const fs::path cell_dir = config.base.output_dir / "cells";
  fs::create_directories(cell_dir);

  std::vector<CellKey> cells;
  for (double f : config.fractions)
    for (std::uint64_t s : config.seeds)
      for (Algorithm a : config.algorithms) cells.push_back({f, s, a});
  std::vector<json> results(cells.size());

  SweepSummary summary;
  std::mutex mutex;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      const CellKey& key = cells[i];
      const fs::path file = cell_dir / cell_file_name(stem, key);
      if (std::ifstream in(file); in) {
        try {
          json cached = json::parse(in);
          if (cell_matches(cached, config, key)) {
            results[i] = std::move(cached);
            std::lock_guard lock(mutex);
            ++summary.cached;
            continue;
          }
        } catch (const json::exception&) {
        }
      }

      json cell{{"case", case_name},          {"fraction", key.fraction},
                {"seed", key.seed},           {"algorithm", to_string(key.algorithm)},
                {"time_limit", config.base.time_limit}, {"rel_gap", config.base.rel_gap}};
      RunConfig run = config.base;
      run.damage_fraction = key.fraction;
      run.damage_lines.clear();
      run.seed = key.seed;
      run.algorithm = key.algorithm;
      bool failed = false;
      try {
        const RunResult r = run_algorithm(network, run);
        cell["n_damaged"] = r.damage.size();
        cell["energy"] = r.report.total_energy;
        cell["time"] = r.report.wall_seconds;
        cell["gap"] = r.gap ? json(*r.gap) : json(nullptr);
        cell["status"] = r.status;
      } catch (const std::exception& e) {
        failed = true;
        cell["status"] = "error";
        cell["error"] = e.what();
      }
      write_file_atomic(file, cell.dump(2) + "\n");
      results[i] = std::move(cell);
      std::lock_guard lock(mutex);
      ++summary.computed;
      if (failed) ++summary.failed;
      log << "cell f=" << format_double(key.fraction) << " seed=" << key.seed << " algo=" << to_string(key.algorithm)
          << " -> " << results[i]["status"].get<std::string>() << '\n';
    }
  };

  std::size_t workers = config.workers ? config.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, cells.size());
  std::vector<std::jthread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  pool.clear();

  std::ostringstream csv;
  csv << "case,fraction,seed,algorithm,n_damaged,energy,time,gap,status\n";
  auto number = [](const json& cell, const char* key) -> std::string {
    if (!cell.contains(key) || cell[key].is_null()) return "";
    if (cell[key].is_number_unsigned()) return std::to_string(cell[key].get<std::uint64_t>());
    return format_double(cell[key].get<double>());
  };
  for (const json& cell : results) {
    csv << cell["case"].get<std::string>() << ',' << format_double(cell["fraction"].get<double>()) << ','
        << cell["seed"].get<std::uint64_t>() << ',' << cell["algorithm"].get<std::string>() << ','
        << number(cell, "n_damaged") << ',' << number(cell, "energy") << ',' << number(cell, "time") << ','
        << number(cell, "gap") << ',' << cell["status"].get<std::string>() << '\n';
  }
  write_file_atomic(config.base.output_dir / "sweep.csv", csv.str());
  return summary;
}

}  // namespace gridrestore
