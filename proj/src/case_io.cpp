#include "gridrestore/case_io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

namespace gridrestore {

ParseError::ParseError(std::size_t line, std::string field, const std::string& message)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ", field " + field + ": " + message
                                  : "field " + field + ": " + message),
      line_(line),
      field_(std::move(field)) {}

namespace {

constexpr std::array<const char*, 13> kBusColumns = {
    "BUS_I", "BUS_TYPE", "PD", "QD", "GS", "BS", "BUS_AREA", "VM", "VA", "BASE_KV", "ZONE", "VMAX", "VMIN"};
constexpr std::array<const char*, 10> kGenColumns = {
    "GEN_BUS", "PG", "QG", "QMAX", "QMIN", "VG", "MBASE", "GEN_STATUS", "PMAX", "PMIN"};
constexpr std::array<const char*, 13> kBranchColumns = {
    "F_BUS", "T_BUS", "BR_R", "BR_X", "BR_B", "RATE_A", "RATE_B", "RATE_C", "TAP", "SHIFT", "BR_STATUS",
    "ANGMIN", "ANGMAX"};

struct Row {
  std::size_t line = 0;
  std::vector<double> values;
};

struct Table {
  std::size_t line = 0;
  std::vector<Row> rows;
};

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

// Drops a trailing `%` comment, ignoring `%` inside single-quoted strings.
std::string_view strip_comment(std::string_view s) {
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\'') quoted = !quoted;
    if (s[i] == '%' && !quoted) return s.substr(0, i);
  }
  return s;
}

template <std::size_t N>
std::string column_name(const std::string& table, const std::array<const char*, N>& names,
                        std::size_t col) {
  if (col < N) return names[col];
  return table + "[" + std::to_string(col + 1) + "]";
}

double parse_number(std::string_view token, std::size_t line, const std::string& field) {
  double value = 0.0;
  const char* begin = token.data();
  const char* end = token.data() + token.size();
  if (!token.empty() && *begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end)
    throw ParseError(line, field, "malformed number '" + std::string(token) + "'");
  return value;
}

class CaseReader {
 public:
  explicit CaseReader(std::string_view text) {
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      auto next = text.find('\n', pos);
      if (next == std::string_view::npos) next = text.size();
      ++line_no;
      handle_line(strip_comment(text.substr(pos, next - pos)), line_no);
      pos = next + 1;
    }
    if (current_ != nullptr)
      throw ParseError(current_line_, "mpc." + current_name_, "unterminated table");
  }

  std::optional<double> base_mva;
  std::optional<std::size_t> base_mva_line;
  std::map<std::string, Table> tables;
  std::vector<std::string> bus_names;

 private:
  void handle_line(std::string_view line, std::size_t line_no) {
    if (in_cell_) {
      read_cell_line(line);
      return;
    }
    if (current_ != nullptr) {
      read_rows(line, line_no);
      return;
    }
    const auto body = trim(line);
    if (!body.starts_with("mpc.")) return;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) return;
    const std::string name(trim(body.substr(4, eq - 4)));
    const auto rhs = trim(body.substr(eq + 1));
    if (name == "baseMVA") {
      auto value = rhs;
      if (value.ends_with(';')) value.remove_suffix(1);
      base_mva = parse_number(trim(value), line_no, "baseMVA");
      base_mva_line = line_no;
    } else if (rhs.starts_with('[')) {
      current_name_ = name;
      current_line_ = line_no;
      current_ = &tables[name];
      current_->line = line_no;
      current_->rows.clear();
      read_rows(rhs.substr(1), line_no);
    } else if (rhs.starts_with('{')) {
      in_cell_ = true;
      cell_is_bus_name_ = name == "bus_name";
      read_cell_line(rhs.substr(1));
    }
  }

  void read_rows(std::string_view line, std::size_t line_no) {
    bool closing = false;
    if (const auto close = line.find(']'); close != std::string_view::npos) {
      line = line.substr(0, close);
      closing = true;
    }
    std::size_t start = 0;
    while (start <= line.size()) {
      auto end = line.find(';', start);
      if (end == std::string_view::npos) end = line.size();
      add_row(line.substr(start, end - start), line_no);
      start = end + 1;
    }
    if (closing) current_ = nullptr;
  }

  void add_row(std::string_view row_text, std::size_t line_no) {
    Row row;
    row.line = line_no;
    std::size_t i = 0;
    while (i < row_text.size()) {
      while (i < row_text.size() && (row_text[i] == ' ' || row_text[i] == '\t' ||
                                     row_text[i] == ',' || row_text[i] == '\r'))
        ++i;
      if (i >= row_text.size()) break;
      std::size_t j = i;
      while (j < row_text.size() && row_text[j] != ' ' && row_text[j] != '\t' &&
             row_text[j] != ',' && row_text[j] != '\r')
        ++j;
      const std::string field = "mpc." + current_name_ + "[" + std::to_string(row.values.size() + 1) + "]";
      row.values.push_back(parse_number(row_text.substr(i, j - i), line_no, field));
      i = j;
    }
    if (!row.values.empty()) current_->rows.push_back(std::move(row));
  }

  void read_cell_line(std::string_view line) {
    std::size_t i = 0;
    while (i < line.size()) {
      if (line[i] == '\'') {
        const auto end = line.find('\'', i + 1);
        if (end == std::string_view::npos) break;
        if (cell_is_bus_name_) bus_names.emplace_back(line.substr(i + 1, end - i - 1));
        i = end + 1;
      } else if (line[i] == '}') {
        in_cell_ = false;
        return;
      } else {
        ++i;
      }
    }
  }

  Table* current_ = nullptr;
  std::string current_name_;
  std::size_t current_line_ = 0;
  bool in_cell_ = false;
  bool cell_is_bus_name_ = false;
};

const Table& require_table(const CaseReader& reader, const std::string& name, std::size_t min_cols) {
  auto it = reader.tables.find(name);
  if (it == reader.tables.end()) throw ParseError(0, "mpc." + name, "missing table");
  for (const Row& row : it->second.rows) {
    if (row.values.size() < min_cols)
      throw ParseError(row.line, "mpc." + name,
                       "malformed table: expected at least " + std::to_string(min_cols) +
                           " columns, found " + std::to_string(row.values.size()));
  }
  return it->second;
}

int integral_id(double value, std::size_t line, const std::string& field) {
  if (value != std::floor(value) || std::abs(value) > 2e9)
    throw ParseError(line, field, "expected an integer id");
  return static_cast<int>(value);
}

double angle_limit(const Row& row) {
  if (row.values.size() < 13) return kDefaultAngleDiffMax;
  const double degrees = std::max(std::abs(row.values[11]), std::abs(row.values[12]));
  if (degrees == 0.0 || degrees >= 360.0 || !std::isfinite(degrees)) return kDefaultAngleDiffMax;
  return degrees * std::numbers::pi / 180.0;
}

}  // namespace

Network parse_case(std::string_view text) {
  const CaseReader reader(text);
  if (!reader.base_mva) throw ParseError(0, "baseMVA", "missing baseMVA");
  const double base = *reader.base_mva;
  if (!(base > 0.0)) throw ParseError(*reader.base_mva_line, "baseMVA", "baseMVA must be positive");

  const Table& bus_table = require_table(reader, "bus", kBusColumns.size());
  const Table& gen_table = require_table(reader, "gen", kGenColumns.size());
  const Table& branch_table = require_table(reader, "branch", 11);
  if (bus_table.rows.empty()) throw ParseError(bus_table.line, "mpc.bus", "table is empty");

  std::vector<Bus> buses;
  std::vector<Load> loads;
  std::map<int, std::size_t> known;
  for (std::size_t r = 0; r < bus_table.rows.size(); ++r) {
    const Row& row = bus_table.rows[r];
    const int id = integral_id(row.values[0], row.line, "BUS_I");
    if (!known.emplace(id, r).second)
      throw ParseError(row.line, "BUS_I", "duplicate bus " + std::to_string(id));
    std::string name = r < reader.bus_names.size() ? reader.bus_names[r] : std::to_string(id);
    buses.push_back({BusId{id}, std::move(name)});
    const double pd = row.values[2];
    if (!std::isfinite(pd)) throw ParseError(row.line, "PD", "non-finite demand");
    if (pd > 0.0) {
      loads.push_back({static_cast<int>(loads.size()) + 1, BusId{id}, pd / base});
    }
  }
  auto check_bus = [&](double value, std::size_t line, const char* field) {
    const int id = integral_id(value, line, field);
    if (!known.contains(id)) throw ParseError(line, field, "unknown bus " + std::to_string(id));
    return BusId{id};
  };

  std::vector<Generator> generators;
  for (std::size_t r = 0; r < gen_table.rows.size(); ++r) {
    const Row& row = gen_table.rows[r];
    const BusId bus = check_bus(row.values[0], row.line, "GEN_BUS");
    if (row.values[7] <= 0.0) continue;
    const double pmax = row.values[8];
    if (!std::isfinite(pmax) || pmax < 0.0)
      throw ParseError(row.line, column_name("gen", kGenColumns, 8), "PMAX must be finite and nonnegative");
    generators.push_back({static_cast<int>(r) + 1, bus, pmax / base});
  }

  std::vector<Line> lines;
  for (std::size_t r = 0; r < branch_table.rows.size(); ++r) {
    const Row& row = branch_table.rows[r];
    const BusId from = check_bus(row.values[0], row.line, "F_BUS");
    const BusId to = check_bus(row.values[1], row.line, "T_BUS");
    if (row.values[10] <= 0.0) continue;
    const double x = row.values[3];
    if (x == 0.0 || !std::isfinite(x)) throw ParseError(row.line, "BR_X", "zero reactance");
    if (from == to) throw ParseError(row.line, "T_BUS", "branch connects a bus to itself");
    const double rate = row.values[5];
    Line line;
    line.id = LineId{static_cast<int>(r) + 1};
    line.from_bus = from;
    line.to_bus = to;
    line.susceptance_b = -1.0 / x;
    line.thermal_limit = rate > 0.0 ? rate / base : kUnlimited;
    line.angle_diff_max = angle_limit(row);
    lines.push_back(line);
  }
  return Network(std::move(buses), std::move(lines), std::move(generators), std::move(loads), base);
}

Network read_case_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(0, path.string(), "cannot open case file");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  if (path.extension() == ".json") {
    try {
      return network_from_json(nlohmann::json::parse(text));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(0, path.string(), e.what());
    } catch (const NetworkError& e) {
      throw ParseError(0, path.string(), e.what());
    }
  }
  try {
    return parse_case(text);
  } catch (const NetworkError& e) {
    throw ParseError(0, path.string(), e.what());
  }
}

namespace {

nlohmann::json limit_to_json(double value) {
  if (std::isinf(value)) return nullptr;
  return value;
}

double limit_from_json(const nlohmann::json& j) {
  if (j.is_null()) return kUnlimited;
  return j.get<double>();
}

}  // namespace

nlohmann::json to_json(const Network& network) {
  nlohmann::json j;
  j["base_mva"] = network.base_mva();
  j["buses"] = nlohmann::json::array();
  for (const auto& bus : network.buses()) j["buses"].push_back({{"id", to_int(bus.id)}, {"name", bus.name}});
  j["lines"] = nlohmann::json::array();
  for (const auto& line : network.lines()) {
    j["lines"].push_back({{"id", to_int(line.id)},
                          {"from_bus", to_int(line.from_bus)},
                          {"to_bus", to_int(line.to_bus)},
                          {"susceptance_b", line.susceptance_b},
                          {"thermal_limit", limit_to_json(line.thermal_limit)},
                          {"angle_diff_max", line.angle_diff_max}});
  }
  j["generators"] = nlohmann::json::array();
  for (const auto& gen : network.generators())
    j["generators"].push_back({{"id", gen.id}, {"bus", to_int(gen.bus)}, {"p_max", gen.p_max}});
  j["loads"] = nlohmann::json::array();
  for (const auto& load : network.loads())
    j["loads"].push_back({{"id", load.id}, {"bus", to_int(load.bus)}, {"p_demand", load.p_demand}});
  return j;
}

Network network_from_json(const nlohmann::json& j) {
  std::vector<Bus> buses;
  for (const auto& b : j.at("buses")) buses.push_back({BusId{b.at("id").get<int>()}, b.at("name").get<std::string>()});
  std::vector<Line> lines;
  for (const auto& l : j.at("lines")) {
    Line line;
    line.id = LineId{l.at("id").get<int>()};
    line.from_bus = BusId{l.at("from_bus").get<int>()};
    line.to_bus = BusId{l.at("to_bus").get<int>()};
    line.susceptance_b = l.at("susceptance_b").get<double>();
    line.thermal_limit = limit_from_json(l.at("thermal_limit"));
    line.angle_diff_max = l.at("angle_diff_max").get<double>();
    lines.push_back(line);
  }
  std::vector<Generator> gens;
  for (const auto& g : j.at("generators"))
    gens.push_back({g.at("id").get<int>(), BusId{g.at("bus").get<int>()}, g.at("p_max").get<double>()});
  std::vector<Load> loads;
  for (const auto& d : j.at("loads"))
    loads.push_back({d.at("id").get<int>(), BusId{d.at("bus").get<int>()}, d.at("p_demand").get<double>()});
  return Network(std::move(buses), std::move(lines), std::move(gens), std::move(loads),
                 j.at("base_mva").get<double>());
}

nlohmann::json to_json(const DamageScenario& damage) {
  nlohmann::json ids = nlohmann::json::array();
  for (LineId id : damage.damaged_lines) ids.push_back(to_int(id));
  return {{"damaged_lines", ids}, {"seed", damage.seed}, {"fraction", damage.fraction}};
}

DamageScenario damage_from_json(const nlohmann::json& j) {
  DamageScenario damage;
  for (const auto& id : j.at("damaged_lines")) damage.damaged_lines.push_back(LineId{id.get<int>()});
  damage.seed = j.at("seed").get<std::uint64_t>();
  damage.fraction = j.at("fraction").get<double>();
  return damage;
}

nlohmann::json to_json(const PeriodSchedule& schedule) {
  return {{"n_periods", schedule.n_periods},
          {"delta", schedule.delta},
          {"repair_budget", schedule.repair_budget}};
}

PeriodSchedule schedule_from_json(const nlohmann::json& j) {
  PeriodSchedule schedule;
  schedule.n_periods = j.at("n_periods").get<int>();
  schedule.delta = j.at("delta").get<std::vector<double>>();
  schedule.repair_budget = j.at("repair_budget").get<std::vector<int>>();
  return schedule;
}

nlohmann::json to_json(const RestorationPlan& plan) {
  nlohmann::json periods = nlohmann::json::array();
  for (const auto& period : plan.periods) {
    nlohmann::json ids = nlohmann::json::array();
    for (LineId id : period) ids.push_back(to_int(id));
    periods.push_back(std::move(ids));
  }
  return {{"periods", periods}};
}

RestorationPlan plan_from_json(const nlohmann::json& j) {
  RestorationPlan plan;
  for (const auto& period : j.at("periods")) {
    std::vector<LineId> ids;
    for (const auto& id : period) ids.push_back(LineId{id.get<int>()});
    std::sort(ids.begin(), ids.end());
    plan.periods.push_back(std::move(ids));
  }
  return plan;
}

}  // namespace gridrestore
