#pragma once

#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

#include "gridrestore/network.hpp"

namespace gridrestore {

/// Error raised while reading a case file. `line()` is 1-based (0 when the
/// problem is not tied to a single line, e.g. a missing table).
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, std::string field, const std::string& message);

  std::size_t line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  std::size_t line_;
  std::string field_;
};

/// Parses the MATPOWER subset: `mpc.baseMVA`, `mpc.bus`, `mpc.gen`,
/// `mpc.branch` and optionally `mpc.bus_name`. Other tables are skipped.
///
/// Conversions: b = -1/x, thermal limit = rateA / baseMVA (rateA = 0 means
/// unlimited), generator and demand values divided by baseMVA. Branches and
/// generators with status 0 are dropped; buses with Pd <= 0 carry no load.
/// Line and generator ids are the 1-based row numbers of their tables.
Network parse_case(std::string_view text);
Network read_case_file(const std::filesystem::path& path);

// Interchange JSON. Unlimited thermal limits serialize as null.
nlohmann::json to_json(const Network& network);
Network network_from_json(const nlohmann::json& j);

nlohmann::json to_json(const DamageScenario& damage);
DamageScenario damage_from_json(const nlohmann::json& j);

nlohmann::json to_json(const PeriodSchedule& schedule);
PeriodSchedule schedule_from_json(const nlohmann::json& j);

nlohmann::json to_json(const RestorationPlan& plan);
RestorationPlan plan_from_json(const nlohmann::json& j);

}  // namespace gridrestore
