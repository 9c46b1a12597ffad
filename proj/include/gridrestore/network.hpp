#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace gridrestore {

enum class BusId : int {};
enum class LineId : int {};

constexpr int to_int(BusId id) { return static_cast<int>(id); }
constexpr int to_int(LineId id) { return static_cast<int>(id); }

/// Angle-difference limit used when case data leaves it unconstrained (30 degrees).
inline constexpr double kDefaultAngleDiffMax = 30.0 * std::numbers::pi / 180.0;

inline constexpr double kUnlimited = std::numeric_limits<double>::infinity();

struct Bus {
  BusId id{};
  std::string name;

  friend bool operator==(const Bus&, const Bus&) = default;
};

/// A transmission line in per-unit. `thermal_limit` may be kUnlimited.
struct Line {
  LineId id{};
  BusId from_bus{};
  BusId to_bus{};
  double susceptance_b = 0.0;
  double thermal_limit = 0.0;
  double angle_diff_max = kDefaultAngleDiffMax;

  friend bool operator==(const Line&, const Line&) = default;
};

struct Generator {
  int id = 0;
  BusId bus{};
  double p_max = 0.0;

  friend bool operator==(const Generator&, const Generator&) = default;
};

struct Load {
  int id = 0;
  BusId bus{};
  double p_demand = 0.0;

  friend bool operator==(const Load&, const Load&) = default;
};

class NetworkError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Immutable per-unit grid with per-bus incidence indices.
///
/// Components are addressed two ways: by their external id (as found in the
/// case file) and by their dense position in the component vectors. Model
/// builders work with positions; plans and scenarios carry ids.
class Network {
 public:
  Network(std::vector<Bus> buses, std::vector<Line> lines,
          std::vector<Generator> generators, std::vector<Load> loads,
          double base_mva = 100.0);

  const std::vector<Bus>& buses() const { return buses_; }
  const std::vector<Line>& lines() const { return lines_; }
  const std::vector<Generator>& generators() const { return generators_; }
  const std::vector<Load>& loads() const { return loads_; }
  double base_mva() const { return base_mva_; }

  std::size_t bus_index(BusId id) const;
  std::size_t line_index(LineId id) const;
  bool has_bus(BusId id) const { return bus_pos_.contains(to_int(id)); }
  bool has_line(LineId id) const { return line_pos_.contains(to_int(id)); }

  /// Positions of lines incident to the bus at position `bus`.
  std::span<const std::size_t> lines_at(std::size_t bus) const { return lines_at_[bus]; }
  std::span<const std::size_t> generators_at(std::size_t bus) const { return gens_at_[bus]; }
  std::span<const std::size_t> loads_at(std::size_t bus) const { return loads_at_[bus]; }

  std::size_t from_index(std::size_t line) const { return line_ends_[line].first; }
  std::size_t to_index(std::size_t line) const { return line_ends_[line].second; }

  double total_demand() const;
  double total_generation() const;

  friend bool operator==(const Network& a, const Network& b) {
    return a.base_mva_ == b.base_mva_ && a.buses_ == b.buses_ && a.lines_ == b.lines_ &&
           a.generators_ == b.generators_ && a.loads_ == b.loads_;
  }

 private:
  std::vector<Bus> buses_;
  std::vector<Line> lines_;
  std::vector<Generator> generators_;
  std::vector<Load> loads_;
  double base_mva_;

  std::unordered_map<int, std::size_t> bus_pos_;
  std::unordered_map<int, std::size_t> line_pos_;
  std::vector<std::pair<std::size_t, std::size_t>> line_ends_;
  std::vector<std::vector<std::size_t>> lines_at_;
  std::vector<std::vector<std::size_t>> gens_at_;
  std::vector<std::vector<std::size_t>> loads_at_;
};

/// Set of physically damaged lines, sorted by id.
struct DamageScenario {
  std::vector<LineId> damaged_lines;
  std::uint64_t seed = 0;
  double fraction = 0.0;

  std::size_t size() const { return damaged_lines.size(); }
  bool contains(LineId id) const;

  friend bool operator==(const DamageScenario&, const DamageScenario&) = default;
};

/// Builds a scenario from an explicit line list; validates against the network.
DamageScenario make_damage(const Network& network, std::vector<LineId> lines);

/// Selects round-half-up(fraction * |lines|) distinct lines.
///
/// Sampling is a partial Fisher-Yates shuffle over line positions driven by
/// std::mt19937_64(seed), drawing bounded integers with rejection sampling so
/// the result does not depend on the standard library's distributions.
DamageScenario random_damage(const Network& network, double fraction, std::uint64_t seed);

struct PeriodSchedule {
  int n_periods = 0;
  std::vector<double> delta;
  std::vector<int> repair_budget;

  double total_duration() const;

  friend bool operator==(const PeriodSchedule&, const PeriodSchedule&) = default;
};

/// R_k = round-half-up(k * n_damaged / n_periods), equal durations.
PeriodSchedule build_schedule(int n_damaged, int n_periods, double hours_per_period = 1.0);

/// Ordered restoration periods; each period holds line ids sorted ascending.
struct RestorationPlan {
  std::vector<std::vector<LineId>> periods;

  std::size_t n_periods() const { return periods.size(); }
  std::size_t n_restorations() const;
  /// Lines in restoration order (period order, ascending id within a period).
  std::vector<LineId> sequence() const;

  friend bool operator==(const RestorationPlan&, const RestorationPlan&) = default;
  friend auto operator<=>(const RestorationPlan&, const RestorationPlan&) = default;
};

/// One line per period, in the given order.
RestorationPlan plan_from_sequence(std::span<const LineId> order);

/// Throws std::invalid_argument unless every damaged line appears in exactly
/// one period and nothing else appears.
void validate_plan(const RestorationPlan& plan, const DamageScenario& damage);
bool is_valid_plan(const RestorationPlan& plan, const DamageScenario& damage);

std::string format_plan(const RestorationPlan& plan);

}  // namespace gridrestore
