#pragma once

#include <cstddef>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "gridrestore/models.hpp"
#include "gridrestore/network.hpp"
#include "gridrestore/union_find.hpp"

namespace gridrestore {

/// Running maximum of delivered power; restorations made during a dip are
/// deferred to the first period that recovers the running maximum.
///
/// A period dips when its delivery is below the running maximum of the
/// earlier periods by more than 1e-9 (relative to max(1, running max)).
/// When the dip lasts through the final period, the deferred restorations
/// land in the final period.
std::pair<PowerServedSeries, RestorationPlan> monotonize(const PowerServedSeries& series,
                                                         const RestorationPlan& plan);

struct IslandMetrics {
  std::vector<int> island_count;
  std::vector<int> largest_island;
};

/// Connected components of the energized topology in each period. Buses
/// without energized lines count as singleton islands.
IslandMetrics island_metrics(const Network& network, const DamageScenario& damage, const RestorationPlan& plan);

/// sum_k delivered_k * duration_k
double total_energy(const PowerServedSeries& series);

struct RestorationReport {
  std::string algorithm;
  RestorationPlan plan;
  PowerServedSeries series;
  double total_energy = 0.0;
  IslandMetrics islands;
  double wall_seconds = 0.0;
  bool post_processed = true;
};

/// Evaluates `plan`, optionally post-processes it, and gathers metrics.
RestorationReport make_report(const Network& network, const DamageScenario& damage, const RestorationPlan& plan,
                              const PeriodSchedule& schedule, std::string algorithm, double wall_seconds,
                              bool post_process = true);

/// Columns: period, delivered_pu, cumulative_energy_pu, island_count,
/// largest_island, restored_line_ids (semicolon-separated).
void write_report_csv(std::ostream& out, const RestorationReport& report);

/// Shortest decimal text that reads back to the same double.
std::string format_double(double value);

}  // namespace gridrestore
