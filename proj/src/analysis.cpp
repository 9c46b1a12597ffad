#include "gridrestore/analysis.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>

namespace gridrestore {

std::pair<PowerServedSeries, RestorationPlan> monotonize(const PowerServedSeries& series,
                                                         const RestorationPlan& plan) {
  const std::size_t n = series.size();
  if (plan.n_periods() != n) throw std::invalid_argument("series and plan have different lengths");

  PowerServedSeries out;
  out.durations = series.durations;
  RestorationPlan rebucketed;
  rebucketed.periods.resize(n);
  std::vector<LineId> deferred;
  double running_max = -kInf;
  std::size_t anchor = 0;  // last period that was not a dip
  for (std::size_t k = 0; k < n; ++k) {
    const double v = series.delivered[k];
    const bool dip = k > 0 && v < running_max - 1e-9 * std::max(1.0, std::abs(running_max));
    if (dip) {
      deferred.insert(deferred.end(), plan.periods[k].begin(), plan.periods[k].end());
      out.delivered.push_back(running_max);
      out.load_fractions.push_back(series.load_fractions.at(anchor));
      continue;
    }
    auto& bucket = rebucketed.periods[k];
    bucket = deferred;
    bucket.insert(bucket.end(), plan.periods[k].begin(), plan.periods[k].end());
    deferred.clear();
    running_max = std::max(running_max, v);
    anchor = k;
    out.delivered.push_back(running_max);
    out.load_fractions.push_back(series.load_fractions.at(k));
  }
  if (!deferred.empty()) {
    auto& last = rebucketed.periods.back();
    last.insert(last.end(), deferred.begin(), deferred.end());
  }
  for (auto& period : rebucketed.periods) std::sort(period.begin(), period.end());
  return {std::move(out), std::move(rebucketed)};
}

IslandMetrics island_metrics(const Network& network, const DamageScenario& damage, const RestorationPlan& plan) {
  IslandMetrics metrics;
  for (const auto& mask : energized_masks(network, damage, plan)) {
    UnionFind uf(network.buses().size());
    for (std::size_t l = 0; l < mask.size(); ++l)
      if (mask[l]) uf.unite(network.from_index(l), network.to_index(l));
    std::size_t largest = 0;
    for (std::size_t i = 0; i < network.buses().size(); ++i) largest = std::max(largest, uf.component_size(i));
    metrics.island_count.push_back(static_cast<int>(uf.components()));
    metrics.largest_island.push_back(static_cast<int>(largest));
  }
  return metrics;
}

double total_energy(const PowerServedSeries& series) {
  double energy = 0.0;
  for (std::size_t k = 0; k < series.size(); ++k) energy += series.delivered[k] * series.durations[k];
  return energy;
}

RestorationReport make_report(const Network& network, const DamageScenario& damage, const RestorationPlan& plan,
                              const PeriodSchedule& schedule, std::string algorithm, double wall_seconds,
                              bool post_process) {
  RestorationReport report;
  report.algorithm = std::move(algorithm);
  report.wall_seconds = wall_seconds;
  report.post_processed = post_process;
  PowerServedSeries series = evaluate_plan(network, damage, plan, schedule);
  if (post_process) {
    auto [mono, rebucketed] = monotonize(series, plan);
    report.series = std::move(mono);
    report.plan = std::move(rebucketed);
  } else {
    report.series = std::move(series);
    report.plan = plan;
  }
  report.total_energy = total_energy(report.series);
  report.islands = island_metrics(network, damage, report.plan);
  return report;
}

std::string format_double(double value) {
  char buffer[64];
  const auto [end, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
  if (ec != std::errc{}) throw std::runtime_error("number formatting failed");
  return std::string(buffer, end);
}

void write_report_csv(std::ostream& out, const RestorationReport& report) {
  out << "period,delivered_pu,cumulative_energy_pu,island_count,largest_island,restored_line_ids\n";
  double cumulative = 0.0;
  for (std::size_t k = 0; k < report.series.size(); ++k) {
    cumulative += report.series.delivered[k] * report.series.durations[k];
    out << (k + 1) << ',' << format_double(report.series.delivered[k]) << ',' << format_double(cumulative) << ','
        << report.islands.island_count[k] << ',' << report.islands.largest_island[k] << ',';
    const auto& restored = report.plan.periods[k];
    for (std::size_t i = 0; i < restored.size(); ++i) out << (i ? ";" : "") << to_int(restored[i]);
    out << '\n';
  }
}

}  // namespace gridrestore
