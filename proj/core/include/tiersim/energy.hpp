#pragma once

#include <map>
#include <string>
#include <vector>

#include "tiersim/model.hpp"

namespace tiersim {

struct PowerSample {
  Micros timestamp = 0;  // since scenario epoch
  double watts = 0.0;
};

struct PowerTrace {
  std::string node_id;
  std::vector<PowerSample> samples;  // strictly increasing timestamps

  void validate() const;
};

struct TimeWindow {
  Micros start = 0;
  Micros end = 0;
};

// A sample gap wider than this inside a queried window is treated as a meter
// dropout and reported as WindowNotCovered instead of being bridged.
inline constexpr Micros kDefaultMaxGapUs = 5 * kMicrosPerSecond;

// Integral of the piecewise-linear interpolant of the trace over the window,
// in joules. Window edges between samples interpolate power at the cut.
// A zero-width window yields 0.
double integrate_trapezoid(const PowerTrace& trace, TimeWindow window,
                           Micros max_gap_us = kDefaultMaxGapUs);

struct EnergyReport {
  std::string task_id;
  std::map<std::string, double> per_node_joules;
  double total_joules = 0.0;

  double total_watt_hours() const { return total_joules / 3600.0; }
};

// Per-node integrals over the record's execution windows, summed across
// nodes. Total is the sum of per_node_joules in node-id order.
EnergyReport task_energy(const TaskRecord& record,
                         const std::map<std::string, PowerTrace>& traces,
                         Micros max_gap_us = kDefaultMaxGapUs);

// max(end) - min(start) over all windows of all records, in seconds.
double makespan_seconds(const std::vector<TaskRecord>& records);

}  // namespace tiersim
