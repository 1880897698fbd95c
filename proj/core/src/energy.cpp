#include "tiersim/energy.hpp"

#include <algorithm>
#include <cmath>

namespace tiersim {

void PowerTrace::validate() const {
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const PowerSample& s = samples[i];
    if (!std::isfinite(s.watts) || s.watts < 0.0)
      throw Error(Errc::InvalidSpec, node_id + ": watts must be finite and >= 0");
    if (i > 0 && samples[i - 1].timestamp >= s.timestamp)
      throw Error(Errc::NonMonotonicTimestamp, node_id + ": trace timestamps must increase");
  }
}

namespace {

double interpolate_watts(const PowerSample& a, const PowerSample& b, Micros t) {
  const double span = static_cast<double>(b.timestamp - a.timestamp);
  const double frac = static_cast<double>(t - a.timestamp) / span;
  return a.watts + (b.watts - a.watts) * frac;
}

}  // namespace

double integrate_trapezoid(const PowerTrace& trace, TimeWindow window, Micros max_gap_us) {
  if (window.end < window.start)
    throw Error(Errc::InvalidSpec, trace.node_id + ": window end before start");

  const auto& samples = trace.samples;
  if (samples.size() < 2 || samples.front().timestamp > window.start ||
      samples.back().timestamp < window.end) {
    throw Error(Errc::WindowNotCovered,
                trace.node_id + ": trace does not span the requested window");
  }
  if (window.start == window.end) return 0.0;

  double joules = 0.0;
  for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
    const PowerSample& a = samples[i];
    const PowerSample& b = samples[i + 1];
    if (b.timestamp <= window.start) continue;
    if (a.timestamp >= window.end) break;

    if (b.timestamp - a.timestamp > max_gap_us)
      throw Error(Errc::WindowNotCovered,
                  trace.node_id + ": sample gap exceeds max_gap inside window");

    const Micros lo = std::max(a.timestamp, window.start);
    const Micros hi = std::min(b.timestamp, window.end);
    if (hi <= lo) continue;

    const double w_lo = (lo == a.timestamp) ? a.watts : interpolate_watts(a, b, lo);
    const double w_hi = (hi == b.timestamp) ? b.watts : interpolate_watts(a, b, hi);
    joules += micros_to_seconds(hi - lo) * 0.5 * (w_lo + w_hi);
  }
  return joules;
}

EnergyReport task_energy(const TaskRecord& record,
                         const std::map<std::string, PowerTrace>& traces, Micros max_gap_us) {
  EnergyReport report;
  report.task_id = record.spec().task_id;

  // Group windows per node first so per_node sums are accumulated in a fixed
  // (node-id, window) order.
  std::map<std::string, std::vector<TimeWindow>> by_node;
  for (const ExecutionWindow& w : record.windows())
    by_node[w.node_id].push_back(TimeWindow{w.start, w.end});

  for (auto& [node_id, windows] : by_node) {
    auto it = traces.find(node_id);
    if (it == traces.end()) throw Error(Errc::MissingTrace, node_id);
    std::sort(windows.begin(), windows.end(),
              [](const TimeWindow& a, const TimeWindow& b) { return a.start < b.start; });
    double joules = 0.0;
    for (const TimeWindow& w : windows) joules += integrate_trapezoid(it->second, w, max_gap_us);
    report.per_node_joules.emplace(node_id, joules);
  }

  double total = 0.0;
  for (const auto& [node_id, joules] : report.per_node_joules) total += joules;
  report.total_joules = total;
  return report;
}

double makespan_seconds(const std::vector<TaskRecord>& records) {
  bool any = false;
  Micros lo = 0;
  Micros hi = 0;
  for (const TaskRecord& record : records) {
    for (const ExecutionWindow& w : record.windows()) {
      if (!any) {
        lo = w.start;
        hi = w.end;
        any = true;
      } else {
        lo = std::min(lo, w.start);
        hi = std::max(hi, w.end);
      }
    }
  }
  if (!any) throw Error(Errc::NoWindows, "no execution windows");
  return micros_to_seconds(hi - lo);
}

}  // namespace tiersim
