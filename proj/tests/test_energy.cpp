#include <doctest.h>

#include <cmath>

#include "support/oracles.hpp"
#include "tiersim/energy.hpp"

using namespace tiersim;
namespace tt = tiersim::testing;

namespace {

PowerTrace trace_of(const std::string& node, std::vector<PowerSample> samples) {
  PowerTrace trace;
  trace.node_id = node;
  trace.samples = std::move(samples);
  return trace;
}

constexpr Micros kSecond = kMicrosPerSecond;

}  // namespace

TEST_CASE("trapezoid of one linear segment") {
  const auto trace = trace_of("n", {{0, 2.0}, {kSecond, 4.0}});
  CHECK(integrate_trapezoid(trace, {0, kSecond}) == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("constant power times duration") {
  const auto trace = trace_of("n", {{0, 5.0}, {10 * kSecond, 5.0}});
  // The two samples are 10 s apart; accepting that gap must be explicit.
  CHECK(integrate_trapezoid(trace, {0, 10 * kSecond}, 10 * kSecond) ==
        doctest::Approx(50.0).epsilon(1e-12));
  CHECK_THROWS_AS(integrate_trapezoid(trace, {0, 10 * kSecond}), Error);  // default max_gap 5 s
}

TEST_CASE("zero-width window integrates to zero") {
  const auto trace = trace_of("n", {{0, 5.0}, {kSecond, 5.0}});
  CHECK(integrate_trapezoid(trace, {400'000, 400'000}) == 0.0);
}

TEST_CASE("windows outside the trace span are rejected") {
  const auto trace = trace_of("n", {{kSecond, 1.0}, {2 * kSecond, 1.0}});
  CHECK_THROWS_AS(integrate_trapezoid(trace, {0, kSecond}), Error);
  CHECK_THROWS_AS(integrate_trapezoid(trace, {kSecond, 3 * kSecond}), Error);
  CHECK_THROWS_AS(integrate_trapezoid(trace_of("n", {{0, 1.0}}), {0, 0}), Error);
  try {
    integrate_trapezoid(trace, {0, kSecond});
  } catch (const Error& e) {
    CHECK(e.code() == Errc::WindowNotCovered);
  }
}

TEST_CASE("window edges interpolate between samples") {
  // Power ramps 0W -> 10W over 10s; window [2.5s, 7.5s] under the ramp.
  const auto trace = trace_of("n", {{0, 0.0}, {10 * kSecond, 10.0}});
  // Closed form: mean of 2.5 and 7.5 watts over 5 s = 25 J.
  CHECK(integrate_trapezoid(trace, {2'500'000, 7'500'000}, 10 * kSecond) ==
        doctest::Approx(25.0).epsilon(1e-12));
}

TEST_CASE("exact on traces sampled from one line") {
  std::mt19937_64 rng(0x5eed0002);
  for (int iter = 0; iter < 300; ++iter) {
    const double intercept = tt::uniform(rng, 0.5, 20.0);
    // Keep the line non-negative over the longest possible trace (~300 s).
    const double slope_per_s = tt::uniform(rng, -0.9 * intercept / 300.0, 0.04);
    PowerTrace trace;
    trace.node_id = "n";
    Micros t = 0;
    for (int i = 0; i < 60; ++i) {
      const double watts = intercept + slope_per_s * micros_to_seconds(t);
      REQUIRE(watts >= 0.0);
      trace.samples.push_back({t, watts});
      t += tt::uniform_int(rng, 1000, 4'900'000);
    }
    const Micros start = tt::uniform_int(rng, 0, t / 3);
    const Micros end = start + tt::uniform_int(rng, 0, trace.samples.back().timestamp - start);
    const double got = integrate_trapezoid(trace, {start, end});
    const double span = micros_to_seconds(end - start);
    const double expected =
        span * (intercept + slope_per_s * 0.5 * (micros_to_seconds(start) + micros_to_seconds(end)));
    CHECK(got == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("agrees with a fine-grained Riemann sum over the interpolant") {
  std::mt19937_64 rng(0x5eed0003);
  for (int iter = 0; iter < 20; ++iter) {
    const PowerTrace trace = tt::random_piecewise_trace(rng, "n", 100);
    const Micros lo = trace.samples.front().timestamp;
    const Micros hi = trace.samples.back().timestamp;
    const Micros start = lo + tt::uniform_int(rng, 0, (hi - lo) / 2);
    const Micros end = start + tt::uniform_int(rng, 1000, hi - start);
    const double got = integrate_trapezoid(trace, {start, end});
    const double oracle = tt::riemann_energy(trace, {start, end}, 1'000'000);
    CHECK(got == doctest::Approx(oracle).epsilon(1e-6));
  }
}

TEST_CASE("splitting at an interior sample preserves the integral") {
  std::mt19937_64 rng(0x5eed0004);
  for (int iter = 0; iter < 50; ++iter) {
    const PowerTrace trace = tt::random_piecewise_trace(rng, "n", 40);
    const auto& s = trace.samples;
    const std::size_t cut = static_cast<std::size_t>(tt::uniform_int(rng, 1, 38));
    const Micros a = s.front().timestamp;
    const Micros b = s[cut].timestamp;
    const Micros c = s.back().timestamp;
    const double whole = integrate_trapezoid(trace, {a, c});
    const double parts = integrate_trapezoid(trace, {a, b}) + integrate_trapezoid(trace, {b, c});
    CHECK(whole == doctest::Approx(parts).epsilon(1e-12));
  }
}

TEST_CASE("enlarging the window never decreases the integral") {
  std::mt19937_64 rng(0x5eed0005);
  for (int iter = 0; iter < 50; ++iter) {
    const PowerTrace trace = tt::random_piecewise_trace(rng, "n", 30);
    const Micros lo = trace.samples.front().timestamp;
    const Micros hi = trace.samples.back().timestamp;
    Micros a = lo + tt::uniform_int(rng, 0, (hi - lo) / 2);
    Micros b = a + tt::uniform_int(rng, 0, hi - a);
    const Micros a2 = lo + (a - lo) / 2;
    const Micros b2 = b + (hi - b) / 2;
    CHECK(integrate_trapezoid(trace, {a2, b2}) >= integrate_trapezoid(trace, {a, b}) - 1e-12);
  }
}

TEST_CASE("scaling every sample scales the energy") {
  std::mt19937_64 rng(0x5eed0006);
  const PowerTrace trace = tt::random_piecewise_trace(rng, "n", 50);
  PowerTrace scaled = trace;
  const double k = 3.25;
  for (PowerSample& s : scaled.samples) s.watts *= k;
  const Micros lo = trace.samples.front().timestamp;
  const Micros hi = trace.samples.back().timestamp;
  const double base = integrate_trapezoid(trace, {lo, hi});
  CHECK(integrate_trapezoid(scaled, {lo, hi}) == doctest::Approx(k * base).epsilon(1e-12));
}

TEST_CASE("task energy: two constant-power nodes with one window each") {
  TaskSpec spec;
  spec.task_id = "t";
  spec.parallel_work = 1.0;
  TaskRecord record(spec);
  record.add_window({"a", 0, 10 * kSecond});
  record.add_window({"b", 0, 10 * kSecond});

  std::map<std::string, PowerTrace> traces;
  traces["a"] = trace_of("a", {{0, 5.0}, {5 * kSecond, 5.0}, {10 * kSecond, 5.0}});
  traces["b"] = trace_of("b", {{0, 5.0}, {5 * kSecond, 5.0}, {10 * kSecond, 5.0}});

  const EnergyReport report = task_energy(record, traces);
  CHECK(report.per_node_joules.at("a") == doctest::Approx(50.0).epsilon(1e-12));
  CHECK(report.per_node_joules.at("b") == doctest::Approx(50.0).epsilon(1e-12));
  CHECK(report.total_joules == doctest::Approx(100.0).epsilon(1e-12));
  CHECK(report.total_watt_hours() == doctest::Approx(100.0 / 3600.0));
}

TEST_CASE("task energy: zero-length window contributes nothing") {
  TaskSpec spec;
  spec.task_id = "t";
  spec.parallel_work = 1.0;
  TaskRecord record(spec);
  record.add_window({"a", 3 * kSecond, 3 * kSecond});
  std::map<std::string, PowerTrace> traces;
  traces["a"] = trace_of("a", {{0, 5.0}, {4 * kSecond, 5.0}});
  CHECK(task_energy(record, traces).total_joules == 0.0);
}

TEST_CASE("task energy matches an independent per-node summation") {
  std::mt19937_64 rng(0x5eed0007);
  for (int iter = 0; iter < 20; ++iter) {
    TaskSpec spec;
    spec.task_id = "t";
    spec.parallel_work = 1.0;
    TaskRecord record(spec);
    std::map<std::string, PowerTrace> traces;
    double oracle_total = 0.0;
    for (const std::string node : {"a", "b", "c"}) {
      PowerTrace trace = tt::random_piecewise_trace(rng, node, 60);
      const Micros lo = trace.samples.front().timestamp;
      const Micros hi = trace.samples.back().timestamp;
      double node_total = 0.0;
      Micros cursor = lo;
      for (int w = 0; w < 3; ++w) {
        const Micros start = cursor + tt::uniform_int(rng, 0, (hi - cursor) / 4);
        const Micros end = start + tt::uniform_int(rng, 0, (hi - start) / 2);
        record.add_window({node, start, end});
        node_total += tt::closed_form_energy(trace, {start, end});
        cursor = end + 1000;
        if (cursor >= hi) break;
      }
      oracle_total += node_total;
      traces[node] = std::move(trace);
    }
    const EnergyReport report = task_energy(record, traces);
    CHECK(report.total_joules == doctest::Approx(oracle_total).epsilon(1e-9));
    double per_node_sum = 0.0;
    for (const auto& [node, joules] : report.per_node_joules) per_node_sum += joules;
    CHECK(report.total_joules == per_node_sum);  // exact, same summation order
  }
}

TEST_CASE("task energy reports a missing trace") {
  TaskSpec spec;
  spec.task_id = "t";
  spec.parallel_work = 1.0;
  TaskRecord record(spec);
  record.add_window({"ghost", 0, kSecond});
  try {
    task_energy(record, {});
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::MissingTrace);
  }
}

TEST_CASE("makespan spans the earliest start to the latest end") {
  TaskSpec spec;
  spec.task_id = "t";
  spec.parallel_work = 1.0;

  TaskRecord one(spec);
  one.add_window({"a", 0, 300 * kSecond});
  CHECK(makespan_seconds({one}) == doctest::Approx(300.0));

  TaskRecord parallel(spec);
  parallel.add_window({"a", 0, 100 * kSecond});
  parallel.add_window({"b", 0, 100 * kSecond});
  parallel.add_window({"c", 0, 100 * kSecond});
  CHECK(makespan_seconds({parallel}) == doctest::Approx(100.0));

  TaskRecord staggered(spec);
  staggered.add_window({"a", 0, 80 * kSecond});
  staggered.add_window({"b", 10 * kSecond, 95 * kSecond});
  staggered.add_window({"c", 20 * kSecond, 120 * kSecond});
  CHECK(makespan_seconds({staggered}) == doctest::Approx(120.0));

  CHECK_THROWS_AS(makespan_seconds({TaskRecord(spec)}), Error);
}
