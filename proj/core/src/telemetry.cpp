#include "tiersim/telemetry.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace tiersim {

const char* lifecycle_kind_name(LifecycleKind kind) {
  switch (kind) {
    case LifecycleKind::Placed: return "placed";
    case LifecycleKind::Started: return "started";
    case LifecycleKind::MigrationStarted: return "migration_started";
    case LifecycleKind::MigrationFinished: return "migration_finished";
    case LifecycleKind::Finished: return "finished";
    case LifecycleKind::Failed: return "failed";
  }
  return "?";
}

std::optional<LifecycleKind> lifecycle_kind_from_name(std::string_view name) {
  if (name == "placed") return LifecycleKind::Placed;
  if (name == "started") return LifecycleKind::Started;
  if (name == "migration_started") return LifecycleKind::MigrationStarted;
  if (name == "migration_finished") return LifecycleKind::MigrationFinished;
  if (name == "finished") return LifecycleKind::Finished;
  if (name == "failed") return LifecycleKind::Failed;
  return std::nullopt;
}

MetricsStore::MetricsStore(const std::vector<std::string>& node_ids) {
  for (const std::string& id : node_ids) logs_.emplace(id, std::make_unique<NodeLog>());
}

MetricsStore MetricsStore::for_cluster(const ClusterState& cluster) {
  std::vector<std::string> ids;
  for (const auto& [id, spec] : cluster.nodes()) ids.push_back(id);
  return MetricsStore(ids);
}

MetricsStore::NodeLog& MetricsStore::log(const std::string& node_id) const {
  auto it = logs_.find(node_id);
  if (it == logs_.end()) throw Error(Errc::UnknownNode, node_id);
  return *it->second;
}

void MetricsStore::append_sample(const std::string& node_id, PowerSample sample) {
  if (!std::isfinite(sample.watts) || sample.watts < 0.0)
    throw Error(Errc::InvalidSpec, node_id + ": watts must be finite and >= 0");
  NodeLog& l = log(node_id);
  std::lock_guard lock(l.mu);
  if (!l.power.empty() && l.power.back().timestamp >= sample.timestamp)
    throw Error(Errc::NonMonotonicTimestamp, node_id + ": power sample out of order");
  l.power.push_back(sample);
}

void MetricsStore::append_metrics(const std::string& node_id, ResourceMetrics metrics) {
  NodeLog& l = log(node_id);
  std::lock_guard lock(l.mu);
  if (!l.metrics.empty() && l.metrics.back().timestamp >= metrics.timestamp)
    throw Error(Errc::NonMonotonicTimestamp, node_id + ": resource metrics out of order");
  l.metrics.push_back(metrics);
}

void MetricsStore::append_event(LifecycleEvent event) {
  std::lock_guard lock(*events_mu_);
  events_.push_back(std::move(event));
}

PowerTrace MetricsStore::query_window(const std::string& node_id, TimeWindow window) const {
  const NodeLog& l = log(node_id);
  std::lock_guard lock(l.mu);
  PowerTrace trace;
  trace.node_id = node_id;

  const auto& power = l.power;
  auto first = std::lower_bound(
      power.begin(), power.end(), window.start,
      [](const PowerSample& s, Micros t) { return s.timestamp < t; });
  auto last = std::upper_bound(
      power.begin(), power.end(), window.end,
      [](Micros t, const PowerSample& s) { return t < s.timestamp; });
  // Bracketing samples just outside the window, when present.
  if (first != power.begin()) --first;
  if (last != power.end()) ++last;
  trace.samples.assign(first, last);
  return trace;
}

PowerTrace MetricsStore::full_trace(const std::string& node_id) const {
  const NodeLog& l = log(node_id);
  std::lock_guard lock(l.mu);
  PowerTrace trace;
  trace.node_id = node_id;
  trace.samples = l.power;
  return trace;
}

std::map<std::string, PowerTrace> MetricsStore::all_traces() const {
  std::map<std::string, PowerTrace> out;
  for (const auto& [id, log] : logs_) out.emplace(id, full_trace(id));
  return out;
}

std::vector<ResourceMetrics> MetricsStore::metrics_tail(const std::string& node_id,
                                                        std::size_t count) const {
  const NodeLog& l = log(node_id);
  std::lock_guard lock(l.mu);
  const auto& metrics = l.metrics;
  const std::size_t n = std::min(count, metrics.size());
  return std::vector<ResourceMetrics>(metrics.end() - n, metrics.end());
}

std::vector<LifecycleEvent> MetricsStore::events() const {
  std::lock_guard lock(*events_mu_);
  return events_;
}

std::vector<std::string> MetricsStore::node_ids() const {
  std::vector<std::string> out;
  for (const auto& [id, log] : logs_) out.push_back(id);
  return out;
}

std::string format_decimal(double value, int max_frac) {
  // std::to_chars keeps the output locale-independent.
  char buf[64];
  const auto [ptr, ec] =
      std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::fixed, max_frac);
  std::string s(buf, ptr);
  const auto dot = s.find('.');
  if (dot != std::string::npos) {
    std::size_t last = s.size();
    while (last > dot + 2 && s[last - 1] == '0') --last;
    s.erase(last);
  }
  if (s == "-0.0") s = "0.0";
  return s;
}

namespace {

[[noreturn]] void parse_fail(const std::string& origin, std::size_t line, const std::string& what) {
  std::ostringstream oss;
  if (!origin.empty()) oss << origin << ":";
  oss << "line " << line << ": " << what;
  throw Error(Errc::ParseError, oss.str());
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

std::int64_t parse_int(const std::string& field, const std::string& origin, std::size_t line) {
  std::int64_t value = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size())
    parse_fail(origin, line, "expected integer, got '" + field + "'");
  return value;
}

double parse_double(const std::string& field, const std::string& origin, std::size_t line) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size() || !std::isfinite(value))
    parse_fail(origin, line, "expected finite number, got '" + field + "'");
  return value;
}

// Iterates LF-terminated lines; a trailing line without '\n' still counts.
std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    const std::size_t pos = text.find('\n', start);
    if (pos == std::string::npos) {
      lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
  return lines;
}

constexpr const char* kPowerHeader = "node_id,timestamp_us,watts";
constexpr const char* kEventsHeader = "timestamp_us,task_id,kind,node_ids";

}  // namespace

std::string power_csv(const std::map<std::string, PowerTrace>& traces) {
  std::string out = std::string(kPowerHeader) + "\n";
  for (const auto& [node_id, trace] : traces) {
    for (const PowerSample& s : trace.samples) {
      out += node_id;
      out += ',';
      out += std::to_string(s.timestamp);
      out += ',';
      out += format_decimal(s.watts);
      out += '\n';
    }
  }
  return out;
}

std::map<std::string, PowerTrace> parse_power_csv(const std::string& text,
                                                  const std::string& origin) {
  const std::vector<std::string> lines = lines_of(text);
  if (lines.empty() || lines[0] != kPowerHeader)
    parse_fail(origin, 1, std::string("expected header '") + kPowerHeader + "'");

  std::map<std::string, PowerTrace> traces;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    if (line.empty()) continue;
    const std::size_t line_no = i + 1;
    const auto fields = split(line, ',');
    if (fields.size() != 3) parse_fail(origin, line_no, "expected 3 fields");
    if (fields[0].empty()) parse_fail(origin, line_no, "empty node_id");
    const Micros ts = parse_int(fields[1], origin, line_no);
    const double watts = parse_double(fields[2], origin, line_no);
    if (watts < 0.0) parse_fail(origin, line_no, "watts must be >= 0");

    PowerTrace& trace = traces[fields[0]];
    if (trace.node_id.empty()) trace.node_id = fields[0];
    if (!trace.samples.empty() && trace.samples.back().timestamp >= ts)
      parse_fail(origin, line_no, "timestamps must be strictly increasing per node");
    trace.samples.push_back(PowerSample{ts, watts});
  }
  return traces;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
  std::ostringstream oss;
  oss << in.rdbuf();
  if (in.bad()) throw Error(Errc::IoError, "cannot read " + path.string());
  return oss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::IoError, "cannot open " + path.string() + " for writing");
  out << text;
  out.flush();
  if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
}

std::map<std::string, PowerTrace> load_power_csv(const std::filesystem::path& path) {
  return parse_power_csv(read_text_file(path), path.string());
}

void dump_power_csv(const std::map<std::string, PowerTrace>& traces,
                    const std::filesystem::path& path) {
  write_text_file(path, power_csv(traces));
}

std::string events_csv(const std::vector<LifecycleEvent>& events) {
  std::string out = std::string(kEventsHeader) + "\n";
  for (const LifecycleEvent& e : events) {
    out += std::to_string(e.timestamp);
    out += ',';
    out += e.task_id;
    out += ',';
    out += lifecycle_kind_name(e.kind);
    out += ',';
    for (std::size_t i = 0; i < e.node_ids.size(); ++i) {
      if (i > 0) out += ';';
      out += e.node_ids[i];
    }
    out += '\n';
  }
  return out;
}

std::vector<LifecycleEvent> parse_events_csv(const std::string& text, const std::string& origin) {
  const std::vector<std::string> lines = lines_of(text);
  if (lines.empty() || lines[0] != kEventsHeader)
    parse_fail(origin, 1, std::string("expected header '") + kEventsHeader + "'");

  std::vector<LifecycleEvent> events;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    if (line.empty()) continue;
    const std::size_t line_no = i + 1;
    const auto fields = split(line, ',');
    if (fields.size() != 4) parse_fail(origin, line_no, "expected 4 fields");

    LifecycleEvent event;
    event.timestamp = parse_int(fields[0], origin, line_no);
    event.task_id = fields[1];
    const auto kind = lifecycle_kind_from_name(fields[2]);
    if (!kind) parse_fail(origin, line_no, "unknown event kind '" + fields[2] + "'");
    event.kind = *kind;
    if (!fields[3].empty()) event.node_ids = split(fields[3], ';');
    events.push_back(std::move(event));
  }
  return events;
}

std::vector<LifecycleEvent> load_events_csv(const std::filesystem::path& path) {
  return parse_events_csv(read_text_file(path), path.string());
}

void dump_events_csv(const std::vector<LifecycleEvent>& events,
                     const std::filesystem::path& path) {
  write_text_file(path, events_csv(events));
}

}  // namespace tiersim
