#include <algorithm>
#include <charconv>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>

#include "ssync/world.hpp"

namespace ssync {

TraceFormatError::TraceFormatError(const std::string& message, std::size_t line)
    : std::runtime_error("trace line " + std::to_string(line) + ": " + message), line_(line) {}

namespace {

void put(std::string& out, std::int64_t v) {
  char buf[24];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, end);
}

void put(std::string& out, std::uint64_t v) {
  char buf[24];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, end);
}

void put_record(std::string& out, const SubscheduleRecord& r) {
  out += "B ";
  put(out, std::uint64_t{r.agent});
  out += ' ';
  put(out, r.start_time);
  out += ' ';
  put(out, r.end_time);
  out += ' ';
  put(out, std::uint64_t{static_cast<std::uint8_t>(r.type)});
  for (std::int64_t v : {r.start_cell.x, r.start_cell.y, r.end_cell.x, r.end_cell.y}) {
    out += ' ';
    put(out, v);
  }
  out += '\n';
}

}  // namespace

void write_trace(std::ostream& out, const Trace& trace, const Automaton& a) {
  if (trace.empty()) return;
  const auto& records = trace.records();
  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
    return records[l].end_time < records[r].end_time;
  });
  std::size_t next_record = 0;

  std::string buf;
  for (std::uint64_t t = 0; t <= trace.end_time(); ++t) {
    buf += "C ";
    put(buf, t);
    for (const auto& s : trace.snapshot(t)) {
      buf += ' ';
      buf += a.label(s.state);
      buf += ' ';
      put(buf, s.cell.x);
      buf += ' ';
      put(buf, s.cell.y);
    }
    buf += '\n';
    while (next_record < order.size() && records[order[next_record]].end_time <= t) {
      put_record(buf, records[order[next_record++]]);
    }
    if (t < trace.end_time()) {
      buf += "A ";
      put(buf, t);
      buf += ' ';
      bool first = true;
      trace.activation(t).for_each([&](AgentId i) {
        if (!first) buf += ',';
        put(buf, std::uint64_t{i});
        first = false;
      });
      buf += '\n';
    }
    if (buf.size() > (1u << 16)) {
      out << buf;
      buf.clear();
    }
  }
  while (next_record < order.size()) put_record(buf, records[order[next_record++]]);
  out << buf;
}

std::string trace_to_string(const Trace& trace, const Automaton& a) {
  std::ostringstream out;
  write_trace(out, trace, a);
  return out.str();
}

namespace {

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> parts;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && line[i] == ' ') ++i;
    if (i >= line.size()) break;
    std::size_t j = line.find(' ', i);
    if (j == std::string_view::npos) j = line.size();
    parts.push_back(line.substr(i, j - i));
    i = j;
  }
  return parts;
}

template <class T>
T number(std::string_view s, std::size_t line) {
  T v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw TraceFormatError("malformed number '" + std::string(s) + "'", line);
  }
  return v;
}

}  // namespace

Trace read_trace(std::istream& in, const Automaton& a) {
  const std::size_t n = a.agent_count();
  Trace trace;
  std::vector<AgentState> agents(n);
  std::optional<AgentSet> pending;  // activation awaiting its successor snapshot
  std::uint64_t expected_time = 0;
  std::vector<SubscheduleRecord> records;

  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    if (raw.empty()) continue;
    const auto f = split(raw);
    if (f.empty()) continue;
    if (f[0] == "C") {
      if (f.size() != 2 + 3 * n) throw TraceFormatError("snapshot has wrong field count", line_no);
      const auto t = number<std::uint64_t>(f[1], line_no);
      if (t != expected_time) throw TraceFormatError("snapshot out of order", line_no);
      if (t > 0 && !pending) throw TraceFormatError("snapshot without preceding activation", line_no);
      for (std::size_t i = 0; i < n; ++i) {
        auto q = a.find_state(f[2 + 3 * i]);
        if (!q) throw TraceFormatError("unknown state '" + std::string(f[2 + 3 * i]) + "'", line_no);
        agents[i] = {*q, Cell{number<std::int64_t>(f[3 + 3 * i], line_no),
                              number<std::int64_t>(f[4 + 3 * i], line_no)}};
      }
      if (t == 0) {
        trace = Trace(Configuration{0, agents});
      } else {
        trace.append(*pending, agents);
      }
      pending.reset();
      ++expected_time;
    } else if (f[0] == "A") {
      if (f.size() != 3) throw TraceFormatError("activation has wrong field count", line_no);
      const auto t = number<std::uint64_t>(f[1], line_no);
      if (expected_time == 0 || t != expected_time - 1 || pending) {
        throw TraceFormatError("activation out of order", line_no);
      }
      AgentSet set;
      std::string_view ids = f[2];
      std::size_t start = 0;
      while (start <= ids.size()) {
        std::size_t comma = ids.find(',', start);
        if (comma == std::string_view::npos) comma = ids.size();
        const auto id = number<std::uint64_t>(ids.substr(start, comma - start), line_no);
        if (id >= n) throw TraceFormatError("activation names unknown agent", line_no);
        set.insert(id);
        start = comma + 1;
      }
      pending = set;
    } else if (f[0] == "B") {
      if (f.size() != 9) throw TraceFormatError("boundary has wrong field count", line_no);
      SubscheduleRecord r;
      r.agent = number<std::uint64_t>(f[1], line_no);
      r.start_time = number<std::uint64_t>(f[2], line_no);
      r.end_time = number<std::uint64_t>(f[3], line_no);
      const auto type = number<unsigned>(f[4], line_no);
      if (r.agent >= n) throw TraceFormatError("boundary names unknown agent", line_no);
      if (type < 1 || type > 3) throw TraceFormatError("boundary type must be 1, 2 or 3", line_no);
      r.type = static_cast<SubscheduleType>(type);
      r.start_cell = {number<std::int64_t>(f[5], line_no), number<std::int64_t>(f[6], line_no)};
      r.end_cell = {number<std::int64_t>(f[7], line_no), number<std::int64_t>(f[8], line_no)};
      records.push_back(r);
    } else {
      throw TraceFormatError("unknown record kind '" + std::string(f[0]) + "'", line_no);
    }
  }
  if (expected_time == 0) throw TraceFormatError("trace has no snapshots", line_no);
  if (pending) throw TraceFormatError("trailing activation without snapshot", line_no);
  for (const auto& r : records) {
    if (r.end_time > trace.end_time() || r.start_time > r.end_time) {
      throw TraceFormatError("boundary outside the recorded time range", line_no);
    }
    trace.add_record(r);
  }
  return trace;
}

}  // namespace ssync
