#ifndef SSYNC_WORLD_HPP_
#define SSYNC_WORLD_HPP_

#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "ssync/automaton.hpp"
#include "ssync/types.hpp"

namespace ssync {

struct AgentState {
  StateId state;
  Cell cell;
  friend constexpr bool operator==(const AgentState&, const AgentState&) = default;
};

/// Static configuration at an integer point in time.
struct Configuration {
  std::uint64_t time = 0;
  std::vector<AgentState> agents;
  friend bool operator==(const Configuration&, const Configuration&) = default;
};

inline std::uint64_t manhattan_distance(Cell a, Cell b) {
  const auto dx = a.x - b.x;
  const auto dy = a.y - b.y;
  return static_cast<std::uint64_t>(dx < 0 ? -dx : dx) + static_cast<std::uint64_t>(dy < 0 ? -dy : dy);
}

/// Every agent at the origin in its initial state, time 0.
Configuration init_configuration(const Automaton& a);

/// States carried by the *other* agents that share agent `i`'s cell.
StateSet sensed_states(std::span<const AgentState> agents, AgentId i);

/// Agents that are not alone in their cell.
AgentSet meeting_set(std::span<const AgentState> agents);

std::uint64_t max_pairwise_distance(std::span<const AgentState> agents);

/// One atomic time step: every agent in `agents` senses the pre-move
/// configuration, then all of them apply delta and move together.
/// Throws std::invalid_argument for an empty set or an unknown agent id.
Configuration activate(const Configuration& c, const Automaton& a, AgentSet agents);

enum class SubscheduleType : std::uint8_t { Meet = 1, Repeat = 2, Escape = 3 };

struct SubscheduleRecord {
  AgentId agent = 0;
  std::uint64_t start_time = 0;
  std::uint64_t end_time = 0;
  SubscheduleType type = SubscheduleType::Meet;
  Cell start_cell;
  Cell end_cell;

  std::uint64_t length() const { return end_time - start_time; }
  friend bool operator==(const SubscheduleRecord&, const SubscheduleRecord&) = default;
};

/// Append-only execution history: one snapshot per time step, the agent set
/// activated between consecutive snapshots, and the subschedule boundaries.
/// The automaton is not owned; serialization takes it as a parameter.
class Trace {
 public:
  Trace() = default;
  explicit Trace(const Configuration& initial);

  std::size_t agent_count() const { return agent_count_; }
  /// Time of the last snapshot (== number of activations).
  std::uint64_t end_time() const { return activations_.size(); }
  bool empty() const { return snapshots_.empty(); }

  std::span<const AgentState> snapshot(std::uint64_t t) const {
    return {snapshots_.data() + t * agent_count_, agent_count_};
  }
  Configuration configuration(std::uint64_t t) const;
  AgentSet activation(std::uint64_t t) const { return activations_.at(t); }
  const std::vector<AgentSet>& activations() const { return activations_; }
  const std::vector<SubscheduleRecord>& records() const { return records_; }

  /// Union of every cell occupied in any snapshot.
  const std::unordered_set<Cell>& explored() const { return explored_; }
  /// Cells occupied in snapshots 0..t.
  std::unordered_set<Cell> explored_until(std::uint64_t t) const;

  void append(AgentSet activated, std::span<const AgentState> after);
  void add_record(const SubscheduleRecord& r);

  friend bool operator==(const Trace& a, const Trace& b) {
    return a.agent_count_ == b.agent_count_ && a.snapshots_ == b.snapshots_ &&
           a.activations_ == b.activations_ && a.records_ == b.records_;
  }

 private:
  std::size_t agent_count_ = 0;
  std::vector<AgentState> snapshots_;
  std::vector<AgentSet> activations_;
  std::vector<SubscheduleRecord> records_;
  std::unordered_set<Cell> explored_;
};

/// A running simulation: current configuration plus the trace recorded so far.
class World {
 public:
  explicit World(const Automaton& a);
  /// Starts from `initial` (its clock reset to 0) instead of the origin.
  /// Throws std::invalid_argument if it does not match the automaton.
  World(const Automaton& a, Configuration initial);

  const Automaton& automaton() const { return *automaton_; }
  const Configuration& configuration() const { return config_; }
  std::uint64_t time() const { return config_.time; }
  const Trace& trace() const { return trace_; }
  Trace take_trace() && { return std::move(trace_); }

  void step(AgentSet agents);
  void step(AgentId agent) {
    AgentSet s;
    s.insert(agent);
    step(s);
  }
  void record(const SubscheduleRecord& r) { trace_.add_record(r); }

 private:
  const Automaton* automaton_;
  Configuration config_;
  Trace trace_;
  std::vector<Transition> pending_;
};

class TraceFormatError : public std::runtime_error {
 public:
  TraceFormatError(const std::string& message, std::size_t line);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Line format, one event per line, byte-deterministic:
///   C <time> <state0> <x0> <y0> <state1> ...
///   A <time> <agent ids comma-separated>
///   B <agent> <start> <end> <type> <sx> <sy> <ex> <ey>
/// For each time t the snapshot comes first, then boundaries ending at t, then
/// the activation at t.
void write_trace(std::ostream& out, const Trace& trace, const Automaton& a);
std::string trace_to_string(const Trace& trace, const Automaton& a);
Trace read_trace(std::istream& in, const Automaton& a);

}  // namespace ssync

#endif  // SSYNC_WORLD_HPP_
