#ifndef SSYNC_SCHEDULER_HPP_
#define SSYNC_SCHEDULER_HPP_

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <variant>

#include "ssync/automaton.hpp"
#include "ssync/world.hpp"

namespace ssync {

/// The scheduled agent would land in an occupied cell after `u_min` steps.
struct Meets {
  std::uint64_t u_min = 0;
  Cell cell;
  friend bool operator==(const Meets&, const Meets&) = default;
};

/// The agent cycles in place; the subschedule ends after `end_steps` steps,
/// in state `q_min`.
struct Recurs {
  std::uint64_t end_steps = 0;
  StateId q_min;
  friend bool operator==(const Recurs&, const Recurs&) = default;
};

/// The agent drifts away forever along `travel_vector`. `settle_steps` is the
/// first step from which the trajectory is exactly periodic.
struct Escapes {
  Vec2 travel_vector;
  std::uint64_t period = 0;
  std::uint64_t settle_steps = 0;
  friend bool operator==(const Escapes&, const Escapes&) = default;
};

using SoloOutcome = std::variant<Meets, Recurs, Escapes>;

/// simulate_solo found no state recurrence within its lookahead.
class ClassificationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ScheduleKind { Adversarial, RoundRobinSingleStep, FullySynchronous };

std::optional<ScheduleKind> parse_schedule_kind(std::string_view name);
std::string_view schedule_kind_name(ScheduleKind kind);

/// Minimum lookahead accepted by simulate_solo: 2N + 2.
inline std::uint64_t solo_lookahead(const Automaton& a) { return 2 * a.state_count() + 2; }

/// Decides how agent `i` would behave if it alone were scheduled from `c`
/// while every other agent stays frozen.
///
/// The walk is simulated until its state sequence repeats. Only the first
/// step can sense frozen agents (it may start in a shared cell); after that
/// the agent is alone until it enters an occupied cell. Once the state
/// repeats, the trajectory is eventually periodic with some displacement v
/// per period:
///   - v == 0: the agent cycles over a finite set of (state, cell) pairs. The
///     smallest cycle state in the automaton's order decides the end step.
///   - v != 0: whether it ever reaches a frozen cell f is decided exactly by
///     solving f = o + m*v (m >= 0) for every offset o of one period.
/// Meeting always takes precedence.
///
/// Throws std::invalid_argument if `bound` < 2N+2, std::out_of_range for a bad
/// agent id, ClassificationError if no recurrence appears within `bound` steps.
SoloOutcome simulate_solo(const Configuration& c, const Automaton& a, AgentId i, std::uint64_t bound);

struct EscapeState {
  AgentId escaping_agent = 0;
  std::uint64_t period = 0;
  bool active = false;
};

struct SubscheduleStep {
  SubscheduleRecord record;
  std::optional<EscapeState> escape;  // set when the subschedule was type 3
};

/// Runs one subschedule of agent `i` on `world`, recording every intermediate
/// snapshot and the boundary record.
SubscheduleStep next_subschedule(World& world, AgentId i);

struct SchedulerStats {
  std::uint64_t solo_classifications = 0;
  std::uint64_t subschedules = 0;
  std::optional<EscapeState> escape;
};

/// Round-robin over subschedules of agents 0..n-1 until time >= horizon
/// (never truncating a subschedule). After a type-3 subschedule the run
/// switches for good to: each other agent one step in ascending id order,
/// then the escaping agent for one travel period.
Trace run_adversarial(const Automaton& a, std::uint64_t horizon, SchedulerStats* stats = nullptr);

/// Every agent activated at every step.
Trace run_synchronous(const Automaton& a, std::uint64_t horizon);

/// Agent t mod n activated at step t.
Trace run_round_robin(const Automaton& a, std::uint64_t horizon);

Trace run_schedule(ScheduleKind kind, const Automaton& a, std::uint64_t horizon,
                   SchedulerStats* stats = nullptr);

}  // namespace ssync

#endif  // SSYNC_SCHEDULER_HPP_
