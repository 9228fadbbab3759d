#include "ssync/scheduler.hpp"

#include <algorithm>
#include <string>
#include <vector>

namespace ssync {

std::optional<ScheduleKind> parse_schedule_kind(std::string_view name) {
  if (name == "adversarial") return ScheduleKind::Adversarial;
  if (name == "sync" || name == "synchronous") return ScheduleKind::FullySynchronous;
  if (name == "round-robin" || name == "rr") return ScheduleKind::RoundRobinSingleStep;
  return std::nullopt;
}

std::string_view schedule_kind_name(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::Adversarial: return "adversarial";
    case ScheduleKind::FullySynchronous: return "sync";
    case ScheduleKind::RoundRobinSingleStep: return "round-robin";
  }
  return "?";
}

namespace {

// Integer m with d == m * v, if any. v must be nonzero.
std::optional<std::int64_t> multiple_of(Vec2 d, Vec2 v) {
  if (v.x != 0) {
    if (d.x % v.x != 0) return std::nullopt;
    const std::int64_t m = d.x / v.x;
    if (d.y != m * v.y) return std::nullopt;
    return m;
  }
  if (d.x != 0 || d.y % v.y != 0) return std::nullopt;
  return d.y / v.y;
}

bool separated(std::span<const AgentState> agents, AgentId i, Vec2 v, std::uint64_t period) {
  const auto k = static_cast<std::int64_t>(period);
  const Cell me = agents[i].cell;
  for (std::size_t r = 0; r < agents.size(); ++r) {
    if (r == i) continue;
    const std::int64_t dx = me.x - agents[r].cell.x;
    const std::int64_t dy = me.y - agents[r].cell.y;
    if (v.x > 0 && !(dx > k)) return false;
    if (v.x < 0 && !(dx < -k)) return false;
    if (v.y > 0 && !(dy > k)) return false;
    if (v.y < 0 && !(dy < -k)) return false;
  }
  return true;
}

}  // namespace

SoloOutcome simulate_solo(const Configuration& c, const Automaton& a, AgentId i, std::uint64_t bound) {
  if (i >= c.agents.size()) throw std::out_of_range("agent id " + std::to_string(i) + " out of range");
  if (bound < solo_lookahead(a)) {
    throw std::invalid_argument("solo lookahead " + std::to_string(bound) + " is below 2N+2");
  }

  std::vector<Cell> frozen;
  frozen.reserve(c.agents.size());
  for (std::size_t j = 0; j < c.agents.size(); ++j) {
    if (j != i && std::find(frozen.begin(), frozen.end(), c.agents[j].cell) == frozen.end()) {
      frozen.push_back(c.agents[j].cell);
    }
  }
  auto occupied = [&](Cell p) { return std::find(frozen.begin(), frozen.end(), p) != frozen.end(); };

  const StateSet first_sensed = sensed_states(c.agents, i);
  StateId s = c.agents[i].state;
  Cell p = c.agents[i].cell;
  std::vector<StateId> states{s};
  std::vector<Cell> cells{p};

  // Step 0 only belongs to the periodic part when its own step sensed
  // nothing; otherwise the walk from step 1 on is a function of state alone.
  std::vector<std::int64_t> seen(a.state_count(), -1);
  if (first_sensed.empty()) seen[s.index] = 0;

  std::uint64_t cycle_start = 0;
  std::uint64_t cycle_end = 0;
  for (std::uint64_t step = 1; step <= bound; ++step) {
    const Transition t = a.lookup(s, step == 1 ? first_sensed : StateSet{});
    s = t.next;
    p += displacement(t.move);
    states.push_back(s);
    cells.push_back(p);
    if (occupied(p)) return Meets{step, p};
    if (seen[s.index] >= 0) {
      cycle_start = static_cast<std::uint64_t>(seen[s.index]);
      cycle_end = step;
      break;
    }
    seen[s.index] = static_cast<std::int64_t>(step);
  }
  if (cycle_end == 0) {
    throw ClassificationError("agent " + std::to_string(i) + " did not repeat a state within " +
                              std::to_string(bound) + " steps");
  }

  const std::uint64_t period = cycle_end - cycle_start;
  const Vec2 travel = cells[cycle_end] - cells[cycle_start];

  if (travel.is_zero()) {
    std::uint64_t best = cycle_start;
    for (std::uint64_t j = cycle_start + 1; j < cycle_end; ++j) {
      if (a.rank(states[j]) < a.rank(states[best])) best = j;
    }
    // Occupying the pair at step 0 does not end the subschedule.
    return Recurs{best > 0 ? best : period, states[best]};
  }

  // Every step up to cycle_end has been checked directly; beyond that the
  // position at step cycle_start + r + m*period is cells[cycle_start + r] + m*travel.
  std::optional<Meets> first;
  for (Cell f : frozen) {
    for (std::uint64_t r = 0; r < period; ++r) {
      const auto m = multiple_of(f - cells[cycle_start + r], travel);
      if (!m || *m < 0) continue;
      const std::uint64_t when = cycle_start + r + static_cast<std::uint64_t>(*m) * period;
      if (when > 0 && (!first || when < first->u_min)) first = Meets{when, f};
    }
  }
  if (first) return *first;
  return Escapes{travel, period, cycle_start};
}

SubscheduleStep next_subschedule(World& world, AgentId i) {
  const Automaton& a = world.automaton();
  const SoloOutcome outcome = simulate_solo(world.configuration(), a, i, solo_lookahead(a));

  SubscheduleStep out;
  SubscheduleRecord& rec = out.record;
  rec.agent = i;
  rec.start_time = world.time();
  rec.start_cell = world.configuration().agents[i].cell;

  if (const auto* m = std::get_if<Meets>(&outcome)) {
    rec.type = SubscheduleType::Meet;
    for (std::uint64_t k = 0; k < m->u_min; ++k) world.step(i);
    if (!meeting_set(world.configuration().agents).contains(i)) {
      throw std::logic_error("type-1 subschedule ended without a meeting");
    }
  } else if (const auto* r = std::get_if<Recurs>(&outcome)) {
    rec.type = SubscheduleType::Repeat;
    for (std::uint64_t k = 0; k < r->end_steps; ++k) world.step(i);
  } else {
    const auto& e = std::get<Escapes>(outcome);
    rec.type = SubscheduleType::Escape;
    // Stop only once the walk is periodic, so the special rule starts from a
    // point where one travel period moves the agent by exactly the travel vector.
    const std::uint64_t earliest = std::max<std::uint64_t>(1, e.settle_steps);
    std::uint64_t steps = 0;
    do {
      world.step(i);
      ++steps;
    } while (steps < earliest || !separated(world.configuration().agents, i, e.travel_vector, e.period));
    out.escape = EscapeState{i, e.period, true};
  }

  rec.end_time = world.time();
  rec.end_cell = world.configuration().agents[i].cell;
  world.record(rec);
  return out;
}

Trace run_adversarial(const Automaton& a, std::uint64_t horizon, SchedulerStats* stats) {
  if (horizon == 0) throw std::invalid_argument("horizon must be positive");
  World world(a);
  const std::size_t n = a.agent_count();
  SchedulerStats local;
  SchedulerStats& st = stats ? *stats : local;
  st = SchedulerStats{};

  AgentId next = 0;
  while (world.time() < horizon && !st.escape) {
    auto step = next_subschedule(world, next);
    ++st.solo_classifications;
    ++st.subschedules;
    if (step.escape) st.escape = step.escape;
    next = (next + 1) % n;
  }

  if (st.escape) {
    // Special rule; the horizon is checked between its units.
    const AgentId runner = st.escape->escaping_agent;
    while (world.time() < horizon) {
      for (AgentId r = 0; r < n && world.time() < horizon; ++r) {
        if (r != runner) world.step(r);
      }
      if (world.time() >= horizon) break;
      for (std::uint64_t k = 0; k < st.escape->period; ++k) world.step(runner);
    }
  }
  return std::move(world).take_trace();
}

namespace {

AgentSet all_agents(std::size_t n) {
  return AgentSet::from_bits(n >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1);
}

}  // namespace

Trace run_synchronous(const Automaton& a, std::uint64_t horizon) {
  if (horizon == 0) throw std::invalid_argument("horizon must be positive");
  World world(a);
  const AgentSet everyone = all_agents(a.agent_count());
  for (std::uint64_t t = 0; t < horizon; ++t) world.step(everyone);
  return std::move(world).take_trace();
}

Trace run_round_robin(const Automaton& a, std::uint64_t horizon) {
  if (horizon == 0) throw std::invalid_argument("horizon must be positive");
  World world(a);
  for (std::uint64_t t = 0; t < horizon; ++t) world.step(static_cast<AgentId>(t % a.agent_count()));
  return std::move(world).take_trace();
}

Trace run_schedule(ScheduleKind kind, const Automaton& a, std::uint64_t horizon, SchedulerStats* stats) {
  switch (kind) {
    case ScheduleKind::Adversarial: return run_adversarial(a, horizon, stats);
    case ScheduleKind::FullySynchronous: return run_synchronous(a, horizon);
    case ScheduleKind::RoundRobinSingleStep: return run_round_robin(a, horizon);
  }
  throw std::invalid_argument("unknown schedule kind");
}

}  // namespace ssync
