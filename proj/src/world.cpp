#include "ssync/world.hpp"

#include <algorithm>

namespace ssync {

Configuration init_configuration(const Automaton& a) {
  Configuration c;
  c.time = 0;
  c.agents.reserve(a.agent_count());
  for (StateId q : a.initial_states()) c.agents.push_back({q, Cell{0, 0}});
  return c;
}

StateSet sensed_states(std::span<const AgentState> agents, AgentId i) {
  StateSet sensed;
  const Cell here = agents[i].cell;
  for (std::size_t j = 0; j < agents.size(); ++j) {
    if (j != i && agents[j].cell == here) sensed.insert(agents[j].state);
  }
  return sensed;
}

AgentSet meeting_set(std::span<const AgentState> agents) {
  AgentSet m;
  for (std::size_t i = 0; i < agents.size(); ++i) {
    for (std::size_t j = i + 1; j < agents.size(); ++j) {
      if (agents[i].cell == agents[j].cell) {
        m.insert(i);
        m.insert(j);
      }
    }
  }
  return m;
}

std::uint64_t max_pairwise_distance(std::span<const AgentState> agents) {
  std::uint64_t best = 0;
  for (std::size_t i = 0; i < agents.size(); ++i) {
    for (std::size_t j = i + 1; j < agents.size(); ++j) {
      best = std::max(best, manhattan_distance(agents[i].cell, agents[j].cell));
    }
  }
  return best;
}

namespace {

void check_activation(AgentSet agents, std::size_t n) {
  if (agents.empty()) throw std::invalid_argument("activation of an empty agent set");
  if (n < 64 && (agents.bits() >> n) != 0) throw std::invalid_argument("activation names an unknown agent");
}

}  // namespace

Configuration activate(const Configuration& c, const Automaton& a, AgentSet agents) {
  check_activation(agents, c.agents.size());
  Configuration next = c;
  agents.for_each([&](AgentId i) {
    const Transition t = a.lookup(c.agents[i].state, sensed_states(c.agents, i));
    next.agents[i].state = t.next;
    next.agents[i].cell += displacement(t.move);
  });
  ++next.time;
  return next;
}

Trace::Trace(const Configuration& initial) : agent_count_(initial.agents.size()) {
  snapshots_ = initial.agents;
  for (const auto& s : initial.agents) explored_.insert(s.cell);
}

Configuration Trace::configuration(std::uint64_t t) const {
  auto s = snapshot(t);
  return Configuration{t, {s.begin(), s.end()}};
}

std::unordered_set<Cell> Trace::explored_until(std::uint64_t t) const {
  std::unordered_set<Cell> cells;
  const std::uint64_t last = std::min(t, end_time());
  for (std::uint64_t k = 0; k <= last && !snapshots_.empty(); ++k) {
    for (const auto& s : snapshot(k)) cells.insert(s.cell);
  }
  return cells;
}

void Trace::append(AgentSet activated, std::span<const AgentState> after) {
  activations_.push_back(activated);
  snapshots_.insert(snapshots_.end(), after.begin(), after.end());
  activated.for_each([&](AgentId i) {
    if (i < after.size()) explored_.insert(after[i].cell);
  });
}

void Trace::add_record(const SubscheduleRecord& r) { records_.push_back(r); }

World::World(const Automaton& a)
    : automaton_(&a), config_(init_configuration(a)), trace_(config_) {
  pending_.resize(config_.agents.size());
}

World::World(const Automaton& a, Configuration initial)
    : automaton_(&a), config_(std::move(initial)) {
  config_.time = 0;
  trace_ = Trace(config_);
  if (config_.agents.size() != a.agent_count()) throw std::invalid_argument("configuration has wrong agent count");
  for (const auto& s : config_.agents) {
    if (s.state.index >= a.state_count()) throw std::invalid_argument("configuration uses an unknown state");
  }
  pending_.resize(config_.agents.size());
}

void World::step(AgentSet agents) {
  check_activation(agents, config_.agents.size());
  // sense everything first, then move
  agents.for_each([&](AgentId i) {
    pending_[i] = automaton_->lookup(config_.agents[i].state, sensed_states(config_.agents, i));
  });
  agents.for_each([&](AgentId i) {
    config_.agents[i].state = pending_[i].next;
    config_.agents[i].cell += displacement(pending_[i].move);
  });
  ++config_.time;
  trace_.append(agents, config_.agents);
}

}  // namespace ssync
