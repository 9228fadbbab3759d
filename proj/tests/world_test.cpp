#include <gtest/gtest.h>

#include <sstream>

#include "ssync/automaton.hpp"
#include "ssync/harness.hpp"
#include "ssync/scheduler.hpp"
#include "ssync/world.hpp"

namespace ssync {
namespace {

constexpr std::string_view kSwap =
    "states: q0 q1\n"
    "agents: q0 q1\n"
    "delta q0 {q1} -> q0 N\n"
    "delta q0 * -> q0 0\n"
    "delta q1 {q0} -> q1 E\n"
    "delta q1 * -> q1 0\n";

AgentSet agents(std::initializer_list<AgentId> ids) {
  AgentSet s;
  for (AgentId i : ids) s.insert(i);
  return s;
}

TEST(ManhattanDistance, Examples) {
  EXPECT_EQ(manhattan_distance({0, 0}, {0, 0}), 0u);
  EXPECT_EQ(manhattan_distance({0, 0}, {3, -4}), 7u);
  EXPECT_EQ(manhattan_distance({-2, 5}, {1, 5}), 3u);
}

TEST(InitConfiguration, AllAtOrigin) {
  const Automaton east = load_automaton("east1");
  const Configuration c = init_configuration(east);
  EXPECT_EQ(c.time, 0u);
  ASSERT_EQ(c.agents.size(), 3u);
  for (const auto& s : c.agents) EXPECT_EQ(s, (AgentState{StateId{0}, Cell{0, 0}}));

  const Automaton one = parse_automaton("states: s\nagents: s\ndelta s * -> s 0\n");
  EXPECT_EQ(init_configuration(one).agents.size(), 1u);

  const Automaton zig = parse_automaton("states: z1 z2\nagents: z1 z2 z1\ndelta z1 * -> z2 N\ndelta z2 * -> z1 E\n");
  const auto c3 = init_configuration(zig);
  EXPECT_EQ(c3.agents[0].state, StateId{0});
  EXPECT_EQ(c3.agents[1].state, StateId{1});
  EXPECT_EQ(c3.agents[2].state, StateId{0});

  const World w(zig);
  EXPECT_EQ(w.trace().explored().size(), 1u);
  EXPECT_TRUE(w.trace().explored().contains(Cell{0, 0}));
}

TEST(SensedStates, ExcludesSelfAndIgnoresMultiplicity) {
  std::vector<AgentState> s = {{StateId{0}, {0, 0}}, {StateId{1}, {0, 0}}, {StateId{1}, {0, 0}}, {StateId{0}, {1, 0}}};
  EXPECT_EQ(sensed_states(s, 0).bits(), 0b10u);
  EXPECT_EQ(sensed_states(s, 1).bits(), 0b11u);
  EXPECT_TRUE(sensed_states(s, 3).empty());
  EXPECT_EQ(meeting_set(s).bits(), 0b0111u);
}

TEST(Activate, SingleAgent) {
  const Automaton east = load_automaton("east1");
  const Configuration c = activate(init_configuration(east), east, agents({0}));
  EXPECT_EQ(c.time, 1u);
  EXPECT_EQ(c.agents[0].cell, (Cell{1, 0}));
  EXPECT_EQ(c.agents[1].cell, (Cell{0, 0}));
  EXPECT_EQ(c.agents[2].cell, (Cell{0, 0}));
}

TEST(Activate, SenseBeforeMove) {
  const Automaton a = parse_automaton(kSwap);
  const Configuration c = activate(init_configuration(a), a, agents({0, 1}));
  EXPECT_EQ(c.agents[0].cell, (Cell{0, 1}));
  EXPECT_EQ(c.agents[1].cell, (Cell{1, 0}));

  // Sequential: agent 1 acts after agent 0 already left.
  const Configuration s = activate(activate(init_configuration(a), a, agents({0})), a, agents({1}));
  EXPECT_EQ(s.agents[0].cell, (Cell{0, 1}));
  EXPECT_EQ(s.agents[1].cell, (Cell{0, 0}));
}

TEST(Activate, StayAgentsStayTogether) {
  const Automaton stay = load_automaton("stay1");
  const Configuration c = activate(init_configuration(stay), stay, agents({0, 1, 2}));
  EXPECT_EQ(c.time, 1u);
  for (const auto& s : c.agents) EXPECT_EQ(s.cell, (Cell{0, 0}));
}

TEST(Activate, RejectsBadSets) {
  const Automaton stay = load_automaton("stay1");
  EXPECT_THROW(activate(init_configuration(stay), stay, AgentSet{}), std::invalid_argument);
  EXPECT_THROW(activate(init_configuration(stay), stay, agents({3})), std::invalid_argument);
  World w(stay);
  EXPECT_THROW(w.step(AgentSet{}), std::invalid_argument);
}

TEST(World, MatchesActivateAndRecordsExplored) {
  const Automaton zig = load_automaton("zig2");
  World w(zig);
  Configuration c = init_configuration(zig);
  const std::vector<AgentSet> plan = {agents({0}), agents({0, 1}), agents({2}), agents({0, 1, 2}), agents({1})};
  for (AgentSet s : plan) {
    w.step(s);
    c = activate(c, zig, s);
    EXPECT_EQ(w.configuration(), c);
  }
  EXPECT_EQ(w.trace().end_time(), plan.size());
  EXPECT_EQ(w.trace().explored(), w.trace().explored_until(w.trace().end_time()));
}

// Replaying recorded activations reproduces every snapshot; explored grows
// monotonically by at most the number of activated agents; moves are unit.
TEST(WorldProperty, ReplayAndMonotonicity) {
  SplitMix64 rng(11);
  for (int k = 0; k < 40; ++k) {
    const Automaton a = random_automaton(rng, 4, 3);
    World w(a);
    for (int t = 0; t < 200; ++t) {
      AgentSet s = AgentSet::from_bits(1 + rng.uniform(7));
      w.step(s);
    }
    const Trace& tr = w.trace();
    Configuration c = init_configuration(a);
    std::size_t explored = 1;
    for (std::uint64_t t = 0; t < tr.end_time(); ++t) {
      const Configuration next = activate(c, a, tr.activation(t));
      ASSERT_EQ(next, tr.configuration(t + 1));
      for (std::size_t i = 0; i < c.agents.size(); ++i) {
        ASSERT_LE(manhattan_distance(c.agents[i].cell, next.agents[i].cell), 1u);
      }
      const std::size_t grown = tr.explored_until(t + 1).size();
      ASSERT_GE(grown, explored);
      ASSERT_LE(grown - explored, tr.activation(t).size());
      explored = grown;
      c = next;
    }
  }
}

TEST(TraceIo, RoundTrip) {
  const Automaton zig = load_automaton("zig2");
  const Trace tr = run_adversarial(zig, 40);
  const std::string text = trace_to_string(tr, zig);
  std::istringstream in(text);
  const Trace back = read_trace(in, zig);
  EXPECT_EQ(back, tr);
  EXPECT_EQ(trace_to_string(back, zig), text);
}

TEST(TraceIo, Format) {
  const Automaton east = load_automaton("east1");
  World w(east);
  w.step(agents({0, 2}));
  EXPECT_EQ(trace_to_string(w.trace(), east), "C 0 e 0 0 e 0 0 e 0 0\nA 0 0,2\nC 1 e 1 0 e 0 0 e 1 0\n");
}

TEST(TraceIo, RejectsMalformedInput) {
  const Automaton east = load_automaton("east1");
  auto parse = [&](const std::string& s) {
    std::istringstream in(s);
    return read_trace(in, east);
  };
  EXPECT_THROW(parse(""), TraceFormatError);
  EXPECT_THROW(parse("C 0 e 0 0 e 0 0\n"), TraceFormatError);
  EXPECT_THROW(parse("C 0 e 0 0 e 0 0 x 0 0\n"), TraceFormatError);
  EXPECT_THROW(parse("C 0 e 0 0 e 0 0 e 0 0\nC 1 e 0 0 e 0 0 e 0 0\n"), TraceFormatError);
  EXPECT_THROW(parse("C 0 e 0 0 e 0 0 e 0 0\nA 0 5\nC 1 e 0 0 e 0 0 e 0 0\n"), TraceFormatError);
  EXPECT_THROW(parse("C 0 e 0 0 e 0 0 e 0 0\nA 0 0\n"), TraceFormatError);
  EXPECT_THROW(parse("C 0 e 0 0 e 0 0 e 0 0\nB 0 0 1 1 0 0 0 0\n"), TraceFormatError);
  EXPECT_THROW(parse("C 0 e 0 0 e 0 0 e 0 0\nZ\n"), TraceFormatError);
  EXPECT_THROW(parse("C 0 e 0 0 e 0 zz e 0 0\n"), TraceFormatError);
  EXPECT_NO_THROW(parse("   \nC 0 e 0 0 e 0 0 e 0 0\n"));
}

}  // namespace
}  // namespace ssync
