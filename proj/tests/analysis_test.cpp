#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "ssync/analysis.hpp"
#include "ssync/harness.hpp"
#include "ssync/scheduler.hpp"

namespace ssync {
namespace {

AgentSet agents(std::initializer_list<AgentId> ids) {
  AgentSet s;
  for (AgentId i : ids) s.insert(i);
  return s;
}

// Trace from explicit cells; every agent stays in state 0 unless `states`
// gives per-step states.
Trace make_trace(const std::vector<std::vector<Cell>>& cells, const std::vector<AgentSet>& acts) {
  auto snap = [](const std::vector<Cell>& cs) {
    std::vector<AgentState> s;
    for (Cell c : cs) s.push_back({StateId{0}, c});
    return s;
  };
  Trace tr(Configuration{0, snap(cells[0])});
  for (std::size_t t = 1; t < cells.size(); ++t) {
    const auto s = snap(cells[t]);
    tr.append(acts[t - 1], s);
  }
  return tr;
}

// Four steps per cycle, shifted by (3,3) each cycle: agent 1 travels from
// agent 0 to agent 2, then agent 0's successor position is set up so that
// agent 1 travels back. Travel pair starts alternate between two Q-tuples.
Trace periodic_trace(int cycles) {
  std::vector<std::vector<Cell>> cells;
  std::vector<AgentSet> acts;
  for (int m = 0; m < cycles; ++m) {
    const Vec2 o{3 * m, 3 * m};
    cells.push_back({o, o, o + Vec2{5, 0}});
    cells.push_back({o, o + Vec2{2, 0}, o + Vec2{5, 0}});
    cells.push_back({o, o + Vec2{5, 0}, o + Vec2{5, 0}});
    cells.push_back({o, o + Vec2{5, 0}, o + Vec2{4, 2}});
    acts.push_back(agents({1}));
    acts.push_back(agents({1}));
    acts.push_back(agents({2}));
    acts.push_back(agents({0, 1}));
  }
  const Vec2 o{3 * cycles, 3 * cycles};
  cells.push_back({o, o, o + Vec2{5, 0}});
  return make_trace(cells, acts);
}

TEST(TravelVector, Builtins) {
  const Automaton east = load_automaton("east1");
  EXPECT_EQ(detect_travel_vector(east, StateId{0}), (TravelVector{{1, 0}, 1}));
  const Automaton zig = load_automaton("zig2");
  EXPECT_EQ(detect_travel_vector(zig, StateId{0}), (TravelVector{{1, 1}, 2}));
  EXPECT_FALSE(detect_travel_vector(load_automaton("stay1"), StateId{0}));

  EXPECT_EQ(enumerate_travel_vectors(east), (std::set<TravelVector>{{{1, 0}, 1}}));
  EXPECT_EQ(enumerate_travel_vectors(zig), (std::set<TravelVector>{{{1, 1}, 2}}));
  EXPECT_TRUE(enumerate_travel_vectors(load_automaton("stay1")).empty());
}

// Fit the drift of a long solo walk: minimal period of the state sequence in
// the tail and the displacement over it.
std::optional<TravelVector> brute_force_travel(const Automaton& a, StateId q0) {
  constexpr int kSteps = 10000;
  std::vector<StateId> qs{q0};
  std::vector<Cell> ps{Cell{}};
  for (int t = 0; t < kSteps; ++t) {
    const Transition tr = a.apply(qs.back(), StateSet{});
    qs.push_back(tr.next);
    ps.push_back(ps.back() + displacement(tr.move));
  }
  const std::size_t base = kSteps / 2;
  std::size_t p = 1;
  while (qs[base + p] != qs[base]) ++p;
  const Vec2 v = ps[base + p] - ps[base];
  if (v.is_zero()) return std::nullopt;
  return TravelVector{v, p};
}

TEST(TravelVectorProperty, MatchesBruteForce) {
  SplitMix64 rng(99);
  int moving = 0;
  for (int k = 0; k < 300; ++k) {
    const Automaton a = random_automaton(rng, 6, 3);
    for (std::uint32_t q = 0; q < a.state_count(); ++q) {
      const auto got = detect_travel_vector(a, StateId{q});
      ASSERT_EQ(got, brute_force_travel(a, StateId{q})) << a.to_text();
      if (got) {
        ++moving;
        EXPECT_LE(got->period, a.state_count());
      }
    }
  }
  EXPECT_GT(moving, 50);
}

TEST(Slope, ParseAndNormalize) {
  EXPECT_EQ(Slope::parse("2/4"), Slope::ratio(1, 2));
  EXPECT_EQ(Slope::parse("-3"), Slope::ratio(-3, 1));
  EXPECT_EQ(Slope::parse("1/-2"), Slope::ratio(-1, 2));
  EXPECT_EQ(Slope::parse("vertical"), Slope::vertical());
  EXPECT_FALSE(Slope::parse("1/0"));
  EXPECT_FALSE(Slope::parse("x"));
  EXPECT_FALSE(Slope::parse(""));
  EXPECT_EQ(Slope::of({4, 2}), Slope::ratio(1, 2));
  EXPECT_EQ(Slope::of({0, -3}), Slope::vertical());
  EXPECT_EQ(Slope::of({-2, 4}).to_string(), "-2");
  EXPECT_EQ(Slope::ratio(3, 6).to_string(), "1/2");
  EXPECT_TRUE(Slope::ratio(1, 2).contains({-4, -2}));
  EXPECT_FALSE(Slope::ratio(1, 2).contains({0, 0}));
}

TEST(SymmetryFrame, NormalizesSlopes) {
  const auto v = SymmetryFrame::normalizing(Slope::vertical());
  EXPECT_EQ(v.apply({0, 3}), (Vec2{3, 0}));
  const auto n = SymmetryFrame::normalizing(Slope::ratio(-1, 2));
  EXPECT_EQ(n.apply({2, -1}), (Vec2{-2, -1}));
  EXPECT_FALSE(Slope::of(n.apply({2, -1})).is_negative());
}

TEST(CanonicalBase, Examples) {
  const std::vector<Vec2> a = {{1, 0}};
  EXPECT_EQ(canonical_base(a, Slope::ratio(0, 1)), (ModBase{1, 0}));
  const std::vector<Vec2> b = {{1, 1}, {2, 2}};
  EXPECT_EQ(canonical_base(b, Slope::ratio(1, 1)), (ModBase{2, 2}));
  const std::vector<Vec2> c = {{2, 4}, {3, 6}};
  EXPECT_EQ(canonical_base(c, Slope::ratio(2, 1)), (ModBase{6, 12}));
  const std::vector<Vec2> mixed = {{-3, -3}, {2, 2}, {1, 0}};
  EXPECT_EQ(canonical_base(mixed, Slope::ratio(1, 1)), (ModBase{6, 6}));
}

TEST(CanonicalBase, Errors) {
  const std::vector<Vec2> a = {{1, 0}};
  EXPECT_THROW(canonical_base(a, Slope::ratio(1, 1)), InconsistentBaseError);
  EXPECT_THROW(canonical_base(a, Slope::vertical()), InconsistentBaseError);
  EXPECT_THROW(canonical_base(std::vector<Vec2>{{1, -1}}, Slope::ratio(-1, 1)), InconsistentBaseError);
  EXPECT_THROW(canonical_base(std::vector<Vec2>{}, Slope::ratio(0, 1)), InconsistentBaseError);
}

TEST(CanonicalBaseProperty, MultipleOfEveryMember) {
  SplitMix64 rng(3);
  for (int k = 0; k < 500; ++k) {
    const auto p = static_cast<std::int64_t>(rng.uniform(4));
    const auto q = 1 + static_cast<std::int64_t>(rng.uniform(3));
    const Slope r = Slope::ratio(p, q);
    std::vector<Vec2> vs;
    for (int j = 0; j < 3; ++j) {
      const auto m = 1 + static_cast<std::int64_t>(rng.uniform(4));
      const std::int64_t sign = rng.uniform(2) ? 1 : -1;
      vs.push_back({sign * m * r.den(), sign * m * r.num()});
    }
    const ModBase b = canonical_base(vs, r);
    for (Vec2 v : vs) {
      ASSERT_EQ(b.x % v.x, 0);
      const std::int64_t m = b.x / v.x;
      ASSERT_EQ(b.y, m * v.y);
    }
  }
}

TEST(ModReduce, Examples) {
  const ModBase b{2, 2};
  EXPECT_EQ(mod_reduce({0, 0}, b), (Vec2{0, 0}));
  EXPECT_EQ(mod_reduce({-3, 5}, b), (Vec2{1, 9}));
  EXPECT_EQ(mod_reduce({2, 2}, b), (Vec2{0, 0}));
  EXPECT_EQ(ominus({4, 4}, {4, 4}, b), (Vec2{0, 0}));
  EXPECT_EQ(ominus({5, 7}, {2, 3}, b), (Vec2{1, 2}));
  EXPECT_EQ(ominus({0, 0}, {5, 7}, b), (Vec2{1, -1}));
}

// Smallest b with w + b*x >= 0, by search.
Vec2 brute_reduce(Vec2 v, ModBase base) {
  std::int64_t b = -1000;
  while (v.x + b * base.x < 0) ++b;
  return {v.x + b * base.x, v.y + b * base.y};
}

TEST(ModReduceProperty, Algebra) {
  SplitMix64 rng(17);
  auto small = [&](std::uint64_t span) { return static_cast<std::int64_t>(rng.uniform(2 * span + 1)) - static_cast<std::int64_t>(span); };
  for (int k = 0; k < 10000; ++k) {
    const ModBase base{1 + static_cast<std::int64_t>(rng.uniform(12)), small(12)};
    const Vec2 v{small(200), small(200)};
    const std::int64_t m = small(20);
    const Vec2 r = mod_reduce(v, base);
    ASSERT_EQ(r, brute_reduce(v, base));
    ASSERT_GE(r.x, 0);
    ASSERT_LT(r.x, base.x);
    ASSERT_EQ(mod_reduce(r, base), r);
    ASSERT_EQ(mod_reduce(v + m * Vec2{base.x, base.y}, base), r);
    const Cell c1{small(50), small(50)};
    const Cell c2{small(50), small(50)};
    ASSERT_EQ(mod_reduce(ominus(c1, c2, base) + ominus(c2, c1, base), base), (Vec2{0, 0}));
  }
}

TEST(MeetingSequence, Examples) {
  const Automaton stay = load_automaton("stay1");
  for (AgentSet m : meeting_sequence(run_synchronous(stay, 5))) EXPECT_EQ(m, agents({0, 1, 2}));

  const Trace apart = make_trace({{{0, 0}, {1, 0}, {2, 0}}, {{0, 1}, {1, 1}, {2, 1}}}, {agents({0, 1, 2})});
  for (AgentSet m : meeting_sequence(apart)) EXPECT_TRUE(m.empty());

  std::vector<std::vector<Cell>> cells = {{{0, 0}, {0, 0}, {9, 0}}};
  for (int t = 1; t <= 4; ++t) cells.push_back({{0, 0}, {2 * t, 1}, {9, 0}});
  cells.push_back({{0, 0}, {9, 0}, {9, 0}});
  const Trace tr = make_trace(cells, std::vector<AgentSet>(5, agents({1})));
  const auto ms = meeting_sequence(tr);
  ASSERT_EQ(ms.size(), 6u);
  EXPECT_EQ(ms[0], agents({0, 1}));
  for (int t = 1; t <= 4; ++t) EXPECT_TRUE(ms[t].empty());
  EXPECT_EQ(ms[5], agents({1, 2}));

  const auto pairs = classify_meeting_pairs(ms);
  ASSERT_EQ(pairs.size(), 1u);
  EXPECT_EQ(pairs[0], (MeetingPair{0, 5, MeetingPair::Kind::Travel, 1, 0, 2}));
}

TEST(ClassifyMeetingPairs, PlainCases) {
  std::vector<AgentSet> ms(4);
  ms[0] = agents({0, 1, 2});
  ms[3] = agents({0, 1, 2});
  auto pairs = classify_meeting_pairs(ms);
  ASSERT_EQ(pairs.size(), 1u);
  EXPECT_EQ(pairs[0].kind, MeetingPair::Kind::Plain);
  EXPECT_EQ(pairs[0].u, 3u);

  ms.assign(5, AgentSet{});
  ms[0] = agents({0, 1});
  ms[4] = agents({0, 1});
  pairs = classify_meeting_pairs(ms);
  ASSERT_EQ(pairs.size(), 1u);
  EXPECT_EQ(pairs[0].kind, MeetingPair::Kind::Plain);

  ms = {agents({0, 1}), agents({1, 2})};  // adjacent times form a pair too
  pairs = classify_meeting_pairs(ms);
  ASSERT_EQ(pairs.size(), 1u);
  EXPECT_EQ(pairs[0].kind, MeetingPair::Kind::Travel);
}

TEST(ClassifyMeetingPairsProperty, Invariants) {
  SplitMix64 rng(23);
  for (int k = 0; k < 2000; ++k) {
    std::vector<AgentSet> ms(1 + rng.uniform(30));
    for (auto& m : ms) {
      if (rng.uniform(3) == 0) {
        const std::uint64_t options[] = {0b011, 0b101, 0b110, 0b111};
        m = AgentSet::from_bits(options[rng.uniform(4)]);
      }
    }
    const auto pairs = classify_meeting_pairs(ms);
    std::size_t nonempty = 0;
    for (auto m : ms) nonempty += !m.empty();
    ASSERT_EQ(pairs.size(), nonempty == 0 ? 0 : nonempty - 1);
    for (const auto& p : pairs) {
      ASSERT_LT(p.t, p.u);
      ASSERT_FALSE(ms[p.t].empty());
      ASSERT_FALSE(ms[p.u].empty());
      for (auto s = p.t + 1; s < p.u; ++s) ASSERT_TRUE(ms[s].empty());
      const bool travel = ms[p.t].size() == 2 && ms[p.u].size() == 2 && ms[p.t] != ms[p.u];
      ASSERT_EQ(p.kind == MeetingPair::Kind::Travel, travel);
      if (travel) {
        ASSERT_TRUE(ms[p.t].contains(p.traveling) && ms[p.u].contains(p.traveling));
        ASSERT_TRUE(ms[p.t].contains(p.source) && p.source != p.traveling);
        ASSERT_TRUE(ms[p.u].contains(p.destination) && p.destination != p.traveling);
      }
    }
  }
}

TEST(QTuple, Examples) {
  std::vector<AgentState> s = {{StateId{0}, {0, 0}}, {StateId{1}, {0, 0}}, {StateId{2}, {5, 7}}};
  Trace tr(Configuration{0, s});
  tr.append(agents({0}), s);
  const Reduction red{SymmetryFrame{}, ModBase{2, 2}};
  const QTuple q = q_tuple(tr, 0, red);
  EXPECT_EQ(q.states, (std::vector<StateId>{StateId{0}, StateId{1}, StateId{2}}));
  EXPECT_EQ(q.relative, (std::vector<Vec2>{{0, 0}, {1, -1}, {1, -1}}));
  EXPECT_EQ(q.next, agents({0}));
  EXPECT_EQ(q.meeting, agents({0, 1}));
  EXPECT_THROW(q_tuple(tr, 1, red), std::out_of_range);

  const Trace together = run_synchronous(load_automaton("stay1"), 2);
  const QTuple all = q_tuple(together, 1, red);
  EXPECT_EQ(all.relative, (std::vector<Vec2>(3, Vec2{0, 0})));
  EXPECT_EQ(all.meeting, agents({0, 1, 2}));

  const Trace apart = make_trace({{{0, 0}, {1, 0}, {2, 0}}, {{0, 0}, {1, 0}, {2, 0}}}, {agents({2})});
  EXPECT_TRUE(q_tuple(apart, 0, red).meeting.empty());
}

TEST(FindQRecurrence, PeriodicTrace) {
  const Trace tr = periodic_trace(3);
  const auto pairs = travel_meeting_pairs(meeting_sequence(tr));
  ASSERT_EQ(pairs.size(), 6u);
  for (const Reduction& red : {Reduction{}, Reduction{SymmetryFrame{}, ModBase{3, 3}}}) {
    const auto rec = find_q_recurrence(tr, red, 0);
    ASSERT_TRUE(rec);
    EXPECT_EQ(rec->k_time, pairs[0].t);
    EXPECT_EQ(rec->h_time, pairs[2].t);
    EXPECT_EQ(rec->k_time, 0u);
    EXPECT_EQ(rec->h_time, 4u);
    EXPECT_EQ(rec->displacement, (Vec2{3, 3}));
    EXPECT_EQ(verify_periodic_displacement(tr, red, 0, *rec), Verification::Verified);
  }
  // Too short to see the next repetition.
  const Trace short_tr = periodic_trace(1);
  const auto rec = find_q_recurrence(short_tr, Reduction{}, 0);
  EXPECT_FALSE(rec);
}

TEST(FindQRecurrence, DetectsBrokenPeriod) {
  // Third cycle shifted by (4,3) instead of (3,3).
  Trace good = periodic_trace(4);
  std::vector<std::vector<Cell>> cells;
  std::vector<AgentSet> acts;
  for (std::uint64_t t = 0; t <= good.end_time(); ++t) {
    std::vector<Cell> cs;
    for (const auto& s : good.snapshot(t)) cs.push_back(s.cell + (t >= 8 ? Vec2{1, 0} : Vec2{0, 0}));
    cells.push_back(cs);
    if (t < good.end_time()) acts.push_back(good.activation(t));
  }
  const Trace bad = make_trace(cells, acts);
  const auto rec = find_q_recurrence(bad, Reduction{}, 0);
  ASSERT_TRUE(rec);
  EXPECT_EQ(verify_periodic_displacement(bad, Reduction{}, 0, *rec), Verification::Falsified);
}

TEST(FindQRecurrence, AbsentCases) {
  const Trace none = run_synchronous(load_automaton("stay1"), 10);
  EXPECT_FALSE(find_q_recurrence(none, Reduction{}, 0));

  std::vector<std::vector<Cell>> cells = {{{0, 0}, {0, 0}, {9, 0}}, {{0, 0}, {4, 1}, {9, 0}}, {{0, 0}, {9, 0}, {9, 0}}};
  const Trace one = make_trace(cells, {agents({1}), agents({1})});
  EXPECT_EQ(travel_meeting_pairs(meeting_sequence(one)).size(), 1u);
  EXPECT_FALSE(find_q_recurrence(one, Reduction{}, 0));
}

TEST(FindQRecurrence, WarmupSkipsEarlyPairs) {
  const Trace tr = periodic_trace(3);
  const auto rec = find_q_recurrence(tr, Reduction{}, 1);
  ASSERT_TRUE(rec);
  EXPECT_EQ(rec->k_time, 2u);
  EXPECT_EQ(rec->h_time, 6u);
}

TEST(MinBandWidth, Examples) {
  const std::vector<Cell> diag = {{0, 0}, {1, 1}, {2, 2}};
  EXPECT_EQ(min_band_width(diag, Slope::ratio(1, 1)), 0.0);
  const std::vector<Cell> col = {{0, 0}, {0, 3}};
  EXPECT_DOUBLE_EQ(min_band_width(col, Slope::ratio(0, 1)), 1.5);
  EXPECT_EQ(min_band_width(col, Slope::vertical()), 0.0);
  const std::vector<Cell> one = {{4, -2}};
  EXPECT_EQ(min_band_width(one, Slope::ratio(3, 7)), 0.0);
  EXPECT_THROW(min_band_width(std::vector<Cell>{}, Slope::ratio(0, 1)), std::invalid_argument);
}

// Compare with a direct perpendicular-distance computation.
TEST(MinBandWidthProperty, MatchesGeometry) {
  SplitMix64 rng(31);
  for (int k = 0; k < 500; ++k) {
    const Slope s = Slope::ratio(static_cast<std::int64_t>(rng.uniform(7)) - 3, 1 + rng.uniform(3));
    std::vector<Cell> cells;
    for (int j = 0; j < 6; ++j) {
      cells.push_back({static_cast<std::int64_t>(rng.uniform(21)) - 10, static_cast<std::int64_t>(rng.uniform(21)) - 10});
    }
    const double angle = std::atan2(static_cast<double>(s.num()), static_cast<double>(s.den()));
    double lo = 1e18, hi = -1e18;
    for (Cell c : cells) {
      const double d = -std::sin(angle) * static_cast<double>(c.x) + std::cos(angle) * static_cast<double>(c.y);
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
    ASSERT_NEAR(min_band_width(cells, s), (hi - lo) / 2, 1e-9);
  }
}

TEST(ChooseSlope, Builtins) {
  const Automaton east = load_automaton("east1");
  const SlopeChoice e = choose_slope(run_adversarial(east, 50), east);
  ASSERT_TRUE(e.slope);
  EXPECT_EQ(*e.slope, Slope::ratio(0, 1));
  EXPECT_EQ(e.base, (ModBase{1, 0}));
  EXPECT_EQ(e.source, "observed");

  const Automaton zig = load_automaton("zig2");
  const SlopeChoice z = choose_slope(run_adversarial(zig, 50), zig);
  EXPECT_EQ(*z.slope, Slope::ratio(1, 1));
  EXPECT_EQ(z.base, (ModBase{1, 1}));

  const Automaton stay = load_automaton("stay1");
  const SlopeChoice s = choose_slope(run_adversarial(stay, 50), stay);
  EXPECT_FALSE(s.slope);
  EXPECT_FALSE(s.base);
  EXPECT_EQ(s.source, "none");

  EXPECT_THROW(choose_slope(east, Slope::ratio(1, 1)), InconsistentBaseError);
}

TEST(ChooseSlope, ReflectsVerticalAndNegative) {
  const Automaton north = parse_automaton("states: n\nagents: n n n\ndelta n * -> n N\n");
  const SlopeChoice v = choose_slope(north, Slope::vertical());
  EXPECT_TRUE(v.frame.swap_axes);
  EXPECT_EQ(v.base, (ModBase{1, 0}));

  const Automaton nw = parse_automaton("states: a b\nagents: a a a\ndelta a * -> b N\ndelta b * -> a W\n");
  const SlopeChoice n = choose_slope(run_adversarial(nw, 30), nw);
  EXPECT_EQ(*n.slope, Slope::ratio(-1, 1));
  EXPECT_TRUE(n.frame.negate_x);
  EXPECT_EQ(n.base, (ModBase{1, 1}));
}

TEST(AnalysisReport, East1) {
  const Automaton east = load_automaton("east1");
  std::ostringstream out;
  write_analysis_report(out, run_adversarial(east, 10), east, {});
  const std::string r = out.str();
  EXPECT_NE(r.find("travel_vectors 1\n  e 1 0 period 1\n"), std::string::npos) << r;
  EXPECT_NE(r.find("slope 0 source observed\n"), std::string::npos) << r;
  EXPECT_NE(r.find("base 1 0\n"), std::string::npos) << r;
  EXPECT_NE(r.find("width 0.000000\n"), std::string::npos) << r;
}

TEST(AnalysisReport, Stay1) {
  const Automaton stay = load_automaton("stay1");
  std::ostringstream out;
  AnalysisOptions opt;
  opt.checkpoints = {2, 4};
  write_analysis_report(out, run_adversarial(stay, 6), stay, opt);
  const std::string r = out.str();
  EXPECT_NE(r.find("travel_vectors 0\n"), std::string::npos) << r;
  EXPECT_NE(r.find("meeting_pairs total 6 travel 0\n"), std::string::npos) << r;
  EXPECT_NE(r.find("band 2 slope 0 width 0.000000\nband 4 slope 0 width 0.000000\n"), std::string::npos) << r;
}

TEST(AnalysisReport, Overrides) {
  const Automaton east = load_automaton("east1");
  const Trace tr = run_adversarial(east, 10);
  AnalysisOptions opt;
  opt.base = ModBase{2, 0};
  EXPECT_EQ(resolve_slope(tr, east, opt).base, (ModBase{2, 0}));
  opt.slope = Slope::ratio(1, 1);
  EXPECT_THROW(resolve_slope(tr, east, opt), InconsistentBaseError);
  opt.base = ModBase{0, 0};
  EXPECT_THROW(resolve_slope(tr, east, opt), InconsistentBaseError);
  opt.base = ModBase{1, -1};
  opt.slope.reset();
  EXPECT_THROW(resolve_slope(tr, east, opt), InconsistentBaseError);
}

}  // namespace
}  // namespace ssync
