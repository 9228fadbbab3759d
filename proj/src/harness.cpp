#include "ssync/harness.hpp"

#include <algorithm>
#include <ostream>
#include <sstream>

namespace ssync {

std::uint64_t SplitMix64::next() {
  std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t SplitMix64::uniform(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("uniform bound must be positive");
  // reject the top partial bucket so every residue is equally likely
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
  std::uint64_t x;
  do {
    x = next();
  } while (x >= limit);
  return x % bound;
}

void CorpusParams::validate() const {
  if (count == 0) throw std::invalid_argument("corpus count must be at least 1");
  if (max_states < 1 || max_states > 6) throw std::invalid_argument("max_states must be in [1, 6]");
  if (n_agents < 1 || n_agents > Automaton::kMaxAgents) {
    throw std::invalid_argument("agent count must be in [1, " + std::to_string(Automaton::kMaxAgents) + "]");
  }
}

Automaton random_automaton(SplitMix64& rng, std::size_t max_states, std::size_t n_agents) {
  const std::size_t n = 1 + rng.uniform(max_states);
  std::vector<std::string> labels;
  for (std::size_t q = 0; q < n; ++q) labels.push_back("q" + std::to_string(q));
  std::vector<Automaton::Rule> rules;
  rules.reserve(n << n);
  for (std::uint32_t q = 0; q < n; ++q) {
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
      Automaton::Rule r;
      r.from = StateId{q};
      r.sensed = StateSet::from_bits(mask);
      r.to.next = StateId{static_cast<std::uint32_t>(rng.uniform(n))};
      r.to.move = static_cast<Move>(rng.uniform(kMoveCount));
      rules.push_back(r);
    }
  }
  std::vector<StateId> initial;
  for (std::size_t i = 0; i < n_agents; ++i) initial.push_back(StateId{static_cast<std::uint32_t>(rng.uniform(n))});
  return Automaton(std::move(labels), std::move(initial), {}, std::move(rules));
}

std::vector<Automaton> generate_corpus(const CorpusParams& p) {
  p.validate();
  SplitMix64 rng(p.seed);
  std::vector<Automaton> out;
  out.reserve(p.count);
  for (std::size_t i = 0; i < p.count; ++i) out.push_back(random_automaton(rng, p.max_states, p.n_agents));
  return out;
}

// ---------------------------------------------------------------------------
// Lemma bounds

std::string_view bound_name(Bound b) {
  switch (b) {
    case Bound::Type2Length: return "type2-length";
    case Bound::Type1Length: return "type1-length";
    case Bound::StayRun: return "stay-run";
    case Bound::PositiveLength: return "positive-length";
    case Bound::MeetingEnd: return "meeting-end";
    case Bound::IntermediateMeeting: return "intermediate-meeting";
  }
  return "?";
}

LemmaReport check_lemma_bounds(const Trace& trace, const Automaton& a) {
  if (trace.records().empty()) throw std::invalid_argument("trace has no subschedule boundaries");
  const std::uint64_t n = a.state_count();
  LemmaReport rep;
  auto violate = [&](const SubscheduleRecord& r, Bound b, std::uint64_t observed, std::uint64_t limit) {
    rep.violations.push_back({r, b, observed, limit});
  };

  for (const auto& r : trace.records()) {
    const auto type = static_cast<std::size_t>(r.type);
    if (type >= 1 && type <= 3) ++rep.counts[type - 1];
    const std::uint64_t len = r.length();
    if (len == 0) violate(r, Bound::PositiveLength, 0, 1);

    std::uint64_t run = 0;
    std::uint64_t longest = 0;
    const std::uint64_t last = std::min(r.end_time, trace.end_time());
    for (std::uint64_t t = r.start_time; t < last; ++t) {
      if (trace.snapshot(t)[r.agent].cell == trace.snapshot(t + 1)[r.agent].cell) {
        longest = std::max(longest, ++run);
      } else {
        run = 0;
      }
      if (t > r.start_time && meeting_set(trace.snapshot(t)).contains(r.agent)) {
        violate(r, Bound::IntermediateMeeting, t, r.end_time);
      }
    }
    rep.max_stay_run = std::max(rep.max_stay_run, longest);
    if (longest > n) violate(r, Bound::StayRun, longest, n);

    if (r.type == SubscheduleType::Repeat) {
      rep.max_type2_length = std::max(rep.max_type2_length, len);
      if (len > n) violate(r, Bound::Type2Length, len, n);
    } else if (r.type == SubscheduleType::Meet) {
      Type1Check c;
      c.length = len;
      c.distance = manhattan_distance(r.start_cell, r.end_cell);
      c.limit = n * (2 * n + 1 + c.distance);
      rep.type1.push_back(c);
      if (len > c.limit) violate(r, Bound::Type1Length, len, c.limit);
      if (r.end_time <= trace.end_time() && !meeting_set(trace.snapshot(r.end_time)).contains(r.agent)) {
        violate(r, Bound::MeetingEnd, 0, 1);
      }
    }
  }
  return rep;
}

std::vector<EscapeViolation> check_escape_permanence(const Trace& trace) {
  std::vector<EscapeViolation> out;
  for (const auto& r : trace.records()) {
    if (r.type != SubscheduleType::Escape) continue;
    for (std::uint64_t t = r.end_time; t <= trace.end_time(); ++t) {
      if (meeting_set(trace.snapshot(t)).contains(r.agent)) {
        out.push_back({r.agent, r.end_time, t});
        break;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Traveling-agent structure

namespace {

std::optional<std::string> travel_defect(const MeetingPair& p, std::span<const SubscheduleRecord> records) {
  std::vector<const SubscheduleRecord*> mine, src, dst;
  for (const auto& r : records) {
    if (!(r.start_time < p.u && r.end_time > p.t)) continue;
    if (r.agent == p.traveling) mine.push_back(&r);
    if (r.agent == p.source) src.push_back(&r);
    if (r.agent == p.destination) dst.push_back(&r);
  }
  if (mine.size() != 1) return "traveling agent scheduled " + std::to_string(mine.size()) + " times";
  if (mine[0]->type != SubscheduleType::Meet) return std::string("traveling agent subschedule is not type 1");
  if (mine[0]->end_time != p.u) return std::string("traveling agent subschedule does not end at u");
  if (src.size() > 1) return std::string("source agent scheduled more than once");
  if (dst.size() > 1) return std::string("destination agent scheduled more than once");
  if (!src.empty() && src[0]->type != SubscheduleType::Repeat) return std::string("source subschedule is not type 2");
  if (!dst.empty() && dst[0]->type != SubscheduleType::Repeat) {
    return std::string("destination subschedule is not type 2");
  }
  return std::nullopt;
}

}  // namespace

TravelStructureReport check_travel_structure(const Trace& trace, const Automaton& a,
                                             std::optional<std::uint64_t> min_distance) {
  const std::uint64_t limit = min_distance ? *min_distance : 2 * a.state_count() + 1;
  const auto ms = meeting_sequence(trace);
  TravelStructureReport rep;
  for (const auto& p : travel_meeting_pairs(ms)) {
    const bool past = max_pairwise_distance(trace.snapshot(p.t)) > limit;
    (past ? rep.checked : rep.skipped)++;
    if (auto why = travel_defect(p, trace.records())) {
      (past ? rep.violations : rep.early_exceptions).push_back({p, *why});
    }
  }
  return rep;
}

GapReport travel_gaps(const Trace& trace, const Automaton& a, std::uint64_t warmup) {
  GapReport rep;
  std::uint64_t b = 1;
  for (int i = 0; i < 5; ++i) b *= a.state_count() + 1;
  rep.bound = 8 * b;
  const auto ms = meeting_sequence(trace);
  const auto pairs = travel_meeting_pairs(ms);
  const MeetingPair* prev = nullptr;
  for (const auto& p : pairs) {
    if (p.t < warmup) continue;
    if (prev) {
      const std::uint64_t gap = p.t - prev->u;
      ++rep.gaps;
      rep.max_gap = std::max(rep.max_gap, gap);
      if (gap > rep.bound) ++rep.exceeding;
    }
    prev = &p;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Confinement

namespace {

void check_horizons(const std::vector<std::uint64_t>& horizons) {
  if (horizons.empty()) throw std::invalid_argument("at least one horizon is required");
  for (std::size_t i = 1; i < horizons.size(); ++i) {
    if (horizons[i] <= horizons[i - 1]) throw std::invalid_argument("horizons must be strictly increasing");
  }
}

}  // namespace

ConfinementReport confinement_from_trace(const Trace& trace, const Automaton& a,
                                         const std::vector<std::uint64_t>& horizons,
                                         std::optional<std::uint64_t> warmup) {
  check_horizons(horizons);
  ConfinementReport rep;
  rep.horizons = horizons;
  const SlopeChoice choice = choose_slope(trace, a);
  rep.slope = choice.slope;
  rep.base = choice.base;
  rep.slope_source = choice.source;
  rep.warmup = warmup ? *warmup : default_warmup(trace, a);

  const Slope band_slope = choice.slope ? *choice.slope : Slope::ratio(0, 1);
  for (std::uint64_t h : horizons) {
    rep.band_widths.push_back(min_band_width(trace.explored_until(h), band_slope));
  }

  const auto ms = meeting_sequence(trace);
  rep.travel_pairs = travel_meeting_pairs(ms).size();
  const Reduction reduction = choice.reduction();
  rep.recurrence = find_q_recurrence(trace, reduction, rep.warmup);
  if (rep.recurrence) {
    rep.verification = verify_periodic_displacement(trace, reduction, rep.warmup, *rep.recurrence);
  }
  return rep;
}

ConfinementReport confinement_experiment(const Automaton& a, const std::vector<std::uint64_t>& horizons) {
  check_horizons(horizons);
  const Trace trace = run_adversarial(a, horizons.back());
  return confinement_from_trace(trace, a, horizons);
}

// ---------------------------------------------------------------------------
// Corpus runs

EntryResult run_entry(const Automaton& a, std::size_t index, std::uint64_t horizon, Trace* trace_out) {
  EntryResult r;
  r.index = index;
  r.states = a.state_count();
  Trace trace;
  try {
    trace = run_adversarial(a, horizon, &r.stats);
  } catch (const ClassificationError& e) {
    r.classification_error = e.what();
    return r;
  }
  r.steps = trace.end_time();
  r.explored = trace.explored().size();
  r.lemma = check_lemma_bounds(trace, a);
  r.escape = check_escape_permanence(trace);
  r.travel = check_travel_structure(trace, a);
  const std::uint64_t warmup = default_warmup(trace, a);
  r.gaps = travel_gaps(trace, a, warmup);
  std::vector<std::uint64_t> checkpoints;
  if (horizon >= 10) checkpoints.push_back(horizon / 10);
  checkpoints.push_back(horizon);
  r.confinement = confinement_from_trace(trace, a, checkpoints, warmup);
  if (trace_out) *trace_out = std::move(trace);
  return r;
}

void CorpusSummary::add(const EntryResult& r) {
  ++entries;
  steps += r.steps;
  for (std::size_t i = 0; i < 3; ++i) subschedules[i] += r.lemma.counts[i];
  if (!r.classification_error.empty()) ++classification_failures;
  lemma_violations += r.lemma.violations.size();
  escape_violations += r.escape.size();
  travel_checked += r.travel.checked;
  travel_violations += r.travel.violations.size();
  travel_early_exceptions += r.travel.early_exceptions.size();
  gap_exceeding += r.gaps.exceeding;
  if (r.confinement.recurrence) ++recurrences;
  if (r.confinement.verification == Verification::Verified) ++verified;
  if (r.confinement.verification == Verification::Falsified) ++falsified;
  if (r.hard_violation()) failing_entries.push_back(r.index);
}

namespace {

std::string fixed6(double v) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(6);
  s << v;
  return s.str();
}

void put_record(std::ostream& out, const SubscheduleRecord& r) {
  out << "agent " << r.agent << " start " << r.start_time << " end " << r.end_time << " type "
      << static_cast<int>(r.type);
}

void put_pair(std::ostream& out, const MeetingPair& p) {
  out << "pair " << p.t << ' ' << p.u << " traveling " << p.traveling << " source " << p.source
      << " destination " << p.destination;
}

}  // namespace

void write_entry_report(std::ostream& out, const EntryResult& r, const Automaton& a) {
  out << "entry " << r.index << '\n';
  out << "states " << r.states << " agents " << a.agent_count() << '\n';
  out << "automaton\n";
  std::istringstream text(a.to_text());
  for (std::string line; std::getline(text, line);) out << "  " << line << '\n';
  if (!r.classification_error.empty()) {
    out << "classification_error " << r.classification_error << '\n';
    return;
  }
  out << "steps " << r.steps << " explored " << r.explored << '\n';
  out << "subschedules type1 " << r.lemma.counts[0] << " type2 " << r.lemma.counts[1] << " type3 "
      << r.lemma.counts[2] << '\n';
  if (r.stats.escape) {
    out << "escape agent " << r.stats.escape->escaping_agent << " period " << r.stats.escape->period << '\n';
  } else {
    out << "escape none\n";
  }

  std::uint64_t max_type1 = 0;
  for (const auto& c : r.lemma.type1) max_type1 = std::max(max_type1, c.length);
  out << "lemma max_type1 " << max_type1 << " max_type2 " << r.lemma.max_type2_length << " max_stay_run "
      << r.lemma.max_stay_run << " violations " << r.lemma.violations.size() << '\n';
  for (const auto& v : r.lemma.violations) {
    out << "  violation " << bound_name(v.bound) << ' ';
    put_record(out, v.record);
    out << " observed " << v.observed << " limit " << v.limit << '\n';
  }
  out << "escape_permanence violations " << r.escape.size() << '\n';
  for (const auto& v : r.escape) {
    out << "  violation agent " << v.agent << " escape_end " << v.escape_end << " met " << v.time << '\n';
  }
  out << "travel_structure checked " << r.travel.checked << " skipped " << r.travel.skipped << " violations "
      << r.travel.violations.size() << " early_exceptions " << r.travel.early_exceptions.size() << '\n';
  for (const auto& v : r.travel.violations) {
    out << "  violation ";
    put_pair(out, v.pair);
    out << ": " << v.reason << '\n';
  }
  for (const auto& v : r.travel.early_exceptions) {
    out << "  early ";
    put_pair(out, v.pair);
    out << ": " << v.reason << '\n';
  }
  out << "travel_gaps count " << r.gaps.gaps << " max " << r.gaps.max_gap << " bound " << r.gaps.bound
      << " exceeding " << r.gaps.exceeding << '\n';

  const auto& c = r.confinement;
  out << "confinement slope " << (c.slope ? c.slope->to_string() : "none") << " source " << c.slope_source;
  if (c.base) {
    out << " base " << c.base->x << ' ' << c.base->y;
  } else {
    out << " base none";
  }
  out << " warmup " << c.warmup << " travel_pairs " << c.travel_pairs << '\n';
  for (std::size_t i = 0; i < c.horizons.size(); ++i) {
    out << "  band " << c.horizons[i] << ' ' << fixed6(c.band_widths[i]) << '\n';
  }
  if (c.recurrence) {
    out << "  q_recurrence k " << c.recurrence->k_time << " h " << c.recurrence->h_time << " displacement "
        << c.recurrence->displacement.x << ' ' << c.recurrence->displacement.y << " verification "
        << verification_name(c.verification) << '\n';
  } else {
    out << "  q_recurrence none\n";
  }
}

void write_summary(std::ostream& out, const CorpusParams& p, std::uint64_t horizon, const CorpusSummary& s) {
  out << "corpus seed " << p.seed << " count " << p.count << " max_states " << p.max_states << " agents "
      << p.n_agents << " horizon " << horizon << '\n';
  out << "entries " << s.entries << " steps " << s.steps << '\n';
  out << "subschedules type1 " << s.subschedules[0] << " type2 " << s.subschedules[1] << " type3 "
      << s.subschedules[2] << '\n';
  out << "classification_failures " << s.classification_failures << '\n';
  out << "lemma_violations " << s.lemma_violations << '\n';
  out << "escape_violations " << s.escape_violations << '\n';
  out << "travel_pairs_checked " << s.travel_checked << " violations " << s.travel_violations
      << " early_exceptions " << s.travel_early_exceptions << '\n';
  out << "travel_gaps_exceeding " << s.gap_exceeding << '\n';
  out << "q_recurrences " << s.recurrences << " verified " << s.verified << " falsified " << s.falsified << '\n';
  out << "hard_violations " << s.hard_violations() << '\n';
  if (!s.failing_entries.empty()) {
    out << "failing_entries";
    for (std::size_t i : s.failing_entries) out << ' ' << i;
    out << '\n';
  }
}

}  // namespace ssync
