#ifndef SSYNC_HARNESS_HPP_
#define SSYNC_HARNESS_HPP_

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ssync/analysis.hpp"
#include "ssync/automaton.hpp"
#include "ssync/scheduler.hpp"
#include "ssync/world.hpp"

namespace ssync {

/// SplitMix64 (Steele, Lea, Flood 2014). Constants:
///   state += 0x9E3779B97F4A7C15
///   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
///   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
///   z ^ (z >> 31)
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next();
  /// Uniform in [0, bound) by rejection sampling; bound > 0.
  std::uint64_t uniform(std::uint64_t bound);

 private:
  std::uint64_t state_;
};

struct CorpusParams {
  std::uint64_t seed = 0;
  std::size_t count = 1;
  std::size_t max_states = 3;
  std::size_t n_agents = 3;

  /// Throws std::invalid_argument.
  void validate() const;
};

/// Draw order: N = 1 + uniform(max_states); for each state q and each sensed
/// mask 0..2^N-1 in increasing order, next = uniform(N) then move = uniform(5);
/// finally one initial state uniform(N) per agent. States are named q0..q{N-1}.
Automaton random_automaton(SplitMix64& rng, std::size_t max_states, std::size_t n_agents);

std::vector<Automaton> generate_corpus(const CorpusParams& p);

// ---------------------------------------------------------------------------
// Lemma bounds

enum class Bound { Type2Length, Type1Length, StayRun, PositiveLength, MeetingEnd, IntermediateMeeting };
std::string_view bound_name(Bound b);

struct LemmaViolation {
  SubscheduleRecord record;
  Bound bound = Bound::Type2Length;
  std::uint64_t observed = 0;
  std::uint64_t limit = 0;
};

struct Type1Check {
  std::uint64_t length = 0;
  std::uint64_t distance = 0;  // D
  std::uint64_t limit = 0;     // N(2N+1+D)
};

struct LemmaReport {
  std::array<std::uint64_t, 3> counts{};  // by type 1..3
  std::uint64_t max_type2_length = 0;
  std::vector<Type1Check> type1;
  std::uint64_t max_stay_run = 0;
  std::vector<LemmaViolation> violations;

  bool ok() const { return violations.empty(); }
};

/// Throws std::invalid_argument when the trace has no subschedule records.
LemmaReport check_lemma_bounds(const Trace& trace, const Automaton& a);

struct EscapeViolation {
  AgentId agent = 0;
  std::uint64_t escape_end = 0;
  std::uint64_t time = 0;  // first meeting at or after escape_end
};

/// For every type-3 record, its agent is in no meeting set from its end on.
std::vector<EscapeViolation> check_escape_permanence(const Trace& trace);

// ---------------------------------------------------------------------------
// Traveling-agent structure and gaps between travels

struct TravelViolation {
  MeetingPair pair;
  std::string reason;
};

struct TravelStructureReport {
  std::uint64_t checked = 0;                     // pairs past the warm-up
  std::uint64_t skipped = 0;                     // pairs before it
  std::vector<TravelViolation> violations;       // asserted
  std::vector<TravelViolation> early_exceptions;  // reported only
};

/// A pair is past the warm-up when the largest pairwise distance at its
/// start exceeds `min_distance` (2N+1 unless given).
TravelStructureReport check_travel_structure(const Trace& trace, const Automaton& a,
                                             std::optional<std::uint64_t> min_distance = std::nullopt);

struct GapReport {
  std::uint64_t bound = 0;  // 8(N+1)^5
  std::uint64_t max_gap = 0;
  std::uint64_t exceeding = 0;
  std::uint64_t gaps = 0;
};

/// Gaps t' - u between consecutive travel pairs starting at or after `warmup`.
GapReport travel_gaps(const Trace& trace, const Automaton& a, std::uint64_t warmup);

// ---------------------------------------------------------------------------
// Confinement

struct ConfinementReport {
  std::vector<std::uint64_t> horizons;
  std::vector<double> band_widths;
  std::optional<Slope> slope;
  std::optional<ModBase> base;
  std::string slope_source;
  std::uint64_t warmup = 0;
  std::uint64_t travel_pairs = 0;
  std::optional<QRecurrence> recurrence;
  Verification verification = Verification::NotApplicable;
};

/// Horizons must be non-empty and strictly increasing.
ConfinementReport confinement_experiment(const Automaton& a, const std::vector<std::uint64_t>& horizons);

/// Same analysis on an existing trace; horizons beyond its end are clamped.
ConfinementReport confinement_from_trace(const Trace& trace, const Automaton& a,
                                         const std::vector<std::uint64_t>& horizons,
                                         std::optional<std::uint64_t> warmup = std::nullopt);

// ---------------------------------------------------------------------------
// Corpus runs

struct EntryResult {
  std::size_t index = 0;
  std::size_t states = 0;
  std::uint64_t steps = 0;
  std::uint64_t explored = 0;
  SchedulerStats stats;
  std::string classification_error;  // simulate_solo failure, if any
  LemmaReport lemma;
  std::vector<EscapeViolation> escape;
  TravelStructureReport travel;
  GapReport gaps;
  ConfinementReport confinement;

  bool hard_violation() const {
    return !classification_error.empty() || !lemma.ok() || !escape.empty() || !travel.violations.empty();
  }
};

/// Runs one automaton under the adversarial schedule and checks everything.
/// The trace is left in `trace_out` when given.
EntryResult run_entry(const Automaton& a, std::size_t index, std::uint64_t horizon,
                      Trace* trace_out = nullptr);

struct CorpusSummary {
  std::size_t entries = 0;
  std::uint64_t steps = 0;
  std::array<std::uint64_t, 3> subschedules{};
  std::uint64_t classification_failures = 0;
  std::uint64_t lemma_violations = 0;
  std::uint64_t escape_violations = 0;
  std::uint64_t travel_checked = 0;
  std::uint64_t travel_violations = 0;
  std::uint64_t travel_early_exceptions = 0;
  std::uint64_t gap_exceeding = 0;
  std::uint64_t recurrences = 0;
  std::uint64_t verified = 0;
  std::uint64_t falsified = 0;
  std::vector<std::size_t> failing_entries;

  void add(const EntryResult& r);
  std::uint64_t hard_violations() const {
    return classification_failures + lemma_violations + escape_violations + travel_violations;
  }
};

void write_entry_report(std::ostream& out, const EntryResult& r, const Automaton& a);
void write_summary(std::ostream& out, const CorpusParams& p, std::uint64_t horizon, const CorpusSummary& s);

}  // namespace ssync

#endif  // SSYNC_HARNESS_HPP_
