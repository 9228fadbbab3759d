#ifndef SSYNC_ANALYSIS_HPP_
#define SSYNC_ANALYSIS_HPP_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "ssync/automaton.hpp"
#include "ssync/types.hpp"
#include "ssync/world.hpp"

namespace ssync {

/// Requested base or slope cannot be realized (e.g. no travel vector with
/// the requested slope).
class InconsistentBaseError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// ---------------------------------------------------------------------------
// Travel vectors

struct TravelVector {
  Vec2 vector;
  std::uint64_t period = 0;
  friend auto operator<=>(const TravelVector&, const TravelVector&) = default;
};

/// Single agent from q0 on an empty grid, run to its first state recurrence.
/// Absent when the displacement over one period is zero.
std::optional<TravelVector> detect_travel_vector(const Automaton& a, StateId q0);

std::set<TravelVector> enumerate_travel_vectors(const Automaton& a);

/// Travel vector of the scheduled agent inside each subschedule record, where
/// the agent repeats a state while alone and the displacement is nonzero.
std::vector<TravelVector> observed_travel_vectors(const Trace& trace);

// ---------------------------------------------------------------------------
// Slopes and the modulo reduction

/// Exact slope dy/dx, normalized (den > 0, gcd 1); den == 0 marks vertical.
class Slope {
 public:
  static Slope of(Vec2 v);  // v != 0
  static Slope ratio(std::int64_t num, std::int64_t den);
  static Slope vertical() { return Slope(1, 0); }

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }
  bool is_vertical() const { return den_ == 0; }
  bool is_negative() const { return den_ != 0 && num_ < 0; }
  bool contains(Vec2 v) const;  // v nonzero and on a line of this slope

  std::string to_string() const;
  /// "p/q", "p" or "vertical". Returns nullopt on malformed input.
  static std::optional<Slope> parse(std::string_view text);

  friend auto operator<=>(const Slope&, const Slope&) = default;

 private:
  Slope(std::int64_t num, std::int64_t den) : num_(num), den_(den) {}
  std::int64_t num_;
  std::int64_t den_;
};

/// The modulus (x, y) with x > 0.
struct ModBase {
  std::int64_t x = 1;
  std::int64_t y = 0;
  friend auto operator<=>(const ModBase&, const ModBase&) = default;
};

/// Reflection that maps a slope to a finite, non-negative one: vertical
/// slopes swap the axes, negative ones negate x.
struct SymmetryFrame {
  bool swap_axes = false;
  bool negate_x = false;

  static SymmetryFrame normalizing(Slope s);
  Vec2 apply(Vec2 v) const;
  friend bool operator==(const SymmetryFrame&, const SymmetryFrame&) = default;
};

/// x = lcm of |x_j| over the vectors of slope r, y = r x. Requires a finite
/// non-negative r (apply SymmetryFrame first). Throws InconsistentBaseError.
ModBase canonical_base(std::span<const Vec2> vectors, Slope r);

/// (w + b x, z + b y) with b the smallest integer making w + b x >= 0.
Vec2 mod_reduce(Vec2 v, ModBase base);

/// (c2 - c1) reduced modulo the base.
Vec2 ominus(Cell c2, Cell c1, ModBase base);

/// Relative positions are first reflected by `frame` and then reduced by
/// `base`. Without a base the raw differences are kept.
struct Reduction {
  SymmetryFrame frame;
  std::optional<ModBase> base;
  Vec2 relative(Cell from, Cell to) const;  // from (-) to
};

// ---------------------------------------------------------------------------
// Meetings

/// M_t for every t in 0..end_time.
std::vector<AgentSet> meeting_sequence(const Trace& trace);

struct MeetingPair {
  enum class Kind { Plain, Travel };
  std::uint64_t t = 0;
  std::uint64_t u = 0;
  Kind kind = Kind::Plain;
  AgentId traveling = 0;
  AgentId source = 0;
  AgentId destination = 0;
  friend bool operator==(const MeetingPair&, const MeetingPair&) = default;
};

/// Every (t, u) with M_t, M_u nonempty and M_s empty strictly between them.
std::vector<MeetingPair> classify_meeting_pairs(std::span<const AgentSet> ms);

std::vector<MeetingPair> travel_meeting_pairs(std::span<const AgentSet> ms);

// ---------------------------------------------------------------------------
// Q-tuples and their recurrence

struct QTuple {
  std::vector<StateId> states;
  std::vector<Vec2> relative;  // pairs (i, j), i < j, lexicographic
  AgentSet next;               // agents activated at t
  AgentSet meeting;
  friend bool operator==(const QTuple&, const QTuple&) = default;
};

struct QTupleHash {
  std::size_t operator()(const QTuple& q) const noexcept;
};

/// Throws std::out_of_range when t has no following activation.
QTuple q_tuple(const Trace& trace, std::uint64_t t, const Reduction& reduction);

struct QRecurrence {
  std::size_t k_index = 0;  // indices into the post-warm-up travel pair list
  std::size_t h_index = 0;
  std::uint64_t k_time = 0;
  std::uint64_t h_time = 0;
  Vec2 displacement;  // source agent's cell at h_time minus at k_time
  friend bool operator==(const QRecurrence&, const QRecurrence&) = default;
};

/// First k < h, h - k even, with equal Q-tuples at the starts of travel
/// meeting pairs beginning at or after `warmup`. Chooses the smallest such h.
std::optional<QRecurrence> find_q_recurrence(const Trace& trace, const Reduction& reduction,
                                             std::uint64_t warmup);

enum class Verification { NotApplicable, Verified, Falsified };
std::string_view verification_name(Verification v);

/// Checks that Q at pair index h recurs first at index 2h - k (same even
/// gap) with the source agent displaced by the same vector again.
Verification verify_periodic_displacement(const Trace& trace, const Reduction& reduction,
                                          std::uint64_t warmup, const QRecurrence& rec);

// ---------------------------------------------------------------------------
// Bands

/// Smallest d such that a line of the given slope has every cell within
/// Euclidean distance d. Throws std::invalid_argument on an empty set.
double min_band_width(std::span<const Cell> cells, Slope slope);
double min_band_width(const std::unordered_set<Cell>& cells, Slope slope);

// ---------------------------------------------------------------------------
// Slope selection for a trace

struct SlopeChoice {
  std::optional<Slope> slope;
  std::optional<ModBase> base;
  SymmetryFrame frame;
  std::string source;  // "observed", "automaton", "override" or "none"

  Reduction reduction() const { return Reduction{frame, base}; }
};

/// The slope of the most frequent observed travel vector (ties: smallest
/// vector), falling back to the automaton's own travel vectors. The base is
/// built from the automaton's travel vectors of that slope.
SlopeChoice choose_slope(const Trace& trace, const Automaton& a);

/// Same, with an explicit slope. Throws InconsistentBaseError if the
/// automaton has no travel vector of that slope.
SlopeChoice choose_slope(const Automaton& a, Slope slope);

/// First time the largest pairwise Manhattan distance exceeds 2N+1, or one
/// past the end of the trace if it never does.
std::uint64_t default_warmup(const Trace& trace, const Automaton& a);

// ---------------------------------------------------------------------------
// Report

struct AnalysisOptions {
  std::optional<Slope> slope;
  std::optional<ModBase> base;  // in the normalized frame of the slope
  std::vector<std::uint64_t> checkpoints;  // empty: the trace end only
  std::optional<std::uint64_t> warmup;
};

/// Resolves slope and base from the options. Throws InconsistentBaseError
/// when an override cannot be realized.
SlopeChoice resolve_slope(const Trace& trace, const Automaton& a, const AnalysisOptions& options);

void write_analysis_report(std::ostream& out, const Trace& trace, const Automaton& a,
                           const AnalysisOptions& options);

}  // namespace ssync

#endif  // SSYNC_ANALYSIS_HPP_
