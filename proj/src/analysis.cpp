#include "ssync/analysis.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <unordered_map>

namespace ssync {

// ---------------------------------------------------------------------------
// Travel vectors

std::optional<TravelVector> detect_travel_vector(const Automaton& a, StateId q0) {
  std::vector<std::int64_t> seen(a.state_count(), -1);
  std::vector<Cell> cells;
  StateId s = q0;
  Cell p{};
  for (std::int64_t step = 0;; ++step) {
    if (seen[s.index] >= 0) {
      const Vec2 v = p - cells[static_cast<std::size_t>(seen[s.index])];
      if (v.is_zero()) return std::nullopt;
      return TravelVector{v, static_cast<std::uint64_t>(step - seen[s.index])};
    }
    seen[s.index] = step;
    cells.push_back(p);
    const Transition t = a.lookup(s, StateSet{});
    s = t.next;
    p += displacement(t.move);
  }
}

std::set<TravelVector> enumerate_travel_vectors(const Automaton& a) {
  std::set<TravelVector> out;
  for (std::uint32_t q = 0; q < a.state_count(); ++q) {
    if (auto tv = detect_travel_vector(a, StateId{q})) out.insert(*tv);
  }
  return out;
}

std::vector<TravelVector> observed_travel_vectors(const Trace& trace) {
  std::vector<TravelVector> out;
  std::unordered_map<std::uint32_t, std::uint64_t> first_seen;
  for (const auto& r : trace.records()) {
    if (r.end_time > trace.end_time()) continue;
    first_seen.clear();
    for (std::uint64_t t = r.start_time + 1; t <= r.end_time; ++t) {
      const StateId q = trace.snapshot(t)[r.agent].state;
      auto [it, fresh] = first_seen.try_emplace(q.index, t);
      if (fresh) continue;
      const Vec2 v = trace.snapshot(t)[r.agent].cell - trace.snapshot(it->second)[r.agent].cell;
      if (!v.is_zero()) out.push_back(TravelVector{v, t - it->second});
      break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Slopes

Slope Slope::of(Vec2 v) {
  if (v.is_zero()) throw std::invalid_argument("the zero vector has no slope");
  if (v.x == 0) return vertical();
  return ratio(v.y, v.x);
}

Slope Slope::ratio(std::int64_t num, std::int64_t den) {
  if (den == 0) throw std::invalid_argument("zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const std::int64_t g = std::gcd(num, den);
  return Slope(num / g, den / g);
}

bool Slope::contains(Vec2 v) const {
  if (v.is_zero()) return false;
  if (is_vertical()) return v.x == 0;
  return v.x != 0 && v.y * den_ == num_ * v.x;
}

std::string Slope::to_string() const {
  if (is_vertical()) return "vertical";
  if (den_ == 1) return std::to_string(num_);
  return std::to_string(num_) + "/" + std::to_string(den_);
}

namespace {

std::optional<std::int64_t> parse_int(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace

std::optional<Slope> Slope::parse(std::string_view text) {
  if (text == "vertical" || text == "inf") return vertical();
  const auto slash = text.find('/');
  const auto num = parse_int(text.substr(0, slash));
  if (!num) return std::nullopt;
  if (slash == std::string_view::npos) return ratio(*num, 1);
  const auto den = parse_int(text.substr(slash + 1));
  if (!den || *den == 0) return std::nullopt;
  return ratio(*num, *den);
}

SymmetryFrame SymmetryFrame::normalizing(Slope s) {
  SymmetryFrame f;
  if (s.is_vertical()) {
    f.swap_axes = true;
  } else if (s.is_negative()) {
    f.negate_x = true;
  }
  return f;
}

Vec2 SymmetryFrame::apply(Vec2 v) const {
  if (swap_axes) std::swap(v.x, v.y);
  if (negate_x) v.x = -v.x;
  return v;
}

ModBase canonical_base(std::span<const Vec2> vectors, Slope r) {
  if (r.is_vertical()) throw InconsistentBaseError("vertical slope needs the axes swapped first");
  if (r.is_negative()) throw InconsistentBaseError("negative slope needs x reflected first");
  std::int64_t x = 0;
  for (Vec2 v : vectors) {
    if (v.x == 0 || !r.contains(v)) continue;
    const std::int64_t ax = v.x < 0 ? -v.x : v.x;
    x = x == 0 ? ax : std::lcm(x, ax);
  }
  if (x == 0) throw InconsistentBaseError("no travel vector with slope " + r.to_string());
  return ModBase{x, x / r.den() * r.num()};
}

namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

}  // namespace

Vec2 mod_reduce(Vec2 v, ModBase base) {
  const std::int64_t b = -floor_div(v.x, base.x);
  return {v.x + b * base.x, v.y + b * base.y};
}

Vec2 ominus(Cell c2, Cell c1, ModBase base) { return mod_reduce(c2 - c1, base); }

Vec2 Reduction::relative(Cell from, Cell to) const {
  const Vec2 d = frame.apply(from - to);
  return base ? mod_reduce(d, *base) : d;
}

// ---------------------------------------------------------------------------
// Meetings

std::vector<AgentSet> meeting_sequence(const Trace& trace) {
  if (trace.empty()) throw std::invalid_argument("trace has no snapshots");
  std::vector<AgentSet> ms;
  ms.reserve(trace.end_time() + 1);
  for (std::uint64_t t = 0; t <= trace.end_time(); ++t) ms.push_back(meeting_set(trace.snapshot(t)));
  return ms;
}

namespace {

AgentId only_member(AgentSet s) {
  AgentId id = 0;
  s.for_each([&](AgentId i) { id = i; });
  return id;
}

}  // namespace

std::vector<MeetingPair> classify_meeting_pairs(std::span<const AgentSet> ms) {
  std::vector<MeetingPair> pairs;
  std::optional<std::uint64_t> last;
  for (std::uint64_t u = 0; u < ms.size(); ++u) {
    if (ms[u].empty()) continue;
    if (last) {
      MeetingPair p;
      p.t = *last;
      p.u = u;
      const AgentSet mt = ms[*last];
      const AgentSet mu = ms[u];
      const AgentSet both = mt & mu;
      if (mt.size() == 2 && mu.size() == 2 && mt != mu && both.size() == 1) {
        p.kind = MeetingPair::Kind::Travel;
        p.traveling = only_member(both);
        p.source = only_member(AgentSet::from_bits(mt.bits() & ~both.bits()));
        p.destination = only_member(AgentSet::from_bits(mu.bits() & ~both.bits()));
      }
      pairs.push_back(p);
    }
    last = u;
  }
  return pairs;
}

std::vector<MeetingPair> travel_meeting_pairs(std::span<const AgentSet> ms) {
  auto pairs = classify_meeting_pairs(ms);
  std::erase_if(pairs, [](const MeetingPair& p) { return p.kind != MeetingPair::Kind::Travel; });
  return pairs;
}

// ---------------------------------------------------------------------------
// Q-tuples

std::size_t QTupleHash::operator()(const QTuple& q) const noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::uint64_t v) {
    h ^= v;
    h *= 0x100000001b3ULL;
  };
  for (StateId s : q.states) mix(s.index);
  for (Vec2 v : q.relative) {
    mix(static_cast<std::uint64_t>(v.x));
    mix(static_cast<std::uint64_t>(v.y));
  }
  mix(q.next.bits());
  mix(q.meeting.bits());
  return static_cast<std::size_t>(h);
}

QTuple q_tuple(const Trace& trace, std::uint64_t t, const Reduction& reduction) {
  if (t >= trace.end_time()) {
    throw std::out_of_range("no activation follows time " + std::to_string(t));
  }
  const auto snap = trace.snapshot(t);
  QTuple q;
  q.states.reserve(snap.size());
  for (const auto& s : snap) q.states.push_back(s.state);
  for (std::size_t i = 0; i < snap.size(); ++i) {
    for (std::size_t j = i + 1; j < snap.size(); ++j) {
      q.relative.push_back(reduction.relative(snap[i].cell, snap[j].cell));
    }
  }
  q.next = trace.activation(t);
  q.meeting = meeting_set(snap);
  return q;
}

namespace {

std::vector<MeetingPair> pairs_after(const Trace& trace, std::uint64_t warmup) {
  const auto ms = meeting_sequence(trace);
  auto pairs = travel_meeting_pairs(ms);
  std::erase_if(pairs, [&](const MeetingPair& p) { return p.t < warmup; });
  return pairs;
}

Vec2 source_shift(const Trace& trace, const MeetingPair& from, const MeetingPair& to) {
  return trace.snapshot(to.t)[to.source].cell - trace.snapshot(from.t)[from.source].cell;
}

}  // namespace

std::optional<QRecurrence> find_q_recurrence(const Trace& trace, const Reduction& reduction,
                                             std::uint64_t warmup) {
  const auto pairs = pairs_after(trace, warmup);
  // First index per (tuple, index parity); the earliest h that hits one wins.
  std::unordered_map<QTuple, std::size_t, QTupleHash> seen[2];
  for (std::size_t h = 0; h < pairs.size(); ++h) {
    QTuple q = q_tuple(trace, pairs[h].t, reduction);
    auto& bucket = seen[h % 2];
    if (auto it = bucket.find(q); it != bucket.end()) {
      const std::size_t k = it->second;
      return QRecurrence{k, h, pairs[k].t, pairs[h].t, source_shift(trace, pairs[k], pairs[h])};
    }
    bucket.emplace(std::move(q), h);
  }
  return std::nullopt;
}

std::string_view verification_name(Verification v) {
  switch (v) {
    case Verification::NotApplicable: return "not-applicable";
    case Verification::Verified: return "verified";
    case Verification::Falsified: return "falsified";
  }
  return "?";
}

Verification verify_periodic_displacement(const Trace& trace, const Reduction& reduction,
                                          std::uint64_t warmup, const QRecurrence& rec) {
  const auto pairs = pairs_after(trace, warmup);
  if (rec.h_index >= pairs.size() || rec.k_index >= rec.h_index) return Verification::NotApplicable;
  const QTuple target = q_tuple(trace, pairs[rec.h_index].t, reduction);
  const std::size_t expected = 2 * rec.h_index - rec.k_index;
  for (std::size_t j = rec.h_index + 2; j < pairs.size(); j += 2) {
    if (q_tuple(trace, pairs[j].t, reduction) != target) continue;
    if (j != expected) return Verification::Falsified;
    return source_shift(trace, pairs[rec.h_index], pairs[j]) == rec.displacement
               ? Verification::Verified
               : Verification::Falsified;
  }
  return Verification::NotApplicable;
}

// ---------------------------------------------------------------------------
// Bands

namespace {

template <class Range>
double band_width(const Range& cells, Slope slope) {
  bool any = false;
  std::int64_t lo = 0;
  std::int64_t hi = 0;
  for (const Cell& c : cells) {
    // signed distance to the line through the origin, scaled by the norm
    const std::int64_t s = slope.is_vertical() ? c.x : slope.den() * c.y - slope.num() * c.x;
    if (!any) {
      lo = hi = s;
      any = true;
    } else {
      lo = std::min(lo, s);
      hi = std::max(hi, s);
    }
  }
  if (!any) throw std::invalid_argument("band width of an empty cell set");
  if (lo == hi) return 0.0;
  const double norm =
      slope.is_vertical() ? 1.0 : std::hypot(static_cast<double>(slope.num()), static_cast<double>(slope.den()));
  return static_cast<double>(hi - lo) / (2.0 * norm);
}

}  // namespace

double min_band_width(std::span<const Cell> cells, Slope slope) { return band_width(cells, slope); }

double min_band_width(const std::unordered_set<Cell>& cells, Slope slope) { return band_width(cells, slope); }

// ---------------------------------------------------------------------------
// Slope selection

namespace {

std::vector<Vec2> automaton_vectors(const Automaton& a) {
  std::vector<Vec2> out;
  for (const auto& tv : enumerate_travel_vectors(a)) out.push_back(tv.vector);
  return out;
}

// Most frequent entry, ties broken by the smaller value.
template <class T>
std::optional<T> mode(const std::vector<T>& values) {
  std::map<T, std::size_t> counts;
  for (const T& v : values) ++counts[v];
  std::optional<T> best;
  std::size_t best_count = 0;
  for (const auto& [v, c] : counts) {
    if (c > best_count) {
      best = v;
      best_count = c;
    }
  }
  return best;
}

SlopeChoice with_base(const Automaton& a, Slope slope, std::string source) {
  SlopeChoice c;
  c.slope = slope;
  c.frame = SymmetryFrame::normalizing(slope);
  c.source = std::move(source);
  std::vector<Vec2> vs = automaton_vectors(a);
  for (Vec2& v : vs) v = c.frame.apply(v);
  const Vec2 unit = c.frame.apply(slope.is_vertical() ? Vec2{0, 1} : Vec2{slope.den(), slope.num()});
  c.base = canonical_base(vs, Slope::of(unit));
  return c;
}

}  // namespace

SlopeChoice choose_slope(const Trace& trace, const Automaton& a) {
  std::vector<Vec2> seen;
  for (const auto& tv : observed_travel_vectors(trace)) seen.push_back(tv.vector);
  std::string source = "observed";
  std::optional<Vec2> pick = mode(seen);
  if (!pick) {
    std::vector<Slope> slopes;
    for (Vec2 v : automaton_vectors(a)) slopes.push_back(Slope::of(v));
    if (auto s = mode(slopes)) {
      try {
        return with_base(a, *s, "automaton");
      } catch (const InconsistentBaseError&) {
      }
    }
    SlopeChoice none;
    none.source = "none";
    return none;
  }
  try {
    return with_base(a, Slope::of(*pick), source);
  } catch (const InconsistentBaseError&) {
    SlopeChoice c;
    c.slope = Slope::of(*pick);
    c.frame = SymmetryFrame::normalizing(*c.slope);
    c.source = source;
    return c;
  }
}

SlopeChoice choose_slope(const Automaton& a, Slope slope) { return with_base(a, slope, "override"); }

std::uint64_t default_warmup(const Trace& trace, const Automaton& a) {
  const std::uint64_t limit = 2 * a.state_count() + 1;
  for (std::uint64_t t = 0; t <= trace.end_time(); ++t) {
    if (max_pairwise_distance(trace.snapshot(t)) > limit) return t;
  }
  return trace.end_time() + 1;
}

// ---------------------------------------------------------------------------
// Report

SlopeChoice resolve_slope(const Trace& trace, const Automaton& a, const AnalysisOptions& options) {
  if (!options.base) {
    if (options.slope) return choose_slope(a, *options.slope);
    return choose_slope(trace, a);
  }
  const ModBase base = *options.base;
  if (base.x <= 0) throw InconsistentBaseError("base x must be positive");
  SlopeChoice c;
  c.source = "override";
  c.base = base;
  if (options.slope) {
    const Slope s = *options.slope;
    c.slope = s;
    c.frame = SymmetryFrame::normalizing(s);
    const Slope normal = Slope::of(c.frame.apply(s.is_vertical() ? Vec2{0, 1} : Vec2{s.den(), s.num()}));
    if (!normal.contains(Vec2{base.x, base.y})) {
      throw InconsistentBaseError("base (" + std::to_string(base.x) + "," + std::to_string(base.y) +
                                  ") does not have slope " + normal.to_string() + " in the normalized frame");
    }
  } else {
    c.slope = Slope::ratio(base.y, base.x);
    if (c.slope->is_negative()) throw InconsistentBaseError("base must have a non-negative slope");
  }
  return c;
}

namespace {

std::string fixed(double v) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(6);
  s << v;
  return s.str();
}

}  // namespace

void write_analysis_report(std::ostream& out, const Trace& trace, const Automaton& a,
                           const AnalysisOptions& options) {
  const SlopeChoice choice = resolve_slope(trace, a, options);
  const Reduction reduction = choice.reduction();
  const std::uint64_t warmup = options.warmup ? *options.warmup : default_warmup(trace, a);

  out << "automaton states " << a.state_count() << " agents " << a.agent_count() << '\n';
  out << "trace steps " << trace.end_time() << " explored " << trace.explored().size() << '\n';

  std::vector<std::pair<StateId, TravelVector>> per_state;
  std::set<Slope> classes;
  for (std::uint32_t q = 0; q < a.state_count(); ++q) {
    if (auto tv = detect_travel_vector(a, StateId{q})) {
      per_state.emplace_back(StateId{q}, *tv);
      classes.insert(Slope::of(tv->vector));
    }
  }
  out << "travel_vectors " << per_state.size() << '\n';
  for (const auto& [q, tv] : per_state) {
    out << "  " << a.label(q) << ' ' << tv.vector.x << ' ' << tv.vector.y << " period " << tv.period << '\n';
  }
  out << "slope_classes";
  for (const Slope& s : classes) out << ' ' << s.to_string();
  out << '\n';

  out << "slope " << (choice.slope ? choice.slope->to_string() : "none") << " source " << choice.source << '\n';
  if (choice.base) {
    out << "base " << choice.base->x << ' ' << choice.base->y << '\n';
  } else {
    out << "base none\n";
  }
  out << "frame swap_axes " << choice.frame.swap_axes << " negate_x " << choice.frame.negate_x << '\n';
  out << "warmup " << warmup << '\n';

  const auto ms = meeting_sequence(trace);
  const auto pairs = classify_meeting_pairs(ms);
  const auto travel = std::count_if(pairs.begin(), pairs.end(),
                                    [](const MeetingPair& p) { return p.kind == MeetingPair::Kind::Travel; });
  out << "meeting_pairs total " << pairs.size() << " travel " << travel << '\n';
  for (const auto& p : pairs) {
    out << "  pair " << p.t << ' ' << p.u;
    if (p.kind == MeetingPair::Kind::Travel) {
      out << " travel traveling " << p.traveling << " source " << p.source << " destination " << p.destination;
    } else {
      out << " plain";
    }
    out << '\n';
  }

  if (const auto rec = find_q_recurrence(trace, reduction, warmup)) {
    out << "q_recurrence k " << rec->k_time << " h " << rec->h_time << " displacement " << rec->displacement.x
        << ' ' << rec->displacement.y << " verification "
        << verification_name(verify_periodic_displacement(trace, reduction, warmup, *rec)) << '\n';
  } else {
    out << "q_recurrence none\n";
  }

  const Slope band_slope = choice.slope ? *choice.slope : Slope::ratio(0, 1);
  std::vector<std::uint64_t> checkpoints = options.checkpoints;
  if (checkpoints.empty()) checkpoints.push_back(trace.end_time());
  for (std::uint64_t t : checkpoints) {
    const std::uint64_t at = std::min(t, trace.end_time());
    out << "band " << at << " slope " << band_slope.to_string() << " width "
        << fixed(min_band_width(trace.explored_until(at), band_slope)) << '\n';
  }
}

}  // namespace ssync
