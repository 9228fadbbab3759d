#ifndef SSYNC_AUTOMATON_HPP_
#define SSYNC_AUTOMATON_HPP_

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ssync/types.hpp"

namespace ssync {

/// Validation or parse failure. `line` is 1-based, 0 when the problem is not
/// tied to a particular line of input.
class AutomatonError : public std::runtime_error {
 public:
  AutomatonError(const std::string& message, std::size_t line = 0, std::string token = {});

  std::size_t line() const { return line_; }
  const std::string& token() const { return token_; }

 private:
  std::size_t line_;
  std::string token_;
};

/// Raised by Automaton::apply when an input lies outside Q x 2^Q.
class DomainError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

struct Transition {
  StateId next;
  Move move = Move::Stay;
  friend constexpr bool operator==(const Transition&, const Transition&) = default;
};

/// The finite automaton shared by every agent. Agents differ only by their
/// initial state. Immutable once constructed.
class Automaton {
 public:
  static constexpr std::size_t kMaxStates = StateSet::kCapacity;
  static constexpr std::size_t kMaxAgents = AgentSet::kCapacity;

  /// One line of the transition table. A rule without `sensed` is the
  /// default for every subset not covered by an explicit rule of its state.
  struct Rule {
    StateId from;
    std::optional<StateSet> sensed;
    Transition to;
  };

  /// Validates everything: unique labels, a total and deterministic delta,
  /// at least one agent, and `order` a permutation of the states (empty means
  /// declaration order). Throws AutomatonError.
  Automaton(std::vector<std::string> labels, std::vector<StateId> initial_states,
            std::vector<StateId> order, std::vector<Rule> rules);

  std::size_t state_count() const { return labels_.size(); }
  std::size_t agent_count() const { return initial_states_.size(); }

  const std::string& label(StateId q) const { return labels_.at(q.index); }
  const std::vector<std::string>& labels() const { return labels_; }
  std::optional<StateId> find_state(std::string_view label) const;

  const std::vector<StateId>& initial_states() const { return initial_states_; }

  /// Total order used by the repeat case of the adversarial schedule.
  const std::vector<StateId>& order() const { return order_; }
  std::size_t rank(StateId q) const { return rank_[q.index]; }

  const std::vector<Rule>& rules() const { return rules_; }

  /// delta(q, sensed). Throws DomainError when q or a sensed state is not in Q.
  Transition apply(StateId q, StateSet sensed) const;

  /// Unchecked variant for callers that already hold valid ids.
  Transition lookup(StateId q, StateSet sensed) const {
    if (!dense_.empty()) return dense_[(std::size_t{q.index} << state_count()) | sensed.bits()];
    return lookup_sparse(q, sensed);
  }

  /// Line-oriented text accepted by parse_automaton.
  std::string to_text() const;

 private:
  Transition lookup_sparse(StateId q, StateSet sensed) const;

  std::vector<std::string> labels_;
  std::unordered_map<std::string, StateId> by_label_;
  std::vector<StateId> initial_states_;
  std::vector<StateId> order_;
  std::vector<std::size_t> rank_;
  std::vector<Rule> rules_;

  // Dense table indexed by (state << N) | sensed, built when N is small.
  std::vector<Transition> dense_;
  struct KeyHash {
    std::size_t operator()(const std::pair<std::uint32_t, std::uint64_t>& k) const noexcept {
      return std::hash<std::uint64_t>{}(k.second * 0x9E3779B97F4A7C15ULL + k.first);
    }
  };
  std::unordered_map<std::pair<std::uint32_t, std::uint64_t>, Transition, KeyHash> explicit_;
  std::vector<std::optional<Transition>> defaults_;
};

Automaton parse_automaton(std::string_view text);
Automaton parse_automaton(std::istream& in);

/// Names of the automata shipped with the library: east1, stay1, zig2.
const std::vector<std::string_view>& builtin_names();
std::optional<std::string_view> builtin_text(std::string_view name);

/// Resolves a builtin name first, otherwise reads the file at `name_or_path`.
/// Throws std::ios_base::failure when the file cannot be read.
Automaton load_automaton(const std::string& name_or_path);

}  // namespace ssync

#endif  // SSYNC_AUTOMATON_HPP_
