#include "ssync/automaton.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <iterator>
#include <sstream>
#include <unordered_set>

namespace ssync {
namespace {

constexpr std::size_t kDenseMaxStates = 12;

bool valid_label(std::string_view s) {
  if (s.empty() || s == "->" || s == "*") return false;
  return std::none_of(s.begin(), s.end(), [](char c) {
    return c == '{' || c == '}' || c == ',' || c == '#' || c == ':' ||
           static_cast<unsigned char>(c) <= ' ';
  });
}

std::string format_message(const std::string& message, std::size_t line) {
  if (line == 0) return message;
  return "line " + std::to_string(line) + ": " + message;
}

}  // namespace

AutomatonError::AutomatonError(const std::string& message, std::size_t line, std::string token)
    : std::runtime_error(format_message(message, line)), line_(line), token_(std::move(token)) {}

std::optional<Move> parse_move(std::string_view token) {
  if (token.size() != 1) return std::nullopt;
  switch (token[0]) {
    case '0': return Move::Stay;
    case 'N': case '1': return Move::North;
    case 'E': case '2': return Move::East;
    case 'S': case '3': return Move::South;
    case 'W': case '4': return Move::West;
    default: return std::nullopt;
  }
}

Automaton::Automaton(std::vector<std::string> labels, std::vector<StateId> initial_states,
                     std::vector<StateId> order, std::vector<Rule> rules)
    : labels_(std::move(labels)),
      initial_states_(std::move(initial_states)),
      order_(std::move(order)),
      rules_(std::move(rules)) {
  const std::size_t n_states = labels_.size();
  if (n_states == 0) throw AutomatonError("automaton declares no states");
  if (n_states > kMaxStates) {
    throw AutomatonError("too many states (" + std::to_string(n_states) + " > " +
                         std::to_string(kMaxStates) + ")");
  }
  for (std::size_t i = 0; i < n_states; ++i) {
    if (!valid_label(labels_[i])) throw AutomatonError("invalid state label", 0, labels_[i]);
    if (!by_label_.emplace(labels_[i], StateId{static_cast<std::uint32_t>(i)}).second) {
      throw AutomatonError("duplicate state label '" + labels_[i] + "'", 0, labels_[i]);
    }
  }
  auto in_range = [n_states](StateId q) { return q.index < n_states; };

  if (initial_states_.empty()) throw AutomatonError("automaton declares no agents");
  if (initial_states_.size() > kMaxAgents) {
    throw AutomatonError("too many agents (" + std::to_string(initial_states_.size()) + " > " +
                         std::to_string(kMaxAgents) + ")");
  }
  for (StateId q : initial_states_) {
    if (!in_range(q)) throw AutomatonError("initial state out of range");
  }

  if (order_.empty()) {
    for (std::size_t i = 0; i < n_states; ++i) order_.push_back(StateId{static_cast<std::uint32_t>(i)});
  }
  if (order_.size() != n_states) throw AutomatonError("order must list every state exactly once");
  rank_.assign(n_states, n_states);
  for (std::size_t r = 0; r < order_.size(); ++r) {
    const StateId q = order_[r];
    if (!in_range(q) || rank_[q.index] != n_states) {
      throw AutomatonError("order must list every state exactly once");
    }
    rank_[q.index] = r;
  }

  const std::uint64_t universe =
      n_states == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n_states) - 1;
  defaults_.assign(n_states, std::nullopt);
  std::vector<std::uint64_t> explicit_count(n_states, 0);
  for (const Rule& rule : rules_) {
    if (!in_range(rule.from) || !in_range(rule.to.next)) {
      throw AutomatonError("rule references a state outside the automaton");
    }
    const std::string& from = labels_[rule.from.index];
    if (rule.sensed) {
      if ((rule.sensed->bits() & ~universe) != 0) {
        throw AutomatonError("sensed set references a state outside the automaton", 0, from);
      }
      if (!explicit_.emplace(std::pair{rule.from.index, rule.sensed->bits()}, rule.to).second) {
        throw AutomatonError("duplicate rule for state '" + from + "'", 0, from);
      }
      ++explicit_count[rule.from.index];
    } else {
      if (defaults_[rule.from.index]) {
        throw AutomatonError("duplicate default rule for state '" + from + "'", 0, from);
      }
      defaults_[rule.from.index] = rule.to;
    }
  }
  for (std::size_t q = 0; q < n_states; ++q) {
    const bool covered = n_states < 64 && explicit_count[q] == (std::uint64_t{1} << n_states);
    if (!defaults_[q] && !covered) {
      throw AutomatonError("state '" + labels_[q] + "' has no default rule and delta is partial", 0,
                           labels_[q]);
    }
  }

  if (n_states <= kDenseMaxStates) {
    const std::size_t subsets = std::size_t{1} << n_states;
    dense_.resize(n_states * subsets);
    for (std::size_t q = 0; q < n_states; ++q) {
      for (std::size_t m = 0; m < subsets; ++m) {
        dense_[(q << n_states) | m] =
            lookup_sparse(StateId{static_cast<std::uint32_t>(q)}, StateSet::from_bits(m));
      }
    }
  }
}

std::optional<StateId> Automaton::find_state(std::string_view label) const {
  auto it = by_label_.find(std::string(label));
  if (it == by_label_.end()) return std::nullopt;
  return it->second;
}

Transition Automaton::lookup_sparse(StateId q, StateSet sensed) const {
  auto it = explicit_.find({q.index, sensed.bits()});
  if (it != explicit_.end()) return it->second;
  return *defaults_[q.index];
}

Transition Automaton::apply(StateId q, StateSet sensed) const {
  const std::size_t n = state_count();
  if (q.index >= n) throw DomainError("state index " + std::to_string(q.index) + " not in Q");
  if (n < 64 && (sensed.bits() >> n) != 0) throw DomainError("sensed set is not a subset of Q");
  return lookup(q, sensed);
}

std::string Automaton::to_text() const {
  std::ostringstream out;
  out << "states:";
  for (const auto& l : labels_) out << ' ' << l;
  out << "\nagents:";
  for (StateId q : initial_states_) out << ' ' << labels_[q.index];
  out << '\n';
  if (!std::is_sorted(order_.begin(), order_.end())) {
    out << "order:";
    for (StateId q : order_) out << ' ' << labels_[q.index];
    out << '\n';
  }
  for (const Rule& r : rules_) {
    out << "delta " << labels_[r.from.index] << ' ';
    if (r.sensed) {
      out << '{';
      bool first = true;
      r.sensed->for_each([&](StateId s) {
        if (!first) out << ',';
        out << labels_[s.index];
        first = false;
      });
      out << '}';
    } else {
      out << '*';
    }
    out << " -> " << labels_[r.to.next.index] << ' ' << move_symbol(r.to.move) << '\n';
  }
  return out.str();
}

namespace {

// Splits on whitespace; a {...} group is kept as one token even if it
// contains blanks.
std::vector<std::string> tokenize(std::string_view line, std::size_t line_no) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && static_cast<unsigned char>(line[i]) <= ' ') ++i;
    if (i >= line.size()) break;
    std::size_t j = i;
    if (line[i] == '{') {
      j = line.find('}', i);
      if (j == std::string_view::npos) {
        throw AutomatonError("unterminated '{'", line_no, std::string(line.substr(i)));
      }
      ++j;
    } else {
      while (j < line.size() && static_cast<unsigned char>(line[j]) > ' ') ++j;
    }
    tokens.emplace_back(line.substr(i, j - i));
    i = j;
  }
  return tokens;
}

class Parser {
 public:
  void feed(std::string_view raw, std::size_t line_no) {
    line_ = line_no;
    if (auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    auto tokens = tokenize(raw, line_no);
    if (tokens.empty()) return;
    const std::string& head = tokens.front();
    if (head == "states:") {
      for (std::size_t i = 1; i < tokens.size(); ++i) declare(tokens[i]);
    } else if (head == "agents:") {
      for (std::size_t i = 1; i < tokens.size(); ++i) agents_.push_back(resolve(tokens[i]));
      if (agents_line_ == 0) agents_line_ = line_no;
    } else if (head == "order:") {
      if (!order_.empty()) throw AutomatonError("order declared twice", line_, head);
      for (std::size_t i = 1; i < tokens.size(); ++i) order_.push_back(resolve(tokens[i]));
    } else if (head == "delta") {
      rule(tokens);
    } else {
      throw AutomatonError("unknown directive '" + head + "'", line_, head);
    }
  }

  Automaton finish() {
    if (labels_.empty()) throw AutomatonError("no 'states:' line", 0, "states:");
    if (agents_.empty()) throw AutomatonError("n = 0: no agents declared", agents_line_, "agents:");
    try {
      return Automaton(labels_, agents_, order_, rules_);
    } catch (const AutomatonError& e) {
      if (e.line() != 0 || e.token().empty()) throw;
      auto it = declared_at_.find(e.token());
      throw AutomatonError(e.what(), it == declared_at_.end() ? 0 : it->second, e.token());
    }
  }

 private:
  void declare(const std::string& label) {
    if (!valid_label(label)) throw AutomatonError("invalid state label '" + label + "'", line_, label);
    if (!declared_at_.emplace(label, line_).second) {
      throw AutomatonError("duplicate state label '" + label + "'", line_, label);
    }
    ids_.emplace(label, StateId{static_cast<std::uint32_t>(labels_.size())});
    labels_.push_back(label);
    if (labels_.size() > Automaton::kMaxStates) throw AutomatonError("too many states", line_, label);
  }

  StateId resolve(const std::string& label) const {
    auto it = ids_.find(label);
    if (it == ids_.end()) throw AutomatonError("undeclared state '" + label + "'", line_, label);
    return it->second;
  }

  StateSet resolve_set(const std::string& token) const {
    StateSet set;
    std::string_view body(token);
    body = body.substr(1, body.size() - 2);
    std::size_t start = 0;
    while (start <= body.size()) {
      std::size_t comma = body.find(',', start);
      if (comma == std::string_view::npos) comma = body.size();
      std::string item(body.substr(start, comma - start));
      item.erase(std::remove_if(item.begin(), item.end(),
                                [](char c) { return static_cast<unsigned char>(c) <= ' '; }),
                 item.end());
      if (item.empty()) {
        if (comma != body.size() || start != 0) throw AutomatonError("empty label in set", line_, token);
      } else {
        set.insert(resolve(item));
      }
      start = comma + 1;
    }
    return set;
  }

  void rule(const std::vector<std::string>& t) {
    // delta <state> <set|*> -> <state> <move>
    if (t.size() != 6) {
      throw AutomatonError("expected 'delta <state> <set> -> <state> <move>'", line_,
                           t.size() > 1 ? t.back() : t.front());
    }
    if (t[3] != "->") throw AutomatonError("expected '->'", line_, t[3]);
    Automaton::Rule r;
    r.from = resolve(t[1]);
    if (t[2] == "*") {
      r.sensed = std::nullopt;
    } else if (t[2].front() == '{' && t[2].back() == '}') {
      r.sensed = resolve_set(t[2]);
    } else {
      throw AutomatonError("expected '*' or '{...}'", line_, t[2]);
    }
    r.to.next = resolve(t[4]);
    auto move = parse_move(t[5]);
    if (!move) throw AutomatonError("invalid move '" + t[5] + "'", line_, t[5]);
    r.to.move = *move;
    // Duplicates are reported here, where the line is still known.
    const auto key = std::pair{r.from.index, r.sensed ? r.sensed->bits() : ~std::uint64_t{0}};
    const bool fresh = r.sensed ? seen_rules_.emplace(key).second : seen_defaults_.emplace(r.from.index).second;
    if (!fresh) throw AutomatonError("duplicate rule for state '" + t[1] + "'", line_, t[1]);
    rules_.push_back(r);
  }

  struct PairHash {
    std::size_t operator()(const std::pair<std::uint32_t, std::uint64_t>& k) const noexcept {
      return std::hash<std::uint64_t>{}(k.second ^ (std::uint64_t{k.first} << 58));
    }
  };

  std::size_t line_ = 0;
  std::size_t agents_line_ = 0;
  std::vector<std::string> labels_;
  std::unordered_map<std::string, StateId> ids_;
  std::unordered_map<std::string, std::size_t> declared_at_;
  std::vector<StateId> agents_;
  std::vector<StateId> order_;
  std::vector<Automaton::Rule> rules_;
  std::unordered_set<std::pair<std::uint32_t, std::uint64_t>, PairHash> seen_rules_;
  std::unordered_set<std::uint32_t> seen_defaults_;
};

}  // namespace

Automaton parse_automaton(std::string_view text) {
  Parser parser;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    parser.feed(text.substr(start, end - start), ++line_no);
    start = end + 1;
  }
  return parser.finish();
}

Automaton parse_automaton(std::istream& in) {
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_automaton(std::string_view(text));
}

namespace {

constexpr std::string_view kEast1 =
    "# one state, always East\n"
    "states: e\n"
    "agents: e e e\n"
    "delta e * -> e E\n";

constexpr std::string_view kStay1 =
    "# one state, never moves\n"
    "states: s\n"
    "agents: s s s\n"
    "delta s * -> s 0\n";

constexpr std::string_view kZig2 =
    "# North then East; travel vector (1,1), period 2\n"
    "states: z1 z2\n"
    "agents: z1 z1 z1\n"
    "delta z1 * -> z2 N\n"
    "delta z2 * -> z1 E\n";

}  // namespace

const std::vector<std::string_view>& builtin_names() {
  static const std::vector<std::string_view> names{"east1", "stay1", "zig2"};
  return names;
}

std::optional<std::string_view> builtin_text(std::string_view name) {
  if (name == "east1") return kEast1;
  if (name == "stay1") return kStay1;
  if (name == "zig2") return kZig2;
  return std::nullopt;
}

Automaton load_automaton(const std::string& name_or_path) {
  if (auto text = builtin_text(name_or_path)) return parse_automaton(*text);
  std::ifstream in(name_or_path);
  if (!in) throw std::ios_base::failure("cannot open automaton file '" + name_or_path + "'");
  return parse_automaton(in);
}

}  // namespace ssync
