#ifndef SSYNC_TYPES_HPP_
#define SSYNC_TYPES_HPP_

#include <bit>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>
#include <type_traits>

namespace ssync {

/// Integer vector on the grid. Used both for cells and for displacements.
struct Vec2 {
  std::int64_t x = 0;
  std::int64_t y = 0;

  friend constexpr auto operator<=>(const Vec2&, const Vec2&) = default;

  constexpr Vec2& operator+=(Vec2 o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  constexpr Vec2& operator-=(Vec2 o) {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return a += b; }
  friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return a -= b; }
  friend constexpr Vec2 operator*(std::int64_t k, Vec2 v) { return {k * v.x, k * v.y}; }

  constexpr bool is_zero() const { return x == 0 && y == 0; }
};

using Cell = Vec2;

struct Vec2Hash {
  std::size_t operator()(Vec2 v) const noexcept {
    // splitmix-style finalizer over the packed pair
    std::uint64_t h = static_cast<std::uint64_t>(v.x) * 0x9E3779B97F4A7C15ULL ^
                      (static_cast<std::uint64_t>(v.y) + 0x632BE59BD9B4E019ULL);
    h ^= h >> 31;
    h *= 0xBF58476D1CE4E5B9ULL;
    h ^= h >> 29;
    return static_cast<std::size_t>(h);
  }
};

/// Movement alphabet. Numeric values match the {0,1,2,3,4} encoding:
/// 1=North=(0,+1), 2=East=(+1,0), 3=South=(0,-1), 4=West=(-1,0).
enum class Move : std::uint8_t { Stay = 0, North = 1, East = 2, South = 3, West = 4 };

inline constexpr int kMoveCount = 5;

constexpr Vec2 displacement(Move m) {
  switch (m) {
    case Move::North: return {0, 1};
    case Move::East: return {1, 0};
    case Move::South: return {0, -1};
    case Move::West: return {-1, 0};
    case Move::Stay: break;
  }
  return {0, 0};
}

constexpr char move_symbol(Move m) {
  constexpr char kSymbols[] = {'0', 'N', 'E', 'S', 'W'};
  return kSymbols[static_cast<int>(m)];
}

/// Accepts the letter form (0,N,E,S,W) and the digit form (0..4).
std::optional<Move> parse_move(std::string_view token);

struct StateId {
  std::uint32_t index = 0;
  friend constexpr auto operator<=>(const StateId&, const StateId&) = default;
};

using AgentId = std::size_t;

constexpr std::size_t to_index(StateId s) { return s.index; }
constexpr std::size_t to_index(AgentId a) { return a; }

/// Set of at most 64 ids packed into a machine word.
template <class Id>
class IdSet {
 public:
  static constexpr std::size_t kCapacity = 64;

  constexpr IdSet() = default;
  static constexpr IdSet from_bits(std::uint64_t bits) {
    IdSet s;
    s.bits_ = bits;
    return s;
  }

  constexpr void insert(Id id) { bits_ |= bit(id); }
  constexpr void erase(Id id) { bits_ &= ~bit(id); }
  constexpr bool contains(Id id) const { return (bits_ & bit(id)) != 0; }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr std::size_t size() const { return static_cast<std::size_t>(std::popcount(bits_)); }
  constexpr std::uint64_t bits() const { return bits_; }

  /// Calls f(Id) for each member in ascending order.
  template <class F>
  void for_each(F&& f) const {
    for (std::uint64_t b = bits_; b != 0; b &= b - 1) {
      const auto i = static_cast<std::size_t>(std::countr_zero(b));
      if constexpr (std::is_same_v<Id, StateId>) {
        f(StateId{static_cast<std::uint32_t>(i)});
      } else {
        f(static_cast<Id>(i));
      }
    }
  }

  friend constexpr bool operator==(IdSet, IdSet) = default;
  friend constexpr IdSet operator&(IdSet a, IdSet b) { return from_bits(a.bits_ & b.bits_); }
  friend constexpr IdSet operator|(IdSet a, IdSet b) { return from_bits(a.bits_ | b.bits_); }

 private:
  static constexpr std::uint64_t bit(Id id) { return std::uint64_t{1} << to_index(id); }

  std::uint64_t bits_ = 0;
};

using StateSet = IdSet<StateId>;
using AgentSet = IdSet<AgentId>;

}  // namespace ssync

template <>
struct std::hash<ssync::Vec2> : ssync::Vec2Hash {};

#endif  // SSYNC_TYPES_HPP_
