// Copyright 2026 The domino101 Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Tiles, tile sets, seats and teams for the four-player partnership game.

#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <iterator>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "domino101/errors.hpp"

namespace domino101 {

using Pip = int;

inline constexpr Pip kMaxPip = 6;
inline constexpr int kNumTiles = 28;
inline constexpr int kHandSize = 7;
inline constexpr int kNumSeats = 4;

// A domino in canonical form (lo <= hi). The blank face is pip 0.
struct Tile {
  Pip lo = 0;
  Pip hi = 0;

  constexpr Tile() = default;
  // Accepts either orientation and canonicalizes.
  constexpr Tile(Pip a, Pip b) : lo(a < b ? a : b), hi(a < b ? b : a) {}

  constexpr bool is_double() const { return lo == hi; }
  constexpr int pip_sum() const { return lo + hi; }
  constexpr bool has(Pip v) const { return lo == v || hi == v; }
  // Pip on the other half when one half shows `v`. Requires has(v).
  constexpr Pip other(Pip v) const { return lo == v ? hi : lo; }

  // Dense index in [0, 28): (0,0)=0, (0,1)=1, (1,1)=2, (0,2)=3, ...
  constexpr int index() const { return hi * (hi + 1) / 2 + lo; }
  static constexpr Tile from_index(int idx) {
    int hi = 0;
    while ((hi + 1) * (hi + 2) / 2 <= idx) ++hi;
    return Tile(idx - hi * (hi + 1) / 2, hi);
  }

  friend constexpr bool operator==(const Tile&, const Tile&) = default;
  friend constexpr auto operator<=>(const Tile& a, const Tile& b) {
    return a.index() <=> b.index();
  }
};

inline constexpr bool valid_pip(int v) { return v >= 0 && v <= kMaxPip; }

inline std::string to_string(const Tile& t) {
  return std::to_string(t.lo) + "-" + std::to_string(t.hi);
}

inline std::ostream& operator<<(std::ostream& os, const Tile& t) {
  return os << to_string(t);
}

namespace detail {

constexpr std::array<std::uint32_t, 7> make_pip_masks() {
  std::array<std::uint32_t, 7> masks{};
  for (Pip v = 0; v <= kMaxPip; ++v)
    for (Pip o = 0; o <= kMaxPip; ++o) masks[v] |= 1u << Tile(v, o).index();
  return masks;
}

inline constexpr std::array<std::uint32_t, 7> kPipMasks = make_pip_masks();

constexpr std::array<Tile, kNumTiles> make_tile_table() {
  std::array<Tile, kNumTiles> tiles{};
  for (int i = 0; i < kNumTiles; ++i) tiles[i] = Tile::from_index(i);
  return tiles;
}

inline constexpr std::array<Tile, kNumTiles> kTileByIndex = make_tile_table();

}  // namespace detail

// Set of tiles as a 28-bit mask. Value type; cheap to copy.
class TileSet {
 public:
  constexpr TileSet() = default;
  constexpr explicit TileSet(std::uint32_t bits) : bits_(bits & kAllBits) {}
  TileSet(std::initializer_list<Tile> tiles) {
    for (const Tile& t : tiles) insert(t);
  }

  static constexpr TileSet full() { return TileSet(kAllBits); }

  constexpr bool contains(const Tile& t) const {
    return (bits_ >> t.index()) & 1u;
  }
  constexpr void insert(const Tile& t) { bits_ |= bit(t); }
  constexpr void erase(const Tile& t) { bits_ &= ~bit(t); }
  constexpr int size() const { return std::popcount(bits_); }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr std::uint32_t bits() const { return bits_; }

  constexpr TileSet operator|(TileSet o) const { return TileSet(bits_ | o.bits_); }
  constexpr TileSet operator&(TileSet o) const { return TileSet(bits_ & o.bits_); }
  constexpr TileSet operator-(TileSet o) const { return TileSet(bits_ & ~o.bits_); }
  constexpr TileSet& operator|=(TileSet o) { bits_ |= o.bits_; return *this; }
  constexpr TileSet& operator&=(TileSet o) { bits_ &= o.bits_; return *this; }
  constexpr TileSet& operator-=(TileSet o) { bits_ &= ~o.bits_; return *this; }
  friend constexpr bool operator==(TileSet, TileSet) = default;

  // Tiles showing pip `v` on either half.
  static constexpr TileSet with_pip(Pip v) { return TileSet(detail::kPipMasks[v]); }
  static constexpr TileSet doubles() {
    TileSet s;
    for (Pip v = 0; v <= kMaxPip; ++v) s.insert(Tile(v, v));
    return s;
  }

  constexpr int count_with(Pip v) const { return (*this & with_pip(v)).size(); }
  constexpr int pip_total() const {
    int total = 0;
    for (Tile t : *this) total += t.pip_sum();
    return total;
  }

  class iterator {
   public:
    using iterator_category = std::forward_iterator_tag;
    using value_type = Tile;
    using difference_type = std::ptrdiff_t;
    using pointer = const Tile*;
    using reference = Tile;

    constexpr iterator() = default;
    constexpr explicit iterator(std::uint32_t rest) : rest_(rest) {}
    constexpr Tile operator*() const { return detail::kTileByIndex[std::countr_zero(rest_)]; }
    constexpr iterator& operator++() {
      rest_ &= rest_ - 1;
      return *this;
    }
    constexpr iterator operator++(int) {
      iterator tmp = *this;
      ++*this;
      return tmp;
    }
    friend constexpr bool operator==(iterator, iterator) = default;

   private:
    std::uint32_t rest_ = 0;
  };

  constexpr iterator begin() const { return iterator(bits_); }
  constexpr iterator end() const { return iterator(0); }

  std::vector<Tile> to_vector() const { return {begin(), end()}; }

 private:
  static constexpr std::uint32_t kAllBits = (1u << kNumTiles) - 1;
  static constexpr std::uint32_t bit(const Tile& t) { return 1u << t.index(); }

  std::uint32_t bits_ = 0;
};

using Hand = TileSet;

enum class Seat : std::uint8_t { A = 0, B = 1, C = 2, D = 3 };
enum class Team : std::uint8_t { AC = 0, BD = 1 };

inline constexpr std::array<Seat, 4> kSeats = {Seat::A, Seat::B, Seat::C, Seat::D};

constexpr int idx(Seat s) { return static_cast<int>(s); }
constexpr int idx(Team t) { return static_cast<int>(t); }
constexpr Seat seat_at(int i) { return static_cast<Seat>(i & 3); }
// Clockwise A -> B -> C -> D -> A.
constexpr Seat next(Seat s) { return seat_at(idx(s) + 1); }
constexpr Seat partner(Seat s) { return seat_at(idx(s) + 2); }
constexpr Team team_of(Seat s) { return static_cast<Team>(idx(s) & 1); }
constexpr Team other(Team t) { return t == Team::AC ? Team::BD : Team::AC; }
constexpr std::array<Seat, 2> members(Team t) {
  return t == Team::AC ? std::array<Seat, 2>{Seat::A, Seat::C}
                       : std::array<Seat, 2>{Seat::B, Seat::D};
}

inline std::string to_string(Seat s) { return std::string(1, static_cast<char>('A' + idx(s))); }
inline std::string to_string(Team t) { return t == Team::AC ? "AC" : "BD"; }
inline std::ostream& operator<<(std::ostream& os, Seat s) { return os << to_string(s); }
inline std::ostream& operator<<(std::ostream& os, Team t) { return os << to_string(t); }

inline std::optional<Seat> parse_seat(std::string_view s) {
  if (s.size() == 1 && s[0] >= 'A' && s[0] <= 'D') return seat_at(s[0] - 'A');
  return std::nullopt;
}
inline std::optional<Team> parse_team(std::string_view s) {
  if (s == "AC") return Team::AC;
  if (s == "BD") return Team::BD;
  return std::nullopt;
}

// Per-seat container indexed by Seat.
template <typename T>
class PerSeat {
 public:
  PerSeat() = default;
  explicit PerSeat(const T& v) { values_.fill(v); }

  T& operator[](Seat s) { return values_[idx(s)]; }
  const T& operator[](Seat s) const { return values_[idx(s)]; }
  friend bool operator==(const PerSeat&, const PerSeat&) = default;

 private:
  std::array<T, 4> values_{};
};

}  // namespace domino101
