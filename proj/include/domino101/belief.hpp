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

// Opponent model: what one AI seat believes about the three hands it
// cannot see.
//
// Passes are hard facts (the passer holds no tile showing either end).
// Playing twice in a row on an end one opened, or playing onto the end the
// partner opened, are soft hints that the player lacks the other end's pip;
// they only lower sampling weights.
//
// The belief keeps one concrete determinization of the hidden hands. It is
// dealt at random when the round starts and repaired in place as tiles are
// played: when a tile turns up in the "wrong" sampled hand it is moved to
// the real player and a random tile of that player goes back in exchange.

#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <variant>
#include <vector>

#include "domino101/errors.hpp"
#include "domino101/rng.hpp"
#include "domino101/rules.hpp"
#include "domino101/tile.hpp"

namespace domino101 {

inline constexpr double kSoftFactor = 0.5;
inline constexpr double kSoftFloor = 0.0625;

// Bitmask over pips 0..6.
using PipMask = std::uint8_t;

constexpr PipMask pip_bit(Pip v) { return static_cast<PipMask>(1u << v); }

inline TileSet tiles_with_any(PipMask mask) {
  TileSet s;
  for (Pip v = 0; v <= kMaxPip; ++v) {
    if (mask & pip_bit(v)) s |= TileSet::with_pip(v);
  }
  return s;
}

struct ObservedPlay {
  Seat seat;
  Tile tile;
  End end;
  bool chain_was_empty = false;
  Ends ends_before;
  Seat left_opener_before = Seat::A;
  Seat right_opener_before = Seat::A;
};

struct ObservedPass {
  Seat seat;
  Ends ends;
};

using ObservedEvent = std::variant<ObservedPlay, ObservedPass>;

// Attach the chain context an estimator needs to a history entry.
inline ObservedEvent observe_from(const Chain& before, const Event& e) {
  if (const auto* pass = std::get_if<PassEvent>(&e)) return ObservedPass{pass->seat, pass->ends_at_pass};
  const auto& play = std::get<PlayEvent>(e);
  ObservedPlay o{play.seat, play.tile, play.end};
  o.chain_was_empty = before.empty();
  if (!before.empty()) {
    o.ends_before = before.ends();
    o.left_opener_before = before.opened_by(End::Left);
    o.right_opener_before = before.opened_by(End::Right);
  }
  return o;
}

// Replays a round history and returns the observed form of each entry.
inline std::vector<ObservedEvent> observed_history(const std::vector<Event>& history) {
  std::vector<ObservedEvent> out;
  out.reserve(history.size());
  Chain chain;
  for (const Event& e : history) {
    out.push_back(observe_from(chain, e));
    if (const auto* play = std::get_if<PlayEvent>(&e)) chain.place(play->tile, play->end, play->seat);
  }
  return out;
}

inline std::array<Seat, 3> hidden_seats(Seat owner) {
  return {next(owner), partner(owner), next(partner(owner))};
}

struct Belief {
  Seat owner = Seat::A;
  Hand own_hand;
  TileSet unseen;
  PerSeat<int> hand_sizes;
  PerSeat<PipMask> hard_excluded;
  PerSeat<std::array<double, 7>> soft_penalty;
  // One determinization; sample[owner] stays empty.
  PerSeat<Hand> sample;
  // Whether the seat's last turn was a play on an end it had itself opened.
  PerSeat<bool> extended_own_end;
  Rng rng;

  int chain_size() const { return kNumTiles - unseen.size() - own_hand.size(); }

  // Unseen tiles compatible with the seat's hard exclusions.
  TileSet allowed_for(Seat s) const { return unseen - tiles_with_any(hard_excluded[s]); }

  // Relative weight of giving tile `t` to seat `s`.
  double weight(Seat s, Tile t) const {
    double w = soft_penalty[s][t.lo];
    if (!t.is_double()) w *= soft_penalty[s][t.hi];
    return w;
  }
};

namespace detail {

// Hall's condition for assigning every tile in `tiles` to one of `seats`
// (with exact capacities) under per-seat allowed sets.
inline bool assignment_feasible(TileSet tiles, const std::array<Seat, 3>& seats,
                                const std::array<TileSet, 3>& allowed,
                                const std::array<int, 3>& capacity) {
  int total = 0;
  for (int c : capacity) {
    if (c < 0) return false;
    total += c;
  }
  if (total != tiles.size()) return false;
  for (unsigned subset = 0; subset < 8; ++subset) {
    TileSet outside;
    int cap = 0;
    for (int i = 0; i < 3; ++i) {
      if (subset & (1u << i)) {
        cap += capacity[i];
      } else {
        outside |= allowed[i];
      }
    }
    // Tiles no seat outside the subset can take must fit inside it.
    if ((tiles - outside).size() > cap) return false;
  }
  (void)seats;
  return true;
}

enum class DrawMode { Weighted, Uniform, Guided };

// One sequential draw. Returns false on a dead end (Weighted/Uniform only).
inline bool draw_assignment(const Belief& b, Rng& rng, DrawMode mode, PerSeat<Hand>& out) {
  const auto seats = hidden_seats(b.owner);
  std::array<TileSet, 3> allowed;
  std::array<int, 3> capacity;
  for (int i = 0; i < 3; ++i) {
    allowed[i] = b.allowed_for(seats[i]);
    capacity[i] = b.hand_sizes[seats[i]];
  }
  std::vector<Tile> order = b.unseen.to_vector();
  rng.shuffle(order);
  out = PerSeat<Hand>();
  TileSet remaining = b.unseen;
  for (Tile t : order) {
    remaining.erase(t);
    std::array<double, 3> w{};
    double total = 0;
    for (int i = 0; i < 3; ++i) {
      if (capacity[i] == 0 || !allowed[i].contains(t)) continue;
      if (mode == DrawMode::Guided) {
        auto cap = capacity;
        --cap[i];
        if (!assignment_feasible(remaining, seats, allowed, cap)) continue;
      }
      w[i] = mode == DrawMode::Uniform ? 1.0 : b.weight(seats[i], t);
      total += w[i];
    }
    if (total <= 0) return false;
    double x = rng.unit() * total;
    int pick = -1;
    for (int i = 0; i < 3; ++i) {
      if (w[i] <= 0) continue;
      pick = i;
      if (x < w[i]) break;
      x -= w[i];
    }
    out[seats[pick]].insert(t);
    --capacity[pick];
  }
  return true;
}

}  // namespace detail

inline bool hard_constraints_feasible(const Belief& b) {
  const auto seats = hidden_seats(b.owner);
  std::array<TileSet, 3> allowed;
  std::array<int, 3> capacity;
  for (int i = 0; i < 3; ++i) {
    allowed[i] = b.allowed_for(seats[i]);
    capacity[i] = b.hand_sizes[seats[i]];
  }
  return detail::assignment_feasible(b.unseen, seats, allowed, capacity);
}

inline constexpr int kFreshRetries = 64;

// Independent determinization weighted by the soft penalties. Tries
// weighted rejection draws first, then unweighted ones, then a draw that
// checks feasibility at every step (which cannot dead-end once the hard
// constraints are known to be satisfiable).
inline PerSeat<Hand> sample_fresh(const Belief& b, Rng& rng) {
  if (!hard_constraints_feasible(b)) {
    throw Unsatisfiable("hidden hands admit no assignment for seat " + to_string(b.owner));
  }
  PerSeat<Hand> out;
  for (int i = 0; i < kFreshRetries; ++i) {
    if (detail::draw_assignment(b, rng, detail::DrawMode::Weighted, out)) return out;
  }
  for (int i = 0; i < kFreshRetries; ++i) {
    if (detail::draw_assignment(b, rng, detail::DrawMode::Uniform, out)) return out;
  }
  detail::draw_assignment(b, rng, detail::DrawMode::Guided, out);
  return out;
}

// True when the sample is a valid completion of the deal for this belief.
inline bool sample_consistent(const Belief& b) {
  TileSet seen;
  int count = 0;
  for (Seat s : hidden_seats(b.owner)) {
    const Hand& h = b.sample[s];
    if (h.size() != b.hand_sizes[s]) return false;
    if (!(h - b.allowed_for(s)).empty()) return false;
    seen |= h;
    count += h.size();
  }
  return b.sample[b.owner].empty() && count == b.unseen.size() && seen == b.unseen &&
         b.hand_sizes[b.owner] == b.own_hand.size();
}

inline Belief init_belief(Seat owner, const Hand& own_hand, std::uint64_t seed) {
  Belief b;
  b.owner = owner;
  b.own_hand = own_hand;
  b.unseen = TileSet::full() - own_hand;
  b.rng = Rng(seed);
  for (Seat s : kSeats) {
    b.hand_sizes[s] = kHandSize;
    b.soft_penalty[s].fill(1.0);
  }
  b.hand_sizes[owner] = own_hand.size();

  std::vector<Tile> pool = b.unseen.to_vector();
  b.rng.shuffle(pool);
  const auto seats = hidden_seats(owner);
  for (std::size_t i = 0; i < pool.size(); ++i) {
    b.sample[seats[std::min<std::size_t>(i / kHandSize, 2)]].insert(pool[i]);
  }
  return b;
}

inline Seat sample_holder(const Belief& b, Tile t) {
  for (Seat s : hidden_seats(b.owner)) {
    if (b.sample[s].contains(t)) return s;
  }
  throw DataError("tile " + to_string(t) + " is in no sampled hand");
}

namespace detail {

template <typename T>
T pick(Rng& rng, const std::vector<T>& items) {
  return items[rng.below(items.size())];
}

}  // namespace detail

// Restore the seat's hard exclusions in the sample. Each offending tile is
// swapped with a compatible tile from another hidden hand; if no single swap
// works the whole determinization is redrawn.
inline void constrained_redraw(Belief& b, Seat seat) {
  const TileSet allowed_here = b.allowed_for(seat);
  for (Tile bad : b.sample[seat] - allowed_here) {
    std::vector<std::pair<Seat, Tile>> swaps;
    for (Seat other_seat : hidden_seats(b.owner)) {
      if (other_seat == seat || !b.allowed_for(other_seat).contains(bad)) continue;
      for (Tile t : b.sample[other_seat] & allowed_here) swaps.emplace_back(other_seat, t);
    }
    if (swaps.empty()) {
      b.sample = sample_fresh(b, b.rng);
      return;
    }
    const auto [other_seat, t] = detail::pick(b.rng, swaps);
    b.sample[seat].erase(bad);
    b.sample[seat].insert(t);
    b.sample[other_seat].erase(t);
    b.sample[other_seat].insert(bad);
  }
}

// Account for `seat` having played `tile`: the tile is moved into the
// player's sampled hand (trading away a random tile of theirs to whoever
// sampled it) and then removed. Expects `tile` already taken out of
// `unseen` and the seat's hand size already reduced.
inline void repair_sample(Belief& b, Seat seat, Tile tile) {
  if (b.sample[seat].contains(tile)) {
    b.sample[seat].erase(tile);
    return;
  }
  const Seat holder = sample_holder(b, tile);
  const TileSet give = b.sample[seat];
  std::vector<Tile> fitting = (give & b.allowed_for(holder)).to_vector();
  const bool fits = !fitting.empty();
  const Tile traded = fits ? detail::pick(b.rng, fitting) : detail::pick(b.rng, give.to_vector());
  b.sample[seat].erase(traded);
  b.sample[holder].insert(traded);
  b.sample[holder].erase(tile);
  if (!fits) constrained_redraw(b, holder);
}

inline void soften(Belief& b, Seat seat, Pip v) {
  double& w = b.soft_penalty[seat][v];
  w = std::max(w * kSoftFactor, kSoftFloor);
}

inline void observe(Belief& b, const ObservedEvent& event) {
  if (const auto* pass = std::get_if<ObservedPass>(&event)) {
    b.extended_own_end[pass->seat] = false;
    if (pass->seat == b.owner) return;
    b.hard_excluded[pass->seat] |= pip_bit(pass->ends.left) | pip_bit(pass->ends.right);
    constrained_redraw(b, pass->seat);
    return;
  }

  const auto& play = std::get<ObservedPlay>(event);
  const Seat p = play.seat;
  if (p == b.owner) {
    if (!b.own_hand.contains(play.tile)) {
      throw DataError("owner played " + to_string(play.tile) + " which it does not hold");
    }
    b.own_hand.erase(play.tile);
    --b.hand_sizes[p];
    return;
  }
  if (!b.unseen.contains(play.tile)) {
    throw DataError("tile " + to_string(play.tile) + " was already seen");
  }
  if (b.hand_sizes[p] <= 0) throw DataError("seat " + to_string(p) + " has no tiles left");

  if (!play.chain_was_empty) {
    const Seat opener = play.end == End::Left ? play.left_opener_before : play.right_opener_before;
    const Pip played_on = play.ends_before.at(play.end);
    const Pip far_end = play.ends_before.at(opposite(play.end));
    const bool own_end = opener == p;
    // Both ends showing the same pip says nothing about the far end.
    if (far_end != played_on) {
      if (own_end && b.extended_own_end[p]) soften(b, p, far_end);
      if (opener == partner(p)) soften(b, p, far_end);
    }
    b.extended_own_end[p] = own_end;
  } else {
    b.extended_own_end[p] = false;
  }

  // Counts first: a repair that falls back to a fresh draw must see the
  // tile gone and the player's hand one shorter.
  b.unseen.erase(play.tile);
  --b.hand_sizes[p];
  repair_sample(b, p, play.tile);
}

// Fold a whole round history into a fresh belief.
inline Belief replay_belief(Seat owner, const Hand& dealt_hand, const std::vector<Event>& history,
                            std::uint64_t seed) {
  Belief b = init_belief(owner, dealt_hand, seed);
  for (const ObservedEvent& e : observed_history(history)) observe(b, e);
  return b;
}

// The seat's hand at deal time: current tiles plus everything it played.
inline Hand dealt_hand(const RoundState& s, Seat seat) {
  Hand h = s.hands[seat];
  for (const Event& e : s.history) {
    if (const auto* play = std::get_if<PlayEvent>(&e); play && play->seat == seat) h.insert(play->tile);
  }
  return h;
}

}  // namespace domino101
