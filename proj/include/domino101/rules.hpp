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

// Rules engine for "101": dealing, redeal checks, legality, turn flow,
// blocked-game detection, round scoring and match accounting.
//
// Everything here is deterministic given its inputs. A RoundState is a plain
// value; apply_move mutates it in place, copy it first when the previous
// state is needed.

#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "domino101/errors.hpp"
#include "domino101/rng.hpp"
#include "domino101/tile.hpp"

namespace domino101 {

enum class End : std::uint8_t { Left, Right };

inline std::string to_string(End e) { return e == End::Left ? "left" : "right"; }
inline constexpr End opposite(End e) { return e == End::Left ? End::Right : End::Left; }

struct Ends {
  Pip left = 0;
  Pip right = 0;
  Pip at(End e) const { return e == End::Left ? left : right; }
  friend bool operator==(const Ends&, const Ends&) = default;
};

struct Move {
  bool pass = false;
  Tile tile{};
  End end = End::Left;

  static Move play(Tile t, End e) { return Move{false, t, e}; }
  static Move make_pass() { return Move{true, {}, End::Left}; }

  friend bool operator==(const Move&, const Move&) = default;
};

inline std::string to_string(const Move& m) {
  return m.pass ? std::string("pass") : to_string(m.tile) + "@" + to_string(m.end);
}

// A tile on the chain with its exposed orientation: `left` faces the left
// end of the line and `right` faces the right end.
struct PlacedTile {
  Tile tile;
  Pip left = 0;
  Pip right = 0;
  Seat by = Seat::A;
};

class Chain {
 public:
  bool empty() const { return placed_.empty(); }
  int size() const { return static_cast<int>(placed_.size()); }
  const std::deque<PlacedTile>& placed() const { return placed_; }
  TileSet tiles() const { return tiles_; }

  Ends ends() const { return ends_; }
  Pip end_value(End e) const { return ends_.at(e); }
  Seat opened_by(End e) const { return e == End::Left ? left_opened_by_ : right_opened_by_; }

  // Caller has checked legality.
  void place(Tile t, End e, Seat by) {
    tiles_.insert(t);
    if (placed_.empty()) {
      placed_.push_back({t, t.lo, t.hi, by});
      ends_ = {t.lo, t.hi};
      left_opened_by_ = right_opened_by_ = by;
      return;
    }
    if (e == End::Left) {
      const Pip match = ends_.left;
      placed_.push_front({t, t.other(match), match, by});
      ends_.left = t.other(match);
      left_opened_by_ = by;
    } else {
      const Pip match = ends_.right;
      placed_.push_back({t, match, t.other(match), by});
      ends_.right = t.other(match);
      right_opened_by_ = by;
    }
  }

  // Adjacent tiles share the touching pip and ends match the outer tiles.
  bool valid() const {
    if (placed_.empty()) return tiles_.empty();
    if (static_cast<int>(placed_.size()) != tiles_.size()) return false;
    for (std::size_t i = 0; i < placed_.size(); ++i) {
      const PlacedTile& p = placed_[i];
      if (Tile(p.left, p.right) != p.tile || !tiles_.contains(p.tile)) return false;
      if (i > 0 && placed_[i - 1].right != p.left) return false;
    }
    return placed_.front().left == ends_.left && placed_.back().right == ends_.right;
  }

 private:
  std::deque<PlacedTile> placed_;
  TileSet tiles_;
  Ends ends_;
  Seat left_opened_by_ = Seat::A;
  Seat right_opened_by_ = Seat::A;
};

struct PlayEvent {
  Seat seat;
  Tile tile;
  End end;
  friend bool operator==(const PlayEvent&, const PlayEvent&) = default;
};

struct PassEvent {
  Seat seat;
  Ends ends_at_pass;
  friend bool operator==(const PassEvent&, const PassEvent&) = default;
};

using Event = std::variant<PlayEvent, PassEvent>;

inline Seat event_seat(const Event& e) {
  return std::visit([](const auto& ev) { return ev.seat; }, e);
}

// Strict rejects a pass while a legal move exists; Forfeit accepts it and
// the passer's team loses the round on the spot.
enum class PassMode : std::uint8_t { Strict, Forfeit };

inline std::string to_string(PassMode m) { return m == PassMode::Strict ? "strict" : "forfeit"; }

inline std::optional<PassMode> parse_pass_mode(std::string_view s) {
  if (s == "strict") return PassMode::Strict;
  if (s == "forfeit") return PassMode::Forfeit;
  return std::nullopt;
}

struct RoundState {
  PerSeat<Hand> hands;
  Chain chain;
  Seat to_move = Seat::A;
  std::vector<Event> history;
  int round_index = 1;
  std::optional<Seat> false_pass_by;
};

// Fresh round with dealt hands.
inline RoundState start_round(const PerSeat<Hand>& hands, Seat starter, int round_index) {
  RoundState s;
  s.hands = hands;
  s.to_move = starter;
  s.round_index = round_index;
  return s;
}

// ---------------------------------------------------------------------------
// Dealing

inline PerSeat<Hand> deal(std::uint64_t seed) {
  Rng rng(seed);
  std::array<int, kNumTiles> order{};
  for (int i = 0; i < kNumTiles; ++i) order[i] = i;
  rng.shuffle(order);
  PerSeat<Hand> hands;
  for (int i = 0; i < kNumTiles; ++i) {
    hands[seat_at(i / kHandSize)].insert(Tile::from_index(order[i]));
  }
  return hands;
}

enum class RedealReason : std::uint8_t {
  FiveDoubles,
  SixOrSevenSameFace,
  FiveSameFaceNoDouble,
};

inline std::string to_string(RedealReason r) {
  switch (r) {
    case RedealReason::FiveDoubles: return "five_doubles";
    case RedealReason::SixOrSevenSameFace: return "six_or_seven_same_face";
    case RedealReason::FiveSameFaceNoDouble: return "five_same_face_no_double";
  }
  return "?";
}

inline std::optional<RedealReason> parse_redeal_reason(std::string_view s) {
  if (s == "five_doubles") return RedealReason::FiveDoubles;
  if (s == "six_or_seven_same_face") return RedealReason::SixOrSevenSameFace;
  if (s == "five_same_face_no_double") return RedealReason::FiveSameFaceNoDouble;
  return std::nullopt;
}

struct Redeal {
  RedealReason reason;
  Seat seat;
  Pip pip = 0;  // meaningless for FiveDoubles
  friend bool operator==(const Redeal&, const Redeal&) = default;
};

// nullopt means the deal stands.
using DealVerdict = std::optional<Redeal>;

inline void check_deal_conservation(const PerSeat<Hand>& hands) {
  TileSet seen;
  for (Seat s : kSeats) {
    if (hands[s].size() != kHandSize) {
      throw DataError("hand of seat " + to_string(s) + " has " +
                      std::to_string(hands[s].size()) + " tiles");
    }
    if (!(seen & hands[s]).empty()) throw DataError("tile dealt to two seats");
    seen |= hands[s];
  }
  if (seen != TileSet::full()) throw DataError("deal does not cover the full set");
}

// First trigger wins: seats in A..D order, and per hand the three checks
// in the order five doubles, six-or-seven of a face, five of a face
// without its double.
inline DealVerdict validate_deal(const PerSeat<Hand>& hands) {
  check_deal_conservation(hands);
  for (Seat s : kSeats) {
    const Hand& h = hands[s];
    if ((h & TileSet::doubles()).size() >= 5) return Redeal{RedealReason::FiveDoubles, s, 0};
    for (Pip v = 0; v <= kMaxPip; ++v) {
      if (h.count_with(v) >= 6) return Redeal{RedealReason::SixOrSevenSameFace, s, v};
    }
    for (Pip v = 0; v <= kMaxPip; ++v) {
      if (h.count_with(v) == 5 && !h.contains(Tile(v, v))) {
        return Redeal{RedealReason::FiveSameFaceNoDouble, s, v};
      }
    }
  }
  return std::nullopt;
}

// Tiles a player reveals when announcing the redeal; only the
// six-or-seven case shows stones.
inline std::optional<TileSet> shown_tiles(const PerSeat<Hand>& hands, const Redeal& r) {
  if (r.reason != RedealReason::SixOrSevenSameFace) return std::nullopt;
  return hands[r.seat] & TileSet::with_pip(r.pip);
}

inline Seat initial_starter(const PerSeat<Hand>& hands) {
  for (Seat s : kSeats) {
    if (hands[s].contains(Tile(1, 1))) return s;
  }
  throw DataError("no seat holds 1-1");
}

// ---------------------------------------------------------------------------
// Legality

// Moves available to `hand` against `chain`. On an empty chain every tile is
// listed once (End::Left), except in round 1 where only 1-1 may open.
inline std::vector<Move> playable_moves(const Hand& hand, const Chain& chain, int round_index) {
  std::vector<Move> moves;
  if (chain.empty()) {
    if (round_index == 1) {
      if (hand.contains(Tile(1, 1))) moves.push_back(Move::play(Tile(1, 1), End::Left));
      return moves;
    }
    for (Tile t : hand) moves.push_back(Move::play(t, End::Left));
    return moves;
  }
  const Ends ends = chain.ends();
  for (Tile t : hand) {
    if (t.has(ends.left)) moves.push_back(Move::play(t, End::Left));
    if (t.has(ends.right)) moves.push_back(Move::play(t, End::Right));
  }
  return moves;
}

inline bool has_playable(const Hand& hand, const Chain& chain, int round_index) {
  if (chain.empty()) return round_index != 1 ? !hand.empty() : hand.contains(Tile(1, 1));
  const Ends e = chain.ends();
  return !(hand & (TileSet::with_pip(e.left) | TileSet::with_pip(e.right))).empty();
}

inline std::vector<Move> legal_moves(const RoundState& state, Seat seat) {
  if (seat != state.to_move) throw TurnError("seat " + to_string(seat) + " is not on turn");
  return playable_moves(state.hands[seat], state.chain, state.round_index);
}

// Ends after playing `tile` on `end`; on an empty chain the tile's own pips.
inline Ends resulting_ends(const Chain& chain, Tile tile, End end) {
  if (chain.empty()) return {tile.lo, tile.hi};
  Ends e = chain.ends();
  if (end == End::Left) {
    e.left = tile.other(e.left);
  } else {
    e.right = tile.other(e.right);
  }
  return e;
}

inline bool any_hand_empty(const RoundState& s) {
  for (Seat seat : kSeats) {
    if (s.hands[seat].empty()) return true;
  }
  return false;
}

// No seat can play and nobody has gone out.
inline bool is_blocked(const RoundState& s) {
  if (s.chain.empty() || any_hand_empty(s)) return false;
  for (Seat seat : kSeats) {
    if (has_playable(s.hands[seat], s.chain, s.round_index)) return false;
  }
  return true;
}

inline bool is_round_over(const RoundState& s) {
  return s.false_pass_by.has_value() || any_hand_empty(s) || is_blocked(s);
}

inline void apply_move(RoundState& s, Seat seat, const Move& m,
                       PassMode mode = PassMode::Strict) {
  if (is_round_over(s)) throw StateError("round is over");
  if (seat != s.to_move) throw TurnError("seat " + to_string(seat) + " is not on turn");

  if (m.pass) {
    if (has_playable(s.hands[seat], s.chain, s.round_index)) {
      if (mode == PassMode::Strict) {
        throw IllegalPass("seat " + to_string(seat) + " passed holding a playable tile");
      }
      s.false_pass_by = seat;
    }
    s.history.push_back(PassEvent{seat, s.chain.ends()});
    s.to_move = next(seat);
    return;
  }

  if (!s.hands[seat].contains(m.tile)) {
    throw IllegalMove("tile " + to_string(m.tile) + " is not in seat " + to_string(seat) + "'s hand");
  }
  if (s.chain.empty()) {
    if (s.round_index == 1 && m.tile != Tile(1, 1)) {
      throw IllegalMove("the first round must open with 1-1");
    }
  } else if (!m.tile.has(s.chain.end_value(m.end))) {
    throw IllegalMove("tile " + to_string(m.tile) + " does not match the " + to_string(m.end) +
                      " end");
  }
  s.chain.place(m.tile, m.end, seat);
  s.hands[seat].erase(m.tile);
  s.history.push_back(PlayEvent{seat, m.tile, m.end});
  s.to_move = next(seat);
}

// Hands plus chain form the full set with no repetition.
inline bool tiles_conserved(const RoundState& s) {
  TileSet seen = s.chain.tiles();
  int count = seen.size();
  for (Seat seat : kSeats) {
    seen |= s.hands[seat];
    count += s.hands[seat].size();
  }
  return count == kNumTiles && seen == TileSet::full();
}

// ---------------------------------------------------------------------------
// Scoring

enum class Outcome : std::uint8_t { DominoWin, Closed, Tie, Forfeit };

inline std::string to_string(Outcome o) {
  switch (o) {
    case Outcome::DominoWin: return "domino";
    case Outcome::Closed: return "closed";
    case Outcome::Tie: return "tie";
    case Outcome::Forfeit: return "forfeit";
  }
  return "?";
}

inline std::optional<Outcome> parse_outcome(std::string_view s) {
  if (s == "domino") return Outcome::DominoWin;
  if (s == "closed") return Outcome::Closed;
  if (s == "tie") return Outcome::Tie;
  if (s == "forfeit") return Outcome::Forfeit;
  return std::nullopt;
}

// The team entitled to pick the next starter and the seat the right is
// anchored on.
struct StarterRight {
  Team team;
  Seat anchor;
  friend bool operator==(const StarterRight&, const StarterRight&) = default;
};

struct RoundResult {
  Outcome outcome;
  // DominoWin: the seat that went out. Forfeit: the false passer.
  std::optional<Seat> seat;
  int points = 0;
  std::optional<Team> awarded_to;
  PerSeat<Hand> revealed;
  StarterRight next_starter;
  friend bool operator==(const RoundResult&, const RoundResult&) = default;
};

inline int team_pips(const RoundState& s, Team t) {
  int total = 0;
  for (Seat m : members(t)) total += s.hands[m].pip_total();
  return total;
}

// Seat of the last non-double play, else of the last play of any kind.
inline std::optional<Seat> last_non_double_player(const std::vector<Event>& history) {
  std::optional<Seat> any;
  for (auto it = history.rbegin(); it != history.rend(); ++it) {
    const auto* play = std::get_if<PlayEvent>(&*it);
    if (!play) continue;
    if (!play->tile.is_double()) return play->seat;
    if (!any) any = play->seat;
  }
  return any;
}

inline RoundResult score_round(const RoundState& s) {
  if (!is_round_over(s)) throw StateError("score_round called on a live round");
  RoundResult r;
  r.revealed = s.hands;

  if (s.false_pass_by) {
    const Seat offender = *s.false_pass_by;
    const Team winners = other(team_of(offender));
    r.outcome = Outcome::Forfeit;
    r.seat = offender;
    r.points = team_pips(s, team_of(offender));
    r.awarded_to = winners;
    r.next_starter = {winners, next(offender)};
    return r;
  }

  for (Seat seat : kSeats) {
    if (s.hands[seat].empty()) {
      const Team winners = team_of(seat);
      r.outcome = Outcome::DominoWin;
      r.seat = seat;
      r.points = team_pips(s, other(winners));
      r.awarded_to = winners;
      r.next_starter = {winners, seat};
      return r;
    }
  }

  // Closed game.
  const Seat anchor = last_non_double_player(s.history).value_or(s.to_move);
  r.next_starter = {team_of(anchor), anchor};
  const int ac = team_pips(s, Team::AC);
  const int bd = team_pips(s, Team::BD);
  if (ac == bd) {
    r.outcome = Outcome::Tie;
    r.points = 0;
    return r;
  }
  r.outcome = Outcome::Closed;
  r.awarded_to = ac < bd ? Team::AC : Team::BD;
  r.points = std::max(ac, bd);
  return r;
}

// ---------------------------------------------------------------------------
// Match

inline constexpr int kMatchTarget = 101;

struct MatchState {
  std::array<int, 2> score{0, 0};
  int target = kMatchTarget;
  int round_index = 1;
  // nullopt: first round, the 1-1 holder starts.
  std::optional<StarterRight> starter_right;

  int score_of(Team t) const { return score[idx(t)]; }
  bool over() const { return std::max(score[0], score[1]) >= target; }
  std::optional<Team> winner() const {
    if (!over()) return std::nullopt;
    return score[0] >= score[1] ? Team::AC : Team::BD;
  }
  friend bool operator==(const MatchState&, const MatchState&) = default;
};

inline MatchState match_update(MatchState m, const RoundResult& r) {
  if (r.awarded_to) m.score[idx(*r.awarded_to)] += r.points;
  m.starter_right = r.next_starter;
  ++m.round_index;
  return m;
}

}  // namespace domino101
