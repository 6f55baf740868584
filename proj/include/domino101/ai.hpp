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

// The four AI levels.
//
//   L1  random legal move.
//   L2  forced moves, then urgent doubles (**), then the top Maxmin move.
//   L3  as L2, but skips Maxmin moves whose tile holds the last of an end
//       value (*), unless every candidate does.
//   L4  as L3 with MMaxmin (partner-aware) ranking, plus closing the game
//       when the determinization says the own team holds fewer pips.
//
// Counting terms are tile counts: a tile showing either resulting end pip is
// counted once, even when it matches both ends.

#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "domino101/belief.hpp"
#include "domino101/rng.hpp"
#include "domino101/rules.hpp"
#include "domino101/tile.hpp"

namespace domino101 {

enum class AiLevel : std::uint8_t { L1 = 1, L2 = 2, L3 = 3, L4 = 4 };

inline std::string to_string(AiLevel l) { return "l" + std::to_string(static_cast<int>(l)); }

inline std::optional<AiLevel> parse_level(std::string_view s) {
  if (s.size() == 2 && (s[0] == 'l' || s[0] == 'L') && s[1] >= '1' && s[1] <= '4') {
    return static_cast<AiLevel>(s[1] - '0');
  }
  return std::nullopt;
}

struct CandidateScore {
  Move move;
  Ends resulting_ends;
  int own_term = 0;
  int partner_term = 0;
  int opp_term = 0;
  int score = 0;
  bool star = false;         // holds the last tiles of an end value
  bool double_star = false;  // urgent double
  bool onto_partner_end = false;
};

inline Move choose_move_l1(const RoundState& state, Seat self, Rng& rng) {
  const std::vector<Move> moves = legal_moves(state, self);
  if (moves.empty()) return Move::make_pass();
  return moves[rng.below(moves.size())];
}

// Doubles (v,v) in hand whose value already shows on more than three chain
// tiles.
inline TileSet mark_double_urgency(const Chain& chain, const Hand& hand) {
  TileSet marked;
  for (Tile t : hand & TileSet::doubles()) {
    if (chain.tiles().count_with(t.lo) > 3) marked.insert(t);
  }
  return marked;
}

// For each end value v: when chain and hand together hold all seven tiles
// showing v, every hand tile with v is marked.
inline TileSet mark_monopoly(const Chain& chain, const Hand& hand) {
  TileSet marked;
  if (chain.empty()) return marked;
  const Ends e = chain.ends();
  for (Pip v : {e.left, e.right}) {
    if (chain.tiles().count_with(v) + hand.count_with(v) == 7) marked |= hand & TileSet::with_pip(v);
  }
  return marked;
}

inline int count_matching(const Hand& h, Ends e) {
  return (h & (TileSet::with_pip(e.left) | TileSet::with_pip(e.right))).size();
}

namespace detail {

inline std::vector<CandidateScore> score_candidates(const RoundState& state, Seat self,
                                                    const PerSeat<Hand>& sample,
                                                    bool with_partner) {
  const Hand& hand = state.hands[self];
  const TileSet urgent = mark_double_urgency(state.chain, hand);
  const TileSet mono = mark_monopoly(state.chain, hand);
  std::vector<CandidateScore> out;
  for (const Move& m : playable_moves(hand, state.chain, state.round_index)) {
    CandidateScore c;
    c.move = m;
    c.resulting_ends = resulting_ends(state.chain, m.tile, m.end);
    Hand after = hand;
    after.erase(m.tile);
    c.own_term = count_matching(after, c.resulting_ends);
    c.opp_term = count_matching(sample[next(self)], c.resulting_ends);
    if (with_partner) c.partner_term = count_matching(sample[partner(self)], c.resulting_ends);
    c.score = c.own_term + c.partner_term - c.opp_term;
    c.star = mono.contains(m.tile);
    c.double_star = urgent.contains(m.tile);
    c.onto_partner_end = !state.chain.empty() && state.chain.opened_by(m.end) == partner(self);
    out.push_back(c);
  }
  return out;
}

}  // namespace detail

// Candidates by own - next-opponent count, best first; equal scores in
// random order.
inline std::vector<CandidateScore> maxmin_rank(const RoundState& state, Seat self,
                                               const PerSeat<Hand>& sample, Rng& rng) {
  auto c = detail::score_candidates(state, self, sample, false);
  rng.shuffle(c);
  std::stable_sort(c.begin(), c.end(),
                   [](const CandidateScore& a, const CandidateScore& b) { return a.score > b.score; });
  return c;
}

// Candidates by own + partner - next-opponent count. Ties go, in order, to
// a play onto an end the partner opened, then to the better count for
// whichever of self and partner holds fewer tiles, then to the heavier
// tile, then at random.
inline std::vector<CandidateScore> mmaxmin_rank(const RoundState& state, Seat self,
                                                const PerSeat<Hand>& sample, Rng& rng) {
  auto c = detail::score_candidates(state, self, sample, true);
  rng.shuffle(c);
  const bool partner_shorter = sample[partner(self)].size() < state.hands[self].size();
  std::stable_sort(c.begin(), c.end(), [&](const CandidateScore& a, const CandidateScore& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.onto_partner_end != b.onto_partner_end) return a.onto_partner_end;
    const int ka = partner_shorter ? a.partner_term : a.own_term;
    const int kb = partner_shorter ? b.partner_term : b.own_term;
    if (ka != kb) return ka > kb;
    return a.move.tile.pip_sum() > b.move.tile.pip_sum();
  });
  return c;
}

// World as the AI imagines it: its own hand plus the sampled hidden hands.
inline PerSeat<Hand> imagined_hands(const RoundState& state, Seat self, const PerSeat<Hand>& sample) {
  PerSeat<Hand> w = sample;
  w[self] = state.hands[self];
  return w;
}

// Whether playing `m` leaves nobody (per the imagined hands) a legal move
// while every hand still holds tiles.
inline bool move_blocks(const RoundState& state, Seat self, const PerSeat<Hand>& sample, const Move& m) {
  PerSeat<Hand> world = imagined_hands(state, self, sample);
  world[self].erase(m.tile);
  const Ends e = resulting_ends(state.chain, m.tile, m.end);
  const TileSet live = TileSet::with_pip(e.left) | TileSet::with_pip(e.right);
  for (Seat s : kSeats) {
    if (world[s].empty() || !(world[s] & live).empty()) return false;
  }
  return true;
}

// Close when the own team's remaining pips (after the closing move) are
// strictly below the opponents'. A projected tie is declined.
inline bool closing_decision(const RoundState& state, Seat self, const PerSeat<Hand>& sample,
                             const Move& closing_move) {
  Hand mine = state.hands[self];
  mine.erase(closing_move.tile);
  const int ours = mine.pip_total() + sample[partner(self)].pip_total();
  const int theirs = sample[next(self)].pip_total() + sample[next(partner(self))].pip_total();
  return ours < theirs;
}

// First candidate not holding a * tile; the top one when all do.
inline const CandidateScore& first_unstarred(const std::vector<CandidateScore>& ranked) {
  for (const CandidateScore& c : ranked) {
    if (!c.star) return c;
  }
  return ranked.front();
}

inline Move choose_move(AiLevel level, const RoundState& state, Seat self, const Belief* belief,
                        Rng& rng) {
  if (level == AiLevel::L1) return choose_move_l1(state, self, rng);

  const std::vector<Move> moves = legal_moves(state, self);
  if (moves.empty()) return Move::make_pass();
  if (moves.size() == 1) return moves.front();

  const TileSet urgent = mark_double_urgency(state.chain, state.hands[self]);
  std::optional<Move> best_double;
  for (const Move& m : moves) {
    if (urgent.contains(m.tile) && (!best_double || m.tile.lo > best_double->tile.lo)) best_double = m;
  }
  if (best_double) return *best_double;

  if (!belief) throw StateError("AI level " + to_string(level) + " requires a belief");
  const PerSeat<Hand>& sample = belief->sample;

  if (level == AiLevel::L2) return maxmin_rank(state, self, sample, rng).front().move;
  if (level == AiLevel::L3) return first_unstarred(maxmin_rank(state, self, sample, rng)).move;

  const auto ranked = mmaxmin_rank(state, self, sample, rng);
  for (const CandidateScore& c : ranked) {
    if (move_blocks(state, self, sample, c.move)) {
      if (closing_decision(state, self, sample, c.move)) return c.move;
      break;
    }
  }
  return first_unstarred(ranked).move;
}

// Which member of an entitled team opens the next round: highest double,
// then higher pip sum, then earlier seat.
inline Seat choose_starter(Team team, const PerSeat<Hand>& hands) {
  const auto key = [&](Seat s) {
    int best_double = -1;
    for (Tile t : hands[s] & TileSet::doubles()) best_double = std::max(best_double, t.lo);
    return std::pair{best_double, hands[s].pip_total()};
  };
  const auto [first, second] = members(team);
  return key(second) > key(first) ? second : first;
}

// Stateful AI seat: keeps its belief in step with the round history.
class AiPlayer {
 public:
  AiPlayer(Seat seat, AiLevel level, std::uint64_t seed)
      : seat_(seat), level_(level), seed_(seed), rng_(derive_seed(seed, 0x5eed)) {}

  Seat seat() const { return seat_; }
  AiLevel level() const { return level_; }
  const std::optional<Belief>& belief() const { return belief_; }

  // Catch the belief up with `state`, rebuilding it when a new round began.
  void sync(const RoundState& state) {
    if (level_ == AiLevel::L1) return;
    const Hand dealt = dealt_hand(state, seat_);
    if (!belief_ || round_ != state.round_index || dealt_ != dealt || synced_ > state.history.size()) {
      round_ = state.round_index;
      dealt_ = dealt;
      synced_ = 0;
      belief_ = init_belief(seat_, dealt, belief_seed(state.round_index));
    }
    if (synced_ == state.history.size()) return;
    const auto observed = observed_history(state.history);
    for (; synced_ < observed.size(); ++synced_) observe(*belief_, observed[synced_]);
  }

  Move decide(const RoundState& state) {
    sync(state);
    return choose_move(level_, state, seat_, belief_ ? &*belief_ : nullptr, rng_);
  }

  std::uint64_t belief_seed(int round_index) const {
    return derive_seed(seed_, static_cast<std::uint64_t>(round_index));
  }

 private:
  Seat seat_;
  AiLevel level_;
  std::uint64_t seed_;
  Rng rng_;
  std::optional<Belief> belief_;
  int round_ = 0;
  Hand dealt_;
  std::size_t synced_ = 0;
};

}  // namespace domino101
