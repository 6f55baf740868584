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

// Test support: brute-force oracles written against plain pip arithmetic
// (no TileSet masks, no engine helpers), random reachable states, and a
// transcript leak audit.

#pragma once

#include <algorithm>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "domino101/ai.hpp"
#include "domino101/protocol.hpp"
#include "domino101/rules.hpp"

namespace domino101::testing {

// ---------------------------------------------------------------------------
// Plain representations

using RawTile = std::pair<int, int>;  // lo <= hi

inline std::vector<RawTile> raw(const TileSet& s) {
  std::vector<RawTile> out;
  for (int hi = 0; hi <= 6; ++hi) {
    for (int lo = 0; lo <= hi; ++lo) {
      if (s.contains(Tile(lo, hi))) out.emplace_back(lo, hi);
    }
  }
  return out;
}

inline int raw_pips(const std::vector<RawTile>& h) {
  int total = 0;
  for (auto [a, b] : h) total += a + b;
  return total;
}

inline bool raw_has(RawTile t, int v) { return t.first == v || t.second == v; }

template <typename T>
PerSeat<T> per_seat(T a, T b, T c, T d) {
  PerSeat<T> p;
  p[Seat::A] = std::move(a);
  p[Seat::B] = std::move(b);
  p[Seat::C] = std::move(c);
  p[Seat::D] = std::move(d);
  return p;
}

// ---------------------------------------------------------------------------
// Oracles

// (lo, hi, end) triples legal for `hand`.
inline std::set<std::tuple<int, int, End>> oracle_legal(const std::vector<RawTile>& hand, bool chain_empty,
                                                         int left, int right, int round_index) {
  std::set<std::tuple<int, int, End>> out;
  for (RawTile t : hand) {
    if (chain_empty) {
      if (round_index != 1 || (t.first == 1 && t.second == 1)) out.emplace(t.first, t.second, End::Left);
      continue;
    }
    if (raw_has(t, left)) out.emplace(t.first, t.second, End::Left);
    if (raw_has(t, right)) out.emplace(t.first, t.second, End::Right);
  }
  return out;
}

inline std::set<std::tuple<int, int, End>> as_triples(const std::vector<Move>& moves) {
  std::set<std::tuple<int, int, End>> out;
  for (const Move& m : moves) out.emplace(m.tile.lo, m.tile.hi, m.end);
  return out;
}

inline bool oracle_blocked(const RoundState& s) {
  if (s.chain.empty()) return false;
  const Ends e = s.chain.ends();
  for (Seat seat : kSeats) {
    const auto hand = raw(s.hands[seat]);
    if (hand.empty()) return false;
    for (RawTile t : hand) {
      if (raw_has(t, e.left) || raw_has(t, e.right)) return false;
    }
  }
  return true;
}

struct OracleScore {
  std::string outcome;
  int points = 0;
  int awarded = -1;  // 0 AC, 1 BD, -1 nobody
  int anchor = -1;   // seat index the starter right is anchored on
};

inline OracleScore oracle_score(const RoundState& s) {
  OracleScore r;
  int team_total[2] = {0, 0};
  for (int i = 0; i < 4; ++i) team_total[i % 2] += raw_pips(raw(s.hands[seat_at(i)]));
  if (s.false_pass_by) {
    const int off = idx(*s.false_pass_by);
    r.outcome = "forfeit";
    r.awarded = 1 - off % 2;
    r.points = team_total[off % 2];
    r.anchor = (off + 1) % 4;
    return r;
  }
  for (int i = 0; i < 4; ++i) {
    if (s.hands[seat_at(i)].empty()) {
      r.outcome = "domino";
      r.awarded = i % 2;
      r.points = team_total[1 - i % 2];
      r.anchor = i;
      return r;
    }
  }
  int anchor = -1;
  int any = -1;
  for (auto it = s.history.rbegin(); it != s.history.rend() && anchor < 0; ++it) {
    if (const auto* p = std::get_if<PlayEvent>(&*it)) {
      if (any < 0) any = idx(p->seat);
      if (p->tile.lo != p->tile.hi) anchor = idx(p->seat);
    }
  }
  r.anchor = anchor >= 0 ? anchor : any;
  if (team_total[0] == team_total[1]) {
    r.outcome = "tie";
    return r;
  }
  r.outcome = "closed";
  r.awarded = team_total[0] < team_total[1] ? 0 : 1;
  r.points = std::max(team_total[0], team_total[1]);
  return r;
}

// Count of tiles in `hand` showing either pip, each tile once.
inline int oracle_count(const std::vector<RawTile>& hand, int x, int y) {
  int n = 0;
  for (RawTile t : hand) n += raw_has(t, x) || raw_has(t, y);
  return n;
}

// Ends after a move, recomputed from the raw chain ends.
inline std::pair<int, int> oracle_after(bool chain_empty, int left, int right, RawTile t, End e) {
  if (chain_empty) return {t.first, t.second};
  if (e == End::Left) return {t.first == left ? t.second : t.first, right};
  return {left, t.first == right ? t.second : t.first};
}

// ---------------------------------------------------------------------------
// Redeal table

// Completes a deal around fixed hands; the free seats get the remaining
// tiles in an arrangement that triggers no redeal (checked by counting).
inline PerSeat<Hand> complete_deal(const std::vector<std::pair<Seat, Hand>>& fixed, std::uint64_t seed) {
  TileSet used;
  for (const auto& [s, h] : fixed) used |= h;
  Rng rng(seed);
  for (int attempt = 0; attempt < 10000; ++attempt) {
    std::vector<Tile> rest = (TileSet::full() - used).to_vector();
    rng.shuffle(rest);
    PerSeat<Hand> hands;
    std::vector<Seat> free_seats;
    for (Seat s : kSeats) {
      bool is_fixed = false;
      for (const auto& [fs, fh] : fixed) {
        if (fs == s) {
          hands[s] = fh;
          is_fixed = true;
        }
      }
      if (!is_fixed) free_seats.push_back(s);
    }
    std::size_t k = 0;
    for (Seat s : free_seats) {
      for (int i = 0; i < 7; ++i) hands[s].insert(rest[k++]);
    }
    bool clean = true;
    for (Seat s : free_seats) {
      int doubles = 0;
      std::array<int, 7> face{};
      for (auto [a, b] : raw(hands[s])) {
        doubles += a == b;
        ++face[a];
        if (a != b) ++face[b];
      }
      for (int v = 0; v < 7; ++v) {
        if (face[v] >= 6 || (face[v] == 5 && !hands[s].contains(Tile(v, v)))) clean = false;
      }
      if (doubles >= 5) clean = false;
    }
    if (clean) return hands;
  }
  throw std::runtime_error("could not complete deal");
}

struct RedealCase {
  const char* name;
  std::vector<std::pair<Seat, Hand>> fixed;
  DealVerdict expected;
};

inline std::vector<RedealCase> redeal_table() {
  using R = RedealReason;
  return {
      {"five doubles",
       {{Seat::B, {Tile(0, 0), Tile(1, 1), Tile(2, 2), Tile(3, 3), Tile(4, 4), Tile(0, 1), Tile(0, 2)}}},
       Redeal{R::FiveDoubles, Seat::B, 0}},
      {"four doubles is fine",
       {{Seat::A, {Tile(0, 0), Tile(1, 1), Tile(2, 2), Tile(3, 3), Tile(4, 5), Tile(5, 6), Tile(1, 4)}}},
       std::nullopt},
      {"six doubles",
       {{Seat::A, {Tile(0, 0), Tile(1, 1), Tile(2, 2), Tile(3, 3), Tile(4, 4), Tile(5, 5), Tile(4, 6)}}},
       Redeal{R::FiveDoubles, Seat::A, 0}},
      {"six of a face",
       {{Seat::A, {Tile(6, 0), Tile(6, 1), Tile(6, 2), Tile(6, 3), Tile(6, 4), Tile(6, 5), Tile(2, 3)}}},
       Redeal{R::SixOrSevenSameFace, Seat::A, 6}},
      {"seven of a face",
       {{Seat::D, {Tile(5, 0), Tile(5, 1), Tile(5, 2), Tile(5, 3), Tile(5, 4), Tile(5, 5), Tile(5, 6)}}},
       Redeal{R::SixOrSevenSameFace, Seat::D, 5}},
      {"six of a face including its double",
       {{Seat::A, {Tile(4, 0), Tile(4, 1), Tile(4, 2), Tile(4, 3), Tile(4, 4), Tile(4, 5), Tile(0, 1)}}},
       Redeal{R::SixOrSevenSameFace, Seat::A, 4}},
      {"six of a face without its double",
       {{Seat::A, {Tile(5, 0), Tile(5, 1), Tile(5, 2), Tile(5, 3), Tile(5, 4), Tile(5, 6), Tile(0, 1)}}},
       Redeal{R::SixOrSevenSameFace, Seat::A, 5}},
      {"five of a face without its double",
       {{Seat::C, {Tile(3, 0), Tile(3, 1), Tile(3, 2), Tile(3, 4), Tile(3, 5), Tile(0, 1), Tile(0, 2)}}},
       Redeal{R::FiveSameFaceNoDouble, Seat::C, 3}},
      {"five of a face with its double",
       {{Seat::C, {Tile(3, 0), Tile(3, 1), Tile(3, 2), Tile(3, 3), Tile(3, 4), Tile(0, 1), Tile(0, 2)}}},
       std::nullopt},
      {"four of a face without its double",
       {{Seat::B, {Tile(2, 0), Tile(2, 1), Tile(2, 3), Tile(2, 4), Tile(0, 1), Tile(5, 6), Tile(3, 4)}}},
       std::nullopt},
      {"five blanks without the double blank",
       {{Seat::B, {Tile(0, 1), Tile(0, 2), Tile(0, 3), Tile(0, 4), Tile(0, 5), Tile(1, 2), Tile(3, 4)}}},
       Redeal{R::FiveSameFaceNoDouble, Seat::B, 0}},
      {"five doubles outrank five of a face",
       {{Seat::D, {Tile(1, 1), Tile(2, 2), Tile(3, 3), Tile(4, 4), Tile(5, 5), Tile(5, 1), Tile(5, 2)}}},
       Redeal{R::FiveDoubles, Seat::D, 0}},
      {"five of a face with double plus three doubles",
       {{Seat::A, {Tile(6, 6), Tile(6, 0), Tile(6, 1), Tile(6, 2), Tile(6, 3), Tile(1, 1), Tile(2, 2)}}},
       std::nullopt},
      {"earliest seat wins",
       {{Seat::B, {Tile(0, 1), Tile(0, 2), Tile(0, 3), Tile(0, 4), Tile(0, 5), Tile(1, 2), Tile(3, 4)}},
        {Seat::C, {Tile(1, 1), Tile(2, 2), Tile(3, 3), Tile(4, 4), Tile(5, 5), Tile(6, 6), Tile(1, 5)}}},
       Redeal{R::FiveSameFaceNoDouble, Seat::B, 0}},
  };
}

// ---------------------------------------------------------------------------
// Hidden-hand constraints

// Plain check of a determinization against the passes seen in `history`:
// no seat may hold a tile showing a pip it passed on.
inline bool respects_passes(const PerSeat<Hand>& hands, const std::vector<Event>& history, Seat self) {
  for (const Event& e : history) {
    const auto* p = std::get_if<PassEvent>(&e);
    if (!p || p->seat == self) continue;
    for (auto [a, b] : raw(hands[p->seat])) {
      const int l = p->ends_at_pass.left;
      const int r = p->ends_at_pass.right;
      if (a == l || b == l || a == r || b == r) return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Marks and ranking terms

inline std::set<RawTile> oracle_urgent(const RoundState& s, Seat self) {
  std::set<RawTile> out;
  const auto chain = raw(s.chain.tiles());
  for (auto [a, b] : raw(s.hands[self])) {
    if (a != b) continue;
    int on_chain = 0;
    for (RawTile t : chain) on_chain += raw_has(t, a);
    if (on_chain > 3) out.emplace(a, b);
  }
  return out;
}

// A hand tile is marked when, for an end value it shows, no tile outside
// the chain and the hand shows that value.
inline std::set<RawTile> oracle_monopoly(const RoundState& s, Seat self) {
  std::set<RawTile> out;
  if (s.chain.empty()) return out;
  const auto chain = raw(s.chain.tiles());
  const auto hand = raw(s.hands[self]);
  const Ends e = s.chain.ends();
  for (int v : {static_cast<int>(e.left), static_cast<int>(e.right)}) {
    bool elsewhere = false;
    for (int hi = 0; hi <= 6; ++hi) {
      for (int lo = 0; lo <= hi; ++lo) {
        const RawTile t{lo, hi};
        if (!raw_has(t, v)) continue;
        const bool known = std::count(chain.begin(), chain.end(), t) || std::count(hand.begin(), hand.end(), t);
        elsewhere |= !known;
      }
    }
    if (elsewhere) continue;
    for (RawTile t : hand) {
      if (raw_has(t, v)) out.insert(t);
    }
  }
  return out;
}

inline std::set<RawTile> as_raw(const TileSet& s) {
  const auto v = raw(s);
  return {v.begin(), v.end()};
}

struct OracleTerms {
  int own = 0, partner = 0, opp = 0;
};

inline OracleTerms oracle_terms(const RoundState& s, Seat self, const PerSeat<Hand>& sample, const Move& m) {
  const Ends e = s.chain.empty() ? Ends{0, 0} : s.chain.ends();
  const auto [l, r] = oracle_after(s.chain.empty(), e.left, e.right, {m.tile.lo, m.tile.hi}, m.end);
  auto own = raw(s.hands[self]);
  own.erase(std::find(own.begin(), own.end(), RawTile{m.tile.lo, m.tile.hi}));
  return {oracle_count(own, l, r), oracle_count(raw(sample[partner(self)]), l, r),
          oracle_count(raw(sample[next(self)]), l, r)};
}

// ---------------------------------------------------------------------------
// Random reachable states: deal, then play uniformly random legal moves.

inline RoundState random_state(Rng& rng, int max_steps = 40) {
  const PerSeat<Hand> hands = deal(rng.next_u64());
  const int round_index = rng.below(3) == 0 ? 1 : 2 + static_cast<int>(rng.below(5));
  const Seat starter = round_index == 1 ? initial_starter(hands) : seat_at(static_cast<int>(rng.below(4)));
  RoundState s = start_round(hands, starter, round_index);
  const int steps = static_cast<int>(rng.below(max_steps + 1));
  for (int i = 0; i < steps && !is_round_over(s); ++i) {
    const auto moves = legal_moves(s, s.to_move);
    apply_move(s, s.to_move, moves.empty() ? Move::make_pass() : moves[rng.below(moves.size())]);
  }
  return s;
}

// A determinization of the hidden hands for `self` taken from the true deal
// (so it is consistent with every hard constraint).
inline PerSeat<Hand> truth_sample(const RoundState& s, Seat self) {
  PerSeat<Hand> w = s.hands;
  w[self] = Hand();
  return w;
}

// Random redistribution of the hidden tiles keeping hand sizes.
inline PerSeat<Hand> shuffled_sample(const RoundState& s, Seat self, Rng& rng) {
  std::vector<Tile> pool;
  for (Seat x : kSeats) {
    if (x == self) continue;
    for (Tile t : s.hands[x]) pool.push_back(t);
  }
  rng.shuffle(pool);
  PerSeat<Hand> w;
  std::size_t k = 0;
  for (Seat x : kSeats) {
    if (x == self) continue;
    for (int i = 0; i < s.hands[x].size(); ++i) w[x].insert(pool[k++]);
  }
  return w;
}

// ---------------------------------------------------------------------------
// Leak audit over a JSONL transcript (server log or simulator transcript).
//
// Every tile pair appearing in a record addressed to seat X (or broadcast)
// must be public at that moment (already played, or shown by a redeal),
// X's own dealt tile (for X-addressed records), or part of a round_end
// reveal. Returns a description of the first leak, or an empty string.

inline void collect_tiles(const protocol::Json& j, std::vector<RawTile>& out) {
  if (j.is_array()) {
    if (j.size() == 2 && j[0].is_number_integer() && j[1].is_number_integer()) {
      out.emplace_back(std::min(j[0].get<int>(), j[1].get<int>()), std::max(j[0].get<int>(), j[1].get<int>()));
      return;
    }
    for (const auto& x : j) collect_tiles(x, out);
  } else if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it) collect_tiles(*it, out);
  }
}

class LeakAuditor {
 public:
  // `line` is one transcript record (dir/seat annotated) or, with
  // `as_seat`, a raw envelope received by that seat.
  std::string check(const protocol::Json& rec, std::optional<Seat> as_seat = std::nullopt) {
    const std::string type = rec.value("type", "");
    const protocol::Json& data = rec.contains("data") ? rec["data"] : protocol::Json::object();
    std::optional<Seat> to = as_seat;
    bool broadcast = false;
    if (!as_seat) {
      if (rec.value("dir", "") != "out") return {};
      const auto& seat = rec["seat"];
      if (seat.is_string() && seat.get<std::string>() == "*") {
        broadcast = true;
      } else if (seat.is_string()) {
        to = parse_seat(seat.get<std::string>());
      }
    }
    if (type == "deal") {
      if (!to) return "deal broadcast to all seats";
      if (rec.value("resync", false)) return {};  // copy of an earlier deal
      if (!dealing_) {
        dealing_ = true;
        own_ = PerSeat<std::set<RawTile>>();
        public_.clear();
      }
      std::vector<RawTile> hand;
      collect_tiles(data, hand);
      own_[*to] = std::set<RawTile>(hand.begin(), hand.end());
      return {};
    }
    dealing_ = false;
    if (type == "round_end") return {};
    if (type == "view" && data.value("phase", "") == "round_end") return {};
    if (type == "played") {
      std::vector<RawTile> t;
      collect_tiles(data["tile"], t);
      public_.insert(t.begin(), t.end());
    }
    if (type == "redeal" && data.contains("shown_tiles")) {
      std::vector<RawTile> t;
      collect_tiles(data["shown_tiles"], t);
      public_.insert(t.begin(), t.end());
    }
    std::vector<RawTile> tiles;
    collect_tiles(data, tiles);
    for (RawTile t : tiles) {
      if (public_.count(t)) continue;
      if (to && !broadcast && own_[*to].count(t)) continue;
      return type + " exposes [" + std::to_string(t.first) + "," + std::to_string(t.second) + "] to " +
             (broadcast ? std::string("all seats") : to_string(*to));
    }
    return {};
  }

 private:
  bool dealing_ = false;
  PerSeat<std::set<RawTile>> own_;
  std::set<RawTile> public_;
};

}  // namespace domino101::testing
