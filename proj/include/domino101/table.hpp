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

// Authoritative match driver. Owns the match and round state, validates
// every submitted action against the rules engine and reports the resulting
// public and private messages through a sink. It knows nothing about who
// sits in a seat; the simulator and the network server both drive it.

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>

#include "domino101/errors.hpp"
#include "domino101/protocol.hpp"
#include "domino101/rng.hpp"
#include "domino101/rules.hpp"

namespace domino101 {

// Addressed server message; `to` empty means every seat.
struct Outgoing {
  std::optional<Seat> to;
  protocol::ServerMessage msg;
};

using Sink = std::function<void(const Outgoing&)>;

enum class TablePhase { NotStarted, Turn, StarterChoice, MatchOver };

struct TableStats {
  int deals = 0;
  int redeals = 0;
  int turns = 0;
  int passes = 0;
};

class Table {
 public:
  Table(std::uint64_t seed, PassMode mode, Sink sink)
      : rng_(seed), mode_(mode), sink_(std::move(sink)) {}

  TablePhase phase() const { return phase_; }
  PassMode pass_mode() const { return mode_; }
  const MatchState& match() const { return match_; }
  const RoundState& round() const { return round_; }
  bool round_over() const { return round_over_; }
  const std::optional<RoundResult>& last_result() const { return last_result_; }
  const TableStats& stats() const { return stats_; }

  // Hands of the round awaiting its starter (valid in StarterChoice).
  const PerSeat<Hand>& dealt() const { return dealt_; }
  const StarterRight& starter_right() const {
    if (!match_.starter_right) throw StateError("no starter right in the first round");
    return *match_.starter_right;
  }

  Seat to_move() const {
    if (phase_ != TablePhase::Turn) throw StateError("no turn in progress");
    return round_.to_move;
  }

  protocol::FullGameView view() const {
    return {phase_ == TablePhase::NotStarted ? nullptr : &round_, match_, round_over_};
  }

  void start() {
    if (phase_ != TablePhase::NotStarted) throw StateError("match already started");
    deal_round();
    begin_round(initial_starter(dealt_));
  }

  // Throws TurnError / IllegalMove / IllegalPass / StateError without
  // changing any state.
  void submit(Seat seat, const Move& m, bool auto_move = false) {
    if (phase_ != TablePhase::Turn) throw StateError("no turn in progress");
    apply_move(round_, seat, m, mode_);
    ++stats_.turns;
    if (m.pass) {
      ++stats_.passes;
      emit(std::nullopt, protocol::Passed{seat, auto_move});
    } else {
      emit(std::nullopt, protocol::Played{seat, m.tile, m.end, round_.chain.ends(), auto_move});
    }
    if (is_round_over(round_)) finish_round();
  }

  // Timed-out turn under the forfeit policy: a pass that forfeits the round
  // when the seat could have played.
  void concede(Seat seat) {
    if (phase_ != TablePhase::Turn) throw StateError("no turn in progress");
    apply_move(round_, seat, Move::make_pass(), PassMode::Forfeit);
    ++stats_.turns;
    ++stats_.passes;
    emit(std::nullopt, protocol::Passed{seat, true, true});
    if (is_round_over(round_)) finish_round();
  }

  void choose_starter(Seat seat) {
    if (phase_ != TablePhase::StarterChoice) throw StateError("no starter choice pending");
    if (team_of(seat) != match_.starter_right->team) {
      throw TurnError("seat " + to_string(seat) + " is not in the entitled team");
    }
    begin_round(seat);
  }

  // Ends the match early (unrecoverable room error).
  void abort() {
    if (phase_ == TablePhase::MatchOver) return;
    phase_ = TablePhase::MatchOver;
    emit(std::nullopt, protocol::MatchEnd{match_.score, match_.winner(), true});
  }

 private:
  void emit(std::optional<Seat> to, protocol::ServerMessage msg) { sink_(Outgoing{to, std::move(msg)}); }

  // Deal until a hand passes the redeal checks; each attempt draws the next
  // seed from the table's generator.
  void deal_round() {
    while (true) {
      dealt_ = deal(rng_.next_u64());
      ++stats_.deals;
      for (Seat s : kSeats) emit(s, protocol::DealMsg{dealt_[s]});
      const DealVerdict verdict = validate_deal(dealt_);
      if (!verdict) break;
      ++stats_.redeals;
      protocol::RedealMsg notice{verdict->reason, verdict->seat, std::nullopt, shown_tiles(dealt_, *verdict)};
      if (verdict->reason != RedealReason::FiveDoubles) notice.pip = verdict->pip;
      emit(std::nullopt, notice);
    }
    phase_ = match_.starter_right ? TablePhase::StarterChoice : TablePhase::NotStarted;
  }

  void begin_round(Seat starter) {
    round_ = start_round(dealt_, starter, match_.round_index);
    round_over_ = false;
    phase_ = TablePhase::Turn;
    emit(std::nullopt, protocol::RoundStart{starter, round_.round_index});
  }

  void finish_round() {
    const RoundResult r = score_round(round_);
    last_result_ = r;
    round_over_ = true;
    emit(std::nullopt, protocol::RoundEnd{r.outcome, r.seat, r.points, r.awarded_to, r.revealed,
                                          r.outcome == Outcome::Closed || r.outcome == Outcome::Tie});
    match_ = match_update(match_, r);
    if (match_.over()) {
      phase_ = TablePhase::MatchOver;
      emit(std::nullopt, protocol::MatchEnd{match_.score, match_.winner(), false});
      return;
    }
    deal_round();
  }

  Rng rng_;
  PassMode mode_;
  Sink sink_;
  TablePhase phase_ = TablePhase::NotStarted;
  MatchState match_;
  RoundState round_;
  bool round_over_ = false;
  PerSeat<Hand> dealt_;
  std::optional<RoundResult> last_result_;
  TableStats stats_;
};

}  // namespace domino101
