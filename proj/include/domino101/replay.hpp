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

// Replays a JSONL transcript through the rules engine and checks that every
// recorded server decision (deals, redeals, starters, plays, passes, round
// and match results) is exactly what the engine produces.

#pragma once

#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "domino101/protocol.hpp"
#include "domino101/rules.hpp"

namespace domino101 {

struct ReplayReport {
  bool ok = true;
  bool complete = false;  // a match_end record was reached
  bool truncated = false;  // last line cut short
  std::size_t events = 0;
  std::size_t error_line = 0;  // 1-based; 0 when ok
  std::string error;
  std::array<int, 2> final_scores{0, 0};
  std::vector<std::string> timeline;

  std::string verdict() const {
    std::ostringstream os;
    if (!ok) {
      os << "FAIL at line " << error_line << ": " << error;
    } else if (complete) {
      os << "OK, " << events << " events, final score " << final_scores[0] << ":" << final_scores[1];
    } else {
      os << "OK (valid prefix, no match_end), " << events << " events, score so far " << final_scores[0] << ":"
         << final_scores[1];
    }
    return os.str();
  }
};

namespace detail {

class ReplayFailure : public Error {
 public:
  using Error::Error;
};

inline std::string hand_string(const Hand& h) {
  std::string s;
  for (Tile t : h) s += (s.empty() ? "" : " ") + to_string(t);
  return s;
}

inline std::string board_string(const RoundState& r) {
  std::string s;
  for (const PlacedTile& p : r.chain.placed()) s += "[" + std::to_string(p.left) + "|" + std::to_string(p.right) + "]";
  return s.empty() ? "(empty)" : s;
}

class Replayer {
 public:
  explicit Replayer(bool timeline) : timeline_(timeline) {}

  void line(const protocol::Json& j, ReplayReport& report) {
    const std::string dir = j.value("dir", "");
    const std::string type = j.value("type", "");
    const protocol::Json& data = j.at("data");
    if (dir == "sys") {
      if (type == "log_header") {
        const auto& cfg = data.value("config", protocol::Json::object());
        if (cfg.value("pass_mode", "strict") == "forfeit") mode_ = PassMode::Forfeit;
      }
      note("sys " + type);
      return;
    }
    if (dir != "out" || j.value("resync", false)) return;
    if (complete_) fail("record after match_end");
    const std::string seat_field = j.at("seat").is_string() ? j.at("seat").get<std::string>() : "";

    if (type == "deal") {
      const auto seat = parse_seat(seat_field);
      if (!seat) fail("deal without an addressed seat");
      const auto m = protocol::detail::from_data<protocol::DealMsg>(data);
      if (received_ & (1u << idx(*seat))) fail("second deal for seat " + seat_field);
      pending_[*seat] = m.hand;
      received_ |= 1u << idx(*seat);
      ++dealt_count_;
      ++report.events;
      note("deal " + seat_field + ": " + hand_string(m.hand));
    } else if (type == "redeal") {
      const auto m = protocol::detail::from_data<protocol::RedealMsg>(data);
      require_full_deal();
      const DealVerdict verdict = validate_deal(pending_);
      if (!verdict) fail("redeal announced for a valid deal");
      if (verdict->reason != m.reason || verdict->seat != m.seat) fail("redeal reason or seat differs from the rules");
      if (m.reason != RedealReason::FiveDoubles && m.pip != verdict->pip) fail("redeal pip differs");
      if (m.shown_tiles != shown_tiles(pending_, *verdict)) fail("redeal shown tiles differ");
      reset_deal();
      ++report.events;
      note("redeal: " + to_string(m.reason) + " seat " + to_string(m.seat));
    } else if (type == "round_start") {
      const auto m = protocol::detail::from_data<protocol::RoundStart>(data);
      require_full_deal();
      if (validate_deal(pending_)) fail("round started on a deal that requires a redeal");
      if (round_active_) fail("round_start while a round is in progress");
      if (m.round_index != match_.round_index) fail("round index mismatch");
      if (!match_.starter_right) {
        if (m.starter != initial_starter(pending_)) fail("first round must be started by the 1-1 holder");
      } else if (team_of(m.starter) != match_.starter_right->team) {
        fail("starter is not in the entitled team");
      }
      round_ = start_round(pending_, m.starter, m.round_index);
      round_active_ = true;
      reset_deal();
      ++report.events;
      note("round " + std::to_string(m.round_index) + " starts with " + to_string(m.starter));
    } else if (type == "played" || type == "passed") {
      if (!round_active_) fail(type + " outside a round");
      Seat seat;
      Move move;
      std::optional<Ends> claimed;
      PassMode mode = mode_;
      if (type == "played") {
        const auto m = protocol::detail::from_data<protocol::Played>(data);
        seat = m.seat;
        move = Move::play(m.tile, m.end);
        claimed = m.new_ends;
      } else {
        const auto m = protocol::detail::from_data<protocol::Passed>(data);
        seat = m.seat;
        move = Move::make_pass();
        if (m.forfeit) mode = PassMode::Forfeit;
      }
      try {
        apply_move(round_, seat, move, mode);
      } catch (const Error& e) {
        fail(std::string("rejected by the rules: ") + e.what());
      }
      if (claimed && *claimed != round_.chain.ends()) fail("new_ends differ from the engine");
      if (!tiles_conserved(round_) || !round_.chain.valid()) fail("tile conservation violated");
      ++report.events;
      note(to_string(seat) + " " + to_string(move) + "  " + board_string(round_));
    } else if (type == "round_end") {
      const auto m = protocol::detail::from_data<protocol::RoundEnd>(data);
      if (!round_active_ || !is_round_over(round_)) fail("round_end while the round is live");
      const RoundResult r = score_round(round_);
      if (m.outcome != r.outcome || m.seat != r.seat) fail("round outcome differs");
      if (m.points != r.points || m.awarded_to != r.awarded_to) fail("round points differ");
      if (m.revealed_hands != r.revealed) fail("revealed hands differ");
      match_ = match_update(match_, r);
      round_active_ = false;
      ++report.events;
      note("round_end " + to_string(r.outcome) + " " + std::to_string(r.points) + " to " +
           (r.awarded_to ? to_string(*r.awarded_to) : std::string("nobody")) + "  score " +
           std::to_string(match_.score[0]) + ":" + std::to_string(match_.score[1]));
    } else if (type == "match_end") {
      const auto m = protocol::detail::from_data<protocol::MatchEnd>(data);
      if (m.scores != match_.score) fail("match scores differ");
      if (!m.error && (!match_.over() || round_active_)) fail("match_end before a team reached the target");
      if (m.winner != match_.winner()) fail("match winner differs");
      complete_ = true;
      ++report.events;
      note("match_end " + std::to_string(m.scores[0]) + ":" + std::to_string(m.scores[1]) +
           (m.error ? " (aborted)" : ""));
    } else {
      return;  // informational records (turn, seats, view, ...)
    }
    report.final_scores = match_.score;
    report.complete = complete_;
  }

  std::vector<std::string>& notes() { return notes_; }

 private:
  [[noreturn]] void fail(const std::string& what) { throw ReplayFailure(what); }

  void note(std::string s) {
    if (timeline_) notes_.push_back(std::move(s));
  }

  void require_full_deal() {
    if (dealt_count_ != 4) fail("deal incomplete (" + std::to_string(dealt_count_) + " of 4 hands)");
  }

  void reset_deal() {
    pending_ = PerSeat<Hand>();
    received_ = 0;
    dealt_count_ = 0;
  }

  bool timeline_;
  PassMode mode_ = PassMode::Strict;
  MatchState match_;
  RoundState round_;
  bool round_active_ = false;
  bool complete_ = false;
  PerSeat<Hand> pending_;
  unsigned received_ = 0;
  int dealt_count_ = 0;
  std::vector<std::string> notes_;
};

}  // namespace detail

inline ReplayReport replay_lines(const std::vector<std::string>& lines, bool with_timeline = false,
                                 bool last_line_complete = true) {
  ReplayReport report;
  detail::Replayer replayer(with_timeline);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const bool last = i + 1 == lines.size();
    if (lines[i].empty() || lines[i] == "\n") continue;
    protocol::Json j = protocol::Json::parse(lines[i], nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("data") || !j.contains("dir")) {
      if (last && !last_line_complete) {
        report.truncated = true;
        break;
      }
      report.ok = false;
      report.error_line = i + 1;
      report.error = "corrupt line";
      break;
    }
    try {
      replayer.line(j, report);
    } catch (const std::exception& e) {
      report.ok = false;
      report.error_line = i + 1;
      report.error = e.what();
      break;
    }
  }
  report.timeline = std::move(replayer.notes());
  return report;
}

inline ReplayReport replay_stream(std::istream& in, bool with_timeline = false) {
  std::vector<std::string> lines;
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::size_t start = 0;
  bool complete_last = true;
  while (start < content.size()) {
    const std::size_t nl = content.find('\n', start);
    if (nl == std::string::npos) {
      lines.push_back(content.substr(start));
      complete_last = false;
      break;
    }
    lines.push_back(content.substr(start, nl - start));
    start = nl + 1;
  }
  return replay_lines(lines, with_timeline, complete_last);
}

}  // namespace domino101
