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

// Headless self-play: AI in every seat, full matches to 101.
//
// Match i of a run uses the seed derive_seed(run_seed, i), so matches are
// independent and may be computed in any order or in parallel without
// changing the report. Every pairing in a run sees the same deals.

#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <future>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "domino101/ai.hpp"
#include "domino101/table.hpp"
#include "domino101/transcript.hpp"

namespace domino101 {

inline constexpr int kMaxRoundsPerMatch = 1000;

struct MatchSetup {
  PerSeat<AiLevel> levels{AiLevel::L1};
  std::uint64_t seed = 0;
  PassMode mode = PassMode::Strict;
};

struct RoundRecord {
  Outcome outcome = Outcome::DominoWin;
  std::optional<Team> awarded_to;
  int points = 0;
  int turns = 0;
  int passes = 0;
  int deals = 0;
  int redeals = 0;
};

struct MatchRecord {
  std::vector<RoundRecord> rounds;
  MatchState final_match;
  bool finished = false;
  std::vector<std::string> transcript;
};

struct MatchHooks {
  // Called after every accepted action and after each starter choice.
  std::function<void(const Table&, std::vector<AiPlayer>&)> after_event;
  bool keep_transcript = false;
  int max_rounds = 0;  // 0: play to the match target
};

inline std::string levels_spec(const PerSeat<AiLevel>& levels) {
  std::string s;
  for (Seat seat : kSeats) s += (seat == Seat::A ? "" : ",") + to_string(levels[seat]);
  return s;
}

inline std::optional<PerSeat<AiLevel>> parse_levels_spec(std::string_view spec) {
  PerSeat<AiLevel> levels;
  int i = 0;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = spec.find(',', start);
    const auto part = spec.substr(start, comma == std::string_view::npos ? spec.npos : comma - start);
    const auto level = parse_level(part);
    if (!level || i >= 4) return std::nullopt;
    levels[seat_at(i++)] = *level;
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (i != 4) return std::nullopt;
  return levels;
}

inline protocol::Json setup_json(const MatchSetup& setup) {
  return protocol::Json{{"seats", levels_spec(setup.levels)}, {"pass_mode", to_string(setup.mode)}};
}

inline MatchRecord play_match(const MatchSetup& setup, const MatchHooks& hooks = {}) {
  MatchRecord record;
  std::optional<Transcript> transcript;
  if (hooks.keep_transcript) {
    transcript.emplace([&](const std::string& line) { record.transcript.push_back(line); }, false);
    transcript->header(setup.seed, setup_json(setup));
  }

  RoundRecord current;
  const Sink sink = [&](const Outgoing& o) {
    if (transcript) transcript->out(o.to, o.msg);
    std::visit(
        [&](const auto& m) {
          using T = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<T, protocol::DealMsg>) {
            if (o.to == Seat::A) ++current.deals;
          } else if constexpr (std::is_same_v<T, protocol::RedealMsg>) {
            ++current.redeals;
          } else if constexpr (std::is_same_v<T, protocol::Played>) {
            ++current.turns;
          } else if constexpr (std::is_same_v<T, protocol::Passed>) {
            ++current.turns;
            ++current.passes;
          } else if constexpr (std::is_same_v<T, protocol::RoundEnd>) {
            current.outcome = m.outcome;
            current.awarded_to = m.awarded_to;
            current.points = m.points;
            record.rounds.push_back(current);
            current = RoundRecord{};
          }
        },
        o.msg);
  };

  Table table(derive_seed(setup.seed, 1), setup.mode, sink);
  std::vector<AiPlayer> players;
  for (Seat s : kSeats) players.emplace_back(s, setup.levels[s], derive_seed(setup.seed, 10 + idx(s)));

  const int cap = hooks.max_rounds > 0 ? hooks.max_rounds : kMaxRoundsPerMatch;
  table.start();
  if (hooks.after_event) hooks.after_event(table, players);
  while (table.phase() != TablePhase::MatchOver && static_cast<int>(record.rounds.size()) < cap) {
    if (table.phase() == TablePhase::Turn) {
      const Seat s = table.to_move();
      table.submit(s, players[idx(s)].decide(table.round()));
    } else if (table.phase() == TablePhase::StarterChoice) {
      const Team team = table.starter_right().team;
      table.choose_starter(choose_starter(team, table.dealt()));
    } else {
      throw StateError("match driver stalled");
    }
    if (hooks.after_event) hooks.after_event(table, players);
  }
  record.final_match = table.match();
  record.finished = table.phase() == TablePhase::MatchOver;
  return record;
}

// ---------------------------------------------------------------------------
// Tournament report

struct SimConfig {
  std::vector<PerSeat<AiLevel>> pairings;
  std::optional<int> rounds;   // total rounds per pairing
  std::optional<int> matches;  // or whole matches per pairing
  std::uint64_t seed = 0;
  PassMode mode = PassMode::Strict;
  int threads = 1;
};

struct SimRow {
  std::string seats;
  int matches = 0;
  int rounds = 0;
  int wins_ac = 0;
  int wins_bd = 0;
  int ties = 0;
  long total_points = 0;
  int turns = 0;
  int passes = 0;
  int closed = 0;
  int deals = 0;
  int redeals = 0;
  std::uint64_t seed = 0;

  double win_rate_ac() const { return rounds ? static_cast<double>(wins_ac) / rounds : 0.0; }
  double mean_points() const { return rounds ? static_cast<double>(total_points) / rounds : 0.0; }
  double pass_rate() const { return turns ? static_cast<double>(passes) / turns : 0.0; }
  double closed_rate() const { return rounds ? static_cast<double>(closed) / rounds : 0.0; }
  double redeal_rate() const { return deals ? static_cast<double>(redeals) / deals : 0.0; }
  bool consistent() const { return wins_ac + wins_bd + ties == rounds; }
};

namespace detail {

inline void add_round(SimRow& row, const RoundRecord& r) {
  ++row.rounds;
  if (!r.awarded_to) {
    ++row.ties;
  } else if (*r.awarded_to == Team::AC) {
    ++row.wins_ac;
  } else {
    ++row.wins_bd;
  }
  row.total_points += r.points;
  row.turns += r.turns;
  row.passes += r.passes;
  if (r.outcome == Outcome::Closed || r.outcome == Outcome::Tie) ++row.closed;
  row.deals += r.deals;
  row.redeals += r.redeals;
}

inline std::vector<MatchRecord> play_batch(const PerSeat<AiLevel>& levels, const SimConfig& cfg, int first,
                                           int count) {
  const auto run = [&](int i) {
    return play_match(MatchSetup{levels, derive_seed(cfg.seed, static_cast<std::uint64_t>(i)), cfg.mode});
  };
  std::vector<MatchRecord> out(count);
  const int workers = std::max(1, std::min(cfg.threads, count));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) out[i] = run(first + i);
    return out;
  }
  std::vector<std::future<void>> jobs;
  for (int w = 0; w < workers; ++w) {
    jobs.push_back(std::async(std::launch::async, [&, w] {
      for (int i = w; i < count; i += workers) out[i] = run(first + i);
    }));
  }
  for (auto& j : jobs) j.get();
  return out;
}

}  // namespace detail

inline SimRow simulate_pairing(const PerSeat<AiLevel>& levels, const SimConfig& cfg) {
  SimRow row;
  row.seats = levels_spec(levels);
  row.seed = cfg.seed;
  const int batch = std::max(8, cfg.threads * 4);
  int next_match = 0;
  const auto want_more = [&] {
    if (cfg.rounds) return row.rounds < *cfg.rounds;
    return next_match < cfg.matches.value_or(1);
  };
  while (want_more()) {
    int count = batch;
    if (!cfg.rounds) count = std::min(batch, cfg.matches.value_or(1) - next_match);
    const auto records = detail::play_batch(levels, cfg, next_match, count);
    for (const MatchRecord& m : records) {
      if (!want_more()) break;
      ++row.matches;
      ++next_match;
      for (const RoundRecord& r : m.rounds) {
        if (cfg.rounds && row.rounds >= *cfg.rounds) break;
        detail::add_round(row, r);
      }
    }
  }
  return row;
}

inline std::vector<SimRow> run_sim(const SimConfig& cfg) {
  std::vector<SimRow> rows;
  for (const auto& levels : cfg.pairings) rows.push_back(simulate_pairing(levels, cfg));
  return rows;
}

inline constexpr const char* kCsvHeader =
    "seats,matches,rounds,wins_ac,wins_bd,ties,win_rate_ac,mean_points_per_round,pass_rate,closed_rate,"
    "redeal_rate,seed,rng";

inline void write_csv(std::ostream& os, const std::vector<SimRow>& rows) {
  os << kCsvHeader << "\n";
  for (const SimRow& r : rows) {
    std::ostringstream line;
    line << std::fixed << std::setprecision(6) << '"' << r.seats << '"' << ',' << r.matches << ',' << r.rounds << ','
         << r.wins_ac << ',' << r.wins_bd << ',' << r.ties << ',' << r.win_rate_ac() << ',' << r.mean_points() << ','
         << r.pass_rate() << ',' << r.closed_rate() << ',' << r.redeal_rate() << ',' << r.seed << ',' << kRngName;
    os << line.str() << "\n";
  }
}

inline protocol::Json rows_json(const std::vector<SimRow>& rows) {
  const auto fixed6 = [](double x) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(6) << x;
    return std::stod(s.str());
  };
  protocol::Json out{{"rng", kRngName}, {"rows", protocol::Json::array()}};
  for (const SimRow& r : rows) {
    out["rows"].push_back(protocol::Json{{"seats", r.seats},
                                         {"matches", r.matches},
                                         {"rounds", r.rounds},
                                         {"wins_ac", r.wins_ac},
                                         {"wins_bd", r.wins_bd},
                                         {"ties", r.ties},
                                         {"win_rate_ac", fixed6(r.win_rate_ac())},
                                         {"mean_points_per_round", fixed6(r.mean_points())},
                                         {"pass_rate", fixed6(r.pass_rate())},
                                         {"closed_rate", fixed6(r.closed_rate())},
                                         {"redeal_rate", fixed6(r.redeal_rate())},
                                         {"seed", r.seed},
                                         {"rng", kRngName}});
  }
  return out;
}

}  // namespace domino101
