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

#include <gtest/gtest.h>

#include <fstream>

#include "domino101/protocol.hpp"
#include "golden.hpp"
#include "support.hpp"

namespace domino101::protocol {
namespace {

using testing::golden_client_messages;
using testing::golden_lines;
using testing::golden_server_messages;

TEST(GoldenTest, ClientMessagesAreByteExact) {
  const auto lines = golden_lines("client.jsonl");
  const auto msgs = golden_client_messages();
  ASSERT_EQ(lines.size(), msgs.size());
  for (std::size_t i = 0; i < msgs.size(); ++i) {
    EXPECT_EQ(encode(msgs[i]), lines[i]);
    EXPECT_EQ(decode_client(lines[i]), msgs[i]) << lines[i];
  }
  EXPECT_EQ(lines[2], "{\"v\":1,\"seq\":12,\"type\":\"move\",\"data\":{\"tile\":[3,6],\"end\":\"left\"}}\n");
}

TEST(GoldenTest, ServerMessagesAreByteExact) {
  const auto lines = golden_lines("server.jsonl");
  const auto msgs = golden_server_messages();
  ASSERT_EQ(lines.size(), msgs.size());
  std::set<std::string> types;
  for (std::size_t i = 0; i < msgs.size(); ++i) {
    EXPECT_EQ(encode(msgs[i]), lines[i]);
    EXPECT_EQ(decode_server(lines[i]), msgs[i]) << lines[i];
    types.insert(type_name(msgs[i].msg));
  }
  EXPECT_EQ(types.size(), std::variant_size_v<ServerMessage>);
}

// ---------------------------------------------------------------------------
// Errors

ErrorCode client_error(std::string_view line) {
  try {
    decode_client(line);
  } catch (const ProtocolError& e) {
    return e.code();
  }
  ADD_FAILURE() << "accepted: " << line;
  return ErrorCode::Malformed;
}

TEST(DecodeErrorTest, Codes) {
  EXPECT_EQ(client_error(R"({"v":1,"seq":3,"type":"move","data":{"tile":[6,3],"end":"left"}})"),
            ErrorCode::BadTile);
  EXPECT_EQ(client_error(R"({"v":1,"seq":3,"type":"move","data":{"tile":[3,7],"end":"left"}})"),
            ErrorCode::BadTile);
  EXPECT_EQ(client_error(R"({"v":1,"seq":3,"type":"move","data":{"tile":[3],"end":"left"}})"),
            ErrorCode::BadTile);
  EXPECT_EQ(client_error(R"({"v":2,"seq":3,"type":"pass","data":{}})"), ErrorCode::Version);
  EXPECT_EQ(client_error(R"({"v":1,"seq":3,"type":"pa)"), ErrorCode::Malformed);
  EXPECT_EQ(client_error("[1,2,3]"), ErrorCode::Malformed);
  EXPECT_EQ(client_error(R"({"seq":3,"type":"pass","data":{}})"), ErrorCode::Malformed);
  EXPECT_EQ(client_error(R"({"v":1,"seq":-1,"type":"pass","data":{}})"), ErrorCode::Malformed);
  EXPECT_EQ(client_error(R"({"v":1,"seq":3,"type":"dance","data":{}})"), ErrorCode::UnknownType);
  EXPECT_EQ(client_error(R"({"v":1,"seq":3,"type":"welcome","data":{"seat":"A","room_id":"x","token":"t"}})"),
            ErrorCode::UnknownType);
  EXPECT_EQ(client_error(R"({"v":1,"seq":3,"type":"move","data":{"tile":[3,6],"end":"middle"}})"),
            ErrorCode::BadField);
  EXPECT_EQ(client_error(R"({"v":1,"seq":3,"type":"choose_starter","data":{"seat":"E"}})"),
            ErrorCode::BadField);
  EXPECT_EQ(client_error(R"({"v":1,"seq":3,"type":"hello","data":{}})"), ErrorCode::BadField);
  std::string big = R"({"v":1,"seq":3,"type":"hello","data":{"name":")" + std::string(17000, 'x') + "\"}}";
  EXPECT_EQ(client_error(big), ErrorCode::Oversize);
}

TEST(DecodeErrorTest, EncodeRefusesOversizeLine) {
  ServerEnvelope env{1, 1, ErrorMsg{"x", std::string(20000, 'y')}};
  EXPECT_THROW(encode(env), EncodeError);
}

TEST(DecodeErrorTest, InvalidUtf8IsReplacedOnEncode) {
  const std::string line = encode(ServerEnvelope{1, 1, ErrorMsg{"x", "bad \xff byte"}});
  EXPECT_EQ(decode_server(line).seq, 1u);
}

TEST(DecodeErrorTest, ToleratesCrLfAndMissingData) {
  EXPECT_EQ(decode_client("{\"v\":1,\"seq\":4,\"type\":\"ping\"}\r\n").msg, ClientMessage(Ping{}));
}

// ---------------------------------------------------------------------------
// Fuzzing

Tile random_tile(Rng& rng) { return Tile::from_index(static_cast<int>(rng.below(kNumTiles))); }

Hand random_hand(Rng& rng, int max) {
  Hand h;
  const int n = static_cast<int>(rng.below(max + 1));
  for (int i = 0; i < n; ++i) h.insert(random_tile(rng));
  return h;
}

Seat random_seat(Rng& rng) { return seat_at(static_cast<int>(rng.below(4))); }

std::string random_text(Rng& rng) {
  static const std::vector<std::string> alphabet = {"a", "Z", "0", " ", "_", "\"", "\\", "/", "\u00e9",
                                                    "\u4e2d", "\n", "\t", "{", "]", "\x01"};
  std::string s;
  const int n = static_cast<int>(rng.below(20));
  for (int i = 0; i < n; ++i) s += alphabet[rng.below(alphabet.size())];
  return s;
}

Ends random_ends(Rng& rng) { return {static_cast<Pip>(rng.below(7)), static_cast<Pip>(rng.below(7))}; }

ServerMessage random_server_message(Rng& rng) {
  switch (rng.below(15)) {
    case 0: return Welcome{random_seat(rng), random_text(rng), random_text(rng)};
    case 1: {
      Seats s;
      for (Seat x : kSeats) {
        s.occupancy[x] = std::vector<std::string>{"human", "away", "ai", "empty"}[rng.below(4)];
        if (s.occupancy[x] == "ai") s.ai_levels[x] = static_cast<AiLevel>(1 + rng.below(4));
      }
      return s;
    }
    case 2: return DealMsg{random_hand(rng, 7)};
    case 3: {
      RedealMsg m{static_cast<RedealReason>(rng.below(3)), random_seat(rng)};
      if (m.reason != RedealReason::FiveDoubles) m.pip = static_cast<Pip>(rng.below(7));
      if (m.reason == RedealReason::SixOrSevenSameFace) m.shown_tiles = random_hand(rng, 7);
      return m;
    }
    case 4: return RoundStart{random_seat(rng), 1 + static_cast<int>(rng.below(30))};
    case 5: {
      Turn t{random_seat(rng), std::nullopt, static_cast<std::int64_t>(rng.below(100000))};
      if (rng.below(2)) t.ends = random_ends(rng);
      return t;
    }
    case 6: return Played{random_seat(rng), random_tile(rng), rng.below(2) ? End::Left : End::Right,
                          random_ends(rng), rng.below(2) == 1};
    case 7: return Passed{random_seat(rng), rng.below(2) == 1, rng.below(2) == 1};
    case 8: return Invalid{random_text(rng), rng.next_u64() >> 12, random_text(rng)};
    case 9: {
      RoundEnd r;
      r.outcome = static_cast<Outcome>(rng.below(4));
      if (rng.below(2)) r.seat = random_seat(rng);
      r.points = static_cast<int>(rng.below(150));
      if (rng.below(2)) r.awarded_to = static_cast<Team>(rng.below(2));
      for (Seat x : kSeats) r.revealed_hands[x] = random_hand(rng, 7);
      r.closed = rng.below(2) == 1;
      return r;
    }
    case 10: return StarterPrompt{static_cast<Team>(rng.below(2))};
    case 11: {
      MatchEnd m{{static_cast<int>(rng.below(200)), static_cast<int>(rng.below(200))}};
      if (rng.below(2)) m.winner = static_cast<Team>(rng.below(2));
      m.error = rng.below(4) == 0;
      return m;
    }
    case 12: return Pong{};
    case 13: return ErrorMsg{random_text(rng), random_text(rng)};
    default: {
      const RoundState s = testing::random_state(rng);
      FullGameView full{&s, MatchState{{static_cast<int>(rng.below(100)), 5}}, is_round_over(s)};
      return redact(full, random_seat(rng));
    }
  }
}

ClientMessage random_client_message(Rng& rng) {
  switch (rng.below(5)) {
    case 0: {
      Hello h{random_text(rng)};
      if (rng.below(2)) h.room = random_text(rng);
      if (rng.below(2)) h.token = random_text(rng);
      return h;
    }
    case 1: return MoveMsg{random_tile(rng), rng.below(2) ? End::Left : End::Right};
    case 2: return PassMsg{};
    case 3: return ChooseStarter{random_seat(rng)};
    default: return Ping{};
  }
}

TEST(FuzzTest, RoundTrip) {
  Rng rng(4242);
  for (int i = 0; i < 5000; ++i) {
    const ServerEnvelope s{1, rng.next_u64() >> 1, random_server_message(rng)};
    const std::string line = encode(s);
    ASSERT_EQ(line.back(), '\n');
    ASSERT_EQ(std::count(line.begin(), line.end(), '\n'), 1) << "one message per line";
    EXPECT_EQ(decode_server(line), s) << line;
    const ClientEnvelope c{1, rng.next_u64() >> 1, random_client_message(rng)};
    EXPECT_EQ(decode_client(encode(c)), c);
  }
}

TEST(FuzzTest, GarbageNeverCrashes) {
  Rng rng(7);
  const std::string valid = R"({"v":1,"seq":12,"type":"move","data":{"tile":[3,6],"end":"left"}})";
  for (int i = 0; i < 20000; ++i) {
    std::string line = valid;
    const int edits = 1 + static_cast<int>(rng.below(4));
    for (int k = 0; k < edits; ++k) {
      const std::size_t pos = rng.below(line.size());
      switch (rng.below(3)) {
        case 0: line[pos] = static_cast<char>(rng.below(128)); break;
        case 1: line.erase(pos, 1); break;
        default: line.insert(pos, 1, static_cast<char>(32 + rng.below(95)));
      }
    }
    try {
      decode_client(line);
    } catch (const ProtocolError&) {
    }
  }
}

TEST(FuzzTest, SeqTrackerAcceptsExactlyIncreasingSequences) {
  Rng rng(11);
  for (int trial = 0; trial < 2000; ++trial) {
    SeqTracker tracker;
    std::optional<std::uint64_t> high;
    for (int i = 0; i < 20; ++i) {
      const std::uint64_t seq = rng.below(30);
      const bool should_pass = !high || seq > *high;
      bool passed = true;
      try {
        tracker.check(seq);
      } catch (const ProtocolError& e) {
        EXPECT_EQ(e.code(), ErrorCode::Seq);
        passed = false;
      }
      ASSERT_EQ(passed, should_pass);
      if (passed) high = seq;
    }
  }
  SeqCounter counter;
  EXPECT_EQ(counter.next(), 1u);
  EXPECT_EQ(counter.next(), 2u);
}

// ---------------------------------------------------------------------------
// Redaction

TEST(RedactTest, ExampleShowsOnlyOwnHand) {
  RoundState s;
  s.round_index = 3;
  s.chain.place(Tile(2, 4), End::Left, Seat::D);
  s.hands[Seat::A] = {Tile(0, 0), Tile(0, 1), Tile(1, 1), Tile(0, 2)};
  s.hands[Seat::B] = {Tile(1, 2), Tile(2, 2), Tile(0, 3), Tile(1, 3), Tile(2, 3)};
  s.hands[Seat::C] = {Tile(3, 3), Tile(0, 4), Tile(1, 4), Tile(3, 4), Tile(4, 4), Tile(0, 5)};
  s.hands[Seat::D] = {Tile(1, 5), Tile(2, 5), Tile(3, 5), Tile(4, 5), Tile(5, 5)};
  s.to_move = Seat::B;
  const PlayerView v = redact(FullGameView{&s, MatchState{}, false}, Seat::B);
  EXPECT_EQ(v.hand, s.hands[Seat::B]);
  EXPECT_EQ(v.counts, testing::per_seat(4, 5, 6, 5));
  EXPECT_FALSE(v.revealed);
  std::vector<testing::RawTile> shown;
  testing::collect_tiles(to_data(v), shown);
  for (auto t : shown) {
    const Tile tile(t.first, t.second);
    EXPECT_TRUE(s.hands[Seat::B].contains(tile) || s.chain.tiles().contains(tile)) << to_string(tile);
  }
}

TEST(RedactTest, ViewsAgreeOnPublicState) {
  Rng rng(19);
  for (int i = 0; i < 1000; ++i) {
    const RoundState s = testing::random_state(rng);
    const bool over = is_round_over(s);
    const FullGameView full{&s, MatchState{{12, 34}}, over};
    const PlayerView a = redact(full, Seat::A);
    for (Seat x : kSeats) {
      PlayerView v = redact(full, x);
      EXPECT_EQ(v.hand, s.hands[x]);
      EXPECT_EQ(v.revealed.has_value(), over);
      // Everything except the private hand is identical across seats.
      v.hand = a.hand;
      v.seat = a.seat;
      EXPECT_EQ(v, a);
      // The JSON form only ever shows own, played or revealed tiles.
      if (!over) {
        std::vector<testing::RawTile> shown;
        testing::collect_tiles(to_data(redact(full, x)), shown);
        for (auto t : shown) {
          const Tile tile(t.first, t.second);
          EXPECT_TRUE(s.hands[x].contains(tile) || s.chain.tiles().contains(tile));
        }
      }
    }
  }
}

}  // namespace
}  // namespace domino101::protocol
