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

// Wire protocol, version 1.
//
// Every message is an envelope {"v":1,"seq":N,"type":T,"data":{...}} encoded
// as one line of UTF-8 JSON terminated by LF (TCP) or carried as one text
// frame (WebSocket). `seq` strictly increases per direction per connection.
// Unknown fields are ignored; unknown types are errors.
//
// Tiles are [lo, hi] arrays in canonical order. Chain ends are objects
// {"left":l,"right":r} so that only tiles are ever encoded as pip pairs.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "domino101/ai.hpp"
#include "domino101/errors.hpp"
#include "domino101/rules.hpp"
#include "domino101/tile.hpp"

namespace domino101::protocol {

using Json = nlohmann::ordered_json;

inline constexpr int kVersion = 1;
inline constexpr std::size_t kMaxLineBytes = 16 * 1024;
inline constexpr int kDefaultTcpPort = 7101;
inline constexpr int kDefaultWsPort = 7102;
inline constexpr const char* kWsPath = "/ws";

enum class ErrorCode {
  Malformed,
  Version,
  UnknownType,
  BadTile,
  BadField,
  Seq,
  Oversize,
};

inline std::string to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::Malformed: return "malformed";
    case ErrorCode::Version: return "version";
    case ErrorCode::UnknownType: return "unknown_type";
    case ErrorCode::BadTile: return "bad_tile";
    case ErrorCode::BadField: return "bad_field";
    case ErrorCode::Seq: return "seq";
    case ErrorCode::Oversize: return "oversize";
  }
  return "?";
}

class ProtocolError : public Error {
 public:
  ProtocolError(ErrorCode code, const std::string& what) : Error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

class EncodeError : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Client -> server

struct Hello {
  std::string name;
  std::optional<std::string> room;
  std::optional<std::string> token;
  friend bool operator==(const Hello&, const Hello&) = default;
};

struct MoveMsg {
  Tile tile;
  End end = End::Left;
  friend bool operator==(const MoveMsg&, const MoveMsg&) = default;
};

struct PassMsg {
  friend bool operator==(const PassMsg&, const PassMsg&) = default;
};

struct ChooseStarter {
  Seat seat = Seat::A;
  friend bool operator==(const ChooseStarter&, const ChooseStarter&) = default;
};

struct Ping {
  friend bool operator==(const Ping&, const Ping&) = default;
};

using ClientMessage = std::variant<Hello, MoveMsg, PassMsg, ChooseStarter, Ping>;

// ---------------------------------------------------------------------------
// Server -> client

struct Welcome {
  Seat seat = Seat::A;
  std::string room_id;
  std::string token;
  friend bool operator==(const Welcome&, const Welcome&) = default;
};

// occupancy values: "human", "away", "ai", "empty".
struct Seats {
  PerSeat<std::string> occupancy;
  std::map<Seat, AiLevel> ai_levels;
  friend bool operator==(const Seats&, const Seats&) = default;
};

struct DealMsg {
  Hand hand;
  friend bool operator==(const DealMsg&, const DealMsg&) = default;
};

struct RedealMsg {
  RedealReason reason = RedealReason::FiveDoubles;
  Seat seat = Seat::A;
  std::optional<Pip> pip;
  std::optional<TileSet> shown_tiles;
  friend bool operator==(const RedealMsg&, const RedealMsg&) = default;
};

struct RoundStart {
  Seat starter = Seat::A;
  int round_index = 1;
  friend bool operator==(const RoundStart&, const RoundStart&) = default;
};

struct Turn {
  Seat seat = Seat::A;
  std::optional<Ends> ends;  // nullopt on an empty chain
  std::int64_t deadline_ms = 0;
  friend bool operator==(const Turn&, const Turn&) = default;
};

struct Played {
  Seat seat = Seat::A;
  Tile tile;
  End end = End::Left;
  Ends new_ends;
  bool auto_move = false;
  friend bool operator==(const Played&, const Played&) = default;
};

struct Passed {
  Seat seat = Seat::A;
  bool auto_move = false;
  bool forfeit = false;  // timed-out turn conceded under the forfeit policy
  friend bool operator==(const Passed&, const Passed&) = default;
};

struct Invalid {
  std::string code;
  std::uint64_t ref_seq = 0;
  std::string message;
  friend bool operator==(const Invalid&, const Invalid&) = default;
};

struct RoundEnd {
  Outcome outcome = Outcome::DominoWin;
  std::optional<Seat> seat;
  int points = 0;
  std::optional<Team> awarded_to;
  PerSeat<Hand> revealed_hands;
  bool closed = false;
  friend bool operator==(const RoundEnd&, const RoundEnd&) = default;
};

struct StarterPrompt {
  Team team = Team::AC;
  friend bool operator==(const StarterPrompt&, const StarterPrompt&) = default;
};

struct MatchEnd {
  std::array<int, 2> scores{0, 0};
  std::optional<Team> winner;
  bool error = false;
  friend bool operator==(const MatchEnd&, const MatchEnd&) = default;
};

struct Pong {
  friend bool operator==(const Pong&, const Pong&) = default;
};

struct ErrorMsg {
  std::string code;
  std::string message;
  friend bool operator==(const ErrorMsg&, const ErrorMsg&) = default;
};

struct ChainEntry {
  Tile tile;
  Pip left = 0;
  Pip right = 0;
  Seat by = Seat::A;
  friend bool operator==(const ChainEntry&, const ChainEntry&) = default;
};

// What one seat is allowed to see of the table.
struct PlayerView {
  Seat seat = Seat::A;
  std::string phase;  // "round" or "round_end"
  int round_index = 1;
  Hand hand;
  PerSeat<int> counts;
  std::optional<PerSeat<Hand>> revealed;
  std::vector<ChainEntry> chain;
  std::optional<Ends> ends;
  Seat to_move = Seat::A;
  std::vector<Event> history;
  std::array<int, 2> scores{0, 0};
  friend bool operator==(const PlayerView&, const PlayerView&) = default;
};

using ServerMessage = std::variant<Welcome, Seats, DealMsg, RedealMsg, RoundStart, Turn, Played, Passed,
                                   Invalid, RoundEnd, StarterPrompt, MatchEnd, Pong, ErrorMsg, PlayerView>;

template <typename Message>
struct Envelope {
  int v = kVersion;
  std::uint64_t seq = 0;
  Message msg;
  friend bool operator==(const Envelope&, const Envelope&) = default;
};

using ClientEnvelope = Envelope<ClientMessage>;
using ServerEnvelope = Envelope<ServerMessage>;

// ---------------------------------------------------------------------------
// Type names

namespace detail {

template <typename T> struct TypeName;
#define DOMINO101_TYPE_NAME(T, name) \
  template <> struct TypeName<T> { static constexpr const char* value = name; }
DOMINO101_TYPE_NAME(Hello, "hello");
DOMINO101_TYPE_NAME(MoveMsg, "move");
DOMINO101_TYPE_NAME(PassMsg, "pass");
DOMINO101_TYPE_NAME(ChooseStarter, "choose_starter");
DOMINO101_TYPE_NAME(Ping, "ping");
DOMINO101_TYPE_NAME(Welcome, "welcome");
DOMINO101_TYPE_NAME(Seats, "seats");
DOMINO101_TYPE_NAME(DealMsg, "deal");
DOMINO101_TYPE_NAME(RedealMsg, "redeal");
DOMINO101_TYPE_NAME(RoundStart, "round_start");
DOMINO101_TYPE_NAME(Turn, "turn");
DOMINO101_TYPE_NAME(Played, "played");
DOMINO101_TYPE_NAME(Passed, "passed");
DOMINO101_TYPE_NAME(Invalid, "invalid");
DOMINO101_TYPE_NAME(RoundEnd, "round_end");
DOMINO101_TYPE_NAME(StarterPrompt, "starter_prompt");
DOMINO101_TYPE_NAME(MatchEnd, "match_end");
DOMINO101_TYPE_NAME(Pong, "pong");
DOMINO101_TYPE_NAME(ErrorMsg, "error");
DOMINO101_TYPE_NAME(PlayerView, "view");
#undef DOMINO101_TYPE_NAME

}  // namespace detail

template <typename Variant>
std::string type_name(const Variant& m) {
  return std::visit([](const auto& x) -> std::string { return detail::TypeName<std::decay_t<decltype(x)>>::value; }, m);
}

// ---------------------------------------------------------------------------
// Field encoding

inline Json tile_json(Tile t) { return Json::array({t.lo, t.hi}); }

inline Json tiles_json(TileSet s) {
  Json a = Json::array();
  for (Tile t : s) a.push_back(tile_json(t));
  return a;
}

inline Json ends_json(Ends e) { return Json{{"left", e.left}, {"right", e.right}}; }

inline Json hands_json(const PerSeat<Hand>& hands) {
  Json o = Json::object();
  for (Seat s : kSeats) o[to_string(s)] = tiles_json(hands[s]);
  return o;
}

inline Json scores_json(const std::array<int, 2>& s) { return Json{{"AC", s[0]}, {"BD", s[1]}}; }

inline Json event_json(const Event& e) {
  if (const auto* p = std::get_if<PlayEvent>(&e)) {
    return Json{{"type", "play"}, {"seat", to_string(p->seat)}, {"tile", tile_json(p->tile)},
                {"end", to_string(p->end)}};
  }
  const auto& pass = std::get<PassEvent>(e);
  return Json{{"type", "pass"}, {"seat", to_string(pass.seat)}, {"ends", ends_json(pass.ends_at_pass)}};
}

inline Json to_data(const Hello& m) {
  Json d{{"name", m.name}};
  if (m.room) d["room"] = *m.room;
  if (m.token) d["token"] = *m.token;
  return d;
}
inline Json to_data(const MoveMsg& m) { return Json{{"tile", tile_json(m.tile)}, {"end", to_string(m.end)}}; }
inline Json to_data(const PassMsg&) { return Json::object(); }
inline Json to_data(const ChooseStarter& m) { return Json{{"seat", to_string(m.seat)}}; }
inline Json to_data(const Ping&) { return Json::object(); }

inline Json to_data(const Welcome& m) {
  return Json{{"seat", to_string(m.seat)}, {"room_id", m.room_id}, {"token", m.token}};
}
inline Json to_data(const Seats& m) {
  Json occ = Json::object();
  for (Seat s : kSeats) occ[to_string(s)] = m.occupancy[s];
  Json levels = Json::object();
  for (const auto& [s, l] : m.ai_levels) levels[to_string(s)] = to_string(l);
  return Json{{"occupancy", occ}, {"ai_levels", levels}};
}
inline Json to_data(const DealMsg& m) { return Json{{"hand", tiles_json(m.hand)}}; }
inline Json to_data(const RedealMsg& m) {
  Json d{{"reason", to_string(m.reason)}, {"seat", to_string(m.seat)}};
  if (m.pip) d["pip"] = *m.pip;
  if (m.shown_tiles) d["shown_tiles"] = tiles_json(*m.shown_tiles);
  return d;
}
inline Json to_data(const RoundStart& m) {
  return Json{{"starter", to_string(m.starter)}, {"round_index", m.round_index}};
}
inline Json to_data(const Turn& m) {
  return Json{{"seat", to_string(m.seat)}, {"ends", m.ends ? ends_json(*m.ends) : Json(nullptr)},
              {"deadline_ms", m.deadline_ms}};
}
inline Json to_data(const Played& m) {
  Json d{{"seat", to_string(m.seat)}, {"tile", tile_json(m.tile)}, {"end", to_string(m.end)},
         {"new_ends", ends_json(m.new_ends)}};
  if (m.auto_move) d["auto"] = true;
  return d;
}
inline Json to_data(const Passed& m) {
  Json d{{"seat", to_string(m.seat)}};
  if (m.auto_move) d["auto"] = true;
  if (m.forfeit) d["forfeit"] = true;
  return d;
}
inline Json to_data(const Invalid& m) {
  return Json{{"code", m.code}, {"ref_seq", m.ref_seq}, {"message", m.message}};
}
inline Json to_data(const RoundEnd& m) {
  Json d{{"outcome", to_string(m.outcome)}};
  if (m.seat) d["seat"] = to_string(*m.seat);
  d["points"] = m.points;
  d["awarded_to"] = m.awarded_to ? Json(to_string(*m.awarded_to)) : Json(nullptr);
  d["revealed_hands"] = hands_json(m.revealed_hands);
  d["closed"] = m.closed;
  return d;
}
inline Json to_data(const StarterPrompt& m) { return Json{{"team", to_string(m.team)}}; }
inline Json to_data(const MatchEnd& m) {
  Json d{{"scores", scores_json(m.scores)},
         {"winner", m.winner ? Json(to_string(*m.winner)) : Json(nullptr)}};
  if (m.error) d["error"] = true;
  return d;
}
inline Json to_data(const Pong&) { return Json::object(); }
inline Json to_data(const ErrorMsg& m) { return Json{{"code", m.code}, {"message", m.message}}; }
inline Json to_data(const PlayerView& m) {
  Json counts = Json::object();
  for (Seat s : kSeats) counts[to_string(s)] = m.counts[s];
  Json chain = Json::array();
  for (const ChainEntry& c : m.chain) {
    chain.push_back(Json{{"tile", tile_json(c.tile)}, {"left", c.left}, {"right", c.right},
                         {"by", to_string(c.by)}});
  }
  Json history = Json::array();
  for (const Event& e : m.history) history.push_back(event_json(e));
  Json d{{"seat", to_string(m.seat)}, {"phase", m.phase}, {"round_index", m.round_index},
         {"hand", tiles_json(m.hand)}, {"counts", counts}};
  if (m.revealed) d["revealed_hands"] = hands_json(*m.revealed);
  d["chain"] = chain;
  d["ends"] = m.ends ? ends_json(*m.ends) : Json(nullptr);
  d["to_move"] = to_string(m.to_move);
  d["history"] = history;
  d["scores"] = scores_json(m.scores);
  return d;
}

// ---------------------------------------------------------------------------
// Field decoding

namespace detail {

[[noreturn]] inline void bad_field(const std::string& what) {
  throw ProtocolError(ErrorCode::BadField, what);
}

inline const Json& field(const Json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) bad_field(std::string("missing field '") + key + "'");
  return *it;
}

inline std::string get_string(const Json& obj, const char* key) {
  const Json& v = field(obj, key);
  if (!v.is_string()) bad_field(std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

inline std::optional<std::string> get_opt_string(const Json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) bad_field(std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

inline std::int64_t get_int(const Json& obj, const char* key) {
  const Json& v = field(obj, key);
  if (!v.is_number_integer()) bad_field(std::string("field '") + key + "' must be an integer");
  return v.get<std::int64_t>();
}

inline bool get_bool_or(const Json& obj, const char* key, bool fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_boolean()) bad_field(std::string("field '") + key + "' must be a boolean");
  return it->get<bool>();
}

inline Pip parse_pip(const Json& v) {
  if (!v.is_number_integer() || !valid_pip(v.get<int>())) bad_field("pip out of range");
  return v.get<int>();
}

inline Tile parse_tile(const Json& v) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number_integer() || !v[1].is_number_integer()) {
    throw ProtocolError(ErrorCode::BadTile, "tile must be [lo, hi]");
  }
  const int lo = v[0].get<int>();
  const int hi = v[1].get<int>();
  if (!valid_pip(lo) || !valid_pip(hi)) throw ProtocolError(ErrorCode::BadTile, "pip out of range");
  if (lo > hi) throw ProtocolError(ErrorCode::BadTile, "tile not in canonical lo<=hi order");
  return Tile(lo, hi);
}

inline TileSet parse_tiles(const Json& v) {
  if (!v.is_array()) bad_field("tile list must be an array");
  TileSet s;
  for (const Json& t : v) {
    const Tile tile = parse_tile(t);
    if (s.contains(tile)) bad_field("duplicate tile " + to_string(tile));
    s.insert(tile);
  }
  return s;
}

inline Seat parse_seat_field(const Json& obj, const char* key) {
  const auto s = parse_seat(get_string(obj, key));
  if (!s) bad_field(std::string("field '") + key + "' must be a seat A-D");
  return *s;
}

inline std::optional<Seat> parse_opt_seat(const Json& obj, const char* key) {
  const auto s = get_opt_string(obj, key);
  if (!s) return std::nullopt;
  const auto seat = parse_seat(*s);
  if (!seat) bad_field(std::string("field '") + key + "' must be a seat A-D");
  return seat;
}

inline std::optional<Team> parse_opt_team(const Json& obj, const char* key) {
  const auto s = get_opt_string(obj, key);
  if (!s) return std::nullopt;
  const auto team = parse_team(*s);
  if (!team) bad_field(std::string("field '") + key + "' must be AC or BD");
  return team;
}

inline End parse_end(const Json& obj, const char* key) {
  const std::string s = get_string(obj, key);
  if (s == "left") return End::Left;
  if (s == "right") return End::Right;
  bad_field(std::string("field '") + key + "' must be left or right");
}

inline Ends parse_ends(const Json& v) {
  if (!v.is_object()) bad_field("ends must be an object");
  return Ends{parse_pip(field(v, "left")), parse_pip(field(v, "right"))};
}

inline std::optional<Ends> parse_opt_ends(const Json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  return parse_ends(*it);
}

inline PerSeat<Hand> parse_hands(const Json& v) {
  if (!v.is_object()) bad_field("hands must be an object");
  PerSeat<Hand> hands;
  for (Seat s : kSeats) hands[s] = parse_tiles(field(v, to_string(s).c_str()));
  return hands;
}

inline std::array<int, 2> parse_scores(const Json& v) {
  if (!v.is_object()) bad_field("scores must be an object");
  return {static_cast<int>(get_int(v, "AC")), static_cast<int>(get_int(v, "BD"))};
}

inline Event parse_event(const Json& v) {
  if (!v.is_object()) bad_field("history entry must be an object");
  const std::string type = get_string(v, "type");
  if (type == "play") return PlayEvent{parse_seat_field(v, "seat"), parse_tile(field(v, "tile")), parse_end(v, "end")};
  if (type == "pass") return PassEvent{parse_seat_field(v, "seat"), parse_ends(field(v, "ends"))};
  bad_field("unknown history entry type '" + type + "'");
}

template <typename T> T from_data(const Json& d);

template <> inline Hello from_data<Hello>(const Json& d) {
  return Hello{get_string(d, "name"), get_opt_string(d, "room"), get_opt_string(d, "token")};
}
template <> inline MoveMsg from_data<MoveMsg>(const Json& d) {
  return MoveMsg{parse_tile(field(d, "tile")), parse_end(d, "end")};
}
template <> inline PassMsg from_data<PassMsg>(const Json&) { return {}; }
template <> inline ChooseStarter from_data<ChooseStarter>(const Json& d) {
  return ChooseStarter{parse_seat_field(d, "seat")};
}
template <> inline Ping from_data<Ping>(const Json&) { return {}; }

template <> inline Welcome from_data<Welcome>(const Json& d) {
  return Welcome{parse_seat_field(d, "seat"), get_string(d, "room_id"), get_string(d, "token")};
}
template <> inline Seats from_data<Seats>(const Json& d) {
  Seats m;
  const Json& occ = field(d, "occupancy");
  if (!occ.is_object()) bad_field("occupancy must be an object");
  for (Seat s : kSeats) m.occupancy[s] = get_string(occ, to_string(s).c_str());
  const Json& levels = field(d, "ai_levels");
  if (!levels.is_object()) bad_field("ai_levels must be an object");
  for (auto it = levels.begin(); it != levels.end(); ++it) {
    const auto seat = parse_seat(it.key());
    const auto level = it->is_string() ? parse_level(it->get<std::string>()) : std::nullopt;
    if (!seat || !level) bad_field("bad ai_levels entry");
    m.ai_levels[*seat] = *level;
  }
  return m;
}
template <> inline DealMsg from_data<DealMsg>(const Json& d) { return DealMsg{parse_tiles(field(d, "hand"))}; }
template <> inline RedealMsg from_data<RedealMsg>(const Json& d) {
  RedealMsg m;
  const auto reason = parse_redeal_reason(get_string(d, "reason"));
  if (!reason) bad_field("unknown redeal reason");
  m.reason = *reason;
  m.seat = parse_seat_field(d, "seat");
  if (auto it = d.find("pip"); it != d.end() && !it->is_null()) m.pip = parse_pip(*it);
  if (auto it = d.find("shown_tiles"); it != d.end() && !it->is_null()) m.shown_tiles = parse_tiles(*it);
  return m;
}
template <> inline RoundStart from_data<RoundStart>(const Json& d) {
  return RoundStart{parse_seat_field(d, "starter"), static_cast<int>(get_int(d, "round_index"))};
}
template <> inline Turn from_data<Turn>(const Json& d) {
  return Turn{parse_seat_field(d, "seat"), parse_opt_ends(d, "ends"), get_int(d, "deadline_ms")};
}
template <> inline Played from_data<Played>(const Json& d) {
  return Played{parse_seat_field(d, "seat"), parse_tile(field(d, "tile")), parse_end(d, "end"),
                parse_ends(field(d, "new_ends")), get_bool_or(d, "auto", false)};
}
template <> inline Passed from_data<Passed>(const Json& d) {
  return Passed{parse_seat_field(d, "seat"), get_bool_or(d, "auto", false), get_bool_or(d, "forfeit", false)};
}
template <> inline Invalid from_data<Invalid>(const Json& d) {
  return Invalid{get_string(d, "code"), static_cast<std::uint64_t>(get_int(d, "ref_seq")),
                 get_string(d, "message")};
}
template <> inline RoundEnd from_data<RoundEnd>(const Json& d) {
  RoundEnd m;
  const auto outcome = parse_outcome(get_string(d, "outcome"));
  if (!outcome) bad_field("unknown outcome");
  m.outcome = *outcome;
  m.seat = parse_opt_seat(d, "seat");
  m.points = static_cast<int>(get_int(d, "points"));
  m.awarded_to = parse_opt_team(d, "awarded_to");
  m.revealed_hands = parse_hands(field(d, "revealed_hands"));
  m.closed = get_bool_or(d, "closed", false);
  return m;
}
template <> inline StarterPrompt from_data<StarterPrompt>(const Json& d) {
  const auto team = parse_team(get_string(d, "team"));
  if (!team) bad_field("team must be AC or BD");
  return StarterPrompt{*team};
}
template <> inline MatchEnd from_data<MatchEnd>(const Json& d) {
  return MatchEnd{parse_scores(field(d, "scores")), parse_opt_team(d, "winner"), get_bool_or(d, "error", false)};
}
template <> inline Pong from_data<Pong>(const Json&) { return {}; }
template <> inline ErrorMsg from_data<ErrorMsg>(const Json& d) {
  return ErrorMsg{get_string(d, "code"), get_string(d, "message")};
}
template <> inline PlayerView from_data<PlayerView>(const Json& d) {
  PlayerView v;
  v.seat = parse_seat_field(d, "seat");
  v.phase = get_string(d, "phase");
  v.round_index = static_cast<int>(get_int(d, "round_index"));
  v.hand = parse_tiles(field(d, "hand"));
  const Json& counts = field(d, "counts");
  if (!counts.is_object()) bad_field("counts must be an object");
  for (Seat s : kSeats) v.counts[s] = static_cast<int>(get_int(counts, to_string(s).c_str()));
  if (auto it = d.find("revealed_hands"); it != d.end() && !it->is_null()) v.revealed = parse_hands(*it);
  const Json& chain = field(d, "chain");
  if (!chain.is_array()) bad_field("chain must be an array");
  for (const Json& c : chain) {
    v.chain.push_back(ChainEntry{parse_tile(field(c, "tile")), parse_pip(field(c, "left")),
                                 parse_pip(field(c, "right")), parse_seat_field(c, "by")});
  }
  v.ends = parse_opt_ends(d, "ends");
  v.to_move = parse_seat_field(d, "to_move");
  const Json& history = field(d, "history");
  if (!history.is_array()) bad_field("history must be an array");
  for (const Json& e : history) v.history.push_back(parse_event(e));
  v.scores = parse_scores(field(d, "scores"));
  return v;
}

template <typename Variant, std::size_t I = 0>
Variant decode_by_name(const std::string& type, const Json& data) {
  if constexpr (I == std::variant_size_v<Variant>) {
    throw ProtocolError(ErrorCode::UnknownType, "unknown message type '" + type + "'");
  } else {
    using T = std::variant_alternative_t<I, Variant>;
    if (type == TypeName<T>::value) return Variant(std::in_place_index<I>, from_data<T>(data));
    return decode_by_name<Variant, I + 1>(type, data);
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Envelope encode / decode

template <typename Message>
Json envelope_json(const Envelope<Message>& env) {
  Json data = std::visit([](const auto& m) { return to_data(m); }, env.msg);
  return Json{{"v", env.v}, {"seq", env.seq}, {"type", type_name(env.msg)}, {"data", std::move(data)}};
}

// One LF-terminated line.
template <typename Message>
std::string encode(const Envelope<Message>& env) {
  // Invalid UTF-8 in a text field is replaced rather than aborting the
  // whole message.
  std::string line = envelope_json(env).dump(-1, ' ', false, Json::error_handler_t::replace);
  line.push_back('\n');
  if (line.size() > kMaxLineBytes) {
    throw EncodeError("encoded " + type_name(env.msg) + " is " + std::to_string(line.size()) +
                      " bytes (limit " + std::to_string(kMaxLineBytes) + ")");
  }
  return line;
}

inline Json parse_line(std::string_view line) {
  if (line.size() > kMaxLineBytes) throw ProtocolError(ErrorCode::Oversize, "line exceeds 16 KiB");
  if (!line.empty() && line.back() == '\n') line.remove_suffix(1);
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  Json j = Json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw ProtocolError(ErrorCode::Malformed, "line is not a JSON object");
  return j;
}

template <typename Variant>
Envelope<Variant> decode_json(const Json& j) {
  auto v = j.find("v");
  if (v == j.end() || !v->is_number_integer()) throw ProtocolError(ErrorCode::Malformed, "missing version");
  if (v->get<int>() != kVersion) {
    throw ProtocolError(ErrorCode::Version, "unsupported protocol version " + v->dump());
  }
  auto seq = j.find("seq");
  if (seq == j.end() || !seq->is_number_unsigned()) throw ProtocolError(ErrorCode::Malformed, "missing seq");
  auto type = j.find("type");
  if (type == j.end() || !type->is_string()) throw ProtocolError(ErrorCode::Malformed, "missing type");
  auto data = j.find("data");
  static const Json kEmpty = Json::object();
  const Json& payload = data == j.end() ? kEmpty : *data;
  if (!payload.is_object()) throw ProtocolError(ErrorCode::Malformed, "data must be an object");
  return Envelope<Variant>{kVersion, seq->get<std::uint64_t>(),
                           detail::decode_by_name<Variant>(type->get<std::string>(), payload)};
}

inline ClientEnvelope decode_client(std::string_view line) { return decode_json<ClientMessage>(parse_line(line)); }
inline ServerEnvelope decode_server(std::string_view line) { return decode_json<ServerMessage>(parse_line(line)); }

// Enforces strictly increasing seq on one direction of one connection.
class SeqTracker {
 public:
  void check(std::uint64_t seq) {
    if (last_ && seq <= *last_) {
      throw ProtocolError(ErrorCode::Seq, "seq " + std::to_string(seq) + " does not follow " +
                                              std::to_string(*last_));
    }
    last_ = seq;
  }
  std::optional<std::uint64_t> last() const { return last_; }

 private:
  std::optional<std::uint64_t> last_;
};

// Stamps outgoing envelopes with consecutive sequence numbers.
class SeqCounter {
 public:
  std::uint64_t next() { return ++last_; }

 private:
  std::uint64_t last_ = 0;
};

// ---------------------------------------------------------------------------
// Redaction

struct FullGameView {
  const RoundState* round = nullptr;  // nullptr before the first deal
  MatchState match;
  bool round_over = false;
};

inline PlayerView redact(const FullGameView& full, Seat seat) {
  PlayerView v;
  v.seat = seat;
  v.scores = full.match.score;
  v.round_index = full.round ? full.round->round_index : full.match.round_index;
  v.phase = full.round_over ? "round_end" : "round";
  if (!full.round) return v;
  const RoundState& r = *full.round;
  v.hand = r.hands[seat];
  for (Seat s : kSeats) v.counts[s] = r.hands[s].size();
  if (full.round_over) v.revealed = r.hands;
  for (const PlacedTile& p : r.chain.placed()) v.chain.push_back(ChainEntry{p.tile, p.left, p.right, p.by});
  if (!r.chain.empty()) v.ends = r.chain.ends();
  v.to_move = r.to_move;
  v.history = r.history;
  return v;
}

}  // namespace domino101::protocol
