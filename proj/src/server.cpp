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

#include "domino101/server.hpp"

#include <sys/socket.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <random>
#include <regex>
#include <stdexcept>
#include <thread>
#include <variant>
#include <vector>

#include "domino101/net.hpp"
#include "domino101/table.hpp"
#include "domino101/transcript.hpp"

namespace domino101::server {

std::string to_string(TimeoutPolicy p) { return p == TimeoutPolicy::AutoMove ? "auto" : "forfeit"; }

std::optional<TimeoutPolicy> parse_timeout_policy(std::string_view s) {
  if (s == "auto") return TimeoutPolicy::AutoMove;
  if (s == "forfeit") return TimeoutPolicy::Forfeit;
  return std::nullopt;
}

void RoomConfig::validate() const {
  if (move_timeout_ms < kMinMoveTimeoutMs) {
    throw std::invalid_argument("move timeout must be at least " + std::to_string(kMinMoveTimeoutMs) + " ms");
  }
  if (humans < 1 || humans > 4) throw std::invalid_argument("humans must be between 1 and 4");
  if (grace_ms < 0) throw std::invalid_argument("grace period must not be negative");
}

protocol::Json RoomConfig::to_json() const {
  return protocol::Json{{"move_timeout_ms", move_timeout_ms}, {"pass_mode", domino101::to_string(pass_mode)},
                        {"ai_fill_level", domino101::to_string(ai_fill)}, {"humans", humans},
                        {"grace_ms", grace_ms}, {"timeout_policy", to_string(timeout_policy)}};
}

void ServerConfig::validate() const {
  room.validate();
  if (tcp_port < 0 || tcp_port > 65535) throw std::invalid_argument("TCP port out of range");
  if (ws_port < -1 || ws_port > 65535) throw std::invalid_argument("WebSocket port out of range");
}

namespace {

using Clock = std::chrono::steady_clock;
using protocol::Json;
namespace fs = std::filesystem;

std::string file_stamp() {
  // 2026-10-16T12:03:04.123Z -> 20261016T120304.123Z
  std::string s = rfc3339_now();
  s.erase(std::remove_if(s.begin(), s.end(), [](char c) { return c == '-' || c == ':'; }), s.end());
  return s;
}

std::uint64_t entropy_seed() {
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

std::string random_token() {
  std::random_device rd;
  static constexpr char kHex[] = "0123456789abcdef";
  std::string t;
  for (int i = 0; i < 32; ++i) t.push_back(kHex[rd() % 16]);
  return t;
}

// ---------------------------------------------------------------------------
// Connection: a transport plus an outbound queue drained by a writer thread,
// which stamps the per-connection sequence numbers.

class Room;

class Connection {
 public:
  Connection(std::uint64_t id, int fd) : id_(id), fd_(fd) {}

  std::uint64_t id() const { return id_; }

  void attach(std::unique_ptr<net::Transport> t) {
    transport_ = std::move(t);
    writer_ = std::thread([this] { write_loop(); });
  }

  void send(protocol::ServerMessage m) {
    std::lock_guard lock(mu_);
    if (closing_) return;
    queue_.push_back(std::move(m));
    cv_.notify_one();
  }

  // Delivers what is queued, then closes the socket.
  void close_after_flush() {
    std::lock_guard lock(mu_);
    closing_ = true;
    cv_.notify_one();
  }

  void kill() {
    close_after_flush();
    ::shutdown(fd_, SHUT_RDWR);
  }

  void join_writer() {
    if (writer_.joinable()) writer_.join();
  }

  net::Transport& transport() { return *transport_; }

  std::shared_ptr<Room> room;  // touched by the reader thread only

 private:
  void write_loop() {
    protocol::SeqCounter seq;
    while (true) {
      std::unique_lock lock(mu_);
      cv_.wait(lock, [&] { return !queue_.empty() || closing_; });
      if (queue_.empty()) break;
      protocol::ServerMessage m = std::move(queue_.front());
      queue_.pop_front();
      lock.unlock();
      std::string line;
      try {
        line = protocol::encode(protocol::ServerEnvelope{protocol::kVersion, seq.next(), std::move(m)});
      } catch (const protocol::EncodeError&) {
        continue;
      }
      if (!transport_->write_message(line)) {
        std::lock_guard relock(mu_);
        closing_ = true;
        queue_.clear();
        break;
      }
    }
    transport_->shutdown();
  }

  std::uint64_t id_;
  int fd_;
  std::unique_ptr<net::Transport> transport_;
  std::thread writer_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<protocol::ServerMessage> queue_;
  bool closing_ = false;
};

// ---------------------------------------------------------------------------
// Scoreboard: one JSON file per log directory, replaced atomically.

class Scoreboard {
 public:
  explicit Scoreboard(fs::path path) : path_(std::move(path)) {}

  void record(Json entry) {
    std::lock_guard lock(mu_);
    Json board = Json{{"matches", Json::array()}};
    if (std::ifstream in(path_); in) {
      Json existing = Json::parse(in, nullptr, false);
      if (!existing.is_discarded() && existing.is_object() && existing.contains("matches") &&
          existing["matches"].is_array()) {
        board = std::move(existing);
      }
    }
    board["matches"].push_back(std::move(entry));
    const fs::path tmp = path_.string() + ".tmp";
    {
      std::ofstream out(tmp, std::ios::trunc);
      out << board.dump(2) << "\n";
      out.flush();
      if (!out) throw std::runtime_error("cannot write " + tmp.string());
    }
    fs::rename(tmp, path_);
  }

 private:
  fs::path path_;
  std::mutex mu_;
};

// ---------------------------------------------------------------------------
// Room

struct JoinEvent {
  std::shared_ptr<Connection> conn;
  protocol::Hello hello;
};
struct InboundEvent {
  std::shared_ptr<Connection> conn;
  protocol::ClientEnvelope env;
};
struct FaultEvent {
  std::shared_ptr<Connection> conn;
  protocol::ErrorCode code;
  std::string message;
};
struct GoneEvent {
  std::shared_ptr<Connection> conn;
};
struct StopEvent {};
using RoomEvent = std::variant<JoinEvent, InboundEvent, FaultEvent, GoneEvent, StopEvent>;

class LogFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Room {
 public:
  Room(std::string id, std::uint64_t seed, RoomConfig config, const fs::path& log_dir, Scoreboard& board,
       std::function<void()> on_match_end)
      : id_(std::move(id)),
        seed_(seed),
        config_(config),
        log_dir_(log_dir),
        board_(board),
        on_match_end_(std::move(on_match_end)),
        auto_rng_(derive_seed(seed, 2)) {
    const fs::path dir = log_dir / id_;
    fs::create_directories(dir);
    log_path_ = dir / (file_stamp() + ".jsonl");
    for (int n = 1; fs::exists(log_path_); ++n) log_path_ = dir / (file_stamp() + "-" + std::to_string(n) + ".jsonl");
    file_.open(log_path_, std::ios::out | std::ios::trunc);
    if (!file_) throw std::runtime_error("cannot open log " + log_path_.string());
    log_.emplace(
        [this](const std::string& line) {
          file_ << line;
          file_.flush();
          if (!file_) throw LogFailure("log write failed: " + log_path_.string());
        },
        true);
    Json cfg = config_.to_json();
    cfg["room_id"] = id_;
    log_->header(seed_, std::move(cfg));
  }

  ~Room() {
    if (thread_.joinable()) thread_.join();
  }

  void start() {
    thread_ = std::thread([this] { run(); });
  }

  void join() {
    if (thread_.joinable()) thread_.join();
  }

  // False once the room thread has exited; the event is dropped.
  bool post(RoomEvent e) {
    std::lock_guard lock(mu_);
    if (finished_) return false;
    inbox_.push_back(std::move(e));
    cv_.notify_one();
    return true;
  }

  // The room thread has exited (match over, halted or shut down); a new
  // hello for this name opens a new room.
  bool finished() const { return finished_; }

 private:
  struct Slot {
    enum class Kind { Empty, Human, Away, Ai } kind = Kind::Empty;
    std::shared_ptr<Connection> conn;
    std::string token;
    std::string name;
    Clock::time_point grace_until;
    std::optional<AiPlayer> ai;
  };

  void run() {
    try {
      while (!done_) {
        RoomEvent e;
        if (wait_event(e)) std::visit([&](auto& ev) { handle(ev); }, e);
        fire_deadlines();
        advance();
      }
    } catch (const std::exception& e) {
      halt(e.what());
    }
    for (Seat s : kSeats) {
      if (slots_[s].conn) slots_[s].conn->close_after_flush();
      slots_[s].conn.reset();
    }
    std::lock_guard lock(mu_);
    inbox_.clear();
    finished_ = true;
  }

  bool wait_event(RoomEvent& out) {
    std::unique_lock lock(mu_);
    const auto ready = [&] { return !inbox_.empty(); };
    if (const auto deadline = next_deadline()) {
      cv_.wait_until(lock, *deadline, ready);
    } else {
      cv_.wait(lock, ready);
    }
    if (inbox_.empty()) return false;
    out = std::move(inbox_.front());
    inbox_.pop_front();
    return true;
  }

  std::optional<Clock::time_point> next_deadline() const {
    std::optional<Clock::time_point> d = move_deadline_;
    const auto consider = [&](Clock::time_point t) {
      if (!d || t < *d) d = t;
    };
    if (prompt_deadline_) consider(*prompt_deadline_);
    for (Seat s : kSeats) {
      if (slots_[s].kind == Slot::Kind::Away) consider(slots_[s].grace_until);
    }
    return d;
  }

  // ---- output

  void dispatch(std::optional<Seat> to, const protocol::ServerMessage& msg, bool resync = false) {
    log_->out(to, msg, resync);  // write-ahead: nothing leaves unlogged
    if (to) {
      deliver(*to, msg);
    } else {
      for (Seat s : kSeats) deliver(s, msg);
    }
  }

  void deliver(Seat s, const protocol::ServerMessage& msg) {
    if (slots_[s].kind == Slot::Kind::Human && slots_[s].conn) slots_[s].conn->send(msg);
  }

  void reject(const std::shared_ptr<Connection>& conn, const std::string& code, const std::string& message) {
    log_->sys("rejected", Json{{"code", code}, {"message", message}});
    conn->send(protocol::ErrorMsg{code, message});
    conn->close_after_flush();
  }

  protocol::Seats seats_message() const {
    protocol::Seats m;
    for (Seat s : kSeats) {
      switch (slots_[s].kind) {
        case Slot::Kind::Empty: m.occupancy[s] = "empty"; break;
        case Slot::Kind::Human: m.occupancy[s] = "human"; break;
        case Slot::Kind::Away: m.occupancy[s] = "away"; break;
        case Slot::Kind::Ai:
          m.occupancy[s] = "ai";
          m.ai_levels[s] = slots_[s].ai->level();
          break;
      }
    }
    return m;
  }

  std::optional<Seat> seat_of(const std::shared_ptr<Connection>& conn) const {
    for (Seat s : kSeats) {
      if (slots_[s].conn == conn) return s;
    }
    return std::nullopt;
  }

  // ---- events

  void handle(JoinEvent& e) {
    if (e.hello.token) {
      for (Seat s : kSeats) {
        Slot& slot = slots_[s];
        if (slot.token.empty() || slot.token != *e.hello.token) continue;
        if (slot.kind != Slot::Kind::Human && slot.kind != Slot::Kind::Away) break;
        if (slot.conn) {
          // The seat moves to the newer connection.
          slot.conn->send(protocol::ErrorMsg{"replaced", "seat taken over by a newer connection"});
          slot.conn->close_after_flush();
        }
        slot.conn = e.conn;
        slot.kind = Slot::Kind::Human;
        log_->sys("reconnect", Json::object(), s);
        dispatch(s, protocol::Welcome{s, id_, slot.token});
        dispatch(std::nullopt, seats_message());
        resync(s);
        return;
      }
      reject(e.conn, "auth", "unknown or expired reconnection token");
      return;
    }
    if (table_ || humans_seated() >= config_.humans) {
      reject(e.conn, "full", "room " + id_ + " is full");
      return;
    }
    Seat seat = Seat::A;
    for (Seat s : kSeats) {
      if (slots_[s].kind == Slot::Kind::Empty) {
        seat = s;
        break;
      }
    }
    Slot& slot = slots_[seat];
    slot.kind = Slot::Kind::Human;
    slot.conn = e.conn;
    slot.name = e.hello.name;
    slot.token = random_token();
    log_->sys("join", Json{{"name", slot.name}}, seat);
    dispatch(seat, protocol::Welcome{seat, id_, slot.token});
    dispatch(std::nullopt, seats_message());
    if (humans_seated() == config_.humans) start_match();
  }

  void handle(InboundEvent& e) {
    const auto seat = seat_of(e.conn);
    if (!seat) return;  // replaced or rejected connection
    const Seat s = *seat;
    log_->in(s, e.env);
    std::visit(
        [&](const auto& m) {
          using T = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<T, protocol::Ping>) {
            dispatch(s, protocol::Pong{});
          } else if constexpr (std::is_same_v<T, protocol::Hello>) {
            dispatch(s, protocol::Invalid{"already_joined", e.env.seq, "this connection already holds a seat"});
          } else if constexpr (std::is_same_v<T, protocol::MoveMsg>) {
            human_move(s, Move::play(m.tile, m.end), e.env.seq);
          } else if constexpr (std::is_same_v<T, protocol::PassMsg>) {
            human_move(s, Move::make_pass(), e.env.seq);
          } else if constexpr (std::is_same_v<T, protocol::ChooseStarter>) {
            human_choose(s, m.seat, e.env.seq);
          }
        },
        e.env.msg);
  }

  void handle(FaultEvent& e) {
    // Closing happens here rather than in the reader so that replies to
    // earlier events from this connection are still delivered.
    const bool fatal = e.code == protocol::ErrorCode::Version;
    const auto seat = seat_of(e.conn);
    if (!seat) {
      e.conn->send(protocol::ErrorMsg{protocol::to_string(e.code), e.message});
    } else {
      log_->sys("protocol_error", Json{{"code", protocol::to_string(e.code)}, {"message", e.message}}, *seat);
      dispatch(*seat, protocol::ErrorMsg{protocol::to_string(e.code), e.message});
    }
    if (fatal) e.conn->close_after_flush();
  }

  void handle(GoneEvent& e) {
    const auto seat = seat_of(e.conn);
    if (!seat) return;
    Slot& slot = slots_[*seat];
    slot.conn.reset();
    if (!table_) {
      log_->sys("leave", Json::object(), *seat);
      slot = Slot{};
    } else {
      slot.kind = Slot::Kind::Away;
      slot.grace_until = Clock::now() + std::chrono::milliseconds(config_.grace_ms);
      log_->sys("disconnect", Json{{"grace_ms", config_.grace_ms}}, *seat);
    }
    dispatch(std::nullopt, seats_message());
  }

  void handle(StopEvent&) {
    log_->sys("shutdown", Json::object());
    for (Seat s : kSeats) deliver(s, protocol::ErrorMsg{"shutdown", "server is shutting down"});
    done_ = true;
  }

  // ---- game flow

  int humans_seated() const {
    int n = 0;
    for (Seat s : kSeats) n += slots_[s].kind == Slot::Kind::Human || slots_[s].kind == Slot::Kind::Away;
    return n;
  }

  AiPlayer make_ai(Seat s) const { return AiPlayer(s, config_.ai_fill, derive_seed(seed_, 10 + idx(s))); }

  void start_match() {
    for (Seat s : kSeats) {
      if (slots_[s].kind == Slot::Kind::Empty) {
        slots_[s].kind = Slot::Kind::Ai;
        slots_[s].ai.emplace(make_ai(s));
      }
    }
    log_->sys("match_start", Json{{"seats", protocol::to_data(seats_message())}});
    dispatch(std::nullopt, seats_message());
    table_.emplace(derive_seed(seed_, 1), config_.pass_mode, [this](const Outgoing& o) { dispatch(o.to, o.msg); });
    table_->start();
  }

  bool is_human(Seat s) const {
    return slots_[s].kind == Slot::Kind::Human || slots_[s].kind == Slot::Kind::Away;
  }

  void advance() {
    while (table_ && !done_) {
      switch (table_->phase()) {
        case TablePhase::NotStarted:
          return;
        case TablePhase::MatchOver:
          finish_match();
          return;
        case TablePhase::StarterChoice: {
          if (prompted_) return;
          const StarterRight right = table_->starter_right();
          std::optional<Seat> chooser;
          if (is_human(right.anchor)) {
            chooser = right.anchor;
          } else if (is_human(partner(right.anchor))) {
            chooser = partner(right.anchor);
          }
          if (chooser) {
            prompted_ = chooser;
            prompt_deadline_ = Clock::now() + std::chrono::milliseconds(config_.move_timeout_ms);
            dispatch(*chooser, protocol::StarterPrompt{right.team});
            return;
          }
          table_->choose_starter(choose_starter(right.team, table_->dealt()));
          continue;
        }
        case TablePhase::Turn: {
          const Seat s = table_->to_move();
          if (slots_[s].kind == Slot::Kind::Ai) {
            awaiting_ = false;
            move_deadline_.reset();
            table_->submit(s, slots_[s].ai->decide(table_->round()));
            continue;
          }
          if (awaiting_) return;
          awaiting_ = true;
          move_deadline_ = Clock::now() + std::chrono::milliseconds(config_.move_timeout_ms);
          dispatch(std::nullopt, turn_message(s, config_.move_timeout_ms));
          return;
        }
      }
    }
  }

  protocol::Turn turn_message(Seat s, std::int64_t ms) const {
    protocol::Turn t{s, std::nullopt, ms};
    if (!table_->round().chain.empty()) t.ends = table_->round().chain.ends();
    return t;
  }

  void human_move(Seat s, const Move& m, std::uint64_t ref) {
    if (!table_ || table_->phase() != TablePhase::Turn || table_->to_move() != s) {
      dispatch(s, protocol::Invalid{"turn", ref, "it is not your turn"});
      return;
    }
    try {
      table_->submit(s, m);
    } catch (const IllegalPass& e) {
      dispatch(s, protocol::Invalid{"illegal_pass", ref, e.what()});
      return;
    } catch (const IllegalMove& e) {
      dispatch(s, protocol::Invalid{"illegal_move", ref, e.what()});
      return;
    } catch (const TurnError& e) {
      dispatch(s, protocol::Invalid{"turn", ref, e.what()});
      return;
    }
    awaiting_ = false;
    move_deadline_.reset();
  }

  void human_choose(Seat s, Seat starter, std::uint64_t ref) {
    if (!table_ || table_->phase() != TablePhase::StarterChoice || prompted_ != s) {
      dispatch(s, protocol::Invalid{"not_prompted", ref, "no starter choice is pending for you"});
      return;
    }
    if (team_of(starter) != table_->starter_right().team) {
      dispatch(s, protocol::Invalid{"bad_starter", ref, "starter must belong to the entitled team"});
      return;
    }
    prompted_.reset();
    prompt_deadline_.reset();
    table_->choose_starter(starter);
  }

  void fire_deadlines() {
    const auto now = Clock::now();
    for (Seat s : kSeats) {
      Slot& slot = slots_[s];
      if (slot.kind != Slot::Kind::Away || slot.grace_until > now) continue;
      slot.kind = Slot::Kind::Ai;
      slot.token.clear();
      slot.ai.emplace(make_ai(s));
      log_->sys("ai_takeover", Json{{"level", domino101::to_string(config_.ai_fill)}}, s);
      dispatch(std::nullopt, seats_message());
    }
    if (!table_) return;
    if (move_deadline_ && *move_deadline_ <= now) {
      move_deadline_.reset();
      awaiting_ = false;
      if (table_->phase() == TablePhase::Turn) {
        const Seat s = table_->to_move();
        log_->sys("timeout", Json{{"policy", to_string(config_.timeout_policy)}}, s);
        if (config_.timeout_policy == TimeoutPolicy::AutoMove) {
          table_->submit(s, choose_move_l1(table_->round(), s, auto_rng_), true);
        } else {
          table_->concede(s);
        }
      }
    }
    if (prompt_deadline_ && *prompt_deadline_ <= now) {
      prompt_deadline_.reset();
      if (prompted_ && table_->phase() == TablePhase::StarterChoice) {
        log_->sys("starter_timeout", Json::object(), *prompted_);
        prompted_.reset();
        table_->choose_starter(choose_starter(table_->starter_right().team, table_->dealt()));
      }
    }
  }

  // Brings a returning player up to date. Copies are flagged so replay
  // ignores them.
  void resync(Seat s) {
    if (!table_) return;
    dispatch(s, protocol::redact(table_->view(), s), true);
    if (table_->phase() == TablePhase::StarterChoice) {
      dispatch(s, protocol::DealMsg{table_->dealt()[s]}, true);
      if (prompted_ == s) dispatch(s, protocol::StarterPrompt{table_->starter_right().team}, true);
    } else if (table_->phase() == TablePhase::Turn && awaiting_ && table_->to_move() == s && move_deadline_) {
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(*move_deadline_ - Clock::now());
      dispatch(s, turn_message(s, std::max<std::int64_t>(0, left.count())), true);
    }
  }

  void finish_match() {
    const MatchState& m = table_->match();
    const auto winner = m.winner();
    board_.record(Json{{"room_id", id_},
                       {"log", fs::relative(log_path_, log_dir_).generic_string()},
                       {"finished_at", rfc3339_now()},
                       {"seed", seed_},
                       {"scores", protocol::scores_json(m.score)},
                       {"winner", winner ? Json(domino101::to_string(*winner)) : Json(nullptr)},
                       {"rounds", m.round_index - 1}});
    done_ = true;
    on_match_end_();
  }

  // Unrecoverable error: tell everyone, end the match flagged as an error
  // if the log still accepts records, and stop.
  void halt(const std::string& reason) {
    done_ = true;
    bool log_ok = true;
    try {
      log_->sys("room_error", Json{{"message", reason}});
    } catch (const std::exception&) {
      log_ok = false;
    }
    const MatchState match = table_ ? table_->match() : MatchState{};
    const protocol::MatchEnd end{match.score, match.winner(), true};
    for (Seat s : kSeats) {
      if (slots_[s].kind != Slot::Kind::Human || !slots_[s].conn) continue;
      slots_[s].conn->send(protocol::ErrorMsg{"room_error", reason});
    }
    if (table_ && table_->phase() != TablePhase::MatchOver) {
      if (log_ok) {
        try {
          log_->out(std::nullopt, end);
        } catch (const std::exception&) {
        }
      }
      for (Seat s : kSeats) deliver(s, end);
    }
  }

  const std::string id_;
  const std::uint64_t seed_;
  const RoomConfig config_;
  const fs::path log_dir_;
  Scoreboard& board_;
  std::function<void()> on_match_end_;

  fs::path log_path_;
  std::ofstream file_;
  std::optional<Transcript> log_;

  std::thread thread_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<RoomEvent> inbox_;
  std::atomic<bool> finished_{false};

  // Owned by the room thread.
  bool done_ = false;
  PerSeat<Slot> slots_;
  std::optional<Table> table_;
  Rng auto_rng_;
  bool awaiting_ = false;
  std::optional<Clock::time_point> move_deadline_;
  std::optional<Seat> prompted_;
  std::optional<Clock::time_point> prompt_deadline_;
};

bool valid_room_name(const std::string& name) {
  static const std::regex kPattern("[A-Za-z0-9_-]{1,64}");
  return std::regex_match(name, kPattern);
}

}  // namespace

// ---------------------------------------------------------------------------
// Server

struct Server::Impl {
  explicit Impl(ServerConfig c) : config(std::move(c)), board(fs::path(config.log_dir) / "scoreboard.json") {}

  struct ConnThread {
    std::shared_ptr<Connection> conn;
    std::thread thread;
    std::shared_ptr<std::atomic<bool>> done;
  };

  ServerConfig config;
  Scoreboard board;
  net::Socket tcp_listener;
  net::Socket ws_listener;
  int tcp_port = -1;
  int ws_port = -1;
  std::atomic<bool> stopping{false};
  bool started = false;
  std::thread tcp_acceptor;
  std::thread ws_acceptor;

  mutable std::mutex mu;
  std::map<std::string, std::shared_ptr<Room>> rooms;
  std::vector<std::shared_ptr<Room>> all_rooms;
  std::vector<ConnThread> conns;
  std::uint64_t next_conn_id = 1;
  std::uint64_t room_counter = 0;
  std::atomic<std::size_t> finished{0};

  void accept_loop(const net::Socket& listener, bool websocket) {
    while (!stopping) {
      net::Socket sock = net::accept_with_timeout(listener, 100);
      reap();
      if (!sock.valid()) continue;
      std::lock_guard lock(mu);
      auto conn = std::make_shared<Connection>(next_conn_id++, sock.fd());
      auto done = std::make_shared<std::atomic<bool>>(false);
      std::thread t([this, conn, done, websocket, s = std::move(sock)]() mutable {
        serve(conn, std::move(s), websocket);
        *done = true;
      });
      conns.push_back(ConnThread{conn, std::move(t), done});
    }
  }

  void reap() {
    std::vector<ConnThread> finished_conns;
    {
      std::lock_guard lock(mu);
      auto it = std::partition(conns.begin(), conns.end(), [](const ConnThread& c) { return !*c.done; });
      std::move(it, conns.end(), std::back_inserter(finished_conns));
      conns.erase(it, conns.end());
    }
    for (ConnThread& c : finished_conns) c.thread.join();
  }

  void serve(const std::shared_ptr<Connection>& conn, net::Socket sock, bool websocket) {
    std::unique_ptr<net::Transport> transport;
    if (websocket) {
      transport = net::websocket_server_handshake(std::move(sock), protocol::kWsPath);
      if (!transport) return;
    } else {
      transport = std::make_unique<net::LineTransport>(std::move(sock));
    }
    conn->attach(std::move(transport));
    protocol::SeqTracker seq;
    while (auto line = conn->transport().read_message()) {
      protocol::ClientEnvelope env;
      try {
        env = protocol::decode_json<protocol::ClientMessage>(protocol::parse_line(*line));
        seq.check(env.seq);
      } catch (const protocol::ProtocolError& e) {
        if (conn->room) {
          conn->room->post(FaultEvent{conn, e.code(), e.what()});
        } else {
          conn->send(protocol::ErrorMsg{protocol::to_string(e.code()), e.what()});
          if (e.code() == protocol::ErrorCode::Version) conn->close_after_flush();
        }
        continue;
      }
      if (conn->room) {
        conn->room->post(InboundEvent{conn, std::move(env)});
        continue;
      }
      const auto* hello = std::get_if<protocol::Hello>(&env.msg);
      if (!hello) {
        conn->send(protocol::ErrorMsg{"not_joined", "send hello first"});
        continue;
      }
      const std::string name = hello->room.value_or("main");
      if (!valid_room_name(name)) {
        conn->send(protocol::ErrorMsg{"bad_field", "room names use 1-64 letters, digits, '-' or '_'"});
        continue;
      }
      try {
        // A room that ended between lookup and post refuses the event; the
        // next lookup then opens a fresh one.
        do {
          conn->room = room_for(name);
        } while (!conn->room->post(JoinEvent{conn, *hello}));
      } catch (const std::exception& e) {
        conn->room.reset();
        conn->send(protocol::ErrorMsg{"room_error", e.what()});
        conn->close_after_flush();
        break;
      }
    }
    if (conn->room) conn->room->post(GoneEvent{conn});
    conn->close_after_flush();
    conn->join_writer();
  }

  // A live room handles every hello itself (seating, "full", reconnects);
  // once its match is over or its thread has exited the name starts afresh.
  std::shared_ptr<Room> room_for(const std::string& name) {
    std::lock_guard lock(mu);
    if (stopping) throw std::runtime_error("server is shutting down");
    auto it = rooms.find(name);
    if (it != rooms.end()) {
      const Room& r = *it->second;
      if (!r.finished()) return it->second;
    }
    const std::uint64_t seed = config.seed ? derive_seed(*config.seed, room_counter) : entropy_seed();
    ++room_counter;
    auto room = std::make_shared<Room>(name, seed, config.room, config.log_dir, board, [this] { ++finished; });
    room->start();
    all_rooms.push_back(room);
    rooms[name] = room;
    return room;
  }
};

Server::Server(ServerConfig config) : impl_(std::make_unique<Impl>(std::move(config))) { impl_->config.validate(); }

Server::~Server() { stop(); }

void Server::start() {
  Impl& s = *impl_;
  if (s.started) throw std::logic_error("server already started");
  fs::create_directories(s.config.log_dir);
  s.tcp_listener = net::listen_tcp(s.config.host, s.config.tcp_port);
  s.tcp_port = net::local_port(s.tcp_listener);
  if (s.config.ws_port >= 0) {
    s.ws_listener = net::listen_tcp(s.config.host, s.config.ws_port);
    s.ws_port = net::local_port(s.ws_listener);
  }
  s.started = true;
  s.tcp_acceptor = std::thread([&s] { s.accept_loop(s.tcp_listener, false); });
  if (s.ws_listener.valid()) s.ws_acceptor = std::thread([&s] { s.accept_loop(s.ws_listener, true); });
}

void Server::stop() {
  Impl& s = *impl_;
  if (!s.started || s.stopping.exchange(true)) return;
  if (s.tcp_acceptor.joinable()) s.tcp_acceptor.join();
  if (s.ws_acceptor.joinable()) s.ws_acceptor.join();
  std::vector<std::shared_ptr<Room>> rooms;
  {
    std::lock_guard lock(s.mu);
    rooms = s.all_rooms;
  }
  for (auto& r : rooms) r->post(StopEvent{});
  for (auto& r : rooms) r->join();
  {
    std::lock_guard lock(s.mu);
    for (auto& c : s.conns) c.conn->kill();
  }
  std::vector<Impl::ConnThread> conns;
  {
    std::lock_guard lock(s.mu);
    conns = std::move(s.conns);
    s.conns.clear();
  }
  for (auto& c : conns) c.thread.join();
  s.tcp_listener.close();
  s.ws_listener.close();
}

int Server::tcp_port() const { return impl_->tcp_port; }
int Server::ws_port() const { return impl_->ws_port; }

std::size_t Server::active_rooms() const {
  std::lock_guard lock(impl_->mu);
  return std::count_if(impl_->all_rooms.begin(), impl_->all_rooms.end(),
                       [](const auto& r) { return !r->finished(); });
}

std::size_t Server::finished_matches() const { return impl_->finished; }

}  // namespace domino101::server
