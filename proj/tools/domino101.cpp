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

// domino101: serve | sim | replay | dealspace
//
// Exit codes: 0 success, 1 runtime failure, 2 usage error.

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "domino101/deal_space.hpp"
#include "domino101/net.hpp"
#include "domino101/replay.hpp"
#include "domino101/server.hpp"
#include "domino101/sim.hpp"

namespace {

using namespace domino101;

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct SimArgs {
  std::vector<std::string> seats;
  std::optional<int> rounds;
  std::optional<int> matches;
  std::uint64_t seed = 0;
  std::string out;
  std::string format = "csv";
  int threads = 1;
  std::string pass_mode = "strict";
};

int run_sim_command(const SimArgs& a) {
  SimConfig cfg;
  if (a.seats.empty()) {
    cfg.pairings.push_back(PerSeat<AiLevel>(AiLevel::L1));
  }
  for (const std::string& spec : a.seats) {
    const auto levels = parse_levels_spec(spec);
    if (!levels) {
      std::cerr << "error: --seats expects four levels like l4,l1,l4,l1 (got '" << spec << "')\n";
      return kExitUsage;
    }
    cfg.pairings.push_back(*levels);
  }
  cfg.rounds = a.rounds;
  cfg.matches = a.matches;
  if (!cfg.rounds && !cfg.matches) cfg.matches = 100;
  cfg.seed = a.seed;
  cfg.mode = *parse_pass_mode(a.pass_mode);
  cfg.threads = a.threads;

  const std::vector<SimRow> rows = run_sim(cfg);
  for (const SimRow& r : rows) {
    if (!r.consistent()) {
      std::cerr << "error: inconsistent report row for " << r.seats << "\n";
      return kExitRuntime;
    }
  }
  std::ofstream file;
  if (!a.out.empty()) {
    file.open(a.out, std::ios::trunc);
    if (!file) {
      std::cerr << "error: cannot write " << a.out << "\n";
      return kExitRuntime;
    }
  }
  std::ostream& os = a.out.empty() ? std::cout : file;
  if (a.format == "json") {
    os << rows_json(rows).dump(2) << "\n";
  } else {
    write_csv(os, rows);
  }
  os.flush();
  return os ? kExitOk : kExitRuntime;
}

int run_replay_command(const std::string& path, bool validate) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::cerr << "error: cannot open " << path << "\n";
    return kExitRuntime;
  }
  const ReplayReport report = replay_stream(in, !validate);
  if (!validate) {
    for (const std::string& line : report.timeline) std::cout << line << "\n";
  }
  std::cout << report.verdict() << "\n";
  return report.ok ? kExitOk : kExitRuntime;
}

void run_dealspace_command() {
  const auto factors = deal_space_factors();
  std::cout << "C(28,7) = " << factors[0] << "\n"
            << "C(21,7) = " << factors[1] << "\n"
            << "C(14,7) = " << factors[2] << "\n"
            << "product = " << deal_space_count() << "\n";
}

struct ServeArgs {
  int port = protocol::kDefaultTcpPort;
  int ws_port = protocol::kDefaultWsPort;
  std::string ai_fill = "l1";
  int move_timeout = 60000;
  std::string pass_mode = "strict";
  std::string timeout_policy = "auto";
  std::optional<std::uint64_t> seed;
  std::string log_dir;
  int humans = 4;
  int grace = 30000;
  std::string host = "0.0.0.0";
};

int run_serve_command(const ServeArgs& a) {
  server::ServerConfig cfg;
  cfg.host = a.host;
  cfg.tcp_port = a.port;
  cfg.ws_port = a.ws_port;
  cfg.seed = a.seed;
  cfg.log_dir = "logs";
  if (const char* env = std::getenv("DOMINO_LOG_DIR"); env && *env) cfg.log_dir = env;
  if (!a.log_dir.empty()) cfg.log_dir = a.log_dir;
  cfg.room.move_timeout_ms = a.move_timeout;
  cfg.room.pass_mode = *parse_pass_mode(a.pass_mode);
  cfg.room.ai_fill = *parse_level(a.ai_fill);
  cfg.room.timeout_policy = *server::parse_timeout_policy(a.timeout_policy);
  cfg.room.humans = a.humans;
  cfg.room.grace_ms = a.grace;
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  // Signals are taken synchronously by this thread; every server thread
  // inherits the blocked mask.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  server::Server srv(cfg);
  try {
    srv.start();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  std::cerr << "domino101 serving: tcp " << srv.tcp_port() << ", websocket "
            << (srv.ws_port() > 0 ? std::to_string(srv.ws_port()) + protocol::kWsPath : std::string("off"))
            << ", logs in " << cfg.log_dir << std::endl;
  int sig = 0;
  sigwait(&signals, &sig);
  std::cerr << "shutting down" << std::endl;
  srv.stop();
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Partnership domino 101: game server, AI self-play and log tools"};
  app.require_subcommand(1);

  SimArgs sim;
  auto* sim_cmd = app.add_subcommand("sim", "Run headless AI-only matches and report statistics");
  sim_cmd->add_option("--seats", sim.seats, "Levels for seats A,B,C,D, e.g. l4,l1,l4,l1 (repeatable)");
  auto* rounds_opt = sim_cmd->add_option("--rounds", sim.rounds, "Rounds per pairing")->check(CLI::PositiveNumber);
  auto* matches_opt =
      sim_cmd->add_option("--matches", sim.matches, "Matches per pairing")->check(CLI::PositiveNumber);
  rounds_opt->excludes(matches_opt);
  sim_cmd->add_option("--seed", sim.seed, "Run seed");
  sim_cmd->add_option("--out", sim.out, "Report file (default stdout)");
  sim_cmd->add_option("--format", sim.format, "Report format")->check(CLI::IsMember({"csv", "json"}));
  sim_cmd->add_option("--threads", sim.threads, "Worker threads")->check(CLI::Range(1, 256));
  sim_cmd->add_option("--pass-mode", sim.pass_mode, "Pass handling")->check(CLI::IsMember({"strict", "forfeit"}));

  std::string log_path;
  bool validate = false;
  auto* replay_cmd = app.add_subcommand("replay", "Print or validate a match log");
  replay_cmd->add_option("log", log_path, "JSONL log file")->required();
  replay_cmd->add_flag("--validate", validate, "Only print the validation verdict");

  app.add_subcommand("dealspace", "Print the number of distinct deals and its factors");

  ServeArgs serve;
  auto* serve_cmd = app.add_subcommand("serve", "Host game rooms over TCP and WebSocket");
  serve_cmd->add_option("--port", serve.port, "TCP port")->check(CLI::Range(1, 65535));
  serve_cmd->add_option("--ws-port", serve.ws_port, "WebSocket port")->check(CLI::Range(1, 65535));
  serve_cmd->add_option("--host", serve.host, "Listen address");
  serve_cmd->add_option("--ai-fill", serve.ai_fill, "AI level for unfilled seats")
      ->check(CLI::IsMember({"l1", "l2", "l3", "l4"}));
  serve_cmd->add_option("--move-timeout", serve.move_timeout, "Move time limit in ms (>= 1000)");
  serve_cmd->add_option("--timeout-policy", serve.timeout_policy, "On timeout: auto-move or forfeit")
      ->check(CLI::IsMember({"auto", "forfeit"}));
  serve_cmd->add_option("--pass-mode", serve.pass_mode, "Pass handling")
      ->check(CLI::IsMember({"strict", "forfeit"}));
  serve_cmd->add_option("--seed", serve.seed, "Seed for room generators (default: entropy)");
  serve_cmd->add_option("--log-dir", serve.log_dir, "Log directory (default $DOMINO_LOG_DIR or ./logs)");
  serve_cmd->add_option("--humans", serve.humans, "Humans per room before AI fills the rest")
      ->check(CLI::Range(1, 4));
  serve_cmd->add_option("--grace", serve.grace, "Reconnection grace period in ms")->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*sim_cmd) return run_sim_command(sim);
    if (*replay_cmd) return run_replay_command(log_path, validate);
    if (*serve_cmd) return run_serve_command(serve);
    run_dealspace_command();
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
