#include <pthread.h>

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "precis/error.hpp"
#include "precis/graph.hpp"
#include "precis/interface.hpp"
#include "precis/optimizer.hpp"
#include "precis/pilang.hpp"
#include "precis/query_service.hpp"
#include "precis/server.hpp"
#include "precis/sql.hpp"
#include "precis/widgets.hpp"

namespace {

struct MineOptions {
  std::string log;
  std::string statements;
  std::string pairing = "auto";
  std::string out;
  std::string dot;
  unsigned threads = 0;
};

struct GenerateOptions {
  std::string graph;
  double budget = 0;
  std::string costs;
  std::string pairs = "adjacent";
  std::optional<double> penalty;
  std::string out;
};

struct ServeOptions {
  std::string interface;
  std::string host = "127.0.0.1";
  std::optional<int> port;
  std::string backend = "echo";
  bool permissive = false;
};

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw precis::IoError("cannot write '" + path + "'");
  out << text;
  if (!out) throw precis::IoError("cannot write '" + path + "'");
}

int run_mine(const MineOptions& opt) {
  precis::ParsedLog log = precis::read_log(opt.log);
  for (const auto& d : log.diagnostics) {
    std::cerr << opt.log << ": statement " << d.statement_index << ": " << d.message << "\n";
  }
  precis::StatementLibrary library = precis::parse_library(precis::read_file(opt.statements));
  precis::MiningConfig config = precis::MiningConfig::parse(opt.pairing);
  config.threads = opt.threads;

  precis::TransformationGraph graph = precis::mine(log.entries, library, config);
  write_file(opt.out, precis::export_json(graph));
  if (!opt.dot.empty()) write_file(opt.dot, precis::export_dot(graph));

  std::cout << "nodes: " << graph.nodes().size() << "\n";
  std::cout << "edges: " << graph.edges().size() << "\n";
  for (const auto& [label, count] : graph.label_counts()) {
    std::cout << "  " << label << ": " << count << "\n";
  }
  return log.diagnostics.empty() ? 0 : 2;
}

int run_generate(const GenerateOptions& opt) {
  precis::TransformationGraph graph = precis::import_json(precis::read_file(opt.graph));
  precis::CostsFile costs{precis::InteractionLibrary::defaults(), std::nullopt};
  if (!opt.costs.empty()) costs = precis::parse_costs(precis::read_file(opt.costs));
  std::optional<double> penalty = opt.penalty ? opt.penalty : costs.penalty;
  auto universe = opt.pairs == "all" ? precis::PairUniverse::all_pairs : precis::PairUniverse::adjacent;
  precis::CostModel model =
      precis::CostModel::make(graph.nodes().size(), costs.library, opt.budget, penalty, universe);

  auto groups = precis::group_transformations(graph);
  precis::Mapping mapping = precis::greedy_optimize(graph, groups, costs.library, model);
  precis::InterfaceSpec spec = precis::generate_interface(mapping, graph, groups, model);
  write_file(opt.out, precis::to_json(spec));

  std::size_t widgets = 0;
  for (const auto& panel : spec.panels) widgets += panel.widgets.size();
  std::cout << "panels: " << spec.panels.size() << ", widgets: " << widgets << "\n";
  std::cout << "coverage: " << spec.coverage.covered << "/" << spec.coverage.total << " distinct queries ("
            << spec.coverage.covered_raw << "/" << spec.coverage.total_raw << " log entries)\n";
  std::cout << "C_e: " << spec.C_e << "\n";
  std::cout << "C_c: " << spec.C_c << " (budget " << spec.S_max << ")\n";
  return 0;
}

int run_serve(const ServeOptions& opt) {
  std::string text = precis::read_file(opt.interface);
  precis::InterfaceSpec spec = precis::interface_from_json(text);
  std::unique_ptr<precis::QueryBackend> backend = precis::make_backend(opt.backend);

  int port = 8080;
  if (opt.port) {
    port = *opt.port;
  } else if (const char* env = std::getenv("PRECIS_PORT")) {
    try {
      port = std::stoi(env);
    } catch (const std::exception&) {
      throw precis::Error(std::string("PRECIS_PORT is not a port number: '") + env + "'");
    }
  }

  // Signals are taken by a dedicated thread; server threads inherit the mask.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  auto server = precis::make_server(spec, std::move(text), *backend, opt.permissive);
  if (!server->bind_to_port(opt.host, port)) {
    throw precis::Error("cannot listen on " + opt.host + ":" + std::to_string(port));
  }
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    server->stop();
  });
  std::cout << "serving " << opt.interface << " on http://" << opt.host << ":" << port << std::endl;
  server->listen_after_bind();
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  std::cout << "stopped" << std::endl;
  return 0;
}

template <typename F>
int guarded(F&& f) {
  try {
    return f();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generate query interfaces from SQL logs"};
  app.require_subcommand(1);

  MineOptions mine;
  auto* mine_cmd = app.add_subcommand("mine", "Build the transformation graph of a query log");
  mine_cmd->add_option("--log", mine.log, "SQL log, ';'-separated")->required();
  mine_cmd->add_option("--statements", mine.statements, "PILang statement library")->required();
  mine_cmd->add_option("--pairing", mine.pairing, "auto, adjacent, all or window:k")->capture_default_str();
  mine_cmd->add_option("--out", mine.out, "graph JSON output")->required();
  mine_cmd->add_option("--dot", mine.dot, "DOT output");
  mine_cmd->add_option("--threads", mine.threads, "worker threads (0 = hardware)");

  GenerateOptions gen;
  auto* gen_cmd = app.add_subcommand("generate", "Map the graph to an interface");
  gen_cmd->add_option("--graph", gen.graph, "graph JSON from `mine`")->required();
  gen_cmd->add_option("--budget", gen.budget, "complexity budget S_max")->required()->check(CLI::NonNegativeNumber);
  gen_cmd->add_option("--costs", gen.costs, "widget cost overrides (JSON)");
  gen_cmd->add_option("--pairs", gen.pairs, "query pairs averaged by C_e")
      ->check(CLI::IsMember({"adjacent", "all"}))
      ->capture_default_str();
  gen_cmd->add_option("--penalty", gen.penalty, "cost of an unreachable pair");
  gen_cmd->add_option("--out", gen.out, "interface JSON output")->required();

  ServeOptions serve;
  auto* serve_cmd = app.add_subcommand("serve", "Host an interface and its query endpoint");
  serve_cmd->add_option("--interface", serve.interface, "interface JSON from `generate`")->required();
  serve_cmd->add_option("--host", serve.host, "bind address")->capture_default_str();
  serve_cmd->add_option("--port", serve.port, "port (default $PRECIS_PORT, else 8080)")->check(CLI::Range(0, 65535));
  serve_cmd->add_option("--exec-backend", serve.backend, "echo or command:<shell command>")->capture_default_str();
  serve_cmd->add_flag("--permissive", serve.permissive, "accept any text in textboxes");

  CLI11_PARSE(app, argc, argv);

  if (mine_cmd->parsed()) return guarded([&] { return run_mine(mine); });
  if (gen_cmd->parsed()) return guarded([&] { return run_generate(gen); });
  return guarded([&] { return run_serve(serve); });
}
