#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "precis/interface.hpp"
#include "support.hpp"

using namespace precis;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;
};

// Collects failed expectations without stopping at the first one.
class Checker {
 public:
  void expect(bool condition, const std::string& what) {
    if (!condition) failures_.push_back(what);
  }
  Outcome outcome(const std::string& summary) const {
    if (failures_.empty()) return {true, summary};
    std::string detail = summary + "; failed: " + failures_.front();
    if (failures_.size() > 1) detail += " (+" + std::to_string(failures_.size() - 1) + " more)";
    return {false, detail};
  }

 private:
  std::vector<std::string> failures_;
};

StatementLibrary load(const std::string& name) { return parse_library(read_file(testing::fixture(name))); }

Outcome conformance_corpus() {
  Checker c;
  auto texts = split_statements(read_file(testing::fixture("corpus.sql")));
  c.expect(texts.size() == 10, "corpus has 10 queries");
  std::size_t ok = 0;
  for (const auto& text : texts) {
    std::string once = serialize(parse_query(text));
    bool round_trip = once == testing::collapse_whitespace(text) && serialize(parse_query(once)) == once;
    c.expect(round_trip, "round trip of: " + testing::collapse_whitespace(text));
    ok += round_trip;
  }
  return c.outcome(std::to_string(ok) + "/" + std::to_string(texts.size()) + " queries round-trip");
}

Outcome pilang_fixtures() {
  Checker c;
  std::vector<Ast> q;
  for (auto& e : read_log(testing::fixture("corpus.sql")).entries) q.push_back(e.ast);
  StatementLibrary literal = load("literal.pilang");
  StatementLibrary corrected = load("corrected.pilang");
  const Statement& where = *literal.find("change_where_equal");
  const Statement& table = *literal.find("change_table");
  const Statement& cols = *literal.find("column_removed_literal");
  const Statement& removed = *corrected.find("column_removed");

  auto m = evaluate(where, q[0], q[1]);
  c.expect(m && m->bindings.at(0).old_values.size() == 1 && m->bindings[0].old_values[0].text == "'US'" &&
               m->bindings[0].new_values.size() == 1 && m->bindings[0].new_values[0].text == "'UK'",
           "change_where_equal matches (Q1,Q2) with 'US' -> 'UK'");
  c.expect(!evaluate(where, q[2], q[3]), "change_where_equal rejects (Q3,Q4)");
  bool identity = false;
  for (const auto& a : q) identity = identity || evaluate(where, a, a).has_value();
  c.expect(!identity, "change_where_equal rejects (Q,Q)");

  auto t = evaluate(table, q[6], q[7]);
  c.expect(t && t->bindings.at(0).old_values.at(0).text == "Clients" &&
               t->bindings[0].new_values.at(0).text == "Regions",
           "table statement matches Clients -> Regions");

  c.expect(!evaluate(cols, q[4], q[5]) && !evaluate(cols, q[5], q[4]),
           "column statement as written matches neither direction");
  c.expect(evaluate(removed, q[4], q[5]) && !evaluate(removed, q[5], q[4]),
           "corrected column statement matches the removal only");
  return c.outcome("7 exact assertions");
}

Outcome miner_properties() {
  Checker c;
  auto numbers = parse_log(
                     "SELECT a FROM t WHERE x = 1; SELECT a FROM t WHERE x = 2; SELECT a FROM t WHERE x = 3;"
                     "SELECT a FROM t WHERE x = 4; SELECT a FROM t WHERE x = 5;")
                     .entries;
  StatementLibrary numeric = parse_library(
      "FROM where//numliteral AS N WHERE N@old not equal N@new AND |N| = 1 MATCH change_number");
  TransformationGraph clique = mine(numbers, numeric, MiningConfig::parse("all"));
  c.expect(clique.edges().size() == 20, "all-pairs clique has 20 edges");
  c.expect(testing::edge_triples(clique) == testing::brute_force_edges(numbers, numeric), "clique equals oracle");
  c.expect(mine(numbers, numeric, MiningConfig::parse("adjacent")).edges().size() == 8, "adjacent path has 8 edges");

  std::string library_text = read_file(testing::fixture("sales.pilang")) + "\n\n" +
                             read_file(testing::fixture("corrected.pilang")) +
                             "\n\nFROM where//numliteral AS N WHERE N@old not equal N@new AND |N| = 1 MATCH change_number"
                             "\n\nFROM from//tablename AS T WHERE T@old not equal T@new AND |T| = 1 MATCH change_table";
  StatementLibrary full = parse_library(library_text);
  StatementLibrary partial(std::vector<Statement>(full.statements().begin(), full.statements().begin() + 2));

  std::mt19937 rng(2718);
  const int rounds = 10;
  for (int round = 0; round < rounds; ++round) {
    std::string text;
    for (int i = 0; i < 16; ++i) {
      text += std::string("SELECT ") + (rng() % 3 == 0 ? "TOP 5 " : "") + (rng() % 2 ? "a, b" : "b") + " FROM " +
              (rng() % 4 == 0 ? "u" : "t") + " WHERE c = '" + "xyz"[rng() % 3] + "' AND n = " +
              std::to_string(rng() % 3) + ";\n";
    }
    auto log = parse_log(text).entries;
    MiningConfig single = MiningConfig::parse("all");
    single.threads = 1;
    MiningConfig multi = MiningConfig::parse("all");
    multi.threads = 8;
    TransformationGraph a = mine(log, full, single);
    c.expect(a == mine(log, full, multi) && export_json(a) == export_json(mine(log, full, multi)),
             "determinism across thread counts");
    auto all = testing::edge_triples(a);
    c.expect(all == testing::brute_force_edges(log, full), "all-pairs equals oracle");
    auto fewer = testing::edge_triples(mine(log, partial, single));
    c.expect(std::includes(all.begin(), all.end(), fewer.begin(), fewer.end()), "library monotonicity");
    auto adj = testing::edge_triples(mine(log, full, MiningConfig::parse("adjacent")));
    auto win = testing::edge_triples(mine(log, full, MiningConfig::parse("window:4")));
    c.expect(std::includes(win.begin(), win.end(), adj.begin(), adj.end()) &&
                 std::includes(all.begin(), all.end(), win.begin(), win.end()),
             "adjacent within window within all-pairs");
  }
  return c.outcome("clique 20 edges, " + std::to_string(rounds) + " random logs checked against the oracle");
}

Outcome optimizer_oracle() {
  Checker c;
  std::mt19937 rng(8128);
  const int instances = 100;
  int within = 0;
  double worst = 1;
  for (int i = 0; i < instances; ++i) {
    testing::Instance inst = testing::random_instance(rng);
    Mapping m = greedy_optimize(inst.graph, inst.groups, inst.library, inst.cost);
    c.expect(m.C_c <= inst.cost.S_max, "feasible mapping");
    double previous = m.initial_C_e;
    bool monotone = true;
    for (const auto& step : m.trace) {
      monotone = monotone && step.C_e <= previous && step.C_c <= inst.cost.S_max;
      previous = step.C_e;
    }
    c.expect(monotone, "C_e non-increasing per iteration");
    testing::Optimum best = testing::brute_force_optimum(inst);
    c.expect(m.C_e >= best.C_e - 1e-9, "greedy not below the optimum");
    double ratio = best.C_e > 0 ? m.C_e / best.C_e : (m.C_e == 0 ? 1.0 : 1e9);
    worst = std::max(worst, ratio);
    within += ratio <= 2.0;
  }
  c.expect(within * 10 >= instances * 9, "ratio <= 2 on at least 90% of instances");
  std::ostringstream s;
  s << instances << " instances, ratio <= 2 on " << within << ", worst ratio " << std::setprecision(4) << worst;
  return c.outcome(s.str());
}

Outcome coverage_reconstruction() {
  Checker c;
  using testing::PlantedCluster;
  std::vector<std::vector<PlantedCluster>> configs{
      {{"t0", {"a", "b", "c", "d"}, true, {"10", "20", "30", "40", "50"}}},
      {{"t0", {"a", "b", "c"}, false, {"1", "2", "3", "4"}}, {"t1", {"x", "y"}, true, {}}},
      {{"t0", {"a", "b", "c", "d"}, false, {}},
       {"t1", {}, true, {"5", "10", "15", "20", "25"}},
       {"t2", {"p", "q", "r"}, true, {"100", "200", "300"}}},
  };
  std::mt19937 rng(1618);
  std::string summary;
  for (std::size_t k = 0; k < configs.size(); ++k) {
    auto log = parse_log(testing::planted_log(configs[k], 40, rng)).entries;
    TransformationGraph graph = mine(log, parse_library(testing::planted_statements()));
    auto groups = group_transformations(graph);
    InteractionLibrary lib = InteractionLibrary::defaults();
    CostModel cost = CostModel::make(graph.nodes().size(), lib, 100);
    InterfaceSpec spec = generate_interface(greedy_optimize(graph, groups, lib, cost), graph, groups, cost);
    const std::string name = "config " + std::to_string(k + 1);
    c.expect(spec.coverage.covered == spec.coverage.total, name + " full coverage");
    c.expect(spec.panels.size() == configs[k].size(), name + " panel count");
    summary += (k ? ", " : "") + std::to_string(spec.coverage.covered) + "/" + std::to_string(spec.coverage.total) +
               " queries in " + std::to_string(spec.panels.size()) + "/" + std::to_string(configs[k].size()) +
               " panels";
  }
  return c.outcome(summary);
}

int run_cli(const std::string& args) {
  std::string command = std::string(PRECIS_BINARY) + " " + args + " > /dev/null 2>&1";
  int raw = std::system(command.c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

Outcome end_to_end_golden() {
  Checker c;
  fs::path root = fs::temp_directory_path() / ("precis_acceptance_" + std::to_string(::getpid()));
  std::vector<std::pair<std::string, std::string>> outputs;
  for (int run = 0; run < 2; ++run) {
    fs::path dir = root / std::to_string(run);
    fs::create_directories(dir);
    fs::path graph = dir / "graph.json";
    fs::path spec = dir / "interface.json";
    c.expect(run_cli("mine --log " + testing::fixture("sales.sql") + " --statements " +
                     testing::fixture("sales.pilang") + " --out " + graph.string()) == 0,
             "mine exits 0");
    c.expect(run_cli("generate --graph " + graph.string() + " --budget 10 --costs " +
                     testing::fixture("sales_costs.json") + " --out " + spec.string()) == 0,
             "generate exits 0");
    outputs.emplace_back(read_file(graph), read_file(spec));
  }
  fs::remove_all(root);
  c.expect(outputs[0] == outputs[1], "identical output across runs");
  c.expect(outputs[0].first == read_file(testing::fixture("golden/sales_graph.json")), "graph matches golden file");
  c.expect(outputs[0].second == read_file(testing::fixture("golden/sales_interface.json")),
           "interface matches golden file");

  auto spec = json::parse(outputs[0].second);
  int dropdowns = 0, checkboxes = 0, others = 0;
  std::set<std::string> options;
  for (const auto& panel : spec["panels"]) {
    for (const auto& w : panel["widgets"]) {
      if (w["kind"] == "dropdown") {
        ++dropdowns;
        for (const auto& o : w["domain"]["options"]) {
          std::string v = o;
          if (v.size() >= 2 && v.front() == '\'' && v.back() == '\'') v = v.substr(1, v.size() - 2);
          options.insert(v);
        }
      } else if (w["kind"] == "checkbox") {
        ++checkboxes;
      } else {
        ++others;
      }
    }
  }
  c.expect(dropdowns == 1 && checkboxes == 1 && others == 0, "exactly one dropdown and one checkbox");
  c.expect(options == std::set<std::string>{"US", "UK"}, "dropdown options are US and UK");
  return c.outcome("byte-identical across runs; " + std::to_string(dropdowns) + " dropdown, " +
                   std::to_string(checkboxes) + " checkbox");
}

struct Criterion {
  std::string name;
  double limit_seconds;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  std::vector<Criterion> criteria{
      {"conformance corpus", 1, conformance_corpus},
      {"pilang fixtures", 1e9, pilang_fixtures},
      {"miner properties", 5, miner_properties},
      {"optimizer oracle", 60, optimizer_oracle},
      {"coverage reconstruction", 30, coverage_reconstruction},
      {"end-to-end golden files", 1e9, end_to_end_golden},
  };
  int failed = 0;
  for (const auto& criterion : criteria) {
    auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = criterion.run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (seconds >= criterion.limit_seconds) {
      outcome.ok = false;
      outcome.detail += "; over the time limit";
    }
    failed += !outcome.ok;
    std::ostringstream time;
    time << std::fixed << std::setprecision(3) << seconds << "s";
    if (criterion.limit_seconds < 1e9) time << " < " << criterion.limit_seconds << "s";
    std::cout << (outcome.ok ? "PASS" : "FAIL") << "  " << criterion.name << ": " << outcome.detail << " [" << time.str()
              << "]" << std::endl;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size() << " criteria passed"
            << std::endl;
  return failed == 0 ? 0 : 1;
}
