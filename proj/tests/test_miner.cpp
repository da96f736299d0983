#include <doctest.h>

#include <numeric>
#include <random>

#include <json.hpp>

#include "precis/error.hpp"
#include "precis/graph.hpp"
#include "support.hpp"

using namespace precis;

namespace {

StatementLibrary load(const std::string& name) { return parse_library(read_file(testing::fixture(name))); }

const char* kNumberChange =
    "FROM where//numliteral AS N\n"
    "WHERE N@old not equal N@new AND |N| = 1\n"
    "MATCH change_number";

std::vector<LogEntry> number_log() {
  return parse_log(
             "SELECT a FROM t WHERE x = 1; SELECT a FROM t WHERE x = 2; SELECT a FROM t WHERE x = 3;"
             "SELECT a FROM t WHERE x = 4; SELECT a FROM t WHERE x = 5;")
      .entries;
}

// Components of the undirected graph, as sets of node ids.
std::size_t component_count(const TransformationGraph& g) {
  std::vector<std::size_t> parent(g.nodes().size());
  std::iota(parent.begin(), parent.end(), 0);
  std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
    return parent[x] == x ? x : parent[x] = find(parent[x]);
  };
  for (const auto& e : g.edges()) parent[find(e.src)] = find(e.dst);
  std::size_t count = 0;
  for (std::size_t i = 0; i < parent.size(); ++i) count += find(i) == i;
  return count;
}

bool subset(const std::set<testing::EdgeTriple>& a, const std::set<testing::EdgeTriple>& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

// A random log over a small template family.
std::vector<LogEntry> random_log(std::mt19937& rng, std::size_t length) {
  std::vector<std::string> cols{"a", "b", "c"};
  std::vector<std::string> names{"'US'", "'UK'", "'FR'"};
  std::string text;
  for (std::size_t i = 0; i < length; ++i) {
    std::string sql = "SELECT ";
    if (rng() % 3 == 0) sql += "TOP 5 ";
    std::size_t ncols = 1 + rng() % 3;
    for (std::size_t c = 0; c < ncols; ++c) sql += (c ? ", " : "") + cols[c];
    sql += " FROM " + std::string(rng() % 4 == 0 ? "Regions" : "Sales");
    sql += " WHERE Country = " + names[rng() % 3] + " AND n = " + std::to_string(rng() % 3);
    text += sql + ";\n";
  }
  return parse_log(text).entries;
}

StatementLibrary rich_library() {
  std::string text = read_file(testing::fixture("sales.pilang")) + "\n\n" +
                     read_file(testing::fixture("corrected.pilang")) + "\n\n" + kNumberChange + "\n\n" +
                     "FROM from//tableclause//tablename AS T\nWHERE T@old not equal T@new AND |T| = 1\nMATCH change_table";
  return parse_library(text);
}

}  // namespace

TEST_CASE("two pairs of consecutive queries") {
  auto log = read_log(testing::fixture("sales.sql")).entries;
  TransformationGraph g = mine(log, load("sales.pilang"), MiningConfig::parse("all"));
  REQUIRE(g.nodes().size() == 4);
  REQUIRE(g.edges().size() == 4);
  CHECK(testing::edge_triples(g) == testing::brute_force_edges(log, load("sales.pilang")));
  CHECK(g.edges()[0].src == 0);
  CHECK(g.edges()[0].dst == 1);
  CHECK(g.edges()[0].label == "change_where_equal");
  CHECK(g.edges()[2].src == 2);
  CHECK(g.edges()[2].dst == 3);
  CHECK(g.edges()[2].label == "top5_toggle");
  CHECK(component_count(g) == 2);
  CHECK(g.label_counts() == std::map<std::string, std::size_t>{{"change_where_equal", 2}, {"top5_toggle", 2}});
}

TEST_CASE("single query log") {
  auto log = parse_log("SELECT * FROM Sales;").entries;
  TransformationGraph g = mine(log, load("sales.pilang"));
  CHECK(g.nodes().size() == 1);
  CHECK(g.edges().empty());
}

TEST_CASE("empty library yields no edges") {
  auto log = read_log(testing::fixture("sales.sql")).entries;
  TransformationGraph g = mine(log, StatementLibrary{});
  CHECK(g.nodes().size() == 4);
  CHECK(g.edges().empty());
}

TEST_CASE("single-site numeric log: path under adjacent, clique under all pairs") {
  auto log = number_log();
  StatementLibrary lib = parse_library(kNumberChange);
  TransformationGraph adjacent = mine(log, lib, MiningConfig::parse("adjacent"));
  TransformationGraph all = mine(log, lib, MiningConfig::parse("all"));
  CHECK(adjacent.edges().size() == 8);
  for (const auto& e : adjacent.edges()) CHECK((e.src + 1 == e.dst || e.dst + 1 == e.src));
  CHECK(all.edges().size() == 20);
  CHECK(testing::edge_triples(all) == testing::brute_force_edges(log, lib));
  CHECK(mine(log, lib).edges().size() == 20);
}

TEST_CASE("duplicates collapse with multiplicity") {
  auto log = parse_log("SELECT a FROM t; SELECT  a FROM t; SELECT b FROM t; SELECT a FROM t;").entries;
  TransformationGraph g = mine(log, StatementLibrary{});
  REQUIRE(g.nodes().size() == 2);
  CHECK(g.nodes()[0].multiplicity == 3);
  CHECK(g.nodes()[0].log_indexes == std::vector<std::size_t>{0, 1, 3});
  CHECK(g.log_sequence() == std::vector<std::size_t>{0, 0, 1, 0});
  std::size_t total = 0;
  for (const auto& n : g.nodes()) total += n.multiplicity;
  CHECK(total == log.size());
}

TEST_CASE("pair selection") {
  std::vector<std::size_t> seq{0, 1, 0, 2, 3};
  using P = std::vector<std::pair<std::size_t, std::size_t>>;
  CHECK(select_pairs(seq, 4, MiningConfig::parse("adjacent")) == P{{0, 1}, {0, 2}, {2, 3}});
  CHECK(select_pairs(seq, 4, MiningConfig::parse("window:2")) == P{{0, 1}, {0, 2}, {0, 3}, {1, 2}, {2, 3}});
  CHECK(select_pairs(seq, 4, MiningConfig::parse("all")).size() == 6);
  MiningConfig small = MiningConfig::parse("auto");
  small.all_pairs_limit = 3;
  CHECK(select_pairs(seq, 4, small) == P{{0, 1}, {0, 2}, {2, 3}});
  CHECK_THROWS_AS(MiningConfig::parse("window:0"), SyntaxError);
  CHECK_THROWS_AS(MiningConfig::parse("sometimes"), SyntaxError);
}

TEST_CASE("properties on random logs") {
  std::mt19937 rng(4242);
  StatementLibrary full = rich_library();
  std::vector<Statement> partial(full.statements().begin(), full.statements().begin() + 2);
  StatementLibrary smaller(partial);

  for (int round = 0; round < 8; ++round) {
    auto log = random_log(rng, 14);
    CAPTURE(round);

    MiningConfig one_thread = MiningConfig::parse("all");
    one_thread.threads = 1;
    MiningConfig many = MiningConfig::parse("all");
    many.threads = 4;
    TransformationGraph a = mine(log, full, one_thread);
    TransformationGraph b = mine(log, full, many);
    CHECK(a == b);
    CHECK(export_json(a) == export_json(b));
    CHECK(testing::edge_triples(a) == testing::brute_force_edges(log, full));

    auto fewer = testing::edge_triples(mine(log, smaller, one_thread));
    CHECK(subset(fewer, testing::edge_triples(a)));

    auto adj = testing::edge_triples(mine(log, full, MiningConfig::parse("adjacent")));
    auto win = testing::edge_triples(mine(log, full, MiningConfig::parse("window:3")));
    CHECK(subset(adj, win));
    CHECK(subset(win, testing::edge_triples(a)));

    for (const auto& e : a.edges()) {
      CHECK(e.src != e.dst);
      CHECK(full.find(e.label) != nullptr);
    }
  }
}

TEST_CASE("ill-typed library is rejected before mining") {
  auto log = read_log(testing::fixture("sales.sql")).entries;
  StatementLibrary bad({parse_statement("FROM where//strliteral AS T WHERE T = 1 MATCH bad")});
  CHECK_THROWS_AS(mine(log, bad), TypeMismatch);
}

TEST_CASE("DOT export") {
  auto log = read_log(testing::fixture("sales.sql")).entries;
  TransformationGraph g = mine(log, load("sales.pilang"));
  std::string dot = export_dot(g);
  CHECK(dot.find("q0 -> q1 [label=\"change_where_equal\", color=red];") != std::string::npos);
  CHECK(dot.find("q1 -> q0 [label=\"change_where_equal\", color=red];") != std::string::npos);
  CHECK(dot.find("q2 -> q3 [label=\"top5_toggle\", color=gray];") != std::string::npos);
  CHECK(dot.find("q3 -> q2 [label=\"top5_toggle\", color=gray];") != std::string::npos);

  auto cols = parse_log("SELECT region, revenue FROM clients; SELECT revenue FROM clients;").entries;
  std::string blue = export_dot(mine(cols, load("corrected.pilang")));
  CHECK(blue.find("color=blue") != std::string::npos);

  std::string nodes_only = export_dot(mine(log, StatementLibrary{}));
  CHECK(nodes_only.find("->") == std::string::npos);
  CHECK(nodes_only.find("q3 [label=\"SELECT * FROM Sales\"]") != std::string::npos);
}

TEST_CASE("JSON round trip") {
  std::mt19937 rng(99);
  auto log = random_log(rng, 12);
  TransformationGraph g = mine(log, rich_library());
  std::string text = export_json(g);
  TransformationGraph back = import_json(text);
  CHECK(back == g);
  CHECK(export_json(back) == text);
}

TEST_CASE("JSON import reports the location of schema errors") {
  auto expect_location = [](const std::string& text, const std::string& where) {
    try {
      import_json(text);
      FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
      CHECK(e.location() == where);
    }
  };
  expect_location("[]", "");
  expect_location("{\"nodes\": 3, \"edges\": []}", "/nodes");
  expect_location("{\"nodes\": [{\"key\": 1}], \"edges\": []}", "/nodes/0/key");
  CHECK_THROWS_AS(import_json("not json"), SchemaError);

  auto log = read_log(testing::fixture("sales.sql")).entries;
  auto doc = nlohmann::json::parse(export_json(mine(log, load("sales.pilang"))));
  doc["edges"][1]["dst"] = "no such key";
  expect_location(doc.dump(), "/edges/1/dst");
}
