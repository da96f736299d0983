#include <doctest.h>

#include <random>
#include <set>

#include "precis/ast.hpp"
#include "precis/error.hpp"
#include "precis/node_path.hpp"
#include "precis/sql.hpp"
#include "support.hpp"

using namespace precis;

namespace {

std::string shape(const AstNode& n) {
  std::string out(kind_name(n.kind));
  for (const auto& [k, v] : n.attrs) {
    if (k != "parens") out += "[" + k + "=\"" + v + "\"]";
  }
  if (n.value) out += ":" + *n.value;
  if (!n.children.empty()) {
    out += "(";
    for (std::size_t i = 0; i < n.children.size(); ++i) out += (i ? ", " : "") + shape(n.children[i]);
    out += ")";
  }
  return out;
}

std::vector<std::string> corpus() { return split_statements(read_file(testing::fixture("corpus.sql"))); }

void collect(AstNode& n, std::vector<AstNode*>& out) {
  out.push_back(&n);
  for (auto& c : n.children) collect(c, out);
}

}  // namespace

TEST_CASE("parses the equality filter into the documented tree") {
  Ast ast = parse_query("SELECT * FROM Sales WHERE Country = 'US'");
  CHECK(shape(ast.root()) ==
        "query(project(projectclause(star)), from(tableclause(tablename:Sales)), "
        "where(expr[op=\"=\"](columnref:Country, strliteral:'US')))");
}

TEST_CASE("blank input is rejected") {
  CHECK_THROWS_AS(parse_query(""), EmptyInput);
  CHECK_THROWS_AS(parse_query("   \n -- only a comment\n"), EmptyInput);
}

TEST_CASE("syntax errors carry an offset") {
  try {
    parse_query("SELECT * FROM");
    FAIL("expected SyntaxError");
  } catch (const SyntaxError& e) {
    CHECK(e.offset() == 13);
  }
  CHECK_THROWS_AS(parse_query("SELECT * FROM t WHERE"), SyntaxError);
  CHECK_THROWS_AS(parse_query("SELECT a FROM t JOIN u"), SyntaxError);
}

TEST_CASE("every corpus query round-trips whitespace-canonically") {
  auto texts = corpus();
  REQUIRE(texts.size() == 10);
  for (const auto& text : texts) {
    CAPTURE(text);
    std::string once = serialize(parse_query(text));
    CHECK(once == testing::collapse_whitespace(text));
    CHECK(serialize(parse_query(once)) == once);
  }
}

TEST_CASE("TOP round-trips and LIMIT stays distinct") {
  CHECK(serialize(parse_query("select  top 5 *\nfrom Sales")) == "SELECT TOP 5 * FROM Sales");
  Ast limit = parse_query("SELECT a FROM t LIMIT 5");
  CHECK(serialize(limit) == "SELECT a FROM t LIMIT 5");
  CHECK(limit.root().children.back().kind == Kind::limitclause);
  CHECK(limit != parse_query("SELECT TOP 5 a FROM t"));
}

TEST_CASE("whitespace variants share a canonical key") {
  auto texts = corpus();
  CHECK(parse_query(texts[8]).canonical_key() != parse_query(texts[9]).canonical_key());
  CHECK(parse_query("SELECT *   FROM Sales\nWHERE Country='US'").canonical_key() ==
        parse_query("SELECT * FROM Sales WHERE Country = 'US'").canonical_key());
}

TEST_CASE("numbers compare by value but keep their lexeme") {
  CHECK(normalize_decimal("4983.00") == "4983");
  CHECK(normalize_decimal("0.50") == "0.5");
  CHECK(normalize_decimal("007") == "7");
  Ast a = parse_query("SELECT a FROM t WHERE x <= 4983.00");
  Ast b = parse_query("SELECT a FROM t WHERE x <= 4983.0");
  CHECK(a == b);
  CHECK(serialize(a) == "SELECT a FROM t WHERE x <= 4983.00");
  CHECK(a != parse_query("SELECT a FROM t WHERE x <= 4983.01"));
}

TEST_CASE("any single structural mutation changes the canonical key") {
  std::mt19937 rng(20240501);
  for (const auto& text : corpus()) {
    const Ast original = parse_query(text);
    for (int trial = 0; trial < 40; ++trial) {
      AstNode root = original.root();
      std::vector<AstNode*> nodes;
      collect(root, nodes);
      AstNode* target = nodes[std::uniform_int_distribution<std::size_t>(0, nodes.size() - 1)(rng)];
      int kind = std::uniform_int_distribution<int>(0, 2)(rng);
      if (kind == 0 && target->value) {
        target->value = *target->value + "x";
      } else if (kind == 1 && !target->children.empty()) {
        target->children.pop_back();
      } else {
        target->attrs["mutated"] = "1";
      }
      CHECK(canonical_key(root) != original.canonical_key());
      CHECK_FALSE(structurally_equal(root, original.root()));
    }
  }
}

TEST_CASE("leaf spans re-parse to the same leaf") {
  for (const auto& text : corpus()) {
    Ast ast = parse_query(text);
    AstIndex index(ast.root());
    for (std::size_t i = 0; i < index.size(); ++i) {
      const AstNode& n = index.node(i);
      if (!is_leaf_kind(n.kind) || !n.value) continue;
      std::string piece = text.substr(n.span.begin, n.span.end - n.span.begin);
      CAPTURE(piece);
      auto tokens = tokenize(piece);
      REQUIRE(tokens.size() >= 1);
      CHECK(tokens.front().begin == 0);
      CHECK(tokens.back().end == piece.size());
    }
  }
}

TEST_CASE("log parsing") {
  SUBCASE("four statements get consecutive indexes") {
    ParsedLog log = read_log(testing::fixture("sales.sql"));
    REQUIRE(log.entries.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) CHECK(log.entries[i].source.log_index == i);
    CHECK(log.diagnostics.empty());
  }
  SUBCASE("trailing comment") {
    ParsedLog log = parse_log("SELECT * FROM Sales; -- done\n");
    CHECK(log.entries.size() == 1);
    CHECK(log.diagnostics.empty());
  }
  SUBCASE("a bad statement becomes a diagnostic") {
    ParsedLog log = parse_log("SELECT a FROM t;\nSELEC garbage;\nSELECT b FROM t;");
    CHECK(log.entries.size() == 2);
    REQUIRE(log.diagnostics.size() == 1);
    CHECK(log.diagnostics[0].statement_index == 1);
    CHECK(log.entries[1].source.log_index == 1);
  }
  SUBCASE("nothing parses") {
    CHECK_THROWS_AS(parse_log("nonsense; more nonsense;"), AllStatementsFailed);
    CHECK_THROWS_AS(parse_log(""), AllStatementsFailed);
  }
  SUBCASE("missing file names the path") {
    try {
      read_log("/nonexistent/log.sql");
      FAIL("expected IoError");
    } catch (const IoError& e) {
      CHECK(std::string(e.what()).find("/nonexistent/log.sql") != std::string::npos);
    }
  }
}

TEST_CASE("path evaluation") {
  Ast q1 = parse_query("SELECT * FROM Sales WHERE Country = 'US'");
  auto lits = eval_path(parse_path("where//expr[op=\"=\"]//strliteral"), q1.root());
  REQUIRE(lits.size() == 1);
  CHECK(*lits[0]->value == "'US'");

  Ast clients = parse_query("SELECT * FROM Clients");
  auto tables = eval_path(parse_path("from//tableclause//tablename"), clients.root());
  REQUIRE(tables.size() == 1);
  CHECK(*tables[0]->value == "Clients");

  CHECK(eval_path(parse_path("where//strliteral"), clients.root()).empty());
  CHECK(eval_path(parse_path("/where"), q1.root()).empty());
  CHECK(eval_path(parse_path("/query/where"), q1.root()).size() == 1);

  CHECK_THROWS_AS(parse_path("where//bogus"), UnknownKind);
  CHECK_THROWS_AS(parse_path("where//expr[op="), SyntaxError);
}

TEST_CASE("path results are in document order and repeatable") {
  Ast ontime = parse_query(corpus()[8]);
  AstIndex index(ontime.root());
  auto path = parse_path("query//columnref");
  auto first = eval_path(path, index);
  CHECK(first == eval_path(path, index));
  CHECK(first.size() == 5);
  CHECK(std::is_sorted(first.begin(), first.end()));
  CHECK(std::set<std::size_t>(first.begin(), first.end()).size() == first.size());
}
