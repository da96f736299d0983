#pragma once

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <functional>
#include <map>
#include <limits>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "precis/graph.hpp"
#include "precis/optimizer.hpp"
#include "precis/pilang.hpp"
#include "precis/site.hpp"
#include "precis/sql.hpp"
#include "precis/widgets.hpp"

namespace testing {

inline std::string fixture(const std::string& name) { return std::string(PRECIS_FIXTURE_DIR) + "/" + name; }

inline std::string collapse_whitespace(const std::string& text) {
  std::string out;
  bool space = false;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      space = true;
      continue;
    }
    if (space && !out.empty()) out += ' ';
    space = false;
    out += c;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Miner oracle: every statement on every ordered pair of distinct queries.
// ---------------------------------------------------------------------------

using EdgeTriple = std::tuple<std::string, std::string, std::string>;  // (src key, dst key, label)

inline std::set<EdgeTriple> brute_force_edges(const std::vector<precis::LogEntry>& log,
                                              const precis::StatementLibrary& library) {
  std::vector<const precis::Ast*> distinct;
  std::set<std::string> seen;
  for (const auto& e : log) {
    if (seen.insert(e.ast.canonical_key()).second) distinct.push_back(&e.ast);
  }
  std::set<EdgeTriple> edges;
  for (auto* a : distinct) {
    for (auto* b : distinct) {
      if (a == b) continue;
      for (const auto& stmt : library.statements()) {
        if (precis::evaluate(stmt, *a, *b)) edges.emplace(a->canonical_key(), b->canonical_key(), stmt.label);
      }
    }
  }
  return edges;
}

inline std::set<EdgeTriple> edge_triples(const precis::TransformationGraph& graph) {
  std::set<EdgeTriple> out;
  for (const auto& e : graph.edges()) {
    out.emplace(graph.nodes()[e.src].key, graph.nodes()[e.dst].key, e.label);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Cost oracle: Floyd-Warshall over the mapped edges.
// ---------------------------------------------------------------------------

struct WeightedEdge {
  std::size_t src;
  std::size_t dst;
  double weight;
};

inline double oracle_ce(std::size_t n, const std::vector<WeightedEdge>& edges,
                        const std::vector<std::pair<std::size_t, std::size_t>>& pairs, double penalty) {
  if (pairs.empty()) return 0;
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> d(n, std::vector<double>(n, inf));
  for (std::size_t i = 0; i < n; ++i) d[i][i] = 0;
  for (const auto& e : edges) d[e.src][e.dst] = std::min(d[e.src][e.dst], e.weight);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
  double total = 0;
  for (auto [a, b] : pairs) total += d[a][b] == inf ? penalty : d[a][b];
  return total / static_cast<double>(pairs.size());
}

// Consecutive log entries on different queries, with multiplicity.
inline std::vector<std::pair<std::size_t, std::size_t>> oracle_adjacent_pairs(const std::vector<std::size_t>& seq) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 1; i < seq.size(); ++i) {
    if (seq[i - 1] != seq[i]) out.emplace_back(seq[i - 1], seq[i]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic optimizer instances: groups of random edges over a few queries,
// all at a numeric value site so button, slider and textbox all apply.
// ---------------------------------------------------------------------------

struct Instance {
  precis::TransformationGraph graph;
  std::vector<precis::TransformationGroup> groups;
  precis::InteractionLibrary library;
  precis::CostModel cost;
  std::vector<std::size_t> sequence;
};

inline Instance random_instance(std::mt19937& rng) {
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  const std::size_t n = static_cast<std::size_t>(pick(2, 8));

  std::vector<std::size_t> sequence;
  for (std::size_t i = 0; i < n; ++i) sequence.push_back(i);
  const int extra = pick(0, 8);
  for (int i = 0; i < extra; ++i) sequence.push_back(static_cast<std::size_t>(pick(0, static_cast<int>(n) - 1)));
  std::shuffle(sequence.begin(), sequence.end(), rng);

  std::vector<precis::GraphNode> nodes;
  for (std::size_t i = 0; i < n; ++i) {
    precis::Ast ast = precis::parse_query("SELECT a FROM t WHERE x = " + std::to_string(i));
    precis::GraphNode node{ast.canonical_key(), precis::serialize(ast), ast, 0, {}};
    nodes.push_back(std::move(node));
  }
  for (std::size_t i = 0; i < sequence.size(); ++i) {
    nodes[sequence[i]].log_indexes.push_back(i);
    nodes[sequence[i]].multiplicity++;
  }

  const auto site = precis::SiteSignature::parse("query/where/expr[op=\"=\"]#0/numliteral@1");
  const std::size_t group_count = static_cast<std::size_t>(pick(1, 4));
  std::vector<precis::GraphEdge> edges;
  std::vector<precis::TransformationGroup> groups;
  for (std::size_t g = 0; g < group_count; ++g) {
    precis::TransformationGroup group;
    group.label = "g" + std::to_string(g);
    group.key = group.label + "|" + site.str();
    group.sites = {site};
    group.shape = precis::GroupShape::value;
    const int options = pick(1, 4);
    for (int o = 0; o < options; ++o) group.observed.push_back(std::to_string(o));
    const int count = pick(1, 5);
    for (int k = 0; k < count; ++k) {
      std::size_t a = static_cast<std::size_t>(pick(0, static_cast<int>(n) - 1));
      std::size_t b = static_cast<std::size_t>(pick(0, static_cast<int>(n) - 2));
      if (b >= a) ++b;
      group.edges.push_back(edges.size());
      edges.push_back(precis::GraphEdge{a, b, group.label, {}, {}});
    }
    groups.push_back(std::move(group));
  }

  std::vector<precis::WidgetKind> kinds{precis::WidgetKind::button, precis::WidgetKind::slider,
                                        precis::WidgetKind::textbox};
  std::shuffle(kinds.begin(), kinds.end(), rng);
  kinds.resize(static_cast<std::size_t>(pick(1, 3)));
  std::map<precis::WidgetKind, precis::WidgetCosts> widgets;
  for (auto k : kinds) widgets[k] = {static_cast<double>(pick(1, 5)), pick(1, 8) * 0.5};
  precis::InteractionLibrary library(widgets);

  const double budget = pick(0, 12);
  precis::TransformationGraph graph(std::move(nodes), std::move(edges));
  precis::CostModel cost = precis::CostModel::make(n, library, budget);
  return {std::move(graph), std::move(groups), std::move(library), cost, std::move(sequence)};
}

// Edges of the groups chosen in `choice` (-1 = unmapped, else index into
// the library's widget list), weighted by the chosen widget's c_e.
inline std::vector<WeightedEdge> mapped_edges(const Instance& inst, const std::vector<int>& choice) {
  std::vector<precis::WidgetKind> kinds;
  for (const auto& [k, c] : inst.library.widgets()) kinds.push_back(k);
  std::vector<WeightedEdge> out;
  for (std::size_t g = 0; g < inst.groups.size(); ++g) {
    if (choice[g] < 0) continue;
    const double w = inst.library.costs(kinds[static_cast<std::size_t>(choice[g])]).c_e;
    for (auto e : inst.groups[g].edges) {
      const auto& edge = inst.graph.edges()[e];
      out.push_back({edge.src, edge.dst, w});
    }
  }
  return out;
}

struct Optimum {
  double C_e = 0;
  double C_c = 0;
};

// Exhaustive search over every feasible assignment of at most one widget
// per group.
inline Optimum brute_force_optimum(const Instance& inst) {
  std::vector<precis::WidgetKind> kinds;
  for (const auto& [k, c] : inst.library.widgets()) kinds.push_back(k);
  const auto pairs = oracle_adjacent_pairs(inst.sequence);
  const std::size_t n = inst.graph.nodes().size();

  Optimum best{std::numeric_limits<double>::infinity(), 0};
  std::vector<int> choice(inst.groups.size(), -1);
  auto cost_of = [&](std::size_t g, int k) {
    double c = inst.library.costs(kinds[static_cast<std::size_t>(k)]).c_c;
    if (kinds[static_cast<std::size_t>(k)] == precis::WidgetKind::button) {
      c *= static_cast<double>(inst.groups[g].observed.size());
    }
    return c;
  };
  std::function<void(std::size_t, double)> search = [&](std::size_t g, double spent) {
    if (g == inst.groups.size()) {
      double ce = oracle_ce(n, mapped_edges(inst, choice), pairs, inst.cost.penalty);
      if (ce < best.C_e) best = {ce, spent};
      return;
    }
    choice[g] = -1;
    search(g + 1, spent);
    for (int k = 0; k < static_cast<int>(kinds.size()); ++k) {
      double c = cost_of(g, k);
      if (spent + c > inst.cost.S_max) continue;
      choice[g] = k;
      search(g + 1, spent + c);
    }
    choice[g] = -1;
  };
  search(0, 0);
  return best;
}

// ---------------------------------------------------------------------------
// Planted interfaces: each cluster is a query template over its own table
// with up to three widgets; the log is a random walk per cluster, one
// widget change per step.
// ---------------------------------------------------------------------------

struct PlantedCluster {
  std::string table;
  std::vector<std::string> categories;  // dropdown options; <2 means fixed
  bool top = false;                     // checkbox over TOP 5
  std::vector<std::string> bounds;      // slider values; <2 means fixed
};

struct PlantedState {
  std::size_t category = 0;
  bool top = false;
  std::size_t bound = 0;
};

inline std::string planted_sql(const PlantedCluster& c, const PlantedState& s) {
  std::string sql = "SELECT ";
  if (s.top) sql += "TOP 5 ";
  sql += "name, total FROM " + c.table + " WHERE category = '" +
         (c.categories.empty() ? std::string("all") : c.categories[s.category]) + "' AND total <= " +
         (c.bounds.empty() ? std::string("100") : c.bounds[s.bound]);
  return sql;
}

inline const char* planted_statements() {
  return "FROM where//expr[op=\"=\"]//strliteral AS S\n"
         "WHERE S@old not equal S@new AND |S| = 1\n"
         "MATCH change_category\n"
         "\n"
         "FROM where//expr[op=\"<=\"]//numliteral AS N\n"
         "WHERE N@old not equal N@new AND |N| = 1\n"
         "MATCH change_bound\n"
         "\n"
         "FROM topclause AS T\n"
         "WHERE T@old not equal T@new AND |T| = 1\n"
         "MATCH toggle_top\n";
}

// Random walk of `steps` moves per cluster, clusters one after another.
inline std::string planted_log(const std::vector<PlantedCluster>& clusters, std::size_t steps, std::mt19937& rng) {
  std::string log;
  for (const auto& c : clusters) {
    PlantedState s;
    log += planted_sql(c, s) + ";\n";
    std::vector<int> moves;
    if (c.categories.size() >= 2) moves.push_back(0);
    if (c.top) moves.push_back(1);
    if (c.bounds.size() >= 2) moves.push_back(2);
    for (std::size_t i = 0; i < steps && !moves.empty(); ++i) {
      int move = moves[std::uniform_int_distribution<std::size_t>(0, moves.size() - 1)(rng)];
      auto other = [&](std::size_t current, std::size_t size) {
        std::size_t v = std::uniform_int_distribution<std::size_t>(0, size - 2)(rng);
        return v >= current ? v + 1 : v;
      };
      if (move == 0) s.category = other(s.category, c.categories.size());
      if (move == 1) s.top = !s.top;
      if (move == 2) s.bound = other(s.bound, c.bounds.size());
      log += planted_sql(c, s) + ";\n";
    }
  }
  return log;
}

}  // namespace testing
