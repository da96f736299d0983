#include "precis/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <queue>

namespace precis {

namespace {

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

void add_unique(std::vector<std::string>& values, const std::string& v) {
  if (std::find(values.begin(), values.end(), v) == values.end()) values.push_back(v);
}

bool is_separator_list(const SiteSignature& sig) {
  switch (sig.parent_kind()) {
    case Kind::project:
    case Kind::from:
    case Kind::groupby:
    case Kind::orderby:
    case Kind::funccall:
      return true;
    case Kind::expr: {
      const Attrs& attrs = sig.parent_path.back().attrs;
      auto op = attrs.find("op");
      return op != attrs.end() && (op->second == "AND" || op->second == "OR");
    }
    default:
      return false;
  }
}

bool is_dropdown_kind(Kind k) {
  return k == Kind::strliteral || k == Kind::columnref || k == Kind::tablename || k == Kind::alias;
}

// The run covers the whole projection list at both ends of every edge.
bool spans_projection(const TransformationGroup& group, const TransformationGraph& graph) {
  const SiteSignature& sig = group.sites.front();
  if (sig.parent_kind() != Kind::project || sig.kinds != std::vector<Kind>{Kind::projectclause}) return false;
  for (auto e : group.edges) {
    const GraphEdge& edge = graph.edges()[e];
    for (auto n : {edge.src, edge.dst}) {
      const AstNode& root = graph.nodes()[n].ast.root();
      auto loc = resolve(sig, root);
      if (!loc) return false;
      const AstNode* parent = node_at(root, loc->parent);
      if (!parent || loc->start != 0 || loc->count != parent->children.size()) return false;
    }
  }
  return true;
}

bool nearly_equal(double a, double b) { return std::fabs(a - b) <= 1e-9 * std::max(1.0, std::fabs(a)); }

}  // namespace

std::optional<std::vector<std::size_t>> site_lca(const std::vector<SiteSignature>& sites, const AstNode& root) {
  std::optional<std::vector<std::size_t>> common;
  for (const auto& sig : sites) {
    auto loc = resolve(sig, root);
    if (!loc) return std::nullopt;
    if (!common) {
      common = loc->parent;
      continue;
    }
    std::size_t n = 0;
    while (n < common->size() && n < loc->parent.size() && (*common)[n] == loc->parent[n]) ++n;
    common->resize(n);
  }
  return common;
}

std::string text_at(const AstNode& root, const std::vector<std::size_t>& path) {
  if (path.empty()) return serialize(Ast(root));
  std::vector<std::size_t> parent_path(path.begin(), path.end() - 1);
  const AstNode* parent = node_at(root, parent_path);
  const AstNode* node = node_at(root, path);
  if (!parent || !node) return {};
  return serialize(*node, parent->kind);
}

std::vector<TransformationGroup> group_transformations(const TransformationGraph& graph) {
  std::map<std::string, TransformationGroup> by_key;
  for (std::size_t e = 0; e < graph.edges().size(); ++e) {
    const GraphEdge& edge = graph.edges()[e];
    std::vector<std::string> sigs;
    for (const auto& site : edge.sites) sigs.push_back(site.signature.str());
    std::string key = edge.label + "|" + join(sigs, ";");
    auto [it, inserted] = by_key.try_emplace(key);
    TransformationGroup& g = it->second;
    if (inserted) {
      g.key = key;
      g.label = edge.label;
      for (const auto& site : edge.sites) g.sites.push_back(site.signature);
    }
    g.edges.push_back(e);
  }

  std::vector<TransformationGroup> groups;
  for (auto& [key, g] : by_key) {
    if (g.sites.size() != 1) {
      g.shape = GroupShape::multi;
      for (auto e : g.edges) {
        const GraphEdge& edge = graph.edges()[e];
        for (auto n : {edge.src, edge.dst}) {
          const AstNode& root = graph.nodes()[n].ast.root();
          if (auto lca = site_lca(g.sites, root)) add_unique(g.observed, text_at(root, *lca));
        }
      }
      groups.push_back(std::move(g));
      continue;
    }
    bool all_value = true;
    bool all_toggle = true;
    std::vector<std::string> present;
    for (auto e : g.edges) {
      const SiteChange& site = graph.edges()[e].sites.front();
      std::size_t o = site.old_values.size();
      std::size_t n = site.new_values.size();
      all_value = all_value && o == 1 && n == 1;
      all_toggle = all_toggle && o + n == 1;
      add_unique(g.observed, join(site.old_values, ", "));
      add_unique(g.observed, join(site.new_values, ", "));
      if (o + n == 1) add_unique(present, o ? site.old_values.front() : site.new_values.front());
    }
    if (all_value) {
      g.shape = GroupShape::value;
    } else if (all_toggle && present.size() == 1) {
      g.shape = GroupShape::toggle;
    } else {
      g.shape = GroupShape::set;
    }
    groups.push_back(std::move(g));
  }
  return groups;
}

std::vector<WidgetKind> compatible_widgets(const TransformationGroup& group, const TransformationGraph& graph) {
  std::vector<WidgetKind> out{WidgetKind::button};
  if (group.shape == GroupShape::multi) return out;
  const SiteSignature& sig = group.sites.front();
  const bool single_kind = sig.kinds.size() == 1;
  const Kind kind = sig.kinds.front();

  if (group.shape == GroupShape::toggle && !is_separator_list(sig)) out.push_back(WidgetKind::checkbox);
  if (group.shape == GroupShape::value && single_kind) {
    if (is_dropdown_kind(kind)) out.push_back(WidgetKind::dropdown);
    if (kind == Kind::numliteral) out.push_back(WidgetKind::slider);
    if (is_leaf_kind(kind)) out.push_back(WidgetKind::textbox);
  }
  if (group.shape != GroupShape::toggle && spans_projection(group, graph)) out.push_back(WidgetKind::listbox);
  return out;
}

double complexity(const TransformationGroup& group, WidgetKind kind, const InteractionLibrary& library) {
  double c_c = library.costs(kind).c_c;
  if (kind == WidgetKind::button) c_c *= static_cast<double>(std::max<std::size_t>(1, group.observed.size()));
  return c_c;
}

std::vector<std::pair<std::size_t, std::size_t>> pair_universe(const TransformationGraph& graph, PairUniverse kind) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  if (kind == PairUniverse::adjacent) {
    auto seq = graph.log_sequence();
    for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
      if (seq[i] != seq[i + 1]) pairs.emplace_back(seq[i], seq[i + 1]);
    }
  } else {
    std::size_t n = graph.nodes().size();
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i != j) pairs.emplace_back(i, j);
      }
    }
  }
  return pairs;
}

double compute_ce(const TransformationGraph& graph, const std::vector<TransformationGroup>& groups,
                  const std::vector<Assignment>& assignments, const CostModel& cost) {
  auto pairs = pair_universe(graph, cost.pairs);
  if (pairs.empty()) return 0;

  const std::size_t n = graph.nodes().size();
  std::vector<std::vector<std::pair<std::size_t, double>>> adjacency(n);
  for (const auto& a : assignments) {
    for (auto e : groups[a.group].edges) {
      const GraphEdge& edge = graph.edges()[e];
      adjacency[edge.src].emplace_back(edge.dst, a.c_e);
    }
  }

  constexpr double inf = std::numeric_limits<double>::infinity();
  std::map<std::size_t, std::vector<double>> dist_from;
  auto distances = [&](std::size_t source) -> const std::vector<double>& {
    auto it = dist_from.find(source);
    if (it != dist_from.end()) return it->second;
    std::vector<double> dist(n, inf);
    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
    dist[source] = 0;
    queue.emplace(0, source);
    while (!queue.empty()) {
      auto [d, u] = queue.top();
      queue.pop();
      if (d > dist[u]) continue;
      for (auto [v, w] : adjacency[u]) {
        if (d + w < dist[v]) {
          dist[v] = d + w;
          queue.emplace(dist[v], v);
        }
      }
    }
    return dist_from.emplace(source, std::move(dist)).first->second;
  };

  double total = 0;
  for (auto [a, b] : pairs) {
    double d = distances(a)[b];
    total += d == inf ? cost.penalty : d;
  }
  return total / static_cast<double>(pairs.size());
}

Mapping greedy_optimize(const TransformationGraph& graph, const std::vector<TransformationGroup>& groups,
                        const InteractionLibrary& library, const CostModel& cost) {
  std::vector<std::vector<WidgetKind>> candidates(groups.size());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (auto kind : compatible_widgets(groups[g], graph)) {
      if (library.contains(kind)) candidates[g].push_back(kind);
    }
  }

  Mapping mapping;
  mapping.C_e = mapping.initial_C_e = compute_ce(graph, groups, {}, cost);
  std::vector<char> assigned(groups.size(), 0);
  std::vector<char> edge_covered(graph.edges().size(), 0);

  while (mapping.C_c < cost.S_max) {
    struct Best {
      std::size_t group;
      WidgetKind kind;
      double c_c;
      double C_e;
    };
    std::optional<Best> best;
    std::size_t evaluated = 0;
    for (std::size_t g = 0; g < groups.size(); ++g) {
      if (assigned[g]) continue;
      for (auto kind : candidates[g]) {
        double c_c = complexity(groups[g], kind, library);
        if (mapping.C_c + c_c > cost.S_max) continue;
        ++evaluated;
        auto trial = mapping.assignments;
        trial.push_back({g, kind, c_c, library.costs(kind).c_e});
        double ce = compute_ce(graph, groups, trial, cost);
        bool better = false;
        if (!best) {
          better = true;
        } else if (!nearly_equal(ce, best->C_e)) {
          better = ce < best->C_e;
        } else if (c_c != best->c_c) {
          better = c_c < best->c_c;
        } else {
          better = groups[g].key < groups[best->group].key;
        }
        if (better) best = Best{g, kind, c_c, ce};
      }
    }
    if (!best || best->C_e > mapping.C_e || nearly_equal(best->C_e, mapping.C_e)) break;

    mapping.assignments.push_back({best->group, best->kind, best->c_c, library.costs(best->kind).c_e});
    mapping.C_c += best->c_c;
    mapping.C_e = best->C_e;
    assigned[best->group] = 1;
    for (auto e : groups[best->group].edges) edge_covered[e] = 1;

    std::vector<int> open_edges(graph.nodes().size(), 0);
    std::vector<char> touched(graph.nodes().size(), 0);
    for (std::size_t e = 0; e < graph.edges().size(); ++e) {
      const GraphEdge& edge = graph.edges()[e];
      touched[edge.src] = touched[edge.dst] = 1;
      if (!edge_covered[e]) ++open_edges[edge.src], ++open_edges[edge.dst];
    }
    std::size_t retired = 0;
    for (std::size_t v = 0; v < graph.nodes().size(); ++v) retired += touched[v] && open_edges[v] == 0;
    mapping.trace.push_back({best->group, best->kind, mapping.C_e, mapping.C_c, evaluated, retired});
  }
  return mapping;
}

}  // namespace precis
