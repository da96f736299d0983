#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "precis/graph.hpp"
#include "precis/site.hpp"
#include "precis/widgets.hpp"

namespace precis {

enum class GroupShape {
  value,   // one node replaced by another
  toggle,  // one fixed subtree added or removed
  set,     // a run of siblings grows, shrinks or is rearranged
  multi,   // several sites change together
};

/// All edges sharing a label and the same list of change sites.
struct TransformationGroup {
  std::string key;  // label + "|" + site signatures joined by ";"
  std::string label;
  std::vector<SiteSignature> sites;
  std::vector<std::size_t> edges;  // indexes into graph.edges()
  GroupShape shape = GroupShape::value;
  // Distinct run texts seen at the site (runs joined by ", "), in first-seen
  // order. Empty string stands for an absent run. Single-site groups only.
  std::vector<std::string> observed;
};

std::vector<TransformationGroup> group_transformations(const TransformationGraph& graph);

/// Raw path of the lowest common ancestor of several sites in `root`, or
/// nullopt if a site does not resolve there.
std::optional<std::vector<std::size_t>> site_lca(const std::vector<SiteSignature>& sites, const AstNode& root);

/// Serialized text of the subtree at `path` (the whole query for an empty path).
std::string text_at(const AstNode& root, const std::vector<std::size_t>& path);

/// Widget kinds that can express `group`, in WidgetKind order.
std::vector<WidgetKind> compatible_widgets(const TransformationGroup& group, const TransformationGraph& graph);

/// Complexity of placing `kind` on `group` (buttons pay per option).
double complexity(const TransformationGroup& group, WidgetKind kind, const InteractionLibrary& library);

struct Assignment {
  std::size_t group = 0;
  WidgetKind kind = WidgetKind::button;
  double c_c = 0;
  double c_e = 0;
};

struct GreedyStep {
  std::size_t group = 0;
  WidgetKind kind = WidgetKind::button;
  double C_e = 0;  // after this step
  double C_c = 0;
  std::size_t candidates = 0;       // feasible candidates evaluated
  std::size_t retired_vertices = 0; // vertices with no uncovered edge left
};

struct Mapping {
  std::vector<Assignment> assignments;
  double C_e = 0;
  double C_c = 0;
  double initial_C_e = 0;  // C_e of the empty mapping
  std::vector<GreedyStep> trace;
};

/// Average shortest-path cost over the pair universe, using only edges of
/// assigned groups. Unreachable pairs cost the penalty; no pairs gives 0.
double compute_ce(const TransformationGraph& graph, const std::vector<TransformationGroup>& groups,
                  const std::vector<Assignment>& assignments, const CostModel& cost);

/// Ordered (source, target) node pairs that C_e averages over. Adjacent
/// pairs keep their multiplicity.
std::vector<std::pair<std::size_t, std::size_t>> pair_universe(const TransformationGraph& graph, PairUniverse kind);

/// Repeatedly adds the feasible (group, widget) candidate that lowers C_e
/// most; ties go to the smaller c_c, then the smaller group key. Stops when
/// no candidate strictly improves C_e or the budget is used up.
Mapping greedy_optimize(const TransformationGraph& graph, const std::vector<TransformationGroup>& groups,
                        const InteractionLibrary& library, const CostModel& cost);

}  // namespace precis
