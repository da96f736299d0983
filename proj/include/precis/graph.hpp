#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "precis/ast.hpp"
#include "precis/pilang.hpp"
#include "precis/sql.hpp"

namespace precis {

enum class Pairing { automatic, adjacent, window, all_pairs };

struct MiningConfig {
  Pairing pairing = Pairing::automatic;
  std::size_t window = 1;
  // Distinct-query count up to which `automatic` means all-pairs.
  std::size_t all_pairs_limit = 500;
  // 0 picks the hardware concurrency.
  unsigned threads = 0;

  /// Accepts `auto`, `adjacent`, `all` and `window:k` (k >= 1).
  /// Throws SyntaxError.
  static MiningConfig parse(std::string_view pairing);
};

struct GraphNode {
  std::string key;
  std::string sql;
  Ast ast;
  std::size_t multiplicity = 0;
  std::vector<std::size_t> log_indexes;  // ascending
};

struct GraphEdge {
  std::size_t src = 0;
  std::size_t dst = 0;
  std::string label;
  std::vector<SiteChange> sites;
  std::vector<VarBinding> bindings;

  friend bool operator==(const GraphEdge&, const GraphEdge&) = default;
};

/// Nodes are distinct queries ordered by first appearance in the log; edges
/// are sorted by (src, dst, statement order in the library).
class TransformationGraph {
 public:
  TransformationGraph() = default;
  TransformationGraph(std::vector<GraphNode> nodes, std::vector<GraphEdge> edges);

  const std::vector<GraphNode>& nodes() const { return nodes_; }
  const std::vector<GraphEdge>& edges() const { return edges_; }

  /// Node id of every log entry, in log order.
  std::vector<std::size_t> log_sequence() const;
  std::size_t log_size() const;

  std::size_t find(std::string_view key) const;  // nodes().size() if absent
  std::map<std::string, std::size_t> label_counts() const;

  /// Structural equality (node keys, multiplicities, log indexes, edges).
  friend bool operator==(const TransformationGraph& a, const TransformationGraph& b);

 private:
  std::vector<GraphNode> nodes_;
  std::vector<GraphEdge> edges_;
};

/// Evaluates every statement on both orientations of each selected pair of
/// distinct queries. Throws TypeMismatch for an ill-typed library.
TransformationGraph mine(const std::vector<LogEntry>& log, const StatementLibrary& library,
                         const MiningConfig& config = {});

/// Unordered pairs (i < j) of node ids selected by the pairing strategy.
std::vector<std::pair<std::size_t, std::size_t>> select_pairs(const std::vector<std::size_t>& sequence,
                                                              std::size_t distinct, const MiningConfig& config);

std::string export_dot(const TransformationGraph& graph);
std::string export_json(const TransformationGraph& graph);

/// Throws SchemaError naming the offending location.
TransformationGraph import_json(std::string_view text);

}  // namespace precis
