#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "precis/ast.hpp"

namespace precis {

enum class Axis { child, descendant };

struct PathStep {
  Axis axis = Axis::child;
  Kind kind = Kind::query;
  std::vector<std::pair<std::string, std::string>> predicates;  // attr = value
};

/// XPath-like location path such as `where//expr[op="="]//strliteral`.
///
/// A path written without a leading slash (the usual spelling, e.g.
/// `project//projectclause`) starts anywhere in the tree: its first step
/// matches the root or any descendant. `/kind` anchors the first step at the
/// root and `//kind` is the explicit form of the unanchored start.
struct NodePath {
  std::vector<PathStep> steps;
  bool anchored = false;

  std::string str() const;
};

/// Throws SyntaxError for malformed text and UnknownKind for names outside
/// the node vocabulary.
NodePath parse_path(std::string_view text);

/// Matching nodes in document order, without duplicates.
std::vector<const AstNode*> eval_path(const NodePath& path, const AstNode& root);

/// Same, as preorder indexes into `index`.
std::vector<std::size_t> eval_path(const NodePath& path, const AstIndex& index);

}  // namespace precis
