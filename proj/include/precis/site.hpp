#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "precis/ast.hpp"

namespace precis {

struct SignatureStep {
  Kind kind = Kind::query;
  Attrs attrs;
  // Position among the parent's context children. Children of the query
  // root are identified by kind alone, since each clause kind occurs once.
  std::optional<std::size_t> ordinal;

  friend bool operator==(const SignatureStep&, const SignatureStep&) = default;
};

/// Position of a change site with literal values stripped, e.g.
/// `query/where/expr[op="="]#0/strliteral@1` or `query/topclause`.
///
/// `parent_path` runs from the query root to the parent of the changed
/// nodes; `gap` counts the context siblings in front of the changed run.
struct SiteSignature {
  std::vector<SignatureStep> parent_path;
  std::vector<Kind> kinds;
  std::optional<std::size_t> gap;

  std::string str() const;
  /// Throws SyntaxError or UnknownKind.
  static SiteSignature parse(std::string_view text);

  /// First clause below the query root (the changed kind itself for
  /// clause-level sites).
  Kind clause() const;
  Kind parent_kind() const;

  friend bool operator==(const SiteSignature&, const SiteSignature&) = default;
};

/// Where a signature lands in a particular tree: the raw child-index path of
/// the parent plus the run [start, start + count) of matching children.
/// `count == 0` means the site is absent and `start` is where it would go.
struct SiteLocation {
  std::vector<std::size_t> parent;
  std::size_t start = 0;
  std::size_t count = 0;
};

/// Locates a signature in a tree other than the one it was computed on.
/// Returns nullopt when the tree's shape does not admit the site.
std::optional<SiteLocation> resolve(const SiteSignature& signature, const AstNode& root);

/// Where a clause of `kind` goes among a query's children (clause order).
std::size_t clause_insert_position(const AstNode& query, Kind kind);

}  // namespace precis
