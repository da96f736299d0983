#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "precis/ast.hpp"
#include "precis/node_path.hpp"
#include "precis/site.hpp"

namespace precis {

// ---------------------------------------------------------------------------
// Statement syntax
//
//   FROM <path> AS <var> [, <path> AS <var>]...
//   WHERE <predicate>
//   MATCH <label>
//
// Predicates combine comparisons with AND / OR / NOT and parentheses:
//   set comparisons      a equal b | a not equal b | a subset b
//   integer comparisons  = < <= > >=
// over terms
//   v | v@old | v@new    value sets of the nodes bound to v
//   |t|                  size of a set term; for a bare |v|, the number of
//                        aligned positions whose value changed
//   n | t + n            integer literal, integer plus literal
// ---------------------------------------------------------------------------

enum class Version { either, old_side, new_side };

struct Term {
  enum class Op { variable, size, integer, plus };

  Op op = Op::integer;
  std::string var;
  Version version = Version::either;
  long long number = 0;
  std::vector<Term> operands;
  std::size_t offset = 0;
};

struct Predicate {
  enum class Op { all_of, any_of, negate, set_equal, set_not_equal, subset, eq, lt, le, gt, ge };

  Op op = Op::all_of;
  std::vector<Predicate> operands;  // boolean connectives
  std::vector<Term> terms;          // comparisons: exactly two
};

struct Binding {
  NodePath path;
  std::string var;
};

struct Statement {
  std::vector<Binding> bindings;
  Predicate predicate;
  std::string label;
};

/// Throws SyntaxError, UnknownKind (bad path) or UndeclaredVariable.
Statement parse_statement(std::string_view text);

class StatementLibrary {
 public:
  StatementLibrary() = default;
  /// Throws DuplicateLabel.
  explicit StatementLibrary(std::vector<Statement> statements);

  const std::vector<Statement>& statements() const { return statements_; }
  std::size_t size() const { return statements_.size(); }
  bool empty() const { return statements_.empty(); }
  const Statement* find(std::string_view label) const;
  /// Position of `label` in the library, or size() when absent.
  std::size_t index_of(std::string_view label) const;

 private:
  std::vector<Statement> statements_;
};

/// Parses a `.pilang` file: statements separated by blank lines, full-line
/// `//` comments. Errors carry the failing statement's index.
StatementLibrary parse_library(std::string_view text);

// ---------------------------------------------------------------------------
// Matching
// ---------------------------------------------------------------------------

struct SiteValue {
  std::string signature;
  std::string text;

  friend bool operator==(const SiteValue&, const SiteValue&) = default;
};

struct VarBinding {
  std::string var;
  std::vector<SiteValue> old_values;
  std::vector<SiteValue> new_values;

  friend bool operator==(const VarBinding&, const VarBinding&) = default;
};

/// One changed run of matched siblings: its signature plus the serialized
/// nodes on each side (either side may be empty for inserts and deletes).
struct SiteChange {
  SiteSignature signature;
  std::vector<std::string> old_values;
  std::vector<std::string> new_values;

  friend bool operator==(const SiteChange&, const SiteChange&) = default;
};

/// Raw positions of a changed run in the two trees of one evaluation.
struct SitePlacement {
  std::vector<std::size_t> old_parent;
  std::vector<std::size_t> new_parent;
  std::size_t old_start = 0;
  std::size_t old_count = 0;
  std::size_t new_start = 0;
  std::size_t new_count = 0;
  bool whole_tree = false;
};

struct MatchResult {
  std::string label;
  std::vector<VarBinding> bindings;
  std::vector<SiteChange> sites;           // changed runs only, document order
  std::vector<SitePlacement> placements;   // parallel to `sites`
};

/// Evaluates `stmt` on the ordered pair (old, new).
///
/// Every subtree rooted at a node matched by any binding becomes a
/// placeholder; adjacent placeholders merge into one run. The pair matches
/// when the remaining context trees are identical (a run present on one side
/// only counts as an empty run on the other) and the predicate holds.
///
/// Throws TypeMismatch when the predicate mixes set and integer terms.
std::optional<MatchResult> evaluate(const Statement& stmt, const Ast& old_ast, const Ast& new_ast);

/// Rebuilds `new_ast` by transplanting the changed runs of `match` into
/// `old_ast`. `match` must come from evaluate(stmt, old_ast, new_ast).
Ast replay(const Ast& old_ast, const Ast& new_ast, const MatchResult& match);

/// Throws TypeMismatch if the predicate is ill-typed.
void typecheck(const Predicate& predicate);

}  // namespace precis
