#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace precis {

// Closed node vocabulary. `slot` never comes out of the SQL parser; it marks
// a widget-bound hole in an interface template.
enum class Kind : std::uint8_t {
  query,
  project,
  projectclause,
  star,
  from,
  tableclause,
  tablename,
  where,
  having,
  groupby,
  groupitem,
  orderby,
  orderitem,
  limitclause,
  topclause,
  expr,
  funccall,
  columnref,
  strliteral,
  numliteral,
  alias,
  slot,
};

std::string_view kind_name(Kind kind);

/// Looks up a vocabulary kind by name. `slot` is not addressable.
std::optional<Kind> kind_from_name(std::string_view name);

/// Kinds that carry a `value` (literals and identifiers).
bool is_leaf_kind(Kind kind);

struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;
};

using Attrs = std::map<std::string, std::string, std::less<>>;

struct AstNode {
  Kind kind = Kind::query;
  Attrs attrs;
  std::optional<std::string> value;
  std::vector<AstNode> children;
  Span span;

  std::string_view attr(std::string_view name) const;
  bool has_attr(std::string_view name) const;
};

/// Canonical value of a decimal lexeme: "4983.00" -> "4983", "0.50" -> "0.5".
std::string normalize_decimal(std::string_view lexeme);

/// Injective serialization of a subtree's structure. Spans are ignored and
/// number literals compare by decimal value.
std::string canonical_key(const AstNode& node);

bool structurally_equal(const AstNode& a, const AstNode& b);

/// One parsed query. Immutable after construction.
class Ast {
 public:
  explicit Ast(AstNode root);

  const AstNode& root() const { return root_; }
  const std::string& canonical_key() const { return key_; }

  friend bool operator==(const Ast& a, const Ast& b) { return a.key_ == b.key_; }

 private:
  AstNode root_;
  std::string key_;
};

/// Preorder view of a tree: node pointers, parent links and subtree extents.
/// Valid only while the indexed tree is alive and unmodified.
class AstIndex {
 public:
  explicit AstIndex(const AstNode& root);

  std::size_t size() const { return nodes_.size(); }
  const AstNode& node(std::size_t i) const { return *nodes_[i]; }
  /// Parent preorder index; the root's parent is npos.
  std::size_t parent(std::size_t i) const { return parent_[i]; }
  /// One past the last preorder index in i's subtree.
  std::size_t subtree_end(std::size_t i) const { return end_[i]; }
  /// Position of i among its parent's children.
  std::size_t child_position(std::size_t i) const { return position_[i]; }
  std::size_t index_of(const AstNode* node) const;
  /// Raw child-index path from the root down to i.
  std::vector<std::size_t> path_to(std::size_t i) const;

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  void build(const AstNode& node, std::size_t parent, std::size_t position);

  std::vector<const AstNode*> nodes_;
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> end_;
  std::vector<std::size_t> position_;
};

/// Follows a raw child-index path; nullptr when the path leaves the tree.
const AstNode* node_at(const AstNode& root, const std::vector<std::size_t>& path);
AstNode* node_at(AstNode& root, const std::vector<std::size_t>& path);

}  // namespace precis
