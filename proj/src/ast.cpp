#include "precis/ast.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <stdexcept>
#include <unordered_map>

namespace precis {

namespace {

constexpr std::array<std::string_view, 22> kKindNames = {
    "query",     "project",    "projectclause", "star",      "from",       "tableclause",
    "tablename", "where",      "having",        "groupby",   "groupitem",  "orderby",
    "orderitem", "limitclause", "topclause",    "expr",      "funccall",   "columnref",
    "strliteral", "numliteral", "alias",        "slot",
};

void escape_into(std::string& out, std::string_view text) {
  for (char c : text) {
    switch (c) {
      case '\\':
      case '(':
      case ')':
      case '[':
      case ']':
      case '{':
      case '}':
      case ',':
      case '=':
        out.push_back('\\');
        break;
      default:
        break;
    }
    out.push_back(c);
  }
}

void key_into(std::string& out, const AstNode& node) {
  out += kind_name(node.kind);
  if (!node.attrs.empty()) {
    out.push_back('[');
    bool first = true;
    for (const auto& [name, value] : node.attrs) {
      if (!first) out.push_back(',');
      first = false;
      escape_into(out, name);
      out.push_back('=');
      escape_into(out, value);
    }
    out.push_back(']');
  }
  if (node.value) {
    out.push_back('{');
    escape_into(out, node.kind == Kind::numliteral ? normalize_decimal(*node.value) : *node.value);
    out.push_back('}');
  }
  if (!node.children.empty()) {
    out.push_back('(');
    for (std::size_t i = 0; i < node.children.size(); ++i) {
      if (i) out.push_back(',');
      key_into(out, node.children[i]);
    }
    out.push_back(')');
  }
}

}  // namespace

std::string_view kind_name(Kind kind) { return kKindNames[static_cast<std::size_t>(kind)]; }

std::optional<Kind> kind_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (kKindNames[i] == name && static_cast<Kind>(i) != Kind::slot) return static_cast<Kind>(i);
  }
  return std::nullopt;
}

bool is_leaf_kind(Kind kind) {
  switch (kind) {
    case Kind::strliteral:
    case Kind::numliteral:
    case Kind::tablename:
    case Kind::columnref:
    case Kind::alias:
      return true;
    default:
      return false;
  }
}

std::string_view AstNode::attr(std::string_view name) const {
  auto it = attrs.find(name);
  return it == attrs.end() ? std::string_view{} : std::string_view{it->second};
}

bool AstNode::has_attr(std::string_view name) const { return attrs.find(name) != attrs.end(); }

std::string normalize_decimal(std::string_view lexeme) {
  std::string_view s = lexeme;
  bool negative = false;
  if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }
  auto dot = s.find('.');
  std::string_view whole = s.substr(0, dot);
  std::string_view frac = dot == std::string_view::npos ? std::string_view{} : s.substr(dot + 1);
  auto all_digits = [](std::string_view t) {
    return std::all_of(t.begin(), t.end(), [](unsigned char c) { return std::isdigit(c) != 0; });
  };
  if ((whole.empty() && frac.empty()) || !all_digits(whole) || !all_digits(frac)) {
    return std::string(lexeme);
  }
  while (!whole.empty() && whole.front() == '0') whole.remove_prefix(1);
  while (!frac.empty() && frac.back() == '0') frac.remove_suffix(1);
  std::string out;
  out += whole.empty() ? "0" : std::string(whole);
  if (!frac.empty()) {
    out.push_back('.');
    out += frac;
  }
  if (negative && out != "0") out.insert(out.begin(), '-');
  return out;
}

std::string canonical_key(const AstNode& node) {
  std::string out;
  key_into(out, node);
  return out;
}

bool structurally_equal(const AstNode& a, const AstNode& b) {
  if (a.kind != b.kind || a.attrs != b.attrs || a.children.size() != b.children.size()) return false;
  if (a.value.has_value() != b.value.has_value()) return false;
  if (a.value) {
    if (a.kind == Kind::numliteral) {
      if (normalize_decimal(*a.value) != normalize_decimal(*b.value)) return false;
    } else if (*a.value != *b.value) {
      return false;
    }
  }
  for (std::size_t i = 0; i < a.children.size(); ++i) {
    if (!structurally_equal(a.children[i], b.children[i])) return false;
  }
  return true;
}

Ast::Ast(AstNode root) : root_(std::move(root)) {
  if (root_.kind != Kind::query) throw std::invalid_argument("Ast root must be a query node");
  key_ = precis::canonical_key(root_);
}

AstIndex::AstIndex(const AstNode& root) { build(root, npos, 0); }

void AstIndex::build(const AstNode& node, std::size_t parent, std::size_t position) {
  std::size_t self = nodes_.size();
  nodes_.push_back(&node);
  parent_.push_back(parent);
  end_.push_back(0);
  position_.push_back(position);
  for (std::size_t i = 0; i < node.children.size(); ++i) build(node.children[i], self, i);
  end_[self] = nodes_.size();
}

std::size_t AstIndex::index_of(const AstNode* node) const {
  auto it = std::find(nodes_.begin(), nodes_.end(), node);
  return it == nodes_.end() ? npos : static_cast<std::size_t>(it - nodes_.begin());
}

std::vector<std::size_t> AstIndex::path_to(std::size_t i) const {
  std::vector<std::size_t> path;
  while (parent_[i] != npos) {
    path.push_back(position_[i]);
    i = parent_[i];
  }
  std::reverse(path.begin(), path.end());
  return path;
}

const AstNode* node_at(const AstNode& root, const std::vector<std::size_t>& path) {
  const AstNode* cur = &root;
  for (std::size_t step : path) {
    if (step >= cur->children.size()) return nullptr;
    cur = &cur->children[step];
  }
  return cur;
}

AstNode* node_at(AstNode& root, const std::vector<std::size_t>& path) {
  return const_cast<AstNode*>(node_at(static_cast<const AstNode&>(root), path));
}

}  // namespace precis
