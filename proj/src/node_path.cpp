#include "precis/node_path.hpp"

#include <cctype>

#include "precis/error.hpp"

namespace precis {

namespace {

bool matches(const PathStep& step, const AstNode& node) {
  if (node.kind != step.kind) return false;
  for (const auto& [name, value] : step.predicates) {
    auto it = node.attrs.find(name);
    if (it == node.attrs.end() || it->second != value) return false;
  }
  return true;
}

bool is_name_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

}  // namespace

NodePath parse_path(std::string_view text) {
  NodePath path;
  std::size_t i = 0;
  const std::size_t n = text.size();
  auto fail = [&](const std::string& message) -> void { throw SyntaxError(message, i); };

  Axis axis = Axis::descendant;
  if (text.substr(0, 2) == "//") {
    i = 2;
  } else if (text.substr(0, 1) == "/") {
    i = 1;
    path.anchored = true;
    axis = Axis::child;
  }

  while (true) {
    std::size_t begin = i;
    while (i < n && is_name_char(text[i])) ++i;
    if (i == begin) fail("expected a node kind");
    std::string name(text.substr(begin, i - begin));
    auto kind = kind_from_name(name);
    if (!kind) throw UnknownKind(name);
    PathStep step{axis, *kind, {}};

    while (i < n && text[i] == '[') {
      ++i;
      std::size_t attr_begin = i;
      while (i < n && is_name_char(text[i])) ++i;
      if (i == attr_begin) fail("expected an attribute name");
      std::string attr(text.substr(attr_begin, i - attr_begin));
      if (i >= n || text[i] != '=') fail("expected '='");
      ++i;
      std::string value;
      if (i < n && (text[i] == '"' || text[i] == '\'')) {
        char quote = text[i++];
        std::size_t value_begin = i;
        while (i < n && text[i] != quote) ++i;
        if (i >= n) fail("unterminated attribute value");
        value = std::string(text.substr(value_begin, i - value_begin));
        ++i;
      } else {
        std::size_t value_begin = i;
        while (i < n && text[i] != ']') ++i;
        value = std::string(text.substr(value_begin, i - value_begin));
      }
      if (i >= n || text[i] != ']') fail("expected ']'");
      ++i;
      step.predicates.emplace_back(std::move(attr), std::move(value));
    }
    path.steps.push_back(std::move(step));

    if (i == n) break;
    if (text.substr(i, 2) == "//") {
      axis = Axis::descendant;
      i += 2;
    } else if (text[i] == '/') {
      axis = Axis::child;
      i += 1;
    } else {
      fail("unexpected character in path");
    }
  }
  return path;
}

std::string NodePath::str() const {
  std::string out;
  for (std::size_t s = 0; s < steps.size(); ++s) {
    const PathStep& step = steps[s];
    if (s == 0) {
      if (anchored) out += "/";
    } else {
      out += step.axis == Axis::descendant ? "//" : "/";
    }
    out += kind_name(step.kind);
    for (const auto& [name, value] : step.predicates) out += "[" + name + "=\"" + value + "\"]";
  }
  return out;
}

std::vector<std::size_t> eval_path(const NodePath& path, const AstIndex& index) {
  const std::size_t n = index.size();
  std::vector<char> current(n, 0);
  if (path.steps.empty() || n == 0) return {};

  const PathStep& first = path.steps.front();
  if (path.anchored) {
    current[0] = matches(first, index.node(0)) ? 1 : 0;
  } else {
    for (std::size_t i = 0; i < n; ++i) current[i] = matches(first, index.node(i)) ? 1 : 0;
  }

  for (std::size_t s = 1; s < path.steps.size(); ++s) {
    const PathStep& step = path.steps[s];
    std::vector<char> next(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
      if (!current[i]) continue;
      if (step.axis == Axis::child) {
        for (std::size_t j = i + 1; j < index.subtree_end(i); j = index.subtree_end(j)) {
          if (matches(step, index.node(j))) next[j] = 1;
        }
      } else {
        for (std::size_t j = i + 1; j < index.subtree_end(i); ++j) {
          if (!next[j] && matches(step, index.node(j))) next[j] = 1;
        }
      }
    }
    current = std::move(next);
  }

  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < n; ++i) {
    if (current[i]) out.push_back(i);
  }
  return out;
}

std::vector<const AstNode*> eval_path(const NodePath& path, const AstNode& root) {
  AstIndex index(root);
  std::vector<const AstNode*> out;
  for (std::size_t i : eval_path(path, index)) out.push_back(&index.node(i));
  return out;
}

}  // namespace precis
