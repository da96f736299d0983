#include "precis/site.hpp"

#include <algorithm>
#include <cctype>

#include "precis/error.hpp"

namespace precis {

namespace {

int clause_rank(Kind kind) {
  switch (kind) {
    case Kind::project: return 0;
    case Kind::from: return 1;
    case Kind::where: return 2;
    case Kind::groupby: return 3;
    case Kind::having: return 4;
    case Kind::orderby: return 5;
    case Kind::limitclause: return 6;
    case Kind::topclause: return 7;
    default: return 8;
  }
}

bool attrs_match(const Attrs& wanted, const AstNode& node) {
  std::size_t compared = 0;
  for (const auto& [name, value] : node.attrs) {
    if (name == "parens") continue;
    auto it = wanted.find(name);
    if (it == wanted.end() || it->second != value) return false;
    ++compared;
  }
  return compared == wanted.size();
}

void quote_into(std::string& out, std::string_view value) {
  out.push_back('"');
  for (char c : value) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
}

// Splits on '/' outside quoted attribute values.
std::vector<std::string> split_segments(std::string_view text) {
  std::vector<std::string> out(1);
  bool quoted = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (quoted) {
      if (c == '\\' && i + 1 < text.size()) {
        out.back().push_back(c);
        out.back().push_back(text[++i]);
        continue;
      }
      if (c == '"') quoted = false;
    } else if (c == '"') {
      quoted = true;
    } else if (c == '/') {
      out.emplace_back();
      continue;
    }
    out.back().push_back(c);
  }
  return out;
}

Kind parse_kind(std::string_view name, std::size_t offset) {
  if (name.empty()) throw SyntaxError("expected a node kind", offset);
  auto kind = kind_from_name(name);
  if (!kind) throw UnknownKind(std::string(name));
  return *kind;
}

std::size_t parse_count(std::string_view digits, std::size_t offset) {
  if (digits.empty() || !std::all_of(digits.begin(), digits.end(),
                                     [](unsigned char c) { return std::isdigit(c) != 0; })) {
    throw SyntaxError("expected a position", offset);
  }
  return std::stoul(std::string(digits));
}

SignatureStep parse_step(std::string_view seg, std::size_t offset) {
  SignatureStep step;
  std::size_t i = 0;
  while (i < seg.size() && (std::isalnum(static_cast<unsigned char>(seg[i])) || seg[i] == '_')) ++i;
  step.kind = parse_kind(seg.substr(0, i), offset);
  while (i < seg.size() && seg[i] == '[') {
    std::size_t eq = seg.find('=', i);
    if (eq == std::string_view::npos || eq + 1 >= seg.size() || seg[eq + 1] != '"') {
      throw SyntaxError("malformed attribute", offset + i);
    }
    std::string name(seg.substr(i + 1, eq - i - 1));
    std::string value;
    std::size_t j = eq + 2;
    for (; j < seg.size() && seg[j] != '"'; ++j) {
      if (seg[j] == '\\' && j + 1 < seg.size()) ++j;
      value.push_back(seg[j]);
    }
    if (j + 1 >= seg.size() || seg[j + 1] != ']') throw SyntaxError("malformed attribute", offset + i);
    step.attrs[name] = value;
    i = j + 2;
  }
  if (i < seg.size()) {
    if (seg[i] != '#') throw SyntaxError("unexpected character in signature", offset + i);
    step.ordinal = parse_count(seg.substr(i + 1), offset + i + 1);
  }
  return step;
}

}  // namespace

std::string SiteSignature::str() const {
  std::string out;
  for (const auto& step : parent_path) {
    out += kind_name(step.kind);
    for (const auto& [name, value] : step.attrs) {
      out += '[';
      out += name;
      out += '=';
      quote_into(out, value);
      out += ']';
    }
    if (step.ordinal) out += "#" + std::to_string(*step.ordinal);
    out += '/';
  }
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    if (i) out += '|';
    out += kind_name(kinds[i]);
  }
  if (gap) out += "@" + std::to_string(*gap);
  return out;
}

SiteSignature SiteSignature::parse(std::string_view text) {
  SiteSignature sig;
  auto segments = split_segments(text);
  std::size_t offset = 0;
  for (std::size_t s = 0; s + 1 < segments.size(); ++s) {
    sig.parent_path.push_back(parse_step(segments[s], offset));
    offset += segments[s].size() + 1;
  }
  std::string_view last = segments.back();
  auto at = last.find('@');
  std::string_view kinds_part = last.substr(0, at);
  if (at != std::string_view::npos) sig.gap = parse_count(last.substr(at + 1), offset + at + 1);
  std::size_t k = 0;
  while (true) {
    auto bar = kinds_part.find('|', k);
    sig.kinds.push_back(parse_kind(kinds_part.substr(k, bar - k), offset + k));
    if (bar == std::string_view::npos) break;
    k = bar + 1;
  }
  return sig;
}

Kind SiteSignature::clause() const {
  if (parent_path.size() >= 2) return parent_path[1].kind;
  return kinds.empty() ? Kind::query : kinds.front();
}

Kind SiteSignature::parent_kind() const {
  return parent_path.empty() ? Kind::query : parent_path.back().kind;
}

std::size_t clause_insert_position(const AstNode& query, Kind kind) {
  std::size_t pos = 0;
  for (const auto& child : query.children) {
    Kind child_kind = child.kind;
    if (child.kind == Kind::slot) {
      child_kind = kind_from_name(child.attr("for")).value_or(Kind::slot);
    }
    if (clause_rank(child_kind) < clause_rank(kind)) ++pos;
  }
  return pos;
}

std::optional<SiteLocation> resolve(const SiteSignature& signature, const AstNode& root) {
  if (signature.parent_path.empty() || signature.parent_path.front().kind != root.kind) {
    return std::nullopt;
  }
  SiteLocation loc;
  const AstNode* parent = &root;
  for (std::size_t s = 1; s < signature.parent_path.size(); ++s) {
    const SignatureStep& step = signature.parent_path[s];
    std::optional<std::size_t> found;
    if (step.ordinal) {
      if (*step.ordinal < parent->children.size()) {
        const AstNode& child = parent->children[*step.ordinal];
        if (child.kind == step.kind && attrs_match(step.attrs, child)) found = *step.ordinal;
      }
    } else {
      for (std::size_t i = 0; i < parent->children.size(); ++i) {
        const AstNode& child = parent->children[i];
        if (child.kind == step.kind && attrs_match(step.attrs, child)) {
          found = i;
          break;
        }
      }
    }
    if (!found) return std::nullopt;
    loc.parent.push_back(*found);
    parent = &parent->children[*found];
  }

  auto in_site = [&](const AstNode& node) {
    return std::find(signature.kinds.begin(), signature.kinds.end(), node.kind) !=
           signature.kinds.end();
  };
  if (!signature.gap) {
    for (std::size_t i = 0; i < parent->children.size(); ++i) {
      if (in_site(parent->children[i])) {
        loc.start = i;
        loc.count = 1;
        return loc;
      }
    }
    loc.start = parent->kind == Kind::query && !signature.kinds.empty()
                    ? clause_insert_position(*parent, signature.kinds.front())
                    : parent->children.size();
    loc.count = 0;
    return loc;
  }
  if (*signature.gap > parent->children.size()) return std::nullopt;
  loc.start = *signature.gap;
  std::size_t end = loc.start;
  while (end < parent->children.size() && in_site(parent->children[end])) ++end;
  loc.count = end - loc.start;
  return loc;
}

}  // namespace precis
