#include "precis/interface.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <iomanip>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>

#include "precis/error.hpp"
#include "precis/sql.hpp"

namespace precis {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

// Where a slot goes in the base query: a run of children, or the whole query.
struct Target {
  std::vector<std::size_t> parent;
  std::size_t start = 0;
  std::size_t count = 0;
  bool whole = false;
  Kind stands_for = Kind::query;
};

struct Pending {
  Widget widget;
  Target target;
};

Target node_target(const AstNode& root, const std::vector<std::size_t>& path) {
  Target t;
  if (path.empty()) {
    t.whole = true;
    return t;
  }
  t.parent.assign(path.begin(), path.end() - 1);
  t.start = path.back();
  t.count = 1;
  t.stands_for = node_at(root, path)->kind;
  return t;
}

// Does `inner` sit inside the run of `outer`?
bool contains(const Target& outer, const Target& inner) {
  if (inner.parent.size() <= outer.parent.size()) return false;
  if (!std::equal(outer.parent.begin(), outer.parent.end(), inner.parent.begin())) return false;
  std::size_t child = inner.parent[outer.parent.size()];
  return child >= outer.start && child < outer.start + outer.count;
}

bool overlaps(const Target& a, const Target& b) {
  if (a.whole || b.whole) return true;
  if (a.parent == b.parent) {
    if (a.start == b.start) return true;
    return a.start < b.start + b.count && b.start < a.start + a.count;
  }
  return contains(a, b) || contains(b, a);
}

std::string sanitize(std::string_view text) {
  std::string out;
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else if (!out.empty() && out.back() != '_') {
      out.push_back('_');
    }
  }
  while (!out.empty() && out.back() == '_') out.pop_back();
  return out.empty() ? "slot" : out;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::string op_word(std::string_view op) {
  if (op == "<>" || op == "!=") return "ne";
  if (op == "<") return "lt";
  if (op == "<=") return "le";
  if (op == ">") return "gt";
  if (op == ">=") return "ge";
  return sanitize(op);
}

std::vector<std::string> run_texts(const AstNode& root, const SiteLocation& loc) {
  std::vector<std::string> out;
  const AstNode* parent = node_at(root, loc.parent);
  for (std::size_t i = loc.start; i < loc.start + loc.count; ++i) {
    out.push_back(serialize(parent->children[i], parent->kind));
  }
  return out;
}

std::vector<std::string> sorted_unique(std::vector<std::string> values) {
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  return values;
}

// Orders items so every observed list stays a subsequence where possible;
// ties and cycles fall back to lexicographic order.
std::vector<std::string> merge_orders(const std::vector<std::vector<std::string>>& lists) {
  std::set<std::string> items;
  std::map<std::string, std::set<std::string>> after;
  std::map<std::string, int> indegree;
  for (const auto& list : lists) {
    for (const auto& item : list) items.insert(item);
  }
  for (const auto& item : items) indegree[item] = 0;
  for (const auto& list : lists) {
    for (std::size_t i = 0; i + 1 < list.size(); ++i) {
      if (list[i] != list[i + 1] && after[list[i]].insert(list[i + 1]).second) ++indegree[list[i + 1]];
    }
  }
  std::vector<std::string> out;
  std::set<std::string> ready;
  for (const auto& [item, d] : indegree) {
    if (d == 0) ready.insert(item);
  }
  while (!ready.empty()) {
    std::string item = *ready.begin();
    ready.erase(ready.begin());
    out.push_back(item);
    for (const auto& next : after[item]) {
      if (--indegree[next] == 0) ready.insert(next);
    }
  }
  for (const auto& item : items) {
    if (std::find(out.begin(), out.end(), item) == out.end()) out.push_back(item);
  }
  return out;
}

int fraction_digits(std::string_view lexeme) {
  auto dot = lexeme.find('.');
  return dot == std::string_view::npos ? 0 : static_cast<int>(lexeme.size() - dot - 1);
}

std::optional<double> parse_number(std::string_view text) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return v;
}

std::string format_number(double v, int decimals) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(decimals) << v;
  std::string s = out.str();
  if (s.find_first_not_of("-0.") == std::string::npos && s.front() == '-') s.erase(0, 1);
  return s;
}

Domain range_domain(const std::vector<std::string>& lexemes, const std::string& slot) {
  Domain d;
  d.type = Domain::Type::range;
  std::vector<double> values;
  for (const auto& lexeme : lexemes) {
    auto v = parse_number(lexeme);
    if (!v) throw InconsistentDomain("slot '" + slot + "': '" + lexeme + "' is not a number");
    values.push_back(*v);
    d.decimals = std::max(d.decimals, fraction_digits(lexeme));
  }
  d.min = *std::min_element(values.begin(), values.end());
  d.max = *std::max_element(values.begin(), values.end());
  if (d.max == d.min) {
    d.step = 1;
    return d;
  }
  if (d.decimals <= 9) {
    double scale = std::pow(10.0, d.decimals);
    long long base = std::llround(d.min * scale);
    long long g = 0;
    for (double v : values) g = std::gcd(g, std::llabs(std::llround(v * scale) - base));
    d.step = static_cast<double>(g) / scale;
  } else {
    d.step = (d.max - d.min) / 100;
  }
  return d;
}

bool valid_identifier_chain(const std::vector<Token>& toks) {
  if (toks.empty() || toks.size() % 2 == 0) return false;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    bool name = toks[i].type == Token::Type::identifier || toks[i].type == Token::Type::quoted_identifier;
    bool dot = toks[i].type == Token::Type::symbol && toks[i].text == ".";
    if (i % 2 == 0 ? !name : !dot) return false;
  }
  return true;
}

bool valid_literal(Kind kind, std::string_view text) {
  std::vector<Token> toks;
  try {
    toks = tokenize(text);
  } catch (const SyntaxError&) {
    return false;
  }
  switch (kind) {
    case Kind::strliteral:
      return toks.size() == 1 && toks[0].type == Token::Type::string;
    case Kind::numliteral:
      if (toks.size() == 1) return toks[0].type == Token::Type::number;
      return toks.size() == 2 && toks[0].text == "-" && toks[1].type == Token::Type::number;
    case Kind::alias:
      return toks.size() == 1 &&
             (toks[0].type == Token::Type::identifier || toks[0].type == Token::Type::quoted_identifier);
    default:
      return valid_identifier_chain(toks);
  }
}

std::string quote_sql_string(std::string_view v) {
  std::string out = "'";
  for (char c : v) {
    if (c == '\'') out.push_back('\'');
    out.push_back(c);
  }
  return out + "'";
}

// ---------------------------------------------------------------------------

class PanelBuilder {
 public:
  PanelBuilder(const TransformationGraph& graph, const std::vector<TransformationGroup>& groups,
               const std::vector<std::size_t>& component)
      : graph_(graph), groups_(groups), in_component_(graph.nodes().size(), 0) {
    for (auto n : component) in_component_[n] = 1;
    base_ = component.front();
  }

  std::optional<Pending> make(const Assignment& a) const {
    const TransformationGroup& group = groups_[a.group];
    std::vector<std::size_t> edges;
    for (auto e : group.edges) {
      if (in_component_[graph_.edges()[e].src]) edges.push_back(e);
    }
    if (edges.empty()) return std::nullopt;

    Pending p;
    p.widget.kind = a.kind;
    std::optional<std::string> name;
    if (group.shape == GroupShape::multi) {
      if (!lca_button(group, edges, p)) return std::nullopt;
      name = sanitize(group.label);
      p.widget.caption = group.label;
    } else if (!single_site(group, edges, p)) {
      return std::nullopt;
    }
    if (!name) name_slot(group, p);
    else p.widget.slot = *name;
    return p;
  }

  const AstNode& base() const { return graph_.nodes()[base_].ast.root(); }
  std::size_t base_id() const { return base_; }

 private:
  std::vector<std::size_t> endpoints(const std::vector<std::size_t>& edges) const {
    std::set<std::size_t> nodes;
    for (auto e : edges) {
      nodes.insert(graph_.edges()[e].src);
      nodes.insert(graph_.edges()[e].dst);
    }
    return {nodes.begin(), nodes.end()};
  }

  bool lca_button(const TransformationGroup& group, const std::vector<std::size_t>& edges, Pending& p) const {
    auto lca = site_lca(group.sites, base());
    if (!lca) return false;
    std::string current = text_at(base(), *lca);
    std::vector<std::string> options{current};
    for (auto n : endpoints(edges)) {
      const AstNode& root = graph_.nodes()[n].ast.root();
      if (auto l = site_lca(group.sites, root)) options.push_back(text_at(root, *l));
    }
    p.target = node_target(base(), *lca);
    p.widget.domain.type = Domain::Type::options;
    p.widget.domain.options = sorted_unique(options);
    p.widget.current = current;
    return true;
  }

  bool single_site(const TransformationGroup& group, const std::vector<std::size_t>& edges, Pending& p) const {
    const SiteSignature& sig = group.sites.front();
    auto loc = resolve(sig, base());
    if (!loc) return false;
    const AstNode* parent = node_at(base(), loc->parent);
    p.target = Target{loc->parent, loc->start, loc->count, false, sig.kinds.front()};
    std::vector<std::string> current = run_texts(base(), *loc);
    Domain& d = p.widget.domain;

    std::vector<std::vector<std::string>> runs{current};
    for (auto e : edges) {
      const SiteChange& site = graph_.edges()[e].sites.front();
      runs.push_back(site.old_values);
      runs.push_back(site.new_values);
    }

    switch (p.widget.kind) {
      case WidgetKind::dropdown:
      case WidgetKind::slider:
      case WidgetKind::textbox: {
        if (loc->count != 1) return false;
        std::vector<std::string> values;
        for (const auto& run : runs) values.insert(values.end(), run.begin(), run.end());
        d.literal_kind = sig.kinds.front();
        if (p.widget.kind == WidgetKind::dropdown) {
          d.type = Domain::Type::options;
          d.options = sorted_unique(values);
          p.widget.current = current.front();
        } else if (p.widget.kind == WidgetKind::slider) {
          d = range_domain(sorted_unique(values), sig.str());
          p.widget.current = *parse_number(current.front());
        } else {
          d.type = Domain::Type::text;
          p.widget.current = current.front();
        }
        return true;
      }
      case WidgetKind::checkbox: {
        std::string on;
        for (const auto& run : runs) {
          if (run.size() == 1 && on.empty()) on = run.front();
        }
        if (loc->count > 1 || on.empty()) return false;
        if (loc->count == 1 && current.front() != on) return false;
        d.type = Domain::Type::toggle;
        d.on = on;
        p.widget.current = loc->count == 1;
        return true;
      }
      case WidgetKind::listbox: {
        if (loc->start != 0 || loc->count != parent->children.size() || loc->count == 0) return false;
        d.type = Domain::Type::options;
        d.options = merge_orders(runs);
        p.widget.current = current;
        return true;
      }
      case WidgetKind::button: {
        bool separated = parent->kind == Kind::project || parent->kind == Kind::from ||
                         parent->kind == Kind::groupby || parent->kind == Kind::orderby ||
                         parent->kind == Kind::funccall ||
                         (parent->kind == Kind::expr && (parent->attr("op") == "AND" || parent->attr("op") == "OR"));
        bool may_vanish = std::any_of(runs.begin(), runs.end(), [](const auto& r) { return r.empty(); });
        d.type = Domain::Type::options;
        if (separated && may_vanish) {
          // An empty run would leave a dangling separator; switch the whole list.
          p.target = node_target(base(), loc->parent);
          std::vector<std::string> options{text_at(base(), loc->parent)};
          for (auto n : endpoints(edges)) {
            const AstNode& root = graph_.nodes()[n].ast.root();
            if (auto l = resolve(sig, root)) options.push_back(text_at(root, l->parent));
          }
          d.options = sorted_unique(options);
          p.widget.current = options.front();
        } else {
          std::vector<std::string> options;
          for (const auto& run : runs) options.push_back(join(run, ", "));
          d.options = sorted_unique(options);
          p.widget.current = join(current, ", ");
        }
        return true;
      }
    }
    return false;
  }

  void name_slot(const TransformationGroup& group, Pending& p) const {
    Widget& w = p.widget;
    if (p.target.whole) {
      w.slot = sanitize(group.label);
      w.caption = group.label;
      return;
    }
    const AstNode* parent = node_at(base(), p.target.parent);
    Kind kind = p.target.stands_for;
    if ((kind == Kind::strliteral || kind == Kind::numliteral || kind == Kind::columnref) &&
        parent->kind == Kind::expr) {
      for (std::size_t i = 0; i < parent->children.size(); ++i) {
        if (i == p.target.start) continue;
        const AstNode& sibling = parent->children[i];
        if (sibling.kind != Kind::columnref && sibling.kind != Kind::funccall) continue;
        std::string text = serialize(sibling, Kind::expr);
        w.slot = sanitize(sibling.kind == Kind::columnref ? sibling.value.value_or(text) : text);
        w.caption = text;
        std::string op(parent->attr("op"));
        if (op != "=") {
          w.slot += "_" + op_word(op);
          w.caption += " " + op;
        }
        return;
      }
    }
    switch (kind) {
      case Kind::tablename:
      case Kind::tableclause:
      case Kind::from:
        w.slot = "table";
        w.caption = "Table";
        return;
      case Kind::projectclause:
      case Kind::project:
        w.slot = "columns";
        w.caption = "Columns";
        return;
      case Kind::topclause:
        if (w.domain.type == Domain::Type::toggle) {
          w.slot = sanitize(w.domain.on);
          w.caption = w.domain.on;
        } else {
          w.slot = "top";
          w.caption = "TOP";
        }
        return;
      case Kind::limitclause:
        w.slot = "limit";
        w.caption = "LIMIT";
        return;
      default:
        w.slot = std::string(kind_name(kind));
        w.caption = group.label;
        return;
    }
  }

  const TransformationGraph& graph_;
  const std::vector<TransformationGroup>& groups_;
  std::vector<char> in_component_;
  std::size_t base_ = 0;
};

std::vector<std::vector<std::size_t>> components(const TransformationGraph& graph) {
  std::vector<std::size_t> root(graph.nodes().size());
  std::iota(root.begin(), root.end(), 0);
  std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
    return root[x] == x ? x : root[x] = find(root[x]);
  };
  for (const auto& e : graph.edges()) {
    std::size_t a = find(e.src);
    std::size_t b = find(e.dst);
    if (a != b) root[std::max(a, b)] = std::min(a, b);
  }
  // Node ids follow first log appearance, so grouping by the smallest member
  // id orders components by their earliest query.
  std::map<std::size_t, std::vector<std::size_t>> by_root;
  for (std::size_t n = 0; n < graph.nodes().size(); ++n) by_root[find(n)].push_back(n);
  std::vector<std::vector<std::size_t>> out;
  for (auto& [r, members] : by_root) out.push_back(std::move(members));
  return out;
}

std::string build_template(const AstNode& base, std::vector<Pending>& pending) {
  std::vector<Pending*> order;
  for (auto& p : pending) {
    if (p.target.whole) return "{{" + p.widget.slot + "}}";
    order.push_back(&p);
  }
  std::sort(order.begin(), order.end(), [](const Pending* a, const Pending* b) {
    if (a->target.parent != b->target.parent) return a->target.parent > b->target.parent;
    return a->target.start > b->target.start;
  });
  AstNode root = base;
  for (const Pending* p : order) {
    AstNode* parent = node_at(root, p->target.parent);
    auto first = parent->children.begin() + static_cast<std::ptrdiff_t>(p->target.start);
    auto at = parent->children.erase(first, first + static_cast<std::ptrdiff_t>(p->target.count));
    AstNode slot;
    slot.kind = Kind::slot;
    slot.attrs["name"] = p->widget.slot;
    slot.attrs["for"] = std::string(kind_name(p->target.stands_for));
    parent->children.insert(at, std::move(slot));
  }
  return serialize(root, Kind::query);
}

// Splits a template into literal text and slot names (odd positions).
std::vector<std::string> split_template(std::string_view templ) {
  std::vector<std::string> parts{""};
  std::size_t pos = 0;
  while (true) {
    auto open = templ.find("{{", pos);
    if (open == std::string_view::npos) break;
    auto close = templ.find("}}", open + 2);
    if (close == std::string_view::npos) break;
    parts.back() += templ.substr(pos, open - pos);
    parts.emplace_back(templ.substr(open + 2, close - open - 2));
    parts.emplace_back();
    pos = close + 2;
  }
  parts.back() += templ.substr(pos);
  return parts;
}

// ---------------------------------------------------------------------------

bool same_token(const Token& a, const Token& b) {
  if (a.type != b.type) return false;
  if (a.type == Token::Type::number) return normalize_decimal(a.text) == normalize_decimal(b.text);
  return a.text == b.text;
}

class PanelMatcher {
 public:
  explicit PanelMatcher(const Panel& panel) : panel_(panel) {
    auto parts = split_template(panel.templ);
    for (std::size_t i = 0; i < parts.size(); ++i) {
      if (i % 2 == 1) {
        const Widget* w = panel.find_slot(parts[i]);
        if (!w) throw DomainError(parts[i], "template slot without a widget");
        pieces_.push_back({{}, w});
        continue;
      }
      for (auto& t : tokenize(parts[i])) pieces_.push_back({std::move(t), nullptr});
    }
    for (const auto& w : panel.widgets) {
      auto& toks = option_tokens_[w.id];
      for (const auto& option : w.domain.options) toks.push_back(tokenize(option));
      if (w.domain.type == Domain::Type::toggle) on_tokens_[w.id] = tokenize(w.domain.on);
    }
  }

  bool match(const Ast& query) {
    sql_ = serialize(query);
    key_ = query.canonical_key();
    tokens_ = tokenize(sql_);
    values_.clear();
    budget_ = 200000;
    return step(0, 0);
  }

 private:
  struct Piece {
    std::optional<Token> token;
    const Widget* widget;
  };

  bool matches_at(const std::vector<Token>& toks, std::size_t ti) const {
    if (ti + toks.size() > tokens_.size()) return false;
    for (std::size_t k = 0; k < toks.size(); ++k) {
      if (!same_token(toks[k], tokens_[ti + k])) return false;
    }
    return true;
  }

  bool confirm() {
    try {
      return parse_query(instantiate(panel_, values_)).canonical_key() == key_;
    } catch (const Error&) {
      return false;
    }
  }

  bool step(std::size_t pi, std::size_t ti) {
    if (budget_-- == 0) return false;
    if (pi == pieces_.size()) return ti == tokens_.size() && confirm();
    const Piece& piece = pieces_[pi];
    if (piece.token) {
      return ti < tokens_.size() && same_token(*piece.token, tokens_[ti]) && step(pi + 1, ti + 1);
    }
    const Widget& w = *piece.widget;
    switch (w.domain.type) {
      case Domain::Type::options: {
        const auto& options = option_tokens_.at(w.id);
        if (w.kind == WidgetKind::listbox) {
          std::vector<std::string> chosen;
          return listbox(pi, ti, w, 0, chosen);
        }
        for (std::size_t k = 0; k < options.size(); ++k) {
          if (!matches_at(options[k], ti)) continue;
          values_[w.slot] = w.domain.options[k];
          if (step(pi + 1, ti + options[k].size())) return true;
        }
        values_.erase(w.slot);
        return false;
      }
      case Domain::Type::toggle: {
        const auto& on = on_tokens_.at(w.id);
        if (matches_at(on, ti)) {
          values_[w.slot] = true;
          if (step(pi + 1, ti + on.size())) return true;
        }
        values_[w.slot] = false;
        if (step(pi + 1, ti)) return true;
        values_.erase(w.slot);
        return false;
      }
      case Domain::Type::range:
      case Domain::Type::text: {
        std::size_t longest = w.domain.type == Domain::Type::range ? 2 : 9;
        for (std::size_t len = 1; len <= longest && ti + len <= tokens_.size(); ++len) {
          std::string text = sql_.substr(tokens_[ti].begin, tokens_[ti + len - 1].end - tokens_[ti].begin);
          try {
            slot_text(w, text);
          } catch (const DomainError&) {
            continue;
          }
          values_[w.slot] = text;
          if (step(pi + 1, ti + len)) return true;
        }
        values_.erase(w.slot);
        return false;
      }
    }
    return false;
  }

  bool listbox(std::size_t pi, std::size_t ti, const Widget& w, std::size_t first, std::vector<std::string>& chosen) {
    const auto& options = option_tokens_.at(w.id);
    for (std::size_t k = first; k < options.size(); ++k) {
      std::size_t t = ti;
      if (!chosen.empty()) {
        if (t >= tokens_.size() || tokens_[t].text != ",") return false;
        ++t;
      }
      if (!matches_at(options[k], t)) continue;
      chosen.push_back(w.domain.options[k]);
      values_[w.slot] = chosen;
      if (step(pi + 1, t + options[k].size())) return true;
      if (listbox(pi, t + options[k].size(), w, k + 1, chosen)) return true;
      chosen.pop_back();
    }
    values_.erase(w.slot);
    return false;
  }

  const Panel& panel_;
  std::vector<Piece> pieces_;
  std::map<std::string, std::vector<std::vector<Token>>> option_tokens_;
  std::map<std::string, std::vector<Token>> on_tokens_;
  std::string sql_;
  std::string key_;
  std::vector<Token> tokens_;
  std::map<std::string, json> values_;
  std::size_t budget_ = 0;
};

// ---------------------------------------------------------------------------

const char* domain_type_name(Domain::Type t) {
  switch (t) {
    case Domain::Type::options: return "options";
    case Domain::Type::range: return "range";
    case Domain::Type::toggle: return "toggle";
    case Domain::Type::text: return "text";
  }
  return "options";
}

ojson domain_json(const Widget& w) {
  const Domain& d = w.domain;
  ojson out;
  out["type"] = domain_type_name(d.type);
  switch (d.type) {
    case Domain::Type::options:
      out["options"] = d.options;
      if (w.kind == WidgetKind::dropdown) out["literal_kind"] = kind_name(d.literal_kind);
      break;
    case Domain::Type::range:
      out["min"] = d.min;
      out["max"] = d.max;
      out["step"] = d.step;
      out["decimals"] = d.decimals;
      break;
    case Domain::Type::toggle:
      out["on"] = d.on;
      out["off"] = "";
      break;
    case Domain::Type::text:
      out["literal_kind"] = kind_name(d.literal_kind);
      break;
  }
  return out;
}

[[noreturn]] void schema_fail(const std::string& where, const std::string& message) {
  throw SchemaError(where, message);
}

const json& need(const json& object, const char* name, const std::string& where) {
  if (!object.is_object()) schema_fail(where, "expected an object");
  auto it = object.find(name);
  if (it == object.end()) schema_fail(where + "/" + name, "missing");
  return *it;
}

std::string need_string(const json& object, const char* name, const std::string& where) {
  const json& v = need(object, name, where);
  if (!v.is_string()) schema_fail(where + "/" + name, "expected a string");
  return v.get<std::string>();
}

double need_number(const json& object, const char* name, const std::string& where) {
  const json& v = need(object, name, where);
  if (!v.is_number()) schema_fail(where + "/" + name, "expected a number");
  return v.get<double>();
}

Kind need_kind(const json& object, const char* name, const std::string& where) {
  auto kind = kind_from_name(need_string(object, name, where));
  if (!kind) schema_fail(where + "/" + name, "unknown node kind");
  return *kind;
}

Domain domain_from_json(const json& d, const std::string& at) {
  Domain out;
  std::string type = need_string(d, "type", at);
  if (type == "options") {
    out.type = Domain::Type::options;
    const json& options = need(d, "options", at);
    if (!options.is_array()) schema_fail(at + "/options", "expected an array");
    for (std::size_t i = 0; i < options.size(); ++i) {
      if (!options[i].is_string()) schema_fail(at + "/options/" + std::to_string(i), "expected a string");
      out.options.push_back(options[i].get<std::string>());
    }
    if (d.contains("literal_kind")) out.literal_kind = need_kind(d, "literal_kind", at);
  } else if (type == "range") {
    out.type = Domain::Type::range;
    out.min = need_number(d, "min", at);
    out.max = need_number(d, "max", at);
    out.step = need_number(d, "step", at);
    if (!(out.step > 0)) schema_fail(at + "/step", "must be positive");
    out.decimals = static_cast<int>(need_number(d, "decimals", at));
  } else if (type == "toggle") {
    out.type = Domain::Type::toggle;
    out.on = need_string(d, "on", at);
  } else if (type == "text") {
    out.type = Domain::Type::text;
    out.literal_kind = need_kind(d, "literal_kind", at);
  } else {
    schema_fail(at + "/type", "unknown domain type '" + type + "'");
  }
  return out;
}

}  // namespace

const Widget* Panel::find_slot(std::string_view slot) const {
  for (const auto& w : widgets) {
    if (w.slot == slot) return &w;
  }
  return nullptr;
}

InterfaceSpec populate_widgets(const Mapping& mapping, const TransformationGraph& graph,
                               const std::vector<TransformationGroup>& groups) {
  InterfaceSpec spec;
  std::size_t widget_counter = 0;
  for (const auto& component : components(graph)) {
    PanelBuilder builder(graph, groups, component);
    std::vector<Pending> pending;
    for (const auto& a : mapping.assignments) {
      auto p = builder.make(a);
      if (!p) continue;
      bool clash = std::any_of(pending.begin(), pending.end(),
                               [&](const Pending& q) { return overlaps(q.target, p->target); });
      if (!clash) pending.push_back(std::move(*p));
    }

    std::map<std::string, int> used;
    for (auto& p : pending) {
      int n = ++used[p.widget.slot];
      if (n > 1) p.widget.slot += "_" + std::to_string(n);
      p.widget.id = "w" + std::to_string(widget_counter++);
    }

    Panel panel;
    panel.id = spec.panels.size();
    panel.base_sql = graph.nodes()[builder.base_id()].sql;
    panel.templ = build_template(builder.base(), pending);
    for (auto& p : pending) panel.widgets.push_back(std::move(p.widget));
    spec.panels.push_back(std::move(panel));
  }
  spec.C_e = mapping.C_e;
  spec.C_c = mapping.C_c;
  return spec;
}

InterfaceSpec generate_interface(const Mapping& mapping, const TransformationGraph& graph,
                                 const std::vector<TransformationGroup>& groups, const CostModel& cost) {
  InterfaceSpec spec = populate_widgets(mapping, graph, groups);
  spec.S_max = cost.S_max;
  spec.coverage = coverage(spec, graph);
  return spec;
}

std::string slot_text(const Widget& w, const json& value, bool permissive) {
  const Domain& d = w.domain;
  auto reject = [&](const std::string& why) -> std::string { throw DomainError(w.slot, why); };
  switch (d.type) {
    case Domain::Type::options: {
      if (w.kind == WidgetKind::listbox) {
        if (!value.is_array() || value.empty()) return reject("expected a non-empty list of options");
        std::set<std::string> picked;
        for (const auto& v : value) {
          if (!v.is_string()) return reject("expected a list of strings");
          std::string s = v.get<std::string>();
          if (std::find(d.options.begin(), d.options.end(), s) == d.options.end()) {
            return reject("'" + s + "' is not one of the options");
          }
          if (!picked.insert(s).second) return reject("'" + s + "' listed twice");
        }
        std::vector<std::string> ordered;
        for (const auto& o : d.options) {
          if (picked.count(o)) ordered.push_back(o);
        }
        return join(ordered, ", ");
      }
      if (!value.is_string()) return reject("expected a string");
      std::string s = value.get<std::string>();
      if (std::find(d.options.begin(), d.options.end(), s) != d.options.end()) return s;
      if (d.literal_kind == Kind::strliteral) {
        std::string quoted = quote_sql_string(s);
        if (std::find(d.options.begin(), d.options.end(), quoted) != d.options.end()) return quoted;
      }
      return reject("'" + s + "' is not one of the options");
    }
    case Domain::Type::range: {
      std::optional<double> v;
      if (value.is_number()) v = value.get<double>();
      if (value.is_string()) v = parse_number(value.get<std::string>());
      if (!v) return reject("expected a number");
      double eps = 1e-9 * std::max({1.0, std::fabs(d.min), std::fabs(d.max)});
      if (*v < d.min - eps || *v > d.max + eps) return reject("outside [" + format_number(d.min, d.decimals) + ", " +
                                                               format_number(d.max, d.decimals) + "]");
      double steps = (*v - d.min) / d.step;
      if (std::fabs(steps - std::round(steps)) > 1e-6) return reject("not on the slider's step");
      return format_number(*v, d.decimals);
    }
    case Domain::Type::toggle:
      if (!value.is_boolean()) return reject("expected true or false");
      return value.get<bool>() ? d.on : std::string();
    case Domain::Type::text: {
      if (!value.is_string()) return reject("expected a string");
      std::string s = value.get<std::string>();
      if (permissive) {
        if (s.find_first_not_of(" \t\r\n") == std::string::npos) return reject("empty value");
        return s;
      }
      if (!valid_literal(d.literal_kind, s)) {
        return reject("'" + s + "' is not a " + std::string(kind_name(d.literal_kind)));
      }
      return s;
    }
  }
  return {};
}

std::string instantiate(const Panel& panel, const std::map<std::string, json>& values, bool permissive) {
  for (const auto& [slot, value] : values) {
    if (!panel.find_slot(slot)) throw DomainError(slot, "no such slot in panel " + std::to_string(panel.id));
  }
  auto parts = split_template(panel.templ);
  std::string sql;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i % 2 == 0) {
      sql += parts[i];
      continue;
    }
    const Widget* w = panel.find_slot(parts[i]);
    if (!w) throw DomainError(parts[i], "template slot without a widget");
    auto it = values.find(parts[i]);
    sql += slot_text(*w, it == values.end() ? w->current : it->second, permissive);
  }
  try {
    return serialize(parse_query(sql));
  } catch (const Error& e) {
    throw DomainError("slot_values", std::string("values do not form a valid query: ") + e.what());
  }
}

bool covers(const Panel& panel, const Ast& query) { return PanelMatcher(panel).match(query); }

Coverage coverage(const InterfaceSpec& spec, const TransformationGraph& graph) {
  Coverage c;
  std::vector<PanelMatcher> matchers;
  for (const auto& p : spec.panels) matchers.emplace_back(p);
  for (const auto& node : graph.nodes()) {
    ++c.total;
    c.total_raw += node.multiplicity;
    bool hit = std::any_of(matchers.begin(), matchers.end(), [&](PanelMatcher& m) { return m.match(node.ast); });
    if (hit) {
      ++c.covered;
      c.covered_raw += node.multiplicity;
    }
  }
  return c;
}

Coverage coverage(const InterfaceSpec& spec, const std::vector<LogEntry>& log) {
  std::vector<GraphNode> nodes;
  std::map<std::string, std::size_t> by_key;
  for (const auto& e : log) {
    auto [it, inserted] = by_key.emplace(e.ast.canonical_key(), nodes.size());
    if (inserted) nodes.push_back(GraphNode{e.ast.canonical_key(), serialize(e.ast), e.ast, 0, {}});
    GraphNode& n = nodes[it->second];
    ++n.multiplicity;
    n.log_indexes.push_back(e.source.log_index);
  }
  return coverage(spec, TransformationGraph(std::move(nodes), {}));
}

std::string to_json(const InterfaceSpec& spec) {
  ojson panels = ojson::array();
  for (const auto& p : spec.panels) {
    ojson widgets = ojson::array();
    for (const auto& w : p.widgets) {
      ojson wj;
      wj["id"] = w.id;
      wj["kind"] = widget_name(w.kind);
      wj["slot"] = w.slot;
      wj["domain"] = domain_json(w);
      wj["current"] = ojson::parse(w.current.dump());
      wj["caption"] = w.caption;
      widgets.push_back(std::move(wj));
    }
    ojson pj;
    pj["id"] = p.id;
    pj["base_sql"] = p.base_sql;
    pj["template"] = p.templ;
    pj["widgets"] = std::move(widgets);
    panels.push_back(std::move(pj));
  }
  ojson doc;
  doc["panels"] = std::move(panels);
  ojson stats;
  stats["coverage"] = {{"covered", spec.coverage.covered},
                       {"total", spec.coverage.total},
                       {"covered_raw", spec.coverage.covered_raw},
                       {"total_raw", spec.coverage.total_raw}};
  stats["C_e"] = spec.C_e;
  stats["C_c"] = spec.C_c;
  stats["S_max"] = spec.S_max;
  doc["stats"] = std::move(stats);
  return doc.dump(2) + "\n";
}

InterfaceSpec interface_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError("/", std::string("invalid JSON: ") + e.what());
  }
  InterfaceSpec spec;
  const json& panels = need(doc, "panels", "");
  if (!panels.is_array()) schema_fail("/panels", "expected an array");
  for (std::size_t i = 0; i < panels.size(); ++i) {
    std::string at = "/panels/" + std::to_string(i);
    const json& pj = panels[i];
    Panel p;
    const json& id = need(pj, "id", at);
    if (!id.is_number_unsigned()) schema_fail(at + "/id", "expected a non-negative integer");
    p.id = id.get<std::size_t>();
    p.base_sql = need_string(pj, "base_sql", at);
    p.templ = need_string(pj, "template", at);
    const json& widgets = need(pj, "widgets", at);
    if (!widgets.is_array()) schema_fail(at + "/widgets", "expected an array");
    for (std::size_t k = 0; k < widgets.size(); ++k) {
      std::string w_at = at + "/widgets/" + std::to_string(k);
      const json& wj = widgets[k];
      Widget w;
      w.id = need_string(wj, "id", w_at);
      auto kind = widget_from_name(need_string(wj, "kind", w_at));
      if (!kind) schema_fail(w_at + "/kind", "unknown widget kind");
      w.kind = *kind;
      w.slot = need_string(wj, "slot", w_at);
      w.domain = domain_from_json(need(wj, "domain", w_at), w_at + "/domain");
      w.current = need(wj, "current", w_at);
      w.caption = wj.contains("caption") ? need_string(wj, "caption", w_at) : w.slot;
      p.widgets.push_back(std::move(w));
    }
    for (std::size_t k = 0; k < p.widgets.size(); ++k) {
      try {
        slot_text(p.widgets[k], p.widgets[k].current);
      } catch (const DomainError& e) {
        schema_fail(at + "/widgets/" + std::to_string(k) + "/current", e.what());
      }
    }
    spec.panels.push_back(std::move(p));
  }
  if (doc.contains("stats")) {
    const json& stats = doc["stats"];
    if (stats.contains("coverage")) {
      const json& c = stats["coverage"];
      auto count = [&](const char* name) {
        const json& v = need(c, name, "/stats/coverage");
        if (!v.is_number_unsigned()) schema_fail(std::string("/stats/coverage/") + name, "expected a count");
        return v.get<std::size_t>();
      };
      spec.coverage = {count("covered"), count("total"), count("covered_raw"), count("total_raw")};
    }
    spec.C_e = need_number(stats, "C_e", "/stats");
    spec.C_c = need_number(stats, "C_c", "/stats");
    spec.S_max = need_number(stats, "S_max", "/stats");
  }
  return spec;
}

}  // namespace precis
