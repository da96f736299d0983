#include "precis/pilang.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <variant>

#include "precis/error.hpp"
#include "precis/sql.hpp"

namespace precis {

namespace {

constexpr std::string_view kReserved[] = {"from", "where", "match", "as", "and",
                                          "or",   "not",   "equal", "subset"};

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool is_word_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

class StatementParser {
 public:
  explicit StatementParser(std::string_view text) : text_(text) {}

  Statement parse() {
    Statement stmt;
    expect_word("from");
    do {
      skip_ws();
      std::size_t path_begin = pos_;
      std::string path_text = read_path();
      if (path_text.empty()) fail("expected a path");
      NodePath path;
      try {
        path = parse_path(path_text);
      } catch (const SyntaxError& e) {
        throw SyntaxError(e.detail(), path_begin + e.offset());
      }
      expect_word("as");
      std::size_t var_pos = pos_;
      std::string var = identifier();
      for (const auto& b : stmt.bindings) {
        if (b.var == var) throw SyntaxError("variable '" + var + "' bound twice", var_pos);
      }
      stmt.bindings.push_back({std::move(path), std::move(var)});
    } while (accept_char(','));
    expect_word("where");
    stmt.predicate = disjunction();
    expect_word("match");
    stmt.label = identifier();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected text after the MATCH label");
    check_declared(stmt, stmt.predicate);
    return stmt;
  }

 private:
  [[noreturn]] void fail(const std::string& message) const { throw SyntaxError(message, pos_); }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  std::string peek_word() {
    skip_ws();
    std::size_t i = pos_;
    if (i >= text_.size() || !is_word_start(text_[i])) return {};
    while (i < text_.size() && is_word_char(text_[i])) ++i;
    return lower(text_.substr(pos_, i - pos_));
  }

  void consume_word() {
    skip_ws();
    while (pos_ < text_.size() && is_word_char(text_[pos_])) ++pos_;
  }

  void expect_word(std::string_view word) {
    if (peek_word() != word) {
      std::string upper(word);
      for (char& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
      fail("expected " + upper);
    }
    consume_word();
  }

  bool accept_char(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  bool accept_symbol(std::string_view sym) {
    skip_ws();
    if (text_.substr(pos_, sym.size()) == sym) {
      pos_ += sym.size();
      return true;
    }
    return false;
  }

  std::string identifier() {
    skip_ws();
    std::size_t begin = pos_;
    if (pos_ >= text_.size() || !is_word_start(text_[pos_])) fail("expected an identifier");
    while (pos_ < text_.size() && is_word_char(text_[pos_])) ++pos_;
    std::string word(text_.substr(begin, pos_ - begin));
    if (std::find(std::begin(kReserved), std::end(kReserved), lower(word)) != std::end(kReserved)) {
      pos_ = begin;
      fail("'" + word + "' is reserved");
    }
    return word;
  }

  // A path runs to the next whitespace or comma outside brackets and quotes.
  std::string read_path() {
    std::size_t begin = pos_;
    int depth = 0;
    char quote = 0;
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (quote) {
        if (c == quote) quote = 0;
      } else if (c == '"' || c == '\'') {
        quote = c;
      } else if (c == '[') {
        ++depth;
      } else if (c == ']') {
        --depth;
      } else if (depth == 0 && (std::isspace(static_cast<unsigned char>(c)) || c == ',')) {
        break;
      }
      ++pos_;
    }
    return std::string(text_.substr(begin, pos_ - begin));
  }

  Predicate connective(Predicate::Op op, std::string_view word, Predicate (StatementParser::*next)()) {
    Predicate first = (this->*next)();
    if (peek_word() != word) return first;
    Predicate node{op, {std::move(first)}, {}};
    while (peek_word() == word) {
      consume_word();
      node.operands.push_back((this->*next)());
    }
    return node;
  }

  Predicate disjunction() { return connective(Predicate::Op::any_of, "or", &StatementParser::conjunction); }
  Predicate conjunction() { return connective(Predicate::Op::all_of, "and", &StatementParser::unary); }

  Predicate unary() {
    if (peek_word() == "not") {
      consume_word();
      return Predicate{Predicate::Op::negate, {unary()}, {}};
    }
    if (accept_char('(')) {
      Predicate inner = disjunction();
      if (!accept_char(')')) fail("expected ')'");
      return inner;
    }
    return comparison();
  }

  Predicate comparison() {
    Term lhs = term();
    Predicate::Op op;
    std::string word = peek_word();
    if (word == "equal") {
      consume_word();
      op = Predicate::Op::set_equal;
    } else if (word == "not") {
      consume_word();
      expect_word("equal");
      op = Predicate::Op::set_not_equal;
    } else if (word == "subset") {
      consume_word();
      op = Predicate::Op::subset;
    } else if (accept_symbol("<=")) {
      op = Predicate::Op::le;
    } else if (accept_symbol(">=")) {
      op = Predicate::Op::ge;
    } else if (accept_symbol("<")) {
      op = Predicate::Op::lt;
    } else if (accept_symbol(">")) {
      op = Predicate::Op::gt;
    } else if (accept_symbol("=")) {
      op = Predicate::Op::eq;
    } else {
      fail("expected a comparison operator");
    }
    Term rhs = term();
    return Predicate{op, {}, {std::move(lhs), std::move(rhs)}};
  }

  Term term() {
    Term t = primary();
    while (accept_char('+')) {
      Term rhs = integer();
      Term sum{Term::Op::plus};
      sum.offset = t.offset;
      sum.operands.push_back(std::move(t));
      sum.operands.push_back(std::move(rhs));
      t = std::move(sum);
    }
    return t;
  }

  Term integer() {
    skip_ws();
    std::size_t begin = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (pos_ == begin) fail("expected an integer");
    Term t{Term::Op::integer};
    t.number = std::stoll(std::string(text_.substr(begin, pos_ - begin)));
    t.offset = begin;
    return t;
  }

  Term primary() {
    skip_ws();
    std::size_t begin = pos_;
    if (accept_char('|')) {
      Term inner = term();
      if (!accept_char('|')) fail("expected '|'");
      Term t{Term::Op::size};
      t.offset = begin;
      t.operands.push_back(std::move(inner));
      return t;
    }
    if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) return integer();
    Term t{Term::Op::variable};
    t.offset = begin;
    t.var = identifier();
    if (pos_ < text_.size() && text_[pos_] == '@') {
      ++pos_;
      std::string version = lower(peek_word_here());
      if (version == "old") {
        t.version = Version::old_side;
      } else if (version == "new") {
        t.version = Version::new_side;
      } else {
        fail("expected @old or @new");
      }
      pos_ += 3;
    }
    return t;
  }

  std::string peek_word_here() const {
    std::size_t i = pos_;
    while (i < text_.size() && is_word_char(text_[i])) ++i;
    return std::string(text_.substr(pos_, i - pos_));
  }

  void check_declared(const Statement& stmt, const Predicate& p) const {
    for (const auto& op : p.operands) check_declared(stmt, op);
    for (const auto& t : p.terms) check_declared(stmt, t);
  }

  void check_declared(const Statement& stmt, const Term& t) const {
    if (t.op == Term::Op::variable) {
      bool found = std::any_of(stmt.bindings.begin(), stmt.bindings.end(),
                               [&](const Binding& b) { return b.var == t.var; });
      if (!found) throw UndeclaredVariable(t.var);
    }
    for (const auto& op : t.operands) check_declared(stmt, op);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

// --- typing ---------------------------------------------------------------

enum class TermType { set, integer };

TermType type_of(const Term& t) {
  switch (t.op) {
    case Term::Op::variable:
      return TermType::set;
    case Term::Op::integer:
      return TermType::integer;
    case Term::Op::size:
      if (type_of(t.operands.at(0)) != TermType::set) {
        throw TypeMismatch("|...| needs a set term (at offset " + std::to_string(t.offset) + ")");
      }
      return TermType::integer;
    case Term::Op::plus:
      if (type_of(t.operands.at(0)) != TermType::integer ||
          type_of(t.operands.at(1)) != TermType::integer) {
        throw TypeMismatch("'+' needs integer terms (at offset " + std::to_string(t.offset) + ")");
      }
      return TermType::integer;
  }
  return TermType::integer;
}

bool is_set_comparison(Predicate::Op op) {
  return op == Predicate::Op::set_equal || op == Predicate::Op::set_not_equal ||
         op == Predicate::Op::subset;
}

// --- context comparison ---------------------------------------------------

struct Side {
  explicit Side(const Ast& a) : ast(a), index(a.root()), matched(index.size(), 0) {}

  const Ast& ast;
  AstIndex index;
  std::vector<std::vector<std::size_t>> per_binding;
  std::vector<char> matched;
};

struct Run {
  std::size_t gap = 0;
  std::vector<std::size_t> nodes;  // preorder indexes of the run's roots
  std::size_t start = 0;           // raw child position of the first node
};

struct Layout {
  std::vector<std::size_t> context;  // preorder indexes
  std::vector<Run> runs;
};

Layout layout_of(const Side& side, std::size_t i) {
  Layout out;
  std::size_t position = 0;
  for (std::size_t j = i + 1; j < side.index.subtree_end(i); j = side.index.subtree_end(j), ++position) {
    if (side.matched[j]) {
      if (out.runs.empty() || out.runs.back().gap != out.context.size() ||
          out.runs.back().start + out.runs.back().nodes.size() != position) {
        out.runs.push_back(Run{out.context.size(), {}, position});
      }
      out.runs.back().nodes.push_back(j);
    } else {
      out.context.push_back(j);
    }
  }
  return out;
}

bool same_label(const AstNode& a, const AstNode& b) {
  if (a.kind != b.kind || a.attrs != b.attrs || a.value.has_value() != b.value.has_value()) return false;
  if (!a.value) return true;
  if (a.kind == Kind::numliteral) return normalize_decimal(*a.value) == normalize_decimal(*b.value);
  return *a.value == *b.value;
}

Attrs signature_attrs(const AstNode& node) {
  Attrs attrs = node.attrs;
  attrs.erase("parens");
  return attrs;
}

struct Group {
  SiteSignature signature;
  std::size_t old_parent = AstIndex::npos;
  std::size_t new_parent = AstIndex::npos;
  Run old_run;
  Run new_run;
  bool whole_tree = false;
};

class ContextMatcher {
 public:
  ContextMatcher(const Side& old_side, const Side& new_side) : old_(old_side), new_(new_side) {}

  bool run() {
    bool old_root = old_.matched[0] != 0;
    bool new_root = new_.matched[0] != 0;
    if (old_root || new_root) {
      if (old_root != new_root) return false;
      Group g;
      g.signature.kinds = {Kind::query};
      g.old_run.nodes = {0};
      g.new_run.nodes = {0};
      g.whole_tree = true;
      groups_.push_back(std::move(g));
      return true;
    }
    return compare(0, 0);
  }

  std::vector<Group>& groups() { return groups_; }

 private:
  bool compare(std::size_t a, std::size_t b) {
    const AstNode& na = old_.index.node(a);
    const AstNode& nb = new_.index.node(b);
    if (!same_label(na, nb)) return false;
    Layout la = layout_of(old_, a);
    Layout lb = layout_of(new_, b);
    if (la.context.size() != lb.context.size()) return false;

    path_.push_back(SignatureStep{na.kind, signature_attrs(na), step_ordinal_});
    const bool under_query = na.kind == Kind::query;
    auto ra = la.runs.begin();
    auto rb = lb.runs.begin();
    bool ok = true;
    for (std::size_t gap = 0; gap <= la.context.size() && ok; ++gap) {
      bool has_a = ra != la.runs.end() && ra->gap == gap;
      bool has_b = rb != lb.runs.end() && rb->gap == gap;
      if (has_a || has_b) {
        Group g;
        g.old_parent = a;
        g.new_parent = b;
        if (has_a) g.old_run = *ra++;
        if (has_b) g.new_run = *rb++;
        g.old_run.gap = g.new_run.gap = gap;
        if (!has_a) g.old_run.start = raw_position(old_, a, la, gap);
        if (!has_b) g.new_run.start = raw_position(new_, b, lb, gap);
        std::set<Kind> kinds;
        for (auto n : g.old_run.nodes) kinds.insert(old_.index.node(n).kind);
        for (auto n : g.new_run.nodes) kinds.insert(new_.index.node(n).kind);
        g.signature.parent_path = path_;
        g.signature.kinds.assign(kinds.begin(), kinds.end());
        if (!under_query) g.signature.gap = gap;
        groups_.push_back(std::move(g));
      }
      if (gap < la.context.size()) {
        step_ordinal_ = under_query ? std::nullopt : std::optional<std::size_t>(gap);
        ok = compare(la.context[gap], lb.context[gap]);
      }
    }
    path_.pop_back();
    return ok;
  }

  // Raw child position at which an empty run sits: just before the gap-th
  // context child (or at the end).
  static std::size_t raw_position(const Side& side, std::size_t parent, const Layout& layout,
                                  std::size_t gap) {
    if (gap < layout.context.size()) return side.index.child_position(layout.context[gap]);
    return side.index.node(parent).children.size();
  }

  const Side& old_;
  const Side& new_;
  std::vector<SignatureStep> path_;
  std::optional<std::size_t> step_ordinal_;
  std::vector<Group> groups_;
};

// --- predicate evaluation ---------------------------------------------------

struct VarValues {
  std::vector<std::string> old_keys;
  std::vector<std::string> new_keys;
  long long aligned = 0;
};

using Value = std::variant<std::vector<std::string>, long long>;

class PredicateEvaluator {
 public:
  explicit PredicateEvaluator(const std::map<std::string, VarValues>& vars) : vars_(vars) {}

  bool eval(const Predicate& p) const {
    switch (p.op) {
      case Predicate::Op::all_of:
        return std::all_of(p.operands.begin(), p.operands.end(), [&](const auto& q) { return eval(q); });
      case Predicate::Op::any_of:
        return std::any_of(p.operands.begin(), p.operands.end(), [&](const auto& q) { return eval(q); });
      case Predicate::Op::negate:
        return !eval(p.operands.at(0));
      default:
        break;
    }
    Value lhs = value(p.terms.at(0));
    Value rhs = value(p.terms.at(1));
    if (is_set_comparison(p.op)) {
      const auto& a = std::get<std::vector<std::string>>(lhs);
      const auto& b = std::get<std::vector<std::string>>(rhs);
      switch (p.op) {
        case Predicate::Op::set_equal:
          return a == b;
        case Predicate::Op::set_not_equal:
          return a != b;
        default: {
          std::set<std::string> superset(b.begin(), b.end());
          return std::all_of(a.begin(), a.end(), [&](const auto& v) { return superset.count(v) > 0; });
        }
      }
    }
    long long a = std::get<long long>(lhs);
    long long b = std::get<long long>(rhs);
    switch (p.op) {
      case Predicate::Op::eq: return a == b;
      case Predicate::Op::lt: return a < b;
      case Predicate::Op::le: return a <= b;
      case Predicate::Op::gt: return a > b;
      case Predicate::Op::ge: return a >= b;
      default: return false;
    }
  }

 private:
  Value value(const Term& t) const {
    switch (t.op) {
      case Term::Op::integer:
        return t.number;
      case Term::Op::plus:
        return std::get<long long>(value(t.operands[0])) + std::get<long long>(value(t.operands[1]));
      case Term::Op::size: {
        const Term& inner = t.operands[0];
        if (inner.op == Term::Op::variable && inner.version == Version::either) {
          return vars_.at(inner.var).aligned;
        }
        return static_cast<long long>(std::get<std::vector<std::string>>(value(inner)).size());
      }
      case Term::Op::variable: {
        const VarValues& v = vars_.at(t.var);
        if (t.version == Version::old_side) return v.old_keys;
        if (t.version == Version::new_side) return v.new_keys;
        std::vector<std::string> merged;
        for (const auto* list : {&v.old_keys, &v.new_keys}) {
          for (const auto& k : *list) {
            if (std::find(merged.begin(), merged.end(), k) == merged.end()) merged.push_back(k);
          }
        }
        return merged;
      }
    }
    return 0LL;
  }

  const std::map<std::string, VarValues>& vars_;
};

Kind parent_kind(const AstIndex& index, std::size_t i) {
  std::size_t p = index.parent(i);
  return p == AstIndex::npos ? Kind::query : index.node(p).kind;
}

std::vector<std::string> run_keys(const Side& side, const Run& run) {
  std::vector<std::string> out;
  for (auto n : run.nodes) out.push_back(canonical_key(side.index.node(n)));
  return out;
}

std::vector<std::string> run_texts(const Side& side, const Run& run) {
  std::vector<std::string> out;
  for (auto n : run.nodes) out.push_back(serialize(side.index.node(n), parent_kind(side.index, n)));
  return out;
}

// For every preorder index, the group whose run contains it (npos if none).
std::vector<std::size_t> owners(const Side& side, const std::vector<Group>& groups, bool old) {
  std::vector<std::size_t> owner(side.index.size(), AstIndex::npos);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (auto root : (old ? groups[g].old_run : groups[g].new_run).nodes) {
      for (auto i = root; i < side.index.subtree_end(root); ++i) owner[i] = g;
    }
  }
  return owner;
}

std::vector<std::string> split_blocks(std::string_view text) {
  std::vector<std::string> blocks;
  std::string current;
  auto flush = [&] {
    if (current.find_first_not_of(" \t\r\n") != std::string::npos) blocks.push_back(current);
    current.clear();
  };
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
      flush();
    } else if (line.substr(first, 2) != "//") {
      current.append(line);
      current.push_back('\n');
    }
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  flush();
  return blocks;
}

}  // namespace

Statement parse_statement(std::string_view text) { return StatementParser(text).parse(); }

StatementLibrary::StatementLibrary(std::vector<Statement> statements) : statements_(std::move(statements)) {
  std::set<std::string> labels;
  for (const auto& s : statements_) {
    if (!labels.insert(s.label).second) throw DuplicateLabel(s.label);
  }
}

const Statement* StatementLibrary::find(std::string_view label) const {
  for (const auto& s : statements_) {
    if (s.label == label) return &s;
  }
  return nullptr;
}

std::size_t StatementLibrary::index_of(std::string_view label) const {
  for (std::size_t i = 0; i < statements_.size(); ++i) {
    if (statements_[i].label == label) return i;
  }
  return statements_.size();
}

StatementLibrary parse_library(std::string_view text) {
  std::vector<Statement> statements;
  auto blocks = split_blocks(text);
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    try {
      statements.push_back(parse_statement(blocks[i]));
    } catch (const SyntaxError& e) {
      throw SyntaxError(e.detail(), e.offset(), i);
    }
  }
  return StatementLibrary(std::move(statements));
}

void typecheck(const Predicate& predicate) {
  for (const auto& op : predicate.operands) typecheck(op);
  if (predicate.terms.size() != 2) return;
  TermType lhs = type_of(predicate.terms[0]);
  TermType rhs = type_of(predicate.terms[1]);
  TermType wanted = is_set_comparison(predicate.op) ? TermType::set : TermType::integer;
  if (lhs != wanted || rhs != wanted) {
    throw TypeMismatch(std::string(wanted == TermType::set ? "set" : "integer") +
                       " comparison applied to a " +
                       (lhs != wanted ? (lhs == TermType::set ? "set" : "integer")
                                      : (rhs == TermType::set ? "set" : "integer")) +
                       " term (at offset " + std::to_string(predicate.terms[lhs != wanted ? 0 : 1].offset) + ")");
  }
}

std::optional<MatchResult> evaluate(const Statement& stmt, const Ast& old_ast, const Ast& new_ast) {
  typecheck(stmt.predicate);

  Side old_side(old_ast);
  Side new_side(new_ast);
  for (Side* side : {&old_side, &new_side}) {
    for (const auto& binding : stmt.bindings) {
      side->per_binding.push_back(eval_path(binding.path, side->index));
      for (auto i : side->per_binding.back()) side->matched[i] = 1;
    }
  }
  // Only outermost matches become placeholders.
  for (Side* side : {&old_side, &new_side}) {
    std::vector<char> outer(side->matched.size(), 0);
    for (std::size_t i = 0; i < side->matched.size(); ++i) {
      if (!side->matched[i]) continue;
      outer[i] = 1;
      i = side->index.subtree_end(i) - 1;
    }
    side->matched = std::move(outer);
  }

  ContextMatcher matcher(old_side, new_side);
  if (!matcher.run()) return std::nullopt;
  std::vector<Group>& groups = matcher.groups();

  auto old_owner = owners(old_side, groups, true);
  auto new_owner = owners(new_side, groups, false);

  std::map<std::string, VarValues> vars;
  for (std::size_t b = 0; b < stmt.bindings.size(); ++b) {
    VarValues v;
    std::vector<std::vector<std::string>> group_old(groups.size()), group_new(groups.size());
    for (auto i : old_side.per_binding[b]) {
      v.old_keys.push_back(canonical_key(old_side.index.node(i)));
      group_old[old_owner[i]].push_back(v.old_keys.back());
    }
    for (auto i : new_side.per_binding[b]) {
      v.new_keys.push_back(canonical_key(new_side.index.node(i)));
      group_new[new_owner[i]].push_back(v.new_keys.back());
    }
    // Positions within each run that differ (or exist on one side only).
    for (std::size_t g = 0; g < groups.size(); ++g) {
      const auto& o = group_old[g];
      const auto& n = group_new[g];
      for (std::size_t k = 0; k < std::max(o.size(), n.size()); ++k) {
        if (k >= o.size() || k >= n.size() || o[k] != n[k]) ++v.aligned;
      }
    }
    vars[stmt.bindings[b].var] = std::move(v);
  }

  if (!PredicateEvaluator(vars).eval(stmt.predicate)) return std::nullopt;

  MatchResult result;
  result.label = stmt.label;
  std::vector<std::string> signatures;
  for (const auto& g : groups) signatures.push_back(g.signature.str());

  for (std::size_t b = 0; b < stmt.bindings.size(); ++b) {
    VarBinding vb{stmt.bindings[b].var, {}, {}};
    for (auto i : old_side.per_binding[b]) {
      vb.old_values.push_back(
          {signatures[old_owner[i]], serialize(old_side.index.node(i), parent_kind(old_side.index, i))});
    }
    for (auto i : new_side.per_binding[b]) {
      vb.new_values.push_back(
          {signatures[new_owner[i]], serialize(new_side.index.node(i), parent_kind(new_side.index, i))});
    }
    result.bindings.push_back(std::move(vb));
  }

  for (const auto& g : groups) {
    if (run_keys(old_side, g.old_run) == run_keys(new_side, g.new_run)) continue;
    result.sites.push_back({g.signature, run_texts(old_side, g.old_run), run_texts(new_side, g.new_run)});
    SitePlacement p;
    p.whole_tree = g.whole_tree;
    if (!g.whole_tree) {
      p.old_parent = old_side.index.path_to(g.old_parent);
      p.new_parent = new_side.index.path_to(g.new_parent);
      p.old_start = g.old_run.start;
      p.new_start = g.new_run.start;
      p.old_count = g.old_run.nodes.size();
      p.new_count = g.new_run.nodes.size();
    }
    result.placements.push_back(std::move(p));
  }
  return result;
}

Ast replay(const Ast& old_ast, const Ast& new_ast, const MatchResult& match) {
  std::vector<const SitePlacement*> order;
  for (const auto& p : match.placements) {
    if (p.whole_tree) return new_ast;
    order.push_back(&p);
  }
  // Deepest / right-most first so earlier raw paths stay valid.
  std::sort(order.begin(), order.end(), [](const SitePlacement* a, const SitePlacement* b) {
    if (a->old_parent != b->old_parent) return a->old_parent > b->old_parent;
    return a->old_start > b->old_start;
  });
  AstNode root = old_ast.root();
  for (const SitePlacement* p : order) {
    AstNode* parent = node_at(root, p->old_parent);
    const AstNode* source = node_at(new_ast.root(), p->new_parent);
    if (!parent || !source) throw std::logic_error("replay: placement outside the tree");
    auto first = parent->children.begin() + static_cast<std::ptrdiff_t>(p->old_start);
    auto insert_at = parent->children.erase(first, first + static_cast<std::ptrdiff_t>(p->old_count));
    auto src_first = source->children.begin() + static_cast<std::ptrdiff_t>(p->new_start);
    parent->children.insert(insert_at, src_first, src_first + static_cast<std::ptrdiff_t>(p->new_count));
  }
  return Ast(std::move(root));
}

}  // namespace precis
