#include "precis/sql.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <sstream>

#include "precis/error.hpp"

namespace precis {

namespace {

constexpr std::array<std::string_view, 16> kKeywords = {
    "SELECT", "TOP",    "FROM", "WHERE", "GROUP", "BY",  "HAVING", "ORDER",
    "LIMIT",  "AS",     "AND",  "OR",    "NOT",   "BETWEEN", "ASC", "DESC",
};

// Reserved so that unsupported constructs fail loudly instead of being read
// as identifiers or implicit aliases.
constexpr std::array<std::string_view, 22> kUnsupported = {
    "DISTINCT", "JOIN",  "INNER",  "LEFT",   "RIGHT", "OUTER", "FULL", "CROSS",
    "ON",       "UNION", "EXCEPT", "INTERSECT", "IN", "LIKE",  "IS",   "NULL",
    "EXISTS",   "CASE",  "WHEN",   "THEN",   "ELSE",  "OFFSET",
};

std::string upper(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}

bool is_comparison(std::string_view op) {
  return op == "=" || op == "<>" || op == "<" || op == "<=" || op == ">" || op == ">=";
}

class Parser {
 public:
  Parser(std::string_view text, std::vector<Token> tokens)
      : text_(text), tokens_(std::move(tokens)) {}

  AstNode query() {
    AstNode q{.kind = Kind::query};
    q.span.begin = peek_begin();
    expect_keyword("SELECT");

    std::optional<AstNode> top;
    if (accept_keyword("TOP")) {
      AstNode clause{.kind = Kind::topclause};
      clause.span.begin = tokens_[pos_ - 1].begin;
      clause.children.push_back(unsigned_number());
      clause.span.end = clause.children.back().span.end;
      top = std::move(clause);
    }

    AstNode project{.kind = Kind::project};
    project.span.begin = peek_begin();
    do {
      project.children.push_back(select_item());
    } while (accept_symbol(","));
    project.span.end = project.children.back().span.end;
    q.children.push_back(std::move(project));

    expect_keyword("FROM");
    AstNode from{.kind = Kind::from};
    from.span.begin = tokens_[pos_ - 1].begin;
    do {
      from.children.push_back(table_item());
    } while (accept_symbol(","));
    from.span.end = from.children.back().span.end;
    q.children.push_back(std::move(from));

    if (accept_keyword("WHERE")) q.children.push_back(condition_clause(Kind::where));
    if (accept_keyword("GROUP")) {
      std::size_t begin = tokens_[pos_ - 1].begin;
      expect_keyword("BY");
      AstNode group{.kind = Kind::groupby};
      group.span.begin = begin;
      do {
        AstNode item{.kind = Kind::groupitem};
        item.children.push_back(expression());
        item.span = item.children.back().span;
        group.children.push_back(std::move(item));
      } while (accept_symbol(","));
      group.span.end = group.children.back().span.end;
      q.children.push_back(std::move(group));
    }
    if (accept_keyword("HAVING")) q.children.push_back(condition_clause(Kind::having));
    if (accept_keyword("ORDER")) {
      std::size_t begin = tokens_[pos_ - 1].begin;
      expect_keyword("BY");
      AstNode order{.kind = Kind::orderby};
      order.span.begin = begin;
      do {
        AstNode item{.kind = Kind::orderitem};
        item.children.push_back(expression());
        item.span = item.children.back().span;
        if (accept_keyword("ASC")) {
          item.attrs["dir"] = "ASC";
          item.span.end = tokens_[pos_ - 1].end;
        } else if (accept_keyword("DESC")) {
          item.attrs["dir"] = "DESC";
          item.span.end = tokens_[pos_ - 1].end;
        }
        order.children.push_back(std::move(item));
      } while (accept_symbol(","));
      order.span.end = order.children.back().span.end;
      q.children.push_back(std::move(order));
    }
    if (accept_keyword("LIMIT")) {
      AstNode clause{.kind = Kind::limitclause};
      clause.span.begin = tokens_[pos_ - 1].begin;
      clause.children.push_back(unsigned_number());
      clause.span.end = clause.children.back().span.end;
      q.children.push_back(std::move(clause));
    }
    if (top) q.children.push_back(std::move(*top));

    accept_symbol(";");
    if (!at_end()) fail("unexpected '" + tokens_[pos_].text + "'");
    q.span.end = text_.size();
    return q;
  }

  AstNode standalone_expression() {
    AstNode e = expression();
    if (!at_end()) fail("unexpected '" + tokens_[pos_].text + "'");
    return e;
  }

 private:
  bool at_end() const { return pos_ >= tokens_.size(); }

  std::size_t peek_begin() const { return at_end() ? text_.size() : tokens_[pos_].begin; }

  [[noreturn]] void fail(const std::string& message) const { throw SyntaxError(message, peek_begin()); }

  bool peek_keyword(std::string_view kw, std::size_t ahead = 0) const {
    std::size_t i = pos_ + ahead;
    return i < tokens_.size() && tokens_[i].type == Token::Type::keyword && tokens_[i].text == kw;
  }

  bool peek_symbol(std::string_view sym) const {
    return !at_end() && tokens_[pos_].type == Token::Type::symbol && tokens_[pos_].text == sym;
  }

  bool accept_keyword(std::string_view kw) {
    if (!peek_keyword(kw)) return false;
    ++pos_;
    return true;
  }

  bool accept_symbol(std::string_view sym) {
    if (!peek_symbol(sym)) return false;
    ++pos_;
    return true;
  }

  void expect_keyword(std::string_view kw) {
    if (!accept_keyword(kw)) fail("expected " + std::string(kw));
  }

  void expect_symbol(std::string_view sym) {
    if (!accept_symbol(sym)) fail("expected '" + std::string(sym) + "'");
  }

  AstNode unsigned_number() {
    if (at_end() || tokens_[pos_].type != Token::Type::number) fail("expected a number");
    const Token& t = tokens_[pos_++];
    return AstNode{.kind = Kind::numliteral, .value = t.text, .span = {t.begin, t.end}};
  }

  bool peek_name() const {
    return !at_end() && (tokens_[pos_].type == Token::Type::identifier ||
                         tokens_[pos_].type == Token::Type::quoted_identifier);
  }

  // ident ('.' ident)*, returned as the lexeme with original quoting.
  std::pair<std::string, Span> dotted_name() {
    if (!peek_name()) fail("expected an identifier");
    Span span{tokens_[pos_].begin, tokens_[pos_].end};
    std::string name = tokens_[pos_++].text;
    while (peek_symbol(".")) {
      ++pos_;
      if (!peek_name()) fail("expected an identifier after '.'");
      name += '.';
      name += tokens_[pos_].text;
      span.end = tokens_[pos_].end;
      ++pos_;
    }
    return {name, span};
  }

  AstNode alias_node() {
    if (!peek_name()) fail("expected an alias");
    const Token& t = tokens_[pos_++];
    return AstNode{.kind = Kind::alias, .value = t.text, .span = {t.begin, t.end}};
  }

  AstNode select_item() {
    AstNode item{.kind = Kind::projectclause};
    item.span.begin = peek_begin();
    if (peek_symbol("*")) {
      const Token& t = tokens_[pos_++];
      item.children.push_back(AstNode{.kind = Kind::star, .span = {t.begin, t.end}});
    } else {
      item.children.push_back(expression());
    }
    if (accept_keyword("AS") || peek_name()) item.children.push_back(alias_node());
    item.span.end = item.children.back().span.end;
    return item;
  }

  AstNode table_item() {
    AstNode clause{.kind = Kind::tableclause};
    auto [name, span] = dotted_name();
    clause.children.push_back(AstNode{.kind = Kind::tablename, .value = name, .span = span});
    clause.span = span;
    if (accept_keyword("AS") || peek_name()) {
      clause.children.push_back(alias_node());
      clause.span.end = clause.children.back().span.end;
    }
    return clause;
  }

  AstNode condition_clause(Kind kind) {
    AstNode clause{.kind = kind};
    clause.span.begin = tokens_[pos_ - 1].begin;
    clause.children.push_back(expression());
    clause.span.end = clause.children.back().span.end;
    return clause;
  }

  AstNode expression() { return disjunction(); }

  // AND/OR chains flatten into one n-ary node; parenthesized operands stay
  // separate because they carry a `parens` attribute.
  AstNode chain(std::string_view op, AstNode (Parser::*operand)()) {
    AstNode first = (this->*operand)();
    if (!peek_keyword(op)) return first;
    AstNode node{.kind = Kind::expr};
    node.attrs["op"] = std::string(op);
    node.span.begin = first.span.begin;
    auto absorb = [&](AstNode child) {
      if (child.kind == Kind::expr && child.attr("op") == op && !child.has_attr("parens")) {
        for (auto& c : child.children) node.children.push_back(std::move(c));
      } else {
        node.children.push_back(std::move(child));
      }
    };
    absorb(std::move(first));
    while (accept_keyword(op)) absorb((this->*operand)());
    node.span.end = node.children.back().span.end;
    return node;
  }

  AstNode disjunction() { return chain("OR", &Parser::conjunction); }
  AstNode conjunction() { return chain("AND", &Parser::negation); }

  AstNode negation() {
    if (peek_keyword("NOT")) {
      std::size_t begin = tokens_[pos_++].begin;
      AstNode inner = negation();
      AstNode node{.kind = Kind::expr, .span = {begin, inner.span.end}};
      node.attrs["op"] = "NOT";
      node.children.push_back(std::move(inner));
      return node;
    }
    return comparison();
  }

  AstNode comparison() {
    AstNode lhs = operand();
    if (!at_end() && tokens_[pos_].type == Token::Type::symbol) {
      std::string op = tokens_[pos_].text;
      if (op == "!=") op = "<>";
      if (is_comparison(op)) {
        ++pos_;
        AstNode rhs = operand();
        AstNode node{.kind = Kind::expr, .span = {lhs.span.begin, rhs.span.end}};
        node.attrs["op"] = op;
        node.children.push_back(std::move(lhs));
        node.children.push_back(std::move(rhs));
        return node;
      }
    }
    if (accept_keyword("BETWEEN")) {
      AstNode low = operand();
      expect_keyword("AND");
      AstNode high = operand();
      AstNode node{.kind = Kind::expr, .span = {lhs.span.begin, high.span.end}};
      node.attrs["op"] = "BETWEEN";
      node.children.push_back(std::move(lhs));
      node.children.push_back(std::move(low));
      node.children.push_back(std::move(high));
      return node;
    }
    return lhs;
  }

  AstNode operand() {
    if (at_end()) fail("unexpected end of input");
    const Token& t = tokens_[pos_];
    switch (t.type) {
      case Token::Type::number:
        ++pos_;
        return AstNode{.kind = Kind::numliteral, .value = t.text, .span = {t.begin, t.end}};
      case Token::Type::string:
        ++pos_;
        return AstNode{.kind = Kind::strliteral, .value = t.text, .span = {t.begin, t.end}};
      case Token::Type::identifier:
      case Token::Type::quoted_identifier:
        return name_or_call();
      case Token::Type::symbol:
        if (t.text == "-" && pos_ + 1 < tokens_.size() &&
            tokens_[pos_ + 1].type == Token::Type::number && tokens_[pos_ + 1].begin == t.end) {
          const Token& num = tokens_[pos_ + 1];
          pos_ += 2;
          return AstNode{.kind = Kind::numliteral, .value = "-" + num.text, .span = {t.begin, num.end}};
        }
        if (t.text == "(") {
          ++pos_;
          AstNode inner = expression();
          expect_symbol(")");
          std::size_t depth = 1;
          if (auto it = inner.attrs.find("parens"); it != inner.attrs.end()) {
            depth += std::stoul(it->second);
          }
          inner.attrs["parens"] = std::to_string(depth);
          inner.span = {t.begin, tokens_[pos_ - 1].end};
          return inner;
        }
        break;
      case Token::Type::keyword:
        break;
    }
    fail("unexpected '" + t.text + "'");
  }

  AstNode name_or_call() {
    if (tokens_[pos_].type == Token::Type::identifier && pos_ + 1 < tokens_.size() &&
        tokens_[pos_ + 1].type == Token::Type::symbol && tokens_[pos_ + 1].text == "(") {
      const Token& name = tokens_[pos_];
      pos_ += 2;
      AstNode call{.kind = Kind::funccall};
      call.attrs["name"] = name.text;
      call.span.begin = name.begin;
      if (peek_symbol("*")) {
        const Token& star = tokens_[pos_++];
        call.children.push_back(AstNode{.kind = Kind::star, .span = {star.begin, star.end}});
      } else if (!peek_symbol(")")) {
        do {
          call.children.push_back(expression());
        } while (accept_symbol(","));
      }
      expect_symbol(")");
      call.span.end = tokens_[pos_ - 1].end;
      return call;
    }
    auto [name, span] = dotted_name();
    return AstNode{.kind = Kind::columnref, .value = name, .span = span};
  }

  std::string_view text_;
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

bool is_blank(std::string_view text) {
  return std::all_of(text.begin(), text.end(),
                     [](unsigned char c) { return std::isspace(c) != 0; });
}

void check_not_empty(std::string_view text) {
  // Comments alone count as blank.
  std::string stripped;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '-' && i + 1 < text.size() && text[i + 1] == '-') {
      while (i < text.size() && text[i] != '\n') ++i;
      continue;
    }
    stripped.push_back(text[i]);
  }
  if (is_blank(stripped)) throw EmptyInput();
}

std::string parens(const AstNode& node, std::string body) {
  auto depth_text = node.attr("parens");
  if (depth_text.empty()) return body;
  std::size_t depth = std::stoul(std::string(depth_text));
  return std::string(depth, '(') + body + std::string(depth, ')');
}

std::string join(const std::vector<AstNode>& nodes, Kind parent, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (i) out += sep;
    out += serialize(nodes[i], parent);
  }
  return out;
}

// Clause nodes (or slots standing in for them) under a query.
Kind clause_kind(const AstNode& child) {
  if (child.kind != Kind::slot) return child.kind;
  auto stands_for = kind_from_name(child.attr("for"));
  return stands_for.value_or(Kind::slot);
}

}  // namespace

std::vector<Token> tokenize(std::string_view sql) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  const std::size_t n = sql.size();
  while (i < n) {
    char c = sql[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '-' && i + 1 < n && sql[i + 1] == '-') {
      while (i < n && sql[i] != '\n') ++i;
      continue;
    }
    std::size_t begin = i;
    if (c == '\'' || c == '"') {
      ++i;
      while (true) {
        if (i >= n) throw SyntaxError(c == '\'' ? "unterminated string" : "unterminated identifier", begin);
        if (sql[i] == c) {
          if (i + 1 < n && sql[i + 1] == c) {
            i += 2;
            continue;
          }
          ++i;
          break;
        }
        ++i;
      }
      tokens.push_back({c == '\'' ? Token::Type::string : Token::Type::quoted_identifier,
                        std::string(sql.substr(begin, i - begin)), begin, i});
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && i + 1 < n && std::isdigit(static_cast<unsigned char>(sql[i + 1])))) {
      while (i < n && std::isdigit(static_cast<unsigned char>(sql[i]))) ++i;
      if (i < n && sql[i] == '.') {
        ++i;
        while (i < n && std::isdigit(static_cast<unsigned char>(sql[i]))) ++i;
      }
      if (i < n && is_ident_char(sql[i])) throw SyntaxError("malformed number", begin);
      tokens.push_back({Token::Type::number, std::string(sql.substr(begin, i - begin)), begin, i});
      continue;
    }
    if (is_ident_start(c)) {
      while (i < n && is_ident_char(sql[i])) ++i;
      std::string word(sql.substr(begin, i - begin));
      std::string up = upper(word);
      if (std::find(kKeywords.begin(), kKeywords.end(), up) != kKeywords.end()) {
        tokens.push_back({Token::Type::keyword, up, begin, i});
      } else if (std::find(kUnsupported.begin(), kUnsupported.end(), up) != kUnsupported.end()) {
        throw SyntaxError("unsupported SQL construct '" + word + "'", begin);
      } else {
        tokens.push_back({Token::Type::identifier, word, begin, i});
      }
      continue;
    }
    static constexpr std::array<std::string_view, 4> kTwoChar = {"<=", ">=", "<>", "!="};
    std::string_view two = sql.substr(i, 2);
    if (std::find(kTwoChar.begin(), kTwoChar.end(), two) != kTwoChar.end()) {
      tokens.push_back({Token::Type::symbol, std::string(two), begin, i + 2});
      i += 2;
      continue;
    }
    if (std::string_view("(),.*=<>;-").find(c) != std::string_view::npos) {
      tokens.push_back({Token::Type::symbol, std::string(1, c), begin, i + 1});
      ++i;
      continue;
    }
    throw SyntaxError(std::string("unexpected character '") + c + "'", begin);
  }
  return tokens;
}

Ast parse_query(std::string_view text) {
  check_not_empty(text);
  Parser parser(text, tokenize(text));
  return Ast(parser.query());
}

AstNode parse_expression(std::string_view text) {
  check_not_empty(text);
  Parser parser(text, tokenize(text));
  return parser.standalone_expression();
}

std::string serialize(const AstNode& node, Kind parent) {
  switch (node.kind) {
    case Kind::query: {
      std::string out = "SELECT";
      auto emit = [&](Kind clause) {
        for (const auto& child : node.children) {
          if (clause_kind(child) == clause) {
            out += ' ';
            out += serialize(child, Kind::query);
          }
        }
      };
      for (Kind clause : {Kind::topclause, Kind::project, Kind::from, Kind::where, Kind::groupby,
                          Kind::having, Kind::orderby, Kind::limitclause}) {
        emit(clause);
      }
      return out;
    }
    case Kind::project:
      return join(node.children, Kind::project, ", ");
    case Kind::projectclause:
    case Kind::tableclause: {
      std::string out;
      for (std::size_t i = 0; i < node.children.size(); ++i) {
        if (i) out += ' ';
        out += serialize(node.children[i], node.kind);
      }
      return out;
    }
    case Kind::star:
      return "*";
    case Kind::from:
      return "FROM " + join(node.children, Kind::from, ", ");
    case Kind::where:
      return "WHERE " + join(node.children, Kind::where, " ");
    case Kind::having:
      return "HAVING " + join(node.children, Kind::having, " ");
    case Kind::groupby:
      return "GROUP BY " + join(node.children, Kind::groupby, ", ");
    case Kind::orderby:
      return "ORDER BY " + join(node.children, Kind::orderby, ", ");
    case Kind::groupitem:
      return join(node.children, Kind::groupitem, " ");
    case Kind::orderitem: {
      std::string out = join(node.children, Kind::orderitem, " ");
      if (node.has_attr("dir")) out += " " + std::string(node.attr("dir"));
      return out;
    }
    case Kind::limitclause:
      return "LIMIT " + join(node.children, Kind::limitclause, " ");
    case Kind::topclause:
      return "TOP " + join(node.children, Kind::topclause, " ");
    case Kind::expr: {
      std::string op(node.attr("op"));
      std::string body;
      if (op == "AND" || op == "OR") {
        body = join(node.children, Kind::expr, " " + op + " ");
      } else if (op == "NOT") {
        body = "NOT " + join(node.children, Kind::expr, " ");
      } else if (op == "BETWEEN" && node.children.size() == 3) {
        body = serialize(node.children[0], Kind::expr) + " BETWEEN " +
               serialize(node.children[1], Kind::expr) + " AND " +
               serialize(node.children[2], Kind::expr);
      } else {
        body = join(node.children, Kind::expr, " " + op + " ");
      }
      return parens(node, body);
    }
    case Kind::funccall:
      return parens(node, std::string(node.attr("name")) + "(" +
                              join(node.children, Kind::funccall, ", ") + ")");
    case Kind::alias:
      return parent == Kind::projectclause ? "AS " + node.value.value_or("")
                                           : node.value.value_or("");
    case Kind::tablename:
    case Kind::columnref:
    case Kind::strliteral:
    case Kind::numliteral:
      return parens(node, node.value.value_or(""));
    case Kind::slot:
      return "{{" + std::string(node.attr("name")) + "}}";
  }
  return {};
}

std::string serialize(const Ast& ast) { return serialize(ast.root(), Kind::query); }

std::vector<std::string> split_statements(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  std::size_t i = 0;
  auto flush = [&] {
    if (!is_blank(current)) out.push_back(current);
    current.clear();
  };
  while (i < text.size()) {
    char c = text[i];
    if (c == '-' && i + 1 < text.size() && text[i + 1] == '-') {
      while (i < text.size() && text[i] != '\n') ++i;
      continue;
    }
    if (c == '\'' || c == '"') {
      std::size_t begin = i++;
      while (i < text.size()) {
        if (text[i] == c) {
          if (i + 1 < text.size() && text[i + 1] == c) {
            i += 2;
            continue;
          }
          ++i;
          break;
        }
        ++i;
      }
      current.append(text.substr(begin, i - begin));
      continue;
    }
    if (c == ';') {
      flush();
      ++i;
      continue;
    }
    current.push_back(c);
    ++i;
  }
  flush();
  return out;
}

ParsedLog parse_log(std::string_view text) {
  ParsedLog log;
  auto statements = split_statements(text);
  for (std::size_t i = 0; i < statements.size(); ++i) {
    try {
      Ast ast = parse_query(statements[i]);
      std::string trimmed = statements[i];
      auto first = trimmed.find_first_not_of(" \t\r\n");
      auto last = trimmed.find_last_not_of(" \t\r\n");
      trimmed = trimmed.substr(first, last - first + 1);
      log.entries.push_back({SourceQuery{trimmed, log.entries.size()}, std::move(ast)});
    } catch (const Error& e) {
      log.diagnostics.push_back({i, e.what()});
    }
  }
  if (log.entries.empty()) {
    throw AllStatementsFailed(statements.empty()
                                  ? "log contains no statements"
                                  : "none of the " + std::to_string(statements.size()) +
                                        " statements parsed");
  }
  return log;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

ParsedLog read_log(const std::filesystem::path& path) { return parse_log(read_file(path)); }

}  // namespace precis
