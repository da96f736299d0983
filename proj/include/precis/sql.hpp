#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "precis/ast.hpp"

namespace precis {

struct Token {
  enum class Type { keyword, identifier, quoted_identifier, string, number, symbol };

  Type type;
  std::string text;  // keywords upper-cased, everything else verbatim
  std::size_t begin;
  std::size_t end;
};

/// Lexes the SQL subset. `--` comments and whitespace are dropped.
std::vector<Token> tokenize(std::string_view sql);

/// Parses one SELECT statement of the supported subset. A single trailing
/// `;` is tolerated.
///
/// Supported: SELECT [TOP n] items FROM tables [WHERE e] [GROUP BY items]
/// [HAVING e] [ORDER BY items] [LIMIT n], where expressions are boolean
/// combinations (AND/OR/NOT) of comparisons and BETWEEN over column refs,
/// function calls and literals. Parentheses are kept as a `parens` attribute
/// so the text round-trips.
///
/// Throws EmptyInput for blank text and SyntaxError otherwise.
Ast parse_query(std::string_view text);

/// Parses a single scalar expression (literal, column ref, call, comparison).
AstNode parse_expression(std::string_view text);

/// Canonical single-spaced SQL for a whole query.
std::string serialize(const Ast& ast);

/// Text of `node` as it appears under a parent of kind `parent`
/// (e.g. a topclause renders as "TOP 5", an alias under a projectclause as
/// "AS x"). Slot nodes render as `{{name}}`.
std::string serialize(const AstNode& node, Kind parent);

struct SourceQuery {
  std::string text;
  std::size_t log_index = 0;
};

struct LogEntry {
  SourceQuery source;
  Ast ast;
};

struct LogDiagnostic {
  std::size_t statement_index;  // position among non-empty statements
  std::string message;
};

struct ParsedLog {
  std::vector<LogEntry> entries;
  std::vector<LogDiagnostic> diagnostics;
};

/// Splits a `;`-separated log and parses every statement. Unparseable
/// statements become diagnostics; entries get contiguous log indexes.
/// Throws AllStatementsFailed when nothing parses (an empty log included).
ParsedLog parse_log(std::string_view text);

/// Reads and parses a log file. Throws IoError naming the path.
ParsedLog read_log(const std::filesystem::path& path);

/// Splits log text into statement texts (comments stripped, blanks skipped).
std::vector<std::string> split_statements(std::string_view text);

std::string read_file(const std::filesystem::path& path);

}  // namespace precis
