#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace precis {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Text outside the accepted grammar. `offset` is a character offset into
/// the text that was being parsed.
class SyntaxError : public Error {
 public:
  SyntaxError(const std::string& message, std::size_t offset,
              std::optional<std::size_t> statement_index = std::nullopt)
      : Error(format(message, offset, statement_index)),
        offset_(offset),
        statement_index_(statement_index),
        detail_(message) {}

  std::size_t offset() const { return offset_; }
  std::optional<std::size_t> statement_index() const { return statement_index_; }
  const std::string& detail() const { return detail_; }

 private:
  static std::string format(const std::string& message, std::size_t offset,
                            std::optional<std::size_t> statement_index) {
    std::string out;
    if (statement_index) out += "statement " + std::to_string(*statement_index) + ": ";
    out += "syntax error at offset " + std::to_string(offset) + ": " + message;
    return out;
  }

  std::size_t offset_;
  std::optional<std::size_t> statement_index_;
  std::string detail_;
};

class EmptyInput : public Error {
 public:
  EmptyInput() : Error("empty input") {}
};

class UnknownKind : public Error {
 public:
  explicit UnknownKind(const std::string& kind)
      : Error("unknown node kind '" + kind + "'"), kind_(kind) {}
  const std::string& kind() const { return kind_; }

 private:
  std::string kind_;
};

class UndeclaredVariable : public Error {
 public:
  explicit UndeclaredVariable(const std::string& var)
      : Error("undeclared variable '" + var + "'"), var_(var) {}
  const std::string& variable() const { return var_; }

 private:
  std::string var_;
};

class TypeMismatch : public Error {
 public:
  using Error::Error;
};

class DuplicateLabel : public Error {
 public:
  explicit DuplicateLabel(const std::string& label)
      : Error("duplicate statement label '" + label + "'"), label_(label) {}
  const std::string& label() const { return label_; }

 private:
  std::string label_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class AllStatementsFailed : public Error {
 public:
  using Error::Error;
};

class InconsistentDomain : public Error {
 public:
  using Error::Error;
};

/// Malformed graph or interface JSON; `location` is a JSON-pointer-like path.
class SchemaError : public Error {
 public:
  SchemaError(const std::string& location, const std::string& message)
      : Error(location + ": " + message), location_(location) {}
  const std::string& location() const { return location_; }

 private:
  std::string location_;
};

/// A slot value the panel cannot express. `field` names the offending slot.
class DomainError : public Error {
 public:
  DomainError(const std::string& field, const std::string& message)
      : Error(field + ": " + message), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

}  // namespace precis
