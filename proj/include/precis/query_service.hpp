#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "precis/error.hpp"
#include "precis/interface.hpp"

namespace precis {

class BackendError : public Error {
 public:
  using Error::Error;
};

/// Executes substituted SQL. Returns rows, or nullopt when the backend only
/// echoes. Throws BackendError.
class QueryBackend {
 public:
  virtual ~QueryBackend() = default;
  virtual std::optional<nlohmann::json> run(const std::string& sql) = 0;
};

class EchoBackend : public QueryBackend {
 public:
  std::optional<nlohmann::json> run(const std::string&) override { return std::nullopt; }
};

/// Runs `/bin/sh -c command` with the SQL on stdin and expects JSON on
/// stdout: either an array of rows or an object with a "rows" member.
class CommandBackend : public QueryBackend {
 public:
  /// Ignores SIGPIPE process-wide so a command that exits early cannot kill
  /// the server.
  explicit CommandBackend(std::string command);
  std::optional<nlohmann::json> run(const std::string& sql) override;

 private:
  std::string command_;
};

/// `echo` or `command:<shell command>`. Throws std::invalid_argument.
std::unique_ptr<QueryBackend> make_backend(std::string_view spec);

struct QueryResponse {
  int status = 200;
  nlohmann::ordered_json body;
};

/// Handles a POST /query body `{"panel": id, "slot_values": {...}}`.
/// 400 with a `field` member for bad requests or out-of-domain values,
/// 502 with a `diagnostic` member when the backend fails.
QueryResponse handle_query(const InterfaceSpec& spec, std::string_view body, QueryBackend& backend,
                           bool permissive = false);

}  // namespace precis
