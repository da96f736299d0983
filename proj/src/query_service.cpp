#include "precis/query_service.hpp"

#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <csignal>
#include <cstring>
#include <stdexcept>

namespace precis {

namespace {

using json = nlohmann::json;

QueryResponse bad_request(const std::string& field, const std::string& message) {
  QueryResponse r;
  r.status = 400;
  r.body["error"] = message;
  r.body["field"] = field;
  return r;
}

void close_fd(int& fd) {
  if (fd >= 0) ::close(fd);
  fd = -1;
}

}  // namespace

CommandBackend::CommandBackend(std::string command) : command_(std::move(command)) {
  std::signal(SIGPIPE, SIG_IGN);
}

std::optional<json> CommandBackend::run(const std::string& sql) {
  int in[2], out[2], err[2];
  if (::pipe(in) != 0) throw BackendError(std::string("pipe: ") + std::strerror(errno));
  if (::pipe(out) != 0) {
    ::close(in[0]), ::close(in[1]);
    throw BackendError(std::string("pipe: ") + std::strerror(errno));
  }
  if (::pipe(err) != 0) {
    ::close(in[0]), ::close(in[1]), ::close(out[0]), ::close(out[1]);
    throw BackendError(std::string("pipe: ") + std::strerror(errno));
  }

  pid_t pid = ::fork();
  if (pid < 0) {
    for (int fd : {in[0], in[1], out[0], out[1], err[0], err[1]}) ::close(fd);
    throw BackendError(std::string("fork: ") + std::strerror(errno));
  }
  if (pid == 0) {
    ::dup2(in[0], STDIN_FILENO);
    ::dup2(out[1], STDOUT_FILENO);
    ::dup2(err[1], STDERR_FILENO);
    for (int fd : {in[0], in[1], out[0], out[1], err[0], err[1]}) ::close(fd);
    ::execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(in[0]);
  ::close(out[1]);
  ::close(err[1]);
  int to_child = in[1];
  int from_out = out[0];
  int from_err = err[0];

  std::string input = sql + "\n";
  std::size_t written = 0;
  std::string stdout_text, stderr_text;
  char buffer[4096];
  while (from_out >= 0 || from_err >= 0) {
    pollfd fds[3];
    int n = 0;
    if (to_child >= 0) fds[n++] = {to_child, POLLOUT, 0};
    if (from_out >= 0) fds[n++] = {from_out, POLLIN, 0};
    if (from_err >= 0) fds[n++] = {from_err, POLLIN, 0};
    if (::poll(fds, static_cast<nfds_t>(n), -1) < 0) {
      if (errno == EINTR) continue;
      break;
    }
    for (int i = 0; i < n; ++i) {
      if (!fds[i].revents) continue;
      if (fds[i].fd == to_child) {
        ssize_t w = ::write(to_child, input.data() + written, input.size() - written);
        if (w > 0) written += static_cast<std::size_t>(w);
        if (w < 0 || written == input.size()) close_fd(to_child);
        continue;
      }
      ssize_t r = ::read(fds[i].fd, buffer, sizeof buffer);
      if (r > 0) {
        (fds[i].fd == from_out ? stdout_text : stderr_text).append(buffer, static_cast<std::size_t>(r));
      } else if (r == 0 || errno != EINTR) {
        close_fd(fds[i].fd == from_out ? from_out : from_err);
      }
    }
  }
  close_fd(to_child);
  int status = 0;
  while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }

  if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
    std::string why = WIFEXITED(status) ? "exit status " + std::to_string(WEXITSTATUS(status)) : "killed by signal";
    throw BackendError("command failed (" + why + "): " + stderr_text);
  }
  json parsed;
  try {
    parsed = json::parse(stdout_text);
  } catch (const json::parse_error& e) {
    throw BackendError(std::string("command output is not JSON: ") + e.what());
  }
  if (parsed.is_array()) return parsed;
  if (parsed.is_object() && parsed.contains("rows")) return parsed["rows"];
  throw BackendError("command output has no rows");
}

std::unique_ptr<QueryBackend> make_backend(std::string_view spec) {
  if (spec == "echo") return std::make_unique<EchoBackend>();
  if (spec.substr(0, 8) == "command:" && spec.size() > 8) {
    return std::make_unique<CommandBackend>(std::string(spec.substr(8)));
  }
  throw std::invalid_argument("unknown backend '" + std::string(spec) + "' (expected echo or command:<cmd>)");
}

QueryResponse handle_query(const InterfaceSpec& spec, std::string_view body, QueryBackend& backend,
                           bool permissive) {
  json request;
  try {
    request = json::parse(body);
  } catch (const json::parse_error&) {
    return bad_request("body", "request body is not JSON");
  }
  if (!request.is_object()) return bad_request("body", "expected a JSON object");
  if (!request.contains("panel") || !request["panel"].is_number_unsigned()) {
    return bad_request("panel", "expected a panel id");
  }
  auto id = request["panel"].get<std::size_t>();
  const Panel* panel = nullptr;
  for (const auto& p : spec.panels) {
    if (p.id == id) panel = &p;
  }
  if (!panel) return bad_request("panel", "no panel " + std::to_string(id));

  std::map<std::string, json> values;
  if (request.contains("slot_values")) {
    const json& sv = request["slot_values"];
    if (!sv.is_object()) return bad_request("slot_values", "expected an object");
    for (const auto& [slot, value] : sv.items()) values[slot] = value;
  }

  std::string sql;
  try {
    sql = instantiate(*panel, values, permissive);
  } catch (const DomainError& e) {
    return bad_request(e.field(), e.what());
  }

  QueryResponse response;
  try {
    auto rows = backend.run(sql);
    response.body["sql"] = sql;
    if (rows) response.body["rows"] = nlohmann::ordered_json::parse(rows->dump());
  } catch (const BackendError& e) {
    response.status = 502;
    response.body = nlohmann::ordered_json();
    response.body["error"] = "backend failed";
    response.body["diagnostic"] = e.what();
  }
  return response;
}

}  // namespace precis
