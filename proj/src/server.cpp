#include "precis/server.hpp"

namespace precis {

std::unique_ptr<httplib::Server> make_server(const InterfaceSpec& spec, std::string spec_json,
                                             QueryBackend& backend, bool permissive) {
  auto server = std::make_unique<httplib::Server>();
  server->Get("/interface", [json = std::move(spec_json)](const httplib::Request&, httplib::Response& res) {
    res.set_content(json, "application/json");
  });
  server->Post("/query", [&spec, &backend, permissive](const httplib::Request& req, httplib::Response& res) {
    QueryResponse r = handle_query(spec, req.body, backend, permissive);
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  });
  return server;
}

}  // namespace precis
