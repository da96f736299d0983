#pragma once

#include <memory>
#include <string>

#include <httplib.h>

#include "precis/interface.hpp"
#include "precis/query_service.hpp"

namespace precis {

/// GET /interface returns `spec_json` verbatim; POST /query goes through
/// handle_query. The spec and backend must outlive the server.
std::unique_ptr<httplib::Server> make_server(const InterfaceSpec& spec, std::string spec_json,
                                             QueryBackend& backend, bool permissive = false);

}  // namespace precis
