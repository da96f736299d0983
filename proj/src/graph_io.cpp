#include <sstream>

#include <json.hpp>

#include "precis/error.hpp"
#include "precis/graph.hpp"

namespace precis {

using json = nlohmann::ordered_json;

namespace {

std::string dot_escape(std::string_view text) {
  std::string out;
  for (char c : text) {
    if (c == '"' || c == '\\') out.push_back('\\');
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out.push_back(c);
  }
  return out;
}

const char* edge_color(const GraphEdge& edge) {
  if (edge.sites.empty()) return "gray";
  switch (edge.sites.front().signature.clause()) {
    case Kind::project: return "blue";
    case Kind::where:
    case Kind::having: return "red";
    default: return "gray";
  }
}

json values_json(const std::vector<SiteValue>& values) {
  json out = json::array();
  for (const auto& v : values) out.push_back({{"site", v.signature}, {"text", v.text}});
  return out;
}

[[noreturn]] void schema_fail(const std::string& where, const std::string& message) {
  throw SchemaError(where, message);
}

const json& field(const json& object, const char* name, const std::string& where) {
  if (!object.is_object()) schema_fail(where, "expected an object");
  auto it = object.find(name);
  if (it == object.end()) schema_fail(where + "/" + name, "missing");
  return *it;
}

std::string string_field(const json& object, const char* name, const std::string& where) {
  const json& v = field(object, name, where);
  if (!v.is_string()) schema_fail(where + "/" + name, "expected a string");
  return v.get<std::string>();
}

const json& array_field(const json& object, const char* name, const std::string& where) {
  const json& v = field(object, name, where);
  if (!v.is_array()) schema_fail(where + "/" + name, "expected an array");
  return v;
}

std::vector<std::string> string_list(const json& array, const std::string& where) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < array.size(); ++i) {
    if (!array[i].is_string()) schema_fail(where + "/" + std::to_string(i), "expected a string");
    out.push_back(array[i].get<std::string>());
  }
  return out;
}

std::vector<SiteValue> values_from_json(const json& array, const std::string& where) {
  std::vector<SiteValue> out;
  for (std::size_t i = 0; i < array.size(); ++i) {
    std::string at = where + "/" + std::to_string(i);
    out.push_back({string_field(array[i], "site", at), string_field(array[i], "text", at)});
  }
  return out;
}

}  // namespace

std::string export_dot(const TransformationGraph& graph) {
  std::ostringstream out;
  out << "digraph transformations {\n";
  out << "  node [shape=box, fontname=\"monospace\"];\n";
  for (std::size_t i = 0; i < graph.nodes().size(); ++i) {
    const GraphNode& node = graph.nodes()[i];
    out << "  q" << i << " [label=\"" << dot_escape(node.sql) << "\"";
    if (node.multiplicity > 1) out << ", xlabel=\"x" << node.multiplicity << "\"";
    out << "];\n";
  }
  for (const auto& edge : graph.edges()) {
    out << "  q" << edge.src << " -> q" << edge.dst << " [label=\"" << dot_escape(edge.label)
        << "\", color=" << edge_color(edge) << "];\n";
  }
  out << "}\n";
  return out.str();
}

std::string export_json(const TransformationGraph& graph) {
  json nodes = json::array();
  for (const auto& node : graph.nodes()) {
    nodes.push_back({{"key", node.key},
                     {"sql", node.sql},
                     {"multiplicity", node.multiplicity},
                     {"log_indexes", node.log_indexes}});
  }
  json edges = json::array();
  for (const auto& edge : graph.edges()) {
    json sites = json::array();
    for (const auto& site : edge.sites) {
      sites.push_back({{"signature", site.signature.str()}, {"old", site.old_values}, {"new", site.new_values}});
    }
    json bindings = json::array();
    for (const auto& b : edge.bindings) {
      bindings.push_back({{"var", b.var}, {"old", values_json(b.old_values)}, {"new", values_json(b.new_values)}});
    }
    edges.push_back({{"src", graph.nodes()[edge.src].key},
                     {"dst", graph.nodes()[edge.dst].key},
                     {"label", edge.label},
                     {"sites", std::move(sites)},
                     {"bindings", std::move(bindings)}});
  }
  json doc = {{"nodes", std::move(nodes)}, {"edges", std::move(edges)}};
  return doc.dump(2) + "\n";
}

TransformationGraph import_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError("/", std::string("invalid JSON: ") + e.what());
  }

  std::vector<GraphNode> nodes;
  const json& node_array = array_field(doc, "nodes", "");
  for (std::size_t i = 0; i < node_array.size(); ++i) {
    std::string at = "/nodes/" + std::to_string(i);
    const json& n = node_array[i];
    std::string key = string_field(n, "key", at);
    std::string sql = string_field(n, "sql", at);
    const json& mult = field(n, "multiplicity", at);
    if (!mult.is_number_unsigned()) schema_fail(at + "/multiplicity", "expected a non-negative integer");
    std::vector<std::size_t> indexes;
    const json& idx = array_field(n, "log_indexes", at);
    for (std::size_t k = 0; k < idx.size(); ++k) {
      if (!idx[k].is_number_unsigned()) {
        schema_fail(at + "/log_indexes/" + std::to_string(k), "expected a non-negative integer");
      }
      indexes.push_back(idx[k].get<std::size_t>());
    }
    if (indexes.size() != mult.get<std::size_t>()) {
      schema_fail(at + "/multiplicity", "does not match the number of log indexes");
    }
    std::optional<Ast> ast;
    try {
      ast.emplace(parse_query(sql));
    } catch (const Error& e) {
      schema_fail(at + "/sql", e.what());
    }
    if (ast->canonical_key() != key) schema_fail(at + "/key", "does not match the parsed sql");
    nodes.push_back(GraphNode{std::move(key), std::move(sql), std::move(*ast), mult.get<std::size_t>(),
                              std::move(indexes)});
  }
  TransformationGraph lookup(nodes, {});

  std::vector<GraphEdge> edges;
  const json& edge_array = array_field(doc, "edges", "");
  for (std::size_t i = 0; i < edge_array.size(); ++i) {
    std::string at = "/edges/" + std::to_string(i);
    const json& e = edge_array[i];
    GraphEdge edge;
    edge.src = lookup.find(string_field(e, "src", at));
    edge.dst = lookup.find(string_field(e, "dst", at));
    if (edge.src == nodes.size()) schema_fail(at + "/src", "unknown node key");
    if (edge.dst == nodes.size()) schema_fail(at + "/dst", "unknown node key");
    edge.label = string_field(e, "label", at);
    const json& sites = array_field(e, "sites", at);
    for (std::size_t s = 0; s < sites.size(); ++s) {
      std::string site_at = at + "/sites/" + std::to_string(s);
      SiteChange change;
      try {
        change.signature = SiteSignature::parse(string_field(sites[s], "signature", site_at));
      } catch (const SchemaError&) {
        throw;
      } catch (const Error& err) {
        schema_fail(site_at + "/signature", err.what());
      }
      change.old_values = string_list(array_field(sites[s], "old", site_at), site_at + "/old");
      change.new_values = string_list(array_field(sites[s], "new", site_at), site_at + "/new");
      edge.sites.push_back(std::move(change));
    }
    if (e.contains("bindings")) {
      const json& bindings = array_field(e, "bindings", at);
      for (std::size_t b = 0; b < bindings.size(); ++b) {
        std::string b_at = at + "/bindings/" + std::to_string(b);
        edge.bindings.push_back({string_field(bindings[b], "var", b_at),
                                 values_from_json(array_field(bindings[b], "old", b_at), b_at + "/old"),
                                 values_from_json(array_field(bindings[b], "new", b_at), b_at + "/new")});
      }
    }
    edges.push_back(std::move(edge));
  }
  return TransformationGraph(std::move(nodes), std::move(edges));
}

}  // namespace precis
