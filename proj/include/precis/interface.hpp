#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "precis/graph.hpp"
#include "precis/optimizer.hpp"
#include "precis/widgets.hpp"

namespace precis {

struct Domain {
  enum class Type { options, range, toggle, text };

  Type type = Type::options;
  std::vector<std::string> options;  // options: SQL text of each choice
  double min = 0;                    // range
  double max = 0;
  double step = 1;
  int decimals = 0;
  std::string on;                      // toggle: text when checked
  Kind literal_kind = Kind::strliteral;  // text, and options over literals
};

struct Widget {
  std::string id;
  WidgetKind kind = WidgetKind::button;
  std::string slot;
  Domain domain;
  nlohmann::json current;
  std::string caption;
};

struct Panel {
  std::size_t id = 0;
  std::string base_sql;
  std::string templ;  // SQL with {{slot}} markers
  std::vector<Widget> widgets;

  const Widget* find_slot(std::string_view slot) const;
};

struct Coverage {
  std::size_t covered = 0;
  std::size_t total = 0;
  std::size_t covered_raw = 0;
  std::size_t total_raw = 0;
};

struct InterfaceSpec {
  std::vector<Panel> panels;
  Coverage coverage;
  double C_e = 0;
  double C_c = 0;
  double S_max = 0;
};

/// One panel per connected component of the graph (ignoring direction),
/// ordered by first log appearance and anchored on the component's earliest
/// query. Each assignment whose group has edges in a component becomes a
/// widget there, with a domain drawn from that component's observed values.
/// Throws InconsistentDomain when slider values are not numbers.
InterfaceSpec populate_widgets(const Mapping& mapping, const TransformationGraph& graph,
                               const std::vector<TransformationGroup>& groups);

/// populate_widgets plus coverage over the graph's log and the cost figures.
InterfaceSpec generate_interface(const Mapping& mapping, const TransformationGraph& graph,
                                 const std::vector<TransformationGroup>& groups, const CostModel& cost);

/// SQL text a widget contributes for `value`. Throws DomainError naming the
/// slot if the value is outside the widget's domain. `permissive` accepts
/// any text in textboxes.
std::string slot_text(const Widget& widget, const nlohmann::json& value, bool permissive = false);

/// Fills the panel template (unlisted slots keep their current value) and
/// returns the canonical SQL. Throws DomainError.
std::string instantiate(const Panel& panel, const std::map<std::string, nlohmann::json>& values,
                        bool permissive = false);

/// Whether some in-domain setting of the panel's widgets yields `query`.
bool covers(const Panel& panel, const Ast& query);

Coverage coverage(const InterfaceSpec& spec, const std::vector<LogEntry>& log);
Coverage coverage(const InterfaceSpec& spec, const TransformationGraph& graph);

std::string to_json(const InterfaceSpec& spec);
/// Throws SchemaError naming the offending location.
InterfaceSpec interface_from_json(std::string_view text);

}  // namespace precis
