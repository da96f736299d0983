#include "precis/widgets.hpp"

#include <algorithm>
#include <stdexcept>

#include <json.hpp>

#include "precis/error.hpp"

namespace precis {

namespace {

constexpr std::pair<WidgetKind, std::string_view> kNames[] = {
    {WidgetKind::button, "button"},   {WidgetKind::checkbox, "checkbox"}, {WidgetKind::dropdown, "dropdown"},
    {WidgetKind::slider, "slider"},   {WidgetKind::textbox, "textbox"},   {WidgetKind::listbox, "listbox"},
};

double positive_number(const nlohmann::json& v, const std::string& where) {
  if (!v.is_number() || v.get<double>() <= 0) throw SchemaError(where, "expected a positive number");
  return v.get<double>();
}

}  // namespace

std::string_view widget_name(WidgetKind kind) {
  for (const auto& [k, name] : kNames) {
    if (k == kind) return name;
  }
  return "button";
}

std::optional<WidgetKind> widget_from_name(std::string_view name) {
  for (const auto& [k, n] : kNames) {
    if (n == name) return k;
  }
  return std::nullopt;
}

InteractionLibrary::InteractionLibrary(std::map<WidgetKind, WidgetCosts> widgets) : widgets_(std::move(widgets)) {
  for (const auto& [kind, costs] : widgets_) {
    if (!(costs.c_c > 0) || !(costs.c_e > 0)) {
      throw std::invalid_argument("costs of " + std::string(widget_name(kind)) + " must be positive");
    }
  }
}

InteractionLibrary InteractionLibrary::defaults() {
  return InteractionLibrary({
      {WidgetKind::button, {1, 1}},
      {WidgetKind::checkbox, {1, 1}},
      {WidgetKind::dropdown, {2, 2}},
      {WidgetKind::slider, {3, 1.5}},
      {WidgetKind::textbox, {2, 4}},
      {WidgetKind::listbox, {3, 2}},
  });
}

double InteractionLibrary::max_c_e() const {
  double m = 0;
  for (const auto& [kind, costs] : widgets_) m = std::max(m, costs.c_e);
  return m;
}

CostsFile parse_costs(std::string_view json_text, const InteractionLibrary& base) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError("/", std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw SchemaError("/", "expected an object");

  std::string mode = "merge";
  if (doc.contains("library")) {
    if (!doc["library"].is_string()) throw SchemaError("/library", "expected \"replace\" or \"merge\"");
    mode = doc["library"].get<std::string>();
    if (mode != "replace" && mode != "merge") throw SchemaError("/library", "expected \"replace\" or \"merge\"");
  }

  std::map<WidgetKind, WidgetCosts> widgets;
  if (mode == "merge") widgets = base.widgets();
  if (doc.contains("widgets")) {
    const auto& w = doc["widgets"];
    if (!w.is_object()) throw SchemaError("/widgets", "expected an object");
    for (const auto& [name, entry] : w.items()) {
      std::string at = "/widgets/" + name;
      auto kind = widget_from_name(name);
      if (!kind) throw SchemaError(at, "unknown widget kind");
      if (!entry.is_object()) throw SchemaError(at, "expected an object");
      WidgetCosts costs = widgets.count(*kind) ? widgets[*kind] : WidgetCosts{};
      if (entry.contains("c_c")) costs.c_c = positive_number(entry["c_c"], at + "/c_c");
      if (entry.contains("c_e")) costs.c_e = positive_number(entry["c_e"], at + "/c_e");
      widgets[*kind] = costs;
    }
  }

  CostsFile out{InteractionLibrary(std::move(widgets)), std::nullopt};
  if (doc.contains("penalty")) out.penalty = positive_number(doc["penalty"], "/penalty");
  return out;
}

CostModel CostModel::make(std::size_t node_count, const InteractionLibrary& library, double S_max,
                          std::optional<double> penalty, PairUniverse pairs) {
  double floor = static_cast<double>(node_count) * library.max_c_e();
  CostModel model;
  model.S_max = S_max;
  model.pairs = pairs;
  model.penalty = penalty.value_or(floor * 2);
  if (model.penalty < floor) {
    throw std::invalid_argument("penalty must be at least " + std::to_string(floor) +
                                " (node count times the largest c_e)");
  }
  return model;
}

}  // namespace precis
