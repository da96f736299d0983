#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace precis {

enum class WidgetKind { button, checkbox, dropdown, slider, textbox, listbox };

std::string_view widget_name(WidgetKind kind);
std::optional<WidgetKind> widget_from_name(std::string_view name);

struct WidgetCosts {
  double c_c = 1;  // complexity; for buttons, per option
  double c_e = 1;  // cost of one traversal
};

/// The widget kinds available to the optimizer and their costs.
class InteractionLibrary {
 public:
  InteractionLibrary() = default;
  /// Throws std::invalid_argument for non-positive costs.
  explicit InteractionLibrary(std::map<WidgetKind, WidgetCosts> widgets);

  static InteractionLibrary defaults();

  const std::map<WidgetKind, WidgetCosts>& widgets() const { return widgets_; }
  bool contains(WidgetKind kind) const { return widgets_.count(kind) > 0; }
  const WidgetCosts& costs(WidgetKind kind) const { return widgets_.at(kind); }
  bool empty() const { return widgets_.empty(); }
  double max_c_e() const;

 private:
  std::map<WidgetKind, WidgetCosts> widgets_;
};

struct CostsFile {
  InteractionLibrary library;
  std::optional<double> penalty;
};

/// Parses a costs override:
///   {"library": "replace" | "merge",
///    "widgets": {"dropdown": {"c_c": 2, "c_e": 2}, ...},
///    "penalty": 40}
/// `merge` (the default) overrides entries of `base`; `replace` keeps only
/// the listed widgets. Throws SchemaError.
CostsFile parse_costs(std::string_view json_text, const InteractionLibrary& base = InteractionLibrary::defaults());

enum class PairUniverse { adjacent, all_pairs };

struct CostModel {
  double S_max = 0;
  double penalty = 0;
  PairUniverse pairs = PairUniverse::adjacent;

  /// Default penalty is node_count * max c_e * 2. Throws
  /// std::invalid_argument when `penalty` is below node_count * max c_e.
  static CostModel make(std::size_t node_count, const InteractionLibrary& library, double S_max,
                        std::optional<double> penalty = std::nullopt,
                        PairUniverse pairs = PairUniverse::adjacent);
};

}  // namespace precis
