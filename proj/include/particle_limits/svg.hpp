#ifndef PARTICLE_LIMITS_SVG_HPP
#define PARTICLE_LIMITS_SVG_HPP

#include <string>
#include <utility>
#include <vector>

namespace particle_limits {

struct SvgSeries {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

struct SvgAxes {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool x_log = false;
  bool y_log = false;
  /// Free-form note drawn inside the plot (e.g. a fitted slope).
  std::string annotation;
};

/// Self-contained SVG line plot; identical input produces identical bytes.
/// Data bounds map exactly onto the plot box. Log axes require strictly
/// positive data on that axis and empty series are rejected.
std::string emit_svg(const std::vector<SvgSeries>& series, const SvgAxes& axes);

}  // namespace particle_limits

#endif
