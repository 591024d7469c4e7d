#include "particle_limits/svg.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace particle_limits {

namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 520.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 780.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 480.0;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string fixed(double value, int decimals = 2) {
  char buffer[48];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value,
                                    std::chars_format::fixed, decimals);
  return std::string(buffer, result.ptr);
}

std::string general(double value) {
  char buffer[48];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value,
                                    std::chars_format::general, 6);
  return std::string(buffer, result.ptr);
}

std::string escape_text(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  for (const char c : text) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

struct Axis {
  bool log = false;
  double lo = 0.0;
  double hi = 1.0;

  double transform(double v) const { return log ? std::log10(v) : v; }
  double fraction(double v) const {
    const double t = transform(v);
    const double a = transform(lo);
    const double b = transform(hi);
    return b > a ? (t - a) / (b - a) : 0.5;
  }
};

std::vector<double> linear_ticks(double lo, double hi) {
  const double span = hi - lo;
  if (span <= 0.0) return {lo};
  const double raw_step = span / 5.0;
  const double magnitude = std::pow(10.0, std::floor(std::log10(raw_step)));
  const double normalized = raw_step / magnitude;
  double step = 10.0 * magnitude;
  if (normalized <= 1.0) {
    step = magnitude;
  } else if (normalized <= 2.0) {
    step = 2.0 * magnitude;
  } else if (normalized <= 5.0) {
    step = 5.0 * magnitude;
  }
  std::vector<double> ticks;
  for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * span; v += step) {
    ticks.push_back(v);
  }
  return ticks;
}

std::vector<double> log_ticks(double lo, double hi) {
  std::vector<double> ticks;
  const int first = static_cast<int>(std::ceil(std::log10(lo) - 1e-9));
  const int last = static_cast<int>(std::floor(std::log10(hi) + 1e-9));
  for (int e = first; e <= last; ++e) ticks.push_back(std::pow(10.0, e));
  if (ticks.size() < 2) {
    // Under two decades: fall back to linear ticks inside the window.
    return linear_ticks(lo, hi);
  }
  return ticks;
}

}  // namespace

std::string emit_svg(const std::vector<SvgSeries>& series, const SvgAxes& axes) {
  if (series.empty()) throw std::invalid_argument("svg needs at least one series");
  for (const auto& s : series) {
    if (s.points.empty()) {
      throw std::invalid_argument("svg series \"" + s.label + "\" is empty");
    }
  }

  Axis x_axis{axes.x_log};
  Axis y_axis{axes.y_log};
  double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo;
  double y_lo = std::numeric_limits<double>::infinity(), y_hi = -y_lo;
  for (const auto& s : series) {
    for (const auto& [x, y] : s.points) {
      if (axes.x_log && x <= 0.0) {
        throw std::invalid_argument("log x axis requires positive data");
      }
      if (axes.y_log && y <= 0.0) {
        throw std::invalid_argument("log y axis requires positive data");
      }
      x_lo = std::min(x_lo, x);
      x_hi = std::max(x_hi, x);
      y_lo = std::min(y_lo, y);
      y_hi = std::max(y_hi, y);
    }
  }
  if (x_lo == x_hi) {
    x_lo = axes.x_log ? x_lo / 2.0 : x_lo - 1.0;
    x_hi = axes.x_log ? x_hi * 2.0 : x_hi + 1.0;
  }
  if (y_lo == y_hi) {
    y_lo = axes.y_log ? y_lo / 2.0 : y_lo - 1.0;
    y_hi = axes.y_log ? y_hi * 2.0 : y_hi + 1.0;
  }
  x_axis.lo = x_lo;
  x_axis.hi = x_hi;
  y_axis.lo = y_lo;
  y_axis.hi = y_hi;

  auto px = [&](double v) { return kLeft + x_axis.fraction(v) * (kRight - kLeft); };
  auto py = [&](double v) { return kBottom - y_axis.fraction(v) * (kBottom - kTop); };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fixed(kWidth, 0) +
         "\" height=\"" + fixed(kHeight, 0) + "\" viewBox=\"0 0 " + fixed(kWidth, 0) +
         " " + fixed(kHeight, 0) + "\">\n";
  svg += "<rect width=\"" + fixed(kWidth, 0) + "\" height=\"" + fixed(kHeight, 0) +
         "\" fill=\"white\"/>\n";

  // Grid and ticks.
  const auto x_ticks = axes.x_log ? log_ticks(x_lo, x_hi) : linear_ticks(x_lo, x_hi);
  const auto y_ticks = axes.y_log ? log_ticks(y_lo, y_hi) : linear_ticks(y_lo, y_hi);
  for (const double t : x_ticks) {
    if (t < x_lo - 1e-12 || t > x_hi * (1.0 + 1e-12)) continue;
    const std::string x = fixed(px(t));
    svg += "<line x1=\"" + x + "\" y1=\"" + fixed(kTop) + "\" x2=\"" + x + "\" y2=\"" +
           fixed(kBottom) + "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    svg += "<text x=\"" + x + "\" y=\"" + fixed(kBottom + 18.0) +
           "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">" +
           general(t) + "</text>\n";
  }
  for (const double t : y_ticks) {
    if (t < y_lo - 1e-12 || t > y_hi * (1.0 + 1e-12)) continue;
    const std::string y = fixed(py(t));
    svg += "<line x1=\"" + fixed(kLeft) + "\" y1=\"" + y + "\" x2=\"" + fixed(kRight) +
           "\" y2=\"" + y + "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    svg += "<text x=\"" + fixed(kLeft - 8.0) + "\" y=\"" + fixed(py(t) + 4.0) +
           "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"end\">" +
           general(t) + "</text>\n";
  }

  // Plot frame.
  svg += "<rect x=\"" + fixed(kLeft) + "\" y=\"" + fixed(kTop) + "\" width=\"" +
         fixed(kRight - kLeft) + "\" height=\"" + fixed(kBottom - kTop) +
         "\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n";

  // Series polylines with markers on sparse series.
  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* color = kPalette[i % (sizeof(kPalette) / sizeof(kPalette[0]))];
    std::string points;
    for (const auto& [x, y] : series[i].points) {
      points += fixed(px(x)) + "," + fixed(py(y)) + " ";
    }
    if (!points.empty()) points.pop_back();
    svg += "<polyline points=\"" + points + "\" fill=\"none\" stroke=\"" + color +
           "\" stroke-width=\"1.5\"/>\n";
    if (series[i].points.size() <= 64) {
      for (const auto& [x, y] : series[i].points) {
        svg += "<circle cx=\"" + fixed(px(x)) + "\" cy=\"" + fixed(py(y)) +
               "\" r=\"3\" fill=\"" + color + "\"/>\n";
      }
    }
  }

  // Legend.
  double legend_y = kTop + 16.0;
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (series[i].label.empty()) continue;
    const char* color = kPalette[i % (sizeof(kPalette) / sizeof(kPalette[0]))];
    svg += "<rect x=\"" + fixed(kRight - 180.0) + "\" y=\"" + fixed(legend_y - 9.0) +
           "\" width=\"12\" height=\"12\" fill=\"" + std::string(color) + "\"/>\n";
    svg += "<text x=\"" + fixed(kRight - 162.0) + "\" y=\"" + fixed(legend_y + 1.0) +
           "\" font-family=\"sans-serif\" font-size=\"12\">" +
           escape_text(series[i].label) + "</text>\n";
    legend_y += 18.0;
  }

  // Labels, title, annotation.
  if (!axes.title.empty()) {
    svg += "<text x=\"" + fixed((kLeft + kRight) / 2.0) + "\" y=\"24\" "
           "font-family=\"sans-serif\" font-size=\"15\" text-anchor=\"middle\">" +
           escape_text(axes.title) + "</text>\n";
  }
  if (!axes.x_label.empty()) {
    svg += "<text x=\"" + fixed((kLeft + kRight) / 2.0) + "\" y=\"" +
           fixed(kHeight - 10.0) +
           "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">" +
           escape_text(axes.x_label) + "</text>\n";
  }
  if (!axes.y_label.empty()) {
    svg += "<text x=\"18\" y=\"" + fixed((kTop + kBottom) / 2.0) +
           "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" "
           "transform=\"rotate(-90 18 " +
           fixed((kTop + kBottom) / 2.0) + ")\">" + escape_text(axes.y_label) +
           "</text>\n";
  }
  if (!axes.annotation.empty()) {
    svg += "<text x=\"" + fixed(kLeft + 10.0) + "\" y=\"" + fixed(kBottom - 12.0) +
           "\" font-family=\"sans-serif\" font-size=\"13\">" +
           escape_text(axes.annotation) + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace particle_limits
