#pragma once

#include <string>
#include <vector>

namespace proxrl::cli {

/// Minimal line/band/error-bar chart rendered to a standalone SVG string.
/// Coordinates are printed with fixed precision so output is reproducible.
class SvgPlot {
 public:
  SvgPlot(std::string title, std::string x_label, std::string y_label);

  void add_line(std::vector<double> xs, std::vector<double> ys, std::string color, std::string label);
  /// Shaded region between lo and hi.
  void add_band(std::vector<double> xs, std::vector<double> lo, std::vector<double> hi, std::string color);
  /// Vertical bars ys +- err with markers.
  void add_error_bars(std::vector<double> xs, std::vector<double> ys, std::vector<double> err, std::string color);

  std::string render(int width = 640, int height = 420) const;

 private:
  struct Series {
    enum class Kind { kLine, kBand, kErrorBars } kind;
    std::vector<double> xs, a, b;
    std::string color, label;
  };

  std::string title_, x_label_, y_label_;
  std::vector<Series> series_;
};

}  // namespace proxrl::cli
