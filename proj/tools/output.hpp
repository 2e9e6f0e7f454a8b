#pragma once
// Artifact writing for the CLI: shortest round-trip number formatting,
// atomic file replacement and a bare-bones SVG line plot.

#include <string>
#include <vector>

namespace starkit::cli {

/// Shortest decimal that round-trips to the same double.
std::string num(double v);

/// Writes text to path via a temporary file in the same directory and a
/// rename, so readers never see a partial artifact.
void write_atomic(const std::string& path, const std::string& text);

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotOptions {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x{false};
  bool scatter{false};
};

std::string svg_plot(const std::vector<Series>& series, const PlotOptions& opts);

}  // namespace starkit::cli
