#pragma once

#include <string>
#include <vector>

namespace gaillin {

struct PlotSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

// CSV with header "x,y,series". Throws on empty or malformed input.
std::vector<PlotSeries> read_plot_csv(const std::string& csv_path);

// Deterministic log-log SVG: one polyline per series with distinct dash
// patterns, round markers, decade ticks, a legend, an optional annotation
// line (e.g. a fitted slope), and no timestamps.
void render_plot(const std::string& csv_path, const std::string& svg_path,
                 const std::string& annotation = "");

}  // namespace gaillin
