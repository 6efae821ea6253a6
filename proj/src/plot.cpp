#include "gaillin/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace gaillin {

std::vector<PlotSeries> read_plot_csv(const std::string& csv_path) {
  std::ifstream in(csv_path);
  if (!in) throw std::runtime_error("render_plot: cannot open " + csv_path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("render_plot: empty csv");
  if (line.rfind("x,y,series", 0) != 0)
    throw std::runtime_error("render_plot: expected header x,y,series");

  std::vector<PlotSeries> series;
  std::map<std::string, std::size_t> index;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream row(line);
    std::string xs, ys, name;
    if (!std::getline(row, xs, ',') || !std::getline(row, ys, ',') ||
        !std::getline(row, name))
      throw std::runtime_error("render_plot: malformed row: " + line);
    const double x = std::stod(xs), y = std::stod(ys);
    auto [it, inserted] = index.try_emplace(name, series.size());
    if (inserted) series.push_back(PlotSeries{name, {}, {}});
    series[it->second].x.push_back(x);
    series[it->second].y.push_back(y);
  }
  if (series.empty()) throw std::runtime_error("render_plot: csv has no data rows");
  return series;
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

const char* kDashes[] = {"", "6,3", "2,2", "8,3,2,3", "4,4", "1,3"};
const char* kColors[] = {"#1b6ca8", "#c4453c", "#3a8c5c", "#8a5fb0", "#b07a28", "#4f4f4f"};

}  // namespace

void render_plot(const std::string& csv_path, const std::string& svg_path,
                 const std::string& annotation) {
  const std::vector<PlotSeries> series = read_plot_csv(csv_path);

  double xmin = std::numeric_limits<double>::infinity(), xmax = 0.0;
  double ymin = std::numeric_limits<double>::infinity(), ymax = 0.0;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!(s.x[i] > 0.0) || !(s.y[i] > 0.0))
        throw std::runtime_error("render_plot: log-log plot needs positive data");
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
    }
  // Pad degenerate ranges so single points render mid-axis.
  if (xmin == xmax) {
    xmin /= 2.0;
    xmax *= 2.0;
  }
  if (ymin == ymax) {
    ymin /= 2.0;
    ymax *= 2.0;
  }

  const double width = 640.0, height = 480.0;
  const double left = 70.0, right = 20.0, top = 24.0, bottom = 46.0;
  const double lx0 = std::log10(xmin), lx1 = std::log10(xmax);
  const double ly0 = std::log10(ymin), ly1 = std::log10(ymax);
  const auto px = [&](double x) {
    return left + (std::log10(x) - lx0) / (lx1 - lx0) * (width - left - right);
  };
  const auto py = [&](double y) {
    return height - bottom - (std::log10(y) - ly0) / (ly1 - ly0) * (height - top - bottom);
  };

  std::ofstream out(svg_path);
  if (!out) throw std::runtime_error("render_plot: cannot open " + svg_path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\" "
         "viewBox=\"0 0 640 480\">\n";
  out << "<rect width=\"640\" height=\"480\" fill=\"white\"/>\n";
  out << "<rect x=\"" << fmt(left) << "\" y=\"" << fmt(top) << "\" width=\""
      << fmt(width - left - right) << "\" height=\"" << fmt(height - top - bottom)
      << "\" fill=\"none\" stroke=\"#222\" stroke-width=\"1\"/>\n";

  // Decade ticks.
  for (int e = static_cast<int>(std::ceil(lx0 - 1e-9)); e <= std::floor(lx1 + 1e-9); ++e) {
    const double x = px(std::pow(10.0, e));
    out << "<line x1=\"" << fmt(x) << "\" y1=\"" << fmt(height - bottom) << "\" x2=\""
        << fmt(x) << "\" y2=\"" << fmt(height - bottom + 6) << "\" stroke=\"#222\"/>\n";
    out << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(height - bottom + 20)
        << "\" font-family=\"monospace\" font-size=\"12\" text-anchor=\"middle\">1e" << e
        << "</text>\n";
  }
  for (int e = static_cast<int>(std::ceil(ly0 - 1e-9)); e <= std::floor(ly1 + 1e-9); ++e) {
    const double y = py(std::pow(10.0, e));
    out << "<line x1=\"" << fmt(left - 6) << "\" y1=\"" << fmt(y) << "\" x2=\"" << fmt(left)
        << "\" y2=\"" << fmt(y) << "\" stroke=\"#222\"/>\n";
    out << "<text x=\"" << fmt(left - 10) << "\" y=\"" << fmt(y + 4)
        << "\" font-family=\"monospace\" font-size=\"12\" text-anchor=\"end\">1e" << e
        << "</text>\n";
  }

  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    const char* dash = kDashes[i % 6];
    const char* color = kColors[i % 6];
    if (s.x.size() > 1) {
      out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\"";
      if (dash[0] != '\0') out << " stroke-dasharray=\"" << dash << "\"";
      out << " points=\"";
      for (std::size_t j = 0; j < s.x.size(); ++j) {
        if (j) out << ' ';
        out << fmt(px(s.x[j])) << ',' << fmt(py(s.y[j]));
      }
      out << "\"/>\n";
    }
    for (std::size_t j = 0; j < s.x.size(); ++j)
      out << "<circle cx=\"" << fmt(px(s.x[j])) << "\" cy=\"" << fmt(py(s.y[j]))
          << "\" r=\"2.5\" fill=\"" << color << "\"/>\n";
  }

  // Legend.
  double ly = top + 14.0;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const double lx = left + 12.0;
    out << "<line x1=\"" << fmt(lx) << "\" y1=\"" << fmt(ly - 4) << "\" x2=\""
        << fmt(lx + 26) << "\" y2=\"" << fmt(ly - 4) << "\" stroke=\"" << kColors[i % 6]
        << "\" stroke-width=\"1.5\"";
    if (kDashes[i % 6][0] != '\0') out << " stroke-dasharray=\"" << kDashes[i % 6] << "\"";
    out << "/>\n";
    out << "<text x=\"" << fmt(lx + 32) << "\" y=\"" << fmt(ly)
        << "\" font-family=\"monospace\" font-size=\"12\">" << series[i].name
        << "</text>\n";
    ly += 16.0;
  }
  if (!annotation.empty())
    out << "<text x=\"" << fmt(width - right - 8) << "\" y=\"" << fmt(top + 14)
        << "\" font-family=\"monospace\" font-size=\"12\" text-anchor=\"end\">" << annotation
        << "</text>\n";
  out << "</svg>\n";
}

}  // namespace gaillin
