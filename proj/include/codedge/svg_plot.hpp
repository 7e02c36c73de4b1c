#pragma once

#include <algorithm>
#include <cstdio>
#include <istream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace codedge {

struct PlotSpec {
  std::string x_column;
  std::string y_column;
  std::string series_column = "policy";
};

namespace plot_detail {

inline std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

inline std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace plot_detail

// Renders a line chart from CSV text: one series per distinct value of the
// series column, x sorted ascending, y averaged over duplicate x (seeds).
// Same input, same bytes out. Throws on missing columns or empty data.
inline std::string render_line_chart(std::istream& csv, const PlotSpec& spec) {
  std::string line;
  if (!std::getline(csv, line)) throw std::runtime_error("plot: empty CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = plot_detail::split(line);
  auto column = [&](const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    throw std::runtime_error("plot: missing column " + name);
  };
  const int xi = column(spec.x_column);
  const int yi = column(spec.y_column);
  const int si = column(spec.series_column);

  std::vector<std::string> series_order;
  std::map<std::string, std::map<double, std::pair<double, int>>> data;  // series -> x -> (ysum, n)
  while (std::getline(csv, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> cells = plot_detail::split(line);
    if (cells.size() != header.size()) throw std::runtime_error("plot: ragged CSV row: " + line);
    const std::string& s = cells[static_cast<std::size_t>(si)];
    const double x = std::stod(cells[static_cast<std::size_t>(xi)]);
    const double y = std::stod(cells[static_cast<std::size_t>(yi)]);
    if (!data.count(s)) series_order.push_back(s);
    auto& cell = data[s][x];
    cell.first += y;
    cell.second += 1;
  }
  if (data.empty()) throw std::runtime_error("plot: CSV has no data rows");

  double xmin = 0, xmax = 0, ymin = 0, ymax = 0;
  bool first = true;
  for (const auto& [s, pts] : data) {
    for (const auto& [x, agg] : pts) {
      const double y = agg.first / agg.second;
      if (first) {
        xmin = xmax = x;
        ymin = ymax = y;
        first = false;
      } else {
        xmin = std::min(xmin, x);
        xmax = std::max(xmax, x);
        ymin = std::min(ymin, y);
        ymax = std::max(ymax, y);
      }
    }
  }
  if (xmax == xmin) {
    xmin -= 1.0;
    xmax += 1.0;
  }
  if (ymax == ymin) {
    ymin -= 1.0;
    ymax += 1.0;
  }

  const double px0 = 70, px1 = 610, py0 = 380, py1 = 30;  // y axis points up
  auto sx = [&](double x) { return px0 + (x - xmin) / (xmax - xmin) * (px1 - px0); };
  auto sy = [&](double y) { return py0 + (y - ymin) / (ymax - ymin) * (py1 - py0); };

  static const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                   "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
  using plot_detail::fmt;

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"420\" "
         "viewBox=\"0 0 640 420\">\n";
  out << "<rect width=\"640\" height=\"420\" fill=\"white\"/>\n";
  out << "<line x1=\"70\" y1=\"380\" x2=\"610\" y2=\"380\" stroke=\"black\"/>\n";
  out << "<line x1=\"70\" y1=\"30\" x2=\"70\" y2=\"380\" stroke=\"black\"/>\n";
  out << "<text x=\"70\" y=\"398\" font-size=\"11\" text-anchor=\"middle\">" << fmt(xmin)
      << "</text>\n";
  out << "<text x=\"610\" y=\"398\" font-size=\"11\" text-anchor=\"middle\">" << fmt(xmax)
      << "</text>\n";
  out << "<text x=\"64\" y=\"384\" font-size=\"11\" text-anchor=\"end\">" << fmt(ymin)
      << "</text>\n";
  out << "<text x=\"64\" y=\"34\" font-size=\"11\" text-anchor=\"end\">" << fmt(ymax)
      << "</text>\n";
  out << "<text x=\"340\" y=\"414\" font-size=\"12\" text-anchor=\"middle\">" << spec.x_column
      << "</text>\n";
  out << "<text x=\"16\" y=\"205\" font-size=\"12\" text-anchor=\"middle\" "
         "transform=\"rotate(-90 16 205)\">"
      << spec.y_column << "</text>\n";

  int color_idx = 0;
  for (const std::string& s : series_order) {
    const char* color = kPalette[color_idx % 8];
    std::vector<std::pair<double, double>> pts;
    for (const auto& [x, agg] : data[s]) pts.emplace_back(x, agg.first / agg.second);
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (i) out << ' ';
      out << fmt(sx(pts[i].first)) << ',' << fmt(sy(pts[i].second));
    }
    out << "\"/>\n";
    for (const auto& [x, y] : pts)
      out << "<circle cx=\"" << fmt(sx(x)) << "\" cy=\"" << fmt(sy(y))
          << "\" r=\"2.5\" fill=\"" << color << "\"/>\n";
    const double ly = 40 + 16 * color_idx;
    out << "<line x1=\"480\" y1=\"" << fmt(ly) << "\" x2=\"504\" y2=\"" << fmt(ly)
        << "\" stroke=\"" << color << "\" stroke-width=\"1.5\"/>\n";
    out << "<text x=\"510\" y=\"" << fmt(ly + 4) << "\" font-size=\"11\">" << s << "</text>\n";
    ++color_idx;
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace codedge
