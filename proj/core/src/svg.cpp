#include "enflow/svg.hpp"

#include "enflow/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace enflow {
namespace {

constexpr double kPanelWidth = 420.0;
constexpr double kPanelHeight = 320.0;
constexpr double kMargin = 36.0;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string shade(double fraction) {
  fraction = std::clamp(fraction, 0.0, 1.0);
  // white -> (8, 48, 107)
  const int r = static_cast<int>(std::lround(255 - fraction * (255 - 8)));
  const int g = static_cast<int>(std::lround(255 - fraction * (255 - 48)));
  const int b = static_cast<int>(std::lround(255 - fraction * (255 - 107)));
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
  return buf;
}

std::string open_svg(double w, double h) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(w) + "\" height=\"" +
         fmt(h) + "\" viewBox=\"0 0 " + fmt(w) + " " + fmt(h) + "\">\n";
}

}  // namespace

std::string heatmap_svg(const std::vector<Vector>& columns, const std::string& title,
                        double scale) {
  std::ostringstream out;
  out << open_svg(kPanelWidth, kPanelHeight);
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << fmt(kPanelWidth / 2) << "\" y=\"20\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"14\">" << escape(title) << "</text>\n";
  if (!columns.empty() && columns.front().size() > 0) {
    double top = scale;
    if (top <= 0.0) {
      for (const auto& c : columns) top = std::max(top, c.maxCoeff());
    }
    if (top <= 0.0) top = 1.0;
    const auto rows = columns.front().size();
    const double w = (kPanelWidth - 2 * kMargin) / static_cast<double>(columns.size());
    const double h = (kPanelHeight - 2 * kMargin) / static_cast<double>(rows);
    for (std::size_t t = 0; t < columns.size(); ++t) {
      for (Eigen::Index i = 0; i < columns[t].size(); ++i) {
        const double v = columns[t][i];
        if (v <= 0.0) continue;
        const double x = kMargin + w * static_cast<double>(t);
        const double y = kPanelHeight - kMargin - h * static_cast<double>(i + 1);
        out << "<rect x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" width=\"" << fmt(w)
            << "\" height=\"" << fmt(h) << "\" fill=\"" << shade(v / top) << "\"/>\n";
      }
    }
    out << "<rect x=\"" << fmt(kMargin) << "\" y=\"" << fmt(kMargin) << "\" width=\""
        << fmt(kPanelWidth - 2 * kMargin) << "\" height=\"" << fmt(kPanelHeight - 2 * kMargin)
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    out << "<text x=\"" << fmt(kPanelWidth / 2) << "\" y=\"" << fmt(kPanelHeight - 10)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">time</text>\n";
    out << "<text x=\"14\" y=\"" << fmt(kPanelHeight / 2) << "\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"11\" transform=\"rotate(-90 14 "
        << fmt(kPanelHeight / 2) << ")\">state</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

std::string network_svg(const NetworkModel& network, const Vector& edge_mass,
                        const std::string& title, double max_mass) {
  if (edge_mass.size() != static_cast<Eigen::Index>(network.edges.size())) {
    throw DimensionError("network_svg: one mass per edge required");
  }
  double min_x = 0, max_x = 1, min_y = 0, max_y = 1;
  if (!network.nodes.empty()) {
    min_x = max_x = network.nodes.front().x;
    min_y = max_y = network.nodes.front().y;
    for (const auto& n : network.nodes) {
      min_x = std::min(min_x, n.x);
      max_x = std::max(max_x, n.x);
      min_y = std::min(min_y, n.y);
      max_y = std::max(max_y, n.y);
    }
  }
  const double usable = std::min(kPanelWidth, kPanelHeight) - 2 * kMargin;
  const double unit = std::min((kPanelWidth - 2 * kMargin) / std::max(max_x - min_x, 1e-9),
                               usable / std::max(max_y - min_y, 1e-9));
  auto px = [&](double x) { return kMargin + (x - min_x) * unit; };
  auto py = [&](double y) { return kPanelHeight - kMargin - (y - min_y) * unit; };
  if (max_mass <= 0.0) max_mass = std::max(edge_mass.size() ? edge_mass.maxCoeff() : 0.0, 1.0);

  std::ostringstream out;
  out << open_svg(kPanelWidth, kPanelHeight);
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << fmt(kPanelWidth / 2) << "\" y=\"20\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"14\">" << escape(title) << "</text>\n";
  for (std::size_t e = 0; e < network.edges.size(); ++e) {
    const auto& a = network.node(network.edges[e].from);
    const auto& b = network.node(network.edges[e].to);
    double dx = px(b.x) - px(a.x), dy = py(b.y) - py(a.y);
    const double len = std::max(std::hypot(dx, dy), 1e-9);
    // offset to the right of the direction of travel
    const double ox = -dy / len * 3.0, oy = dx / len * 3.0;
    out << "<line x1=\"" << fmt(px(a.x) + ox) << "\" y1=\"" << fmt(py(a.y) + oy) << "\" x2=\""
        << fmt(px(b.x) + ox) << "\" y2=\"" << fmt(py(b.y) + oy)
        << "\" stroke=\"#d0d0d0\" stroke-width=\"1\"/>\n";
    const double m = edge_mass[static_cast<Eigen::Index>(e)];
    if (m > 0.0) {
      out << "<line x1=\"" << fmt(px(a.x) + ox) << "\" y1=\"" << fmt(py(a.y) + oy)
          << "\" x2=\"" << fmt(px(b.x) + ox) << "\" y2=\"" << fmt(py(b.y) + oy)
          << "\" stroke=\"#08306b\" stroke-opacity=\"0.8\" stroke-width=\""
          << fmt(0.5 + 12.0 * m / max_mass) << "\"/>\n";
    }
  }
  for (const auto& n : network.nodes) {
    out << "<circle cx=\"" << fmt(px(n.x)) << "\" cy=\"" << fmt(py(n.y))
        << "\" r=\"6\" fill=\"white\" stroke=\"black\"/>\n";
    out << "<text x=\"" << fmt(px(n.x)) << "\" y=\"" << fmt(py(n.y) + 3)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"8\">" << n.id
        << "</text>\n";
  }
  for (const auto& s : network.sensors) {
    out << "<rect x=\"" << fmt(px(s.x) - 3) << "\" y=\"" << fmt(py(s.y) - 3)
        << "\" width=\"6\" height=\"6\" fill=\"#cb181d\"/>\n";
  }
  out << "</svg>\n";
  return out.str();
}

std::string tile_svg(const std::vector<std::string>& panels, int per_row,
                     double panel_width, double panel_height) {
  if (per_row < 1) throw PreconditionError("tile_svg: per_row must be positive");
  const int count = static_cast<int>(panels.size());
  const int rows = (count + per_row - 1) / per_row;
  const int cols = std::min(count, per_row);
  std::ostringstream out;
  out << open_svg(panel_width * cols, panel_height * rows);
  for (int k = 0; k < count; ++k) {
    out << "<g transform=\"translate(" << fmt(panel_width * (k % per_row)) << ","
        << fmt(panel_height * (k / per_row)) << ")\">\n"
        << panels[static_cast<std::size_t>(k)] << "</g>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace enflow
