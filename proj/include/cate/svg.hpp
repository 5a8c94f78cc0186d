#pragma once

#include <sstream>
#include <string>
#include <vector>

#include "cate/io.hpp"
#include "cate/metrics.hpp"

namespace cate {

struct SvgStyle {
  double scale = 20.0;    // pixels per meter
  double padding = 2.0;   // meters around the content
  double marker = 0.35;   // triangle marker size in meters
};

namespace svg_detail {

inline const char* palette(int i) {
  static const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                 "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
                                 "#bcbd22", "#17becf", "#393b79", "#ad494a"};
  return colors[i % 12];
}

struct Panel {
  int ax = 0, ay = 1;  // world axes drawn on this panel
  double min_x = 0, max_x = 0, min_y = 0, max_y = 0;
  double offset_px = 0;  // horizontal offset inside the document
};

inline void grow(Panel& p, double x, double y) {
  p.min_x = std::min(p.min_x, x);
  p.max_x = std::max(p.max_x, x);
  p.min_y = std::min(p.min_y, y);
  p.max_y = std::max(p.max_y, y);
}

}  // namespace svg_detail

// Deterministic figure: dashed polyline per robot, circles for obstacles,
// blue triangles at the initial and yellow triangles at the final positions.
// 3D records render an x-y panel and an x-z panel side by side.
inline std::string render_svg(const SimulationRecord& rec,
                              const SvgStyle& style = {}) {
  using svg_detail::Panel;
  if (rec.step_count() == 0 || rec.robot_count() == 0)
    throw std::invalid_argument("cannot render an empty record");

  std::vector<Panel> panels;
  panels.push_back({0, 1});
  if (rec.dimension == 3) panels.push_back({0, 2});

  for (auto& panel : panels) {
    bool first = true;
    auto touch = [&](double x, double y) {
      if (first) {
        panel.min_x = panel.max_x = x;
        panel.min_y = panel.max_y = y;
        first = false;
      } else {
        svg_detail::grow(panel, x, y);
      }
    };
    for (int i = 0; i < rec.robot_count(); ++i)
      for (const auto& p : rec.positions[static_cast<std::size_t>(i)])
        touch(p[panel.ax], p[panel.ay]);
    for (std::size_t l = 0; l < rec.obstacle_centers.size(); ++l)
      for (const auto& c : rec.obstacle_centers[l]) {
        touch(c[panel.ax] - rec.obstacle_radii[l], c[panel.ay] - rec.obstacle_radii[l]);
        touch(c[panel.ax] + rec.obstacle_radii[l], c[panel.ay] + rec.obstacle_radii[l]);
      }
    for (const auto& series : rec.desired_points)
      for (const auto& p : series) touch(p[panel.ax], p[panel.ay]);
    panel.min_x -= style.padding;
    panel.min_y -= style.padding;
    panel.max_x += style.padding;
    panel.max_y += style.padding;
  }

  double doc_w = 0, doc_h = 0;
  for (auto& panel : panels) {
    panel.offset_px = doc_w;
    doc_w += (panel.max_x - panel.min_x) * style.scale;
    doc_h = std::max(doc_h, (panel.max_y - panel.min_y) * style.scale);
  }

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt6(doc_w)
      << "\" height=\"" << fmt6(doc_h) << "\" viewBox=\"0 0 " << fmt6(doc_w)
      << " " << fmt6(doc_h) << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  for (const auto& panel : panels) {
    auto X = [&](double wx) { return panel.offset_px + (wx - panel.min_x) * style.scale; };
    auto Y = [&](double wy) { return (panel.max_y - wy) * style.scale; };

    for (std::size_t l = 0; l < rec.obstacle_centers.size(); ++l) {
      const auto& centers = rec.obstacle_centers[l];
      const Vec& c0 = centers.front();
      out << "<circle cx=\"" << fmt6(X(c0[panel.ax])) << "\" cy=\""
          << fmt6(Y(c0[panel.ay])) << "\" r=\""
          << fmt6(rec.obstacle_radii[l] * style.scale)
          << "\" fill=\"#f4cccc\" stroke=\"#cc0000\" stroke-width=\"1.5\"/>\n";
      const Vec& c1 = centers.back();
      if (distance(c0, c1) > 1e-9)
        out << "<circle cx=\"" << fmt6(X(c1[panel.ax])) << "\" cy=\""
            << fmt6(Y(c1[panel.ay])) << "\" r=\""
            << fmt6(rec.obstacle_radii[l] * style.scale)
            << "\" fill=\"none\" stroke=\"#cc0000\" stroke-width=\"1\" "
               "stroke-dasharray=\"6 3\"/>\n";
    }

    for (int i = 0; i < rec.robot_count(); ++i) {
      out << "<polyline fill=\"none\" stroke=\"" << svg_detail::palette(i)
          << "\" stroke-width=\"1.2\" stroke-dasharray=\"4 3\" points=\"";
      const auto& series = rec.positions[static_cast<std::size_t>(i)];
      for (std::size_t s = 0; s < series.size(); ++s) {
        if (s) out << " ";
        out << fmt6(X(series[s][panel.ax])) << "," << fmt6(Y(series[s][panel.ay]));
      }
      out << "\"/>\n";
    }

    auto triangle = [&](double wx, double wy, const char* fill) {
      double m = style.marker * style.scale;
      double cx = X(wx), cy = Y(wy);
      out << "<path d=\"M " << fmt6(cx) << " " << fmt6(cy - m) << " L "
          << fmt6(cx - 0.866 * m) << " " << fmt6(cy + 0.5 * m) << " L "
          << fmt6(cx + 0.866 * m) << " " << fmt6(cy + 0.5 * m)
          << " Z\" fill=\"" << fill << "\" stroke=\"black\" stroke-width=\"0.6\"/>\n";
    };
    for (int i = 0; i < rec.robot_count(); ++i) {
      const auto& series = rec.positions[static_cast<std::size_t>(i)];
      triangle(series.front()[panel.ax], series.front()[panel.ay], "#1f77b4");
      triangle(series.back()[panel.ax], series.back()[panel.ay], "#ffd700");
    }
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace cate
