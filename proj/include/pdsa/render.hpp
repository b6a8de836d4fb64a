#pragma once

// SVG wireframes of parallelepipeds: two orthographic views of each shape
// placed straight ahead, and its pinhole image at its own placement.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "pdsa/ambiguity.hpp"
#include "pdsa/io.hpp"

namespace pdsa {

inline constexpr std::array<std::pair<int, int>, 12> kParallelepipedEdges{{
    {0, 1}, {1, 3}, {3, 2}, {2, 0},  // front
    {4, 5}, {5, 7}, {7, 6}, {6, 4},  // back
    {0, 4}, {1, 5}, {2, 6}, {3, 7},
}};

struct RenderOptions {
  double panel = 220.0;                  // px per panel side
  std::array<double, 2> azimuths_deg{-30.0, 30.0};
};

namespace detail {

struct Pt2 {
  double x, y;
};

// Rotation about the camera y axis through `pivot`, then drop depth.
inline Pt2 orthographic(const Point3& p, const Point3& pivot, double azimuth_rad) {
  const Point3 q = p - pivot;
  const double c = std::cos(azimuth_rad), s = std::sin(azimuth_rad);
  return {c * q.x() + s * q.z(), q.y()};
}

inline void polyline(std::ostream& out, const std::array<Pt2, kCorners>& pts, const char* stroke,
                     const char* extra = "") {
  for (const auto& [a, b] : kParallelepipedEdges)
    out << "<line x1=\"" << io::fmt_real(pts[a].x) << "\" y1=\"" << io::fmt_real(pts[a].y)
        << "\" x2=\"" << io::fmt_real(pts[b].x) << "\" y2=\"" << io::fmt_real(pts[b].y)
        << "\" stroke=\"" << stroke << "\" stroke-width=\"1.5\"" << extra << "/>\n";
}

}  // namespace detail

/**
 * One column per instance, reference first. Rows: orthographic views at the
 * two azimuths (shape recentered to the reference placement), then the pinhole
 * image of the instance at its own placement over the reference (dashed).
 */
inline void render_wireframes_svg(std::ostream& out, const PinholeCamera& cam,
                                  const Instance& reference, const std::vector<Instance>& instances,
                                  const RenderOptions& opt = {}) {
  std::vector<Instance> all{reference};
  all.insert(all.end(), instances.begin(), instances.end());
  const double panel = opt.panel;
  const double margin = 10.0;
  const std::size_t ncols = all.size();
  const double width = panel * static_cast<double>(ncols);
  const double height = panel * 3.0;

  // Common orthographic scale over all shapes and views.
  double extent = 1e-9;
  for (const auto& inst : all) {
    const Instance ahead{inst.shape, reference.placement};
    const Keypoints3 k = corners_3d(ahead);
    const Point3 pivot = mean_point(k);
    for (double az : opt.azimuths_deg)
      for (const auto& p : k) {
        const auto q = detail::orthographic(p, pivot, az * M_PI / 180.0);
        extent = std::max({extent, std::abs(q.x), std::abs(q.y)});
      }
  }
  const double ortho_scale = (0.5 * panel - margin) / extent;
  const double image_scale = (panel - 2.0 * margin) / std::max(cam.width, cam.height);

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << io::fmt_real(width)
      << "\" height=\"" << io::fmt_real(height) << "\" viewBox=\"0 0 " << io::fmt_real(width) << ' '
      << io::fmt_real(height) << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  const Keypoints2 ref_image = project_corners(cam, corners_3d(reference));
  for (std::size_t col = 0; col < ncols; ++col) {
    const Instance& inst = all[col];
    const char* color = col == 0 ? "green" : "crimson";
    const double x0 = panel * static_cast<double>(col);

    const Instance ahead{inst.shape, reference.placement};
    const Keypoints3 k = corners_3d(ahead);
    const Point3 pivot = mean_point(k);
    for (std::size_t row = 0; row < opt.azimuths_deg.size(); ++row) {
      const double cx = x0 + 0.5 * panel, cy = panel * (static_cast<double>(row) + 0.5);
      std::array<detail::Pt2, kCorners> pts;
      for (std::size_t c = 0; c < kCorners; ++c) {
        const auto q = detail::orthographic(k[c], pivot, opt.azimuths_deg[row] * M_PI / 180.0);
        pts[c] = {cx + ortho_scale * q.x, cy + ortho_scale * q.y};
      }
      detail::polyline(out, pts, color);
    }

    const double iy0 = panel * 2.0 + margin, ix0 = x0 + margin;
    out << "<rect x=\"" << io::fmt_real(ix0) << "\" y=\"" << io::fmt_real(iy0) << "\" width=\""
        << io::fmt_real(cam.width * image_scale) << "\" height=\""
        << io::fmt_real(cam.height * image_scale) << "\" fill=\"none\" stroke=\"black\"/>\n";
    auto to_panel = [&](const Keypoints2& k2) {
      std::array<detail::Pt2, kCorners> pts;
      for (std::size_t c = 0; c < kCorners; ++c)
        pts[c] = {ix0 + image_scale * k2[c].u, iy0 + image_scale * k2[c].v};
      return pts;
    };
    if (col > 0) detail::polyline(out, to_panel(ref_image), "gray", " stroke-dasharray=\"3,3\"");
    detail::polyline(out, to_panel(project_corners(cam, corners_3d(inst))), color);
  }
  out << "</svg>\n";
}

}  // namespace pdsa
