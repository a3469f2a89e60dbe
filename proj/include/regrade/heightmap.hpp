#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "regrade/errors.hpp"
#include "regrade/geometry.hpp"

namespace regrade {

/// Filter prior for cells that have never been observed.
inline constexpr double kPriorVariance = 1e6;  // m^2
inline constexpr double kPriorHeight = 0.0;    // m

struct CellState {
  double height = kPriorHeight;      // m
  double variance = kPriorVariance;  // m^2
  bool observed = false;
};

/// Uniform 2.5D grid of cell heights with per-cell filter state.
///
/// Cell (ix, iy) has its center at origin + (ix, iy) * resolution.
/// Row iy = 0 is the minimum-y row. Operations on maps return new values;
/// the *_in_place helpers exist for hot loops that own their map.
struct HeightMap {
  int width_cells = 0;
  int height_cells = 0;
  double resolution = 0.0;  // m per cell edge
  Vec2 origin;              // world position of cell (0,0) center
  std::vector<CellState> cells;

  HeightMap() = default;
  HeightMap(int width, int height, double res, Vec2 org = {})
      : width_cells(width), height_cells(height), resolution(res), origin(org) {
    if (width <= 0 || height <= 0)
      throw ArgumentError("HeightMap: non-positive dimensions");
    if (!(res > 0.0)) throw ArgumentError("HeightMap: resolution must be > 0");
    cells.resize(static_cast<std::size_t>(width) * height);
  }

  std::size_t size() const { return cells.size(); }
  bool in_bounds(int ix, int iy) const {
    return ix >= 0 && ix < width_cells && iy >= 0 && iy < height_cells;
  }
  std::size_t index(int ix, int iy) const {
    return static_cast<std::size_t>(iy) * width_cells + ix;
  }
  int cell_x(std::size_t idx) const { return static_cast<int>(idx % width_cells); }
  int cell_y(std::size_t idx) const { return static_cast<int>(idx / width_cells); }

  Vec2 cell_center(int ix, int iy) const {
    return {origin.x + ix * resolution, origin.y + iy * resolution};
  }

  /// Nearest cell to a world point; false when outside the grid.
  bool world_to_cell(Vec2 p, int& ix, int& iy) const {
    ix = static_cast<int>(std::lround((p.x - origin.x) / resolution));
    iy = static_cast<int>(std::lround((p.y - origin.y) / resolution));
    return in_bounds(ix, iy);
  }

  const CellState& at(int ix, int iy) const { return cells[index(ix, iy)]; }
  CellState& at(int ix, int iy) { return cells[index(ix, iy)]; }

  /// Height lookup used by planners; unobserved cells read as the prior 0.
  double height_at(int ix, int iy) const { return cells[index(ix, iy)].height; }

  std::size_t observed_count() const {
    std::size_t n = 0;
    for (const auto& c : cells) n += c.observed ? 1 : 0;
    return n;
  }

  /// Total material volume: sum of heights times cell area.
  double total_volume() const {
    double s = 0.0;
    for (const auto& c : cells) s += c.height;
    return s * resolution * resolution;
  }

  bool same_geometry(const HeightMap& o) const {
    return width_cells == o.width_cells && height_cells == o.height_cells &&
           resolution == o.resolution && origin == o.origin;
  }
};

/// Least-squares plane z = a*x + b*y + c over observed cells.
struct FitPlane {
  double a = 0.0;  // dz/dx
  double b = 0.0;  // dz/dy
  double c = 0.0;  // m

  double height_at(Vec2 p) const { return a * p.x + b * p.y + c; }
};

struct SiteMetrics {
  double grade_deg = 0.0;
  double smoothness_m = 0.0;
  double area_oos_m2 = 0.0;
  double area_oos_fraction = 0.0;
};

// ---------------------------------------------------------------------------
// Kalman cell updates
// ---------------------------------------------------------------------------

/// Scalar Kalman fusion of one height measurement into one cell.
inline void kalman_update_in_place(HeightMap& map, std::size_t cell,
                                   double measurement, double meas_variance) {
  if (cell >= map.size()) throw ArgumentError("kalman_update: cell out of range");
  if (!(meas_variance > 0.0))
    throw ArgumentError("kalman_update: measurement variance must be > 0");
  CellState& c = map.cells[cell];
  const double v = c.observed ? c.variance : kPriorVariance;
  const double h = c.observed ? c.height : kPriorHeight;
  const double v_new = 1.0 / (1.0 / v + 1.0 / meas_variance);
  c.height = v_new * (h / v + measurement / meas_variance);
  c.variance = v_new;
  c.observed = true;
}

inline HeightMap kalman_update(const HeightMap& map, std::size_t cell,
                               double measurement, double meas_variance) {
  HeightMap out = map;
  kalman_update_in_place(out, cell, measurement, meas_variance);
  return out;
}

/// Raises cell variances after the terrain was driven over or manipulated.
inline void inject_disturbance_noise_in_place(HeightMap& map,
                                              const std::vector<std::size_t>& cells,
                                              double added_variance) {
  if (!(added_variance >= 0.0))
    throw ArgumentError("inject_disturbance_noise: added variance must be >= 0");
  for (std::size_t cell : cells) {
    if (cell >= map.size())
      throw ArgumentError("inject_disturbance_noise: cell out of range");
    map.cells[cell].variance += added_variance;
  }
}

inline HeightMap inject_disturbance_noise(const HeightMap& map,
                                          const std::vector<std::size_t>& cells,
                                          double added_variance) {
  HeightMap out = map;
  inject_disturbance_noise_in_place(out, cells, added_variance);
  return out;
}

// ---------------------------------------------------------------------------
// Plane fit and metrics
// ---------------------------------------------------------------------------

namespace detail {

/// Plane fit over an explicit cell subset, centered for conditioning.
/// Throws RankError below 3 points or when the support is collinear.
inline FitPlane fit_plane_over(const HeightMap& map,
                               const std::vector<std::size_t>& idxs) {
  const std::size_t n = idxs.size();
  if (n < 3) throw RankError("fit_plane: need at least 3 observed cells");

  double mx = 0.0, my = 0.0, mz = 0.0;
  for (std::size_t i : idxs) {
    const Vec2 p = map.cell_center(map.cell_x(i), map.cell_y(i));
    mx += p.x;
    my += p.y;
    mz += map.cells[i].height;
  }
  mx /= n;
  my /= n;
  mz /= n;

  double sxx = 0.0, sxy = 0.0, syy = 0.0, sxz = 0.0, syz = 0.0;
  for (std::size_t i : idxs) {
    const Vec2 p = map.cell_center(map.cell_x(i), map.cell_y(i));
    const double dx = p.x - mx;
    const double dy = p.y - my;
    const double dz = map.cells[i].height - mz;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
    sxz += dx * dz;
    syz += dy * dz;
  }
  const double det = sxx * syy - sxy * sxy;
  const double scale = std::max({sxx, syy, 1e-30});
  if (det <= 1e-12 * scale * scale)
    throw RankError("fit_plane: observed cells are collinear");

  FitPlane pl;
  pl.a = (syy * sxz - sxy * syz) / det;
  pl.b = (sxx * syz - sxy * sxz) / det;
  pl.c = mz - pl.a * mx - pl.b * my;
  return pl;
}

inline std::vector<std::size_t> observed_indices(const HeightMap& map) {
  std::vector<std::size_t> idxs;
  idxs.reserve(map.size());
  for (std::size_t i = 0; i < map.size(); ++i)
    if (map.cells[i].observed) idxs.push_back(i);
  return idxs;
}

}  // namespace detail

inline FitPlane fit_plane(const HeightMap& map) {
  return detail::fit_plane_over(map, detail::observed_indices(map));
}

/// Grade, smoothness, and out-of-spec area of the observed worksite.
///
/// Grade is the angle between the site fit plane and horizontal; smoothness
/// is the standard deviation of heights about that plane. A cell is counted
/// out-of-spec when a plane fit over its (window x window) neighborhood
/// exceeds either spec; neighborhoods with a degenerate fit are skipped.
inline SiteMetrics compute_metrics(const HeightMap& map, double grade_spec_deg,
                                   double smooth_spec_m, int window = 5) {
  if (window < 1 || window % 2 == 0)
    throw ArgumentError("compute_metrics: window must be odd and >= 1");

  const auto observed = detail::observed_indices(map);
  const FitPlane plane = detail::fit_plane_over(map, observed);

  SiteMetrics m;
  m.grade_deg = rad_to_deg(std::atan(std::hypot(plane.a, plane.b)));

  double ss = 0.0;
  for (std::size_t i : observed) {
    const Vec2 p = map.cell_center(map.cell_x(i), map.cell_y(i));
    const double r = map.cells[i].height - plane.height_at(p);
    ss += r * r;
  }
  m.smoothness_m = std::sqrt(ss / static_cast<double>(observed.size()));

  const int half = window / 2;
  std::size_t oos = 0;
  std::vector<std::size_t> win;
  for (std::size_t i : observed) {
    const int cx = map.cell_x(i);
    const int cy = map.cell_y(i);
    win.clear();
    for (int iy = cy - half; iy <= cy + half; ++iy)
      for (int ix = cx - half; ix <= cx + half; ++ix)
        if (map.in_bounds(ix, iy) && map.at(ix, iy).observed)
          win.push_back(map.index(ix, iy));
    FitPlane local;
    try {
      local = detail::fit_plane_over(map, win);
    } catch (const RankError&) {
      continue;  // neighborhood not evaluable
    }
    const double local_grade =
        rad_to_deg(std::atan(std::hypot(local.a, local.b)));
    double lss = 0.0;
    for (std::size_t j : win) {
      const Vec2 p = map.cell_center(map.cell_x(j), map.cell_y(j));
      const double r = map.cells[j].height - local.height_at(p);
      lss += r * r;
    }
    const double local_smooth = std::sqrt(lss / static_cast<double>(win.size()));
    if (local_grade > grade_spec_deg || local_smooth > smooth_spec_m) ++oos;
  }
  m.area_oos_m2 = static_cast<double>(oos) * map.resolution * map.resolution;
  const double site_area =
      static_cast<double>(map.width_cells) * map.height_cells * map.resolution *
      map.resolution;
  m.area_oos_fraction = site_area > 0.0 ? m.area_oos_m2 / site_area : 0.0;
  return m;
}

/// Per-cell (live - design), in meters. Positive cells have excess material.
/// The result marks a cell observed only when both inputs observed it;
/// variances add.
inline HeightMap diff_to_design(const HeightMap& live, const HeightMap& design) {
  if (!live.same_geometry(design))
    throw ArgumentError("diff_to_design: geometry mismatch");
  HeightMap out(live.width_cells, live.height_cells, live.resolution, live.origin);
  for (std::size_t i = 0; i < live.size(); ++i) {
    const CellState& a = live.cells[i];
    const CellState& d = design.cells[i];
    if (a.observed && d.observed) {
      out.cells[i].height = a.height - d.height;
      out.cells[i].variance = a.variance + d.variance;
      out.cells[i].observed = true;
    }
  }
  return out;
}

/// Uniform fully-observed map, handy for design topographies.
inline HeightMap make_flat_map(int width, int height, double res, double h,
                               Vec2 origin = {}) {
  HeightMap map(width, height, res, origin);
  for (auto& c : map.cells) {
    c.height = h;
    c.variance = 0.0;
    c.observed = true;
  }
  return map;
}

}  // namespace regrade
