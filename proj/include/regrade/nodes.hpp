#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <vector>

#include <json.hpp>

#include "regrade/errors.hpp"
#include "regrade/geometry.hpp"
#include "regrade/heightmap.hpp"

namespace regrade {

enum class NodeKind { source, sink };

/// Planar location with a strictly positive material volume.
struct Node {
  double px = 0.0;  // m
  double py = 0.0;  // m
  double volume = 0.0;  // m^3
  NodeKind kind = NodeKind::source;
  std::optional<double> heading;  // rad, assigned pre-plan when needed

  Vec2 pos() const { return {px, py}; }
};

struct NodeSet {
  std::vector<Node> sources;
  std::vector<Node> sinks;

  double total_source_volume() const {
    return std::accumulate(sources.begin(), sources.end(), 0.0,
                           [](double s, const Node& n) { return s + n.volume; });
  }
  double total_sink_volume() const {
    return std::accumulate(sinks.begin(), sinks.end(), 0.0,
                           [](double s, const Node& n) { return s + n.volume; });
  }
};

/// Thresholded conversion of a live-minus-design field into nodes.
///
/// Cells with diff above the threshold become sources, below the negative
/// threshold sinks, each with volume |diff| * cell area. Cells inside the
/// band are ignored. Unobserved cells never produce nodes.
inline NodeSet extract_nodes(const HeightMap& diff, double height_threshold) {
  if (!(height_threshold >= 0.0))
    throw ArgumentError("extract_nodes: threshold must be >= 0");
  const double cell_area = diff.resolution * diff.resolution;
  NodeSet set;
  for (std::size_t i = 0; i < diff.size(); ++i) {
    const CellState& c = diff.cells[i];
    if (!c.observed) continue;
    if (c.height > height_threshold) {
      const Vec2 p = diff.cell_center(diff.cell_x(i), diff.cell_y(i));
      set.sources.push_back({p.x, p.y, c.height * cell_area, NodeKind::source, {}});
    } else if (c.height < -height_threshold) {
      const Vec2 p = diff.cell_center(diff.cell_x(i), diff.cell_y(i));
      set.sinks.push_back({p.x, p.y, -c.height * cell_area, NodeKind::sink, {}});
    }
  }
  return set;
}

/// Assigns each node the gradient-descent direction of the diff field at its
/// cell (the direction material would be pushed). Cells at the border use
/// one-sided differences; a flat neighborhood leaves the heading unset.
inline void assign_headings(NodeSet& set, const HeightMap& diff) {
  auto slope = [&](int ix, int iy, int dx, int dy) -> double {
    const int x0 = diff.in_bounds(ix - dx, iy - dy) ? ix - dx : ix;
    const int y0 = diff.in_bounds(ix - dx, iy - dy) ? iy - dy : iy;
    const int x1 = diff.in_bounds(ix + dx, iy + dy) ? ix + dx : ix;
    const int y1 = diff.in_bounds(ix + dx, iy + dy) ? iy + dy : iy;
    const double span = std::hypot((x1 - x0) * diff.resolution,
                                   (y1 - y0) * diff.resolution);
    if (span == 0.0) return 0.0;
    return (diff.at(x1, y1).height - diff.at(x0, y0).height) / span;
  };
  auto assign = [&](Node& n) {
    int ix = 0, iy = 0;
    if (!diff.world_to_cell(n.pos(), ix, iy)) return;
    const double gx = slope(ix, iy, 1, 0);
    const double gy = slope(ix, iy, 0, 1);
    if (gx == 0.0 && gy == 0.0) return;
    n.heading = std::atan2(-gy, -gx);
  };
  for (Node& n : set.sources) assign(n);
  for (Node& n : set.sinks) assign(n);
}

/// Greedy source thinning in descending-volume order. A source survives only
/// if no already-kept source lies within min_distance with a heading within
/// heading_threshold; a removed source's volume folds into the nearest kept
/// one, so total source volume is preserved. Sinks pass through untouched.
/// Nodes without headings are thinned on distance alone.
inline NodeSet decimate_sources(const NodeSet& set, double min_distance,
                                double heading_threshold) {
  if (!(min_distance >= 0.0))
    throw ArgumentError("decimate_sources: min_distance must be >= 0");
  NodeSet out;
  out.sinks = set.sinks;
  if (set.sources.empty() || min_distance == 0.0) {
    out.sources = set.sources;
    return out;
  }

  std::vector<std::size_t> order(set.sources.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return set.sources[a].volume > set.sources[b].volume;
  });

  auto headings_conflict = [&](const Node& a, const Node& b) {
    if (!a.heading || !b.heading) return true;  // no gate without headings
    return angle_diff(*a.heading, *b.heading) <= heading_threshold;
  };

  std::vector<double> extra;  // merged volume per kept source
  for (std::size_t idx : order) {
    const Node& cand = set.sources[idx];
    bool blocked = false;
    for (const Node& kept : out.sources) {
      if (distance(cand.pos(), kept.pos()) < min_distance &&
          headings_conflict(cand, kept)) {
        blocked = true;
        break;
      }
    }
    if (!blocked) {
      out.sources.push_back(cand);
      extra.push_back(0.0);
    } else {
      std::size_t nearest = 0;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < out.sources.size(); ++k) {
        const double d = distance(cand.pos(), out.sources[k].pos());
        if (d < best) {
          best = d;
          nearest = k;
        }
      }
      extra[nearest] += cand.volume;
    }
  }
  for (std::size_t k = 0; k < out.sources.size(); ++k)
    out.sources[k].volume += extra[k];
  return out;
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

inline nlohmann::json to_json(const NodeSet& set) {
  nlohmann::json j;
  auto dump = [](const std::vector<Node>& nodes) {
    nlohmann::json arr = nlohmann::json::array();
    for (const Node& n : nodes) {
      nlohmann::json e = {{"x", n.px}, {"y", n.py}, {"v", n.volume}};
      if (n.heading) e["heading"] = *n.heading;
      arr.push_back(e);
    }
    return arr;
  };
  j["sources"] = dump(set.sources);
  j["sinks"] = dump(set.sinks);
  return j;
}

inline NodeSet nodeset_from_json(const nlohmann::json& j) {
  NodeSet set;
  auto parse = [](const nlohmann::json& arr, NodeKind kind) {
    std::vector<Node> nodes;
    for (const auto& e : arr) {
      Node n;
      n.px = e.at("x").get<double>();
      n.py = e.at("y").get<double>();
      n.volume = e.at("v").get<double>();
      n.kind = kind;
      if (e.contains("heading")) n.heading = e["heading"].get<double>();
      if (!(n.volume > 0.0))
        throw ArgumentError("nodeset_from_json: volumes must be positive");
      nodes.push_back(n);
    }
    return nodes;
  };
  set.sources = parse(j.at("sources"), NodeKind::source);
  set.sinks = parse(j.at("sinks"), NodeKind::sink);
  return set;
}

}  // namespace regrade
