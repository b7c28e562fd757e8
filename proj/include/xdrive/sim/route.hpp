#pragma once

#include <string>
#include <vector>

#include "xdrive/sim/geometry.hpp"
#include "xdrive/sim/track.hpp"

namespace xdrive::sim {

struct PathPiece {
  Primitive geometry;
  SegmentTag tag;
  std::string segment_id;
  double s_begin = 0.0;
  double s_end() const { return s_begin + geometry.length; }
};

struct LaneProjection {
  double s = 0.0;  // route arc length of the closest centerline point
  double lateral = 0.0;
  double heading = 0.0;
  std::size_t piece = 0;
};

// Planned route: the lane centerline of the chosen path plus N waypoints
// spaced uniformly by arc length (first at the start node, last at the goal).
struct Route {
  std::vector<Vec2> waypoints;
  std::vector<double> waypoint_s;
  std::vector<SegmentTag> tags;  // segment each waypoint lies on
  Vec2 goal = Vec2::Zero();
  std::vector<std::string> nodes;  // node sequence start..goal
  std::vector<PathPiece> pieces;
  double length = 0.0;

  std::size_t size() const { return waypoints.size(); }
  std::size_t piece_at(double s) const;
  Vec2 point_at(double s) const;
  double heading_at(double s) const;
  SegmentTag tag_at(double s) const { return pieces[piece_at(s)].tag; }
  // Closest centerline point, searched near `s_hint` so that spatially
  // adjacent but route-distant pieces are not confused.
  LaneProjection project(const Vec2& p, double s_hint) const;
  // Index of the first waypoint strictly ahead of arc length s (clamped to N-1).
  std::size_t next_waypoint(double s) const;
};

// A* over the node graph: cost is centerline arc length, heuristic is the
// Euclidean distance between node positions.
Route plan_route(const Track& track, const std::string& start, const std::string& goal, std::size_t n = 15);

// Route through an explicit edge sequence (used by plan_route and tests).
Route route_from_edges(const Track& track, const std::vector<std::size_t>& edges, std::size_t n);

// The track's declared default route.
Route default_route(const Track& track, std::size_t n = 15);

}  // namespace xdrive::sim
