#include "xdrive/sim/route.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <queue>
#include <tuple>

#include "xdrive/errors.hpp"

namespace xdrive::sim {

std::size_t Route::piece_at(double s) const {
  if (pieces.empty()) throw InvalidArgument("route has no pieces");
  // Boundary points belong to the following piece.
  auto it = std::upper_bound(pieces.begin(), pieces.end(), s,
                             [](double v, const PathPiece& p) { return v < p.s_begin; });
  if (it == pieces.begin()) return 0;
  return static_cast<std::size_t>(std::distance(pieces.begin(), it)) - 1;
}

Vec2 Route::point_at(double s) const {
  const auto& p = pieces[piece_at(s)];
  return p.geometry.point_at(std::clamp(s - p.s_begin, 0.0, p.geometry.length));
}

double Route::heading_at(double s) const {
  const auto& p = pieces[piece_at(s)];
  return p.geometry.heading_at(std::clamp(s - p.s_begin, 0.0, p.geometry.length));
}

LaneProjection Route::project(const Vec2& p, double s_hint) const {
  constexpr double kBehind = 3.0;
  constexpr double kAhead = 6.0;
  LaneProjection best;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    const auto& piece = pieces[i];
    if (piece.s_end() < s_hint - kBehind || piece.s_begin > s_hint + kAhead) continue;
    const auto pr = piece.geometry.project(p);
    if (pr.distance < best_dist) {
      best_dist = pr.distance;
      best = {piece.s_begin + pr.s, pr.lateral, pr.heading, i};
    }
  }
  if (!std::isfinite(best_dist)) {
    const std::size_t i = piece_at(std::clamp(s_hint, 0.0, length));
    const auto pr = pieces[i].geometry.project(p);
    best = {pieces[i].s_begin + pr.s, pr.lateral, pr.heading, i};
  }
  return best;
}

std::size_t Route::next_waypoint(double s) const {
  const auto it = std::upper_bound(waypoint_s.begin(), waypoint_s.end(), s + 1e-9);
  const auto idx = static_cast<std::size_t>(std::distance(waypoint_s.begin(), it));
  return std::min(idx, waypoints.size() - 1);
}

Route route_from_edges(const Track& track, const std::vector<std::size_t>& edges, std::size_t n) {
  if (edges.empty()) throw InvalidArgument("route needs at least one edge");
  if (n < 2) throw InvalidArgument("route needs at least two waypoints");
  Route r;
  r.nodes.push_back(track.edges().at(edges.front()).from);
  for (auto ei : edges) {
    const Edge& e = track.edges().at(ei);
    if (e.from != r.nodes.back()) throw InvalidArgument("edge sequence is not connected");
    const auto& seg_id = track.spec().segments[e.segment].id;
    for (const auto& prim : e.pieces) {
      r.pieces.push_back({prim, e.tag, seg_id, r.length});
      r.length += prim.length;
    }
    r.nodes.push_back(e.to);
  }
  r.goal = track.node(r.nodes.back()).position();
  for (std::size_t i = 0; i < n; ++i) {
    const double s = i + 1 == n ? r.length : r.length * static_cast<double>(i) / static_cast<double>(n - 1);
    r.waypoint_s.push_back(s);
    r.waypoints.push_back(i + 1 == n ? r.goal : r.point_at(s));
    r.tags.push_back(i + 1 == n ? r.pieces.back().tag : r.tag_at(s));
  }
  return r;
}

Route plan_route(const Track& track, const std::string& start, const std::string& goal, std::size_t n) {
  if (!track.has_node(start)) throw InvalidNode("unknown start node '" + start + "'");
  if (!track.has_node(goal)) throw InvalidNode("unknown goal node '" + goal + "'");
  if (start == goal) throw InvalidNode("start and goal are the same node '" + start + "'");

  const Vec2 target = track.node(goal).position();
  auto heuristic = [&](const std::string& id) { return (track.node(id).position() - target).norm(); };

  // (f, insertion order, node); insertion order makes ties deterministic.
  using Entry = std::tuple<double, std::size_t, std::string>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  std::map<std::string, double> g;
  std::map<std::string, std::size_t> came_by;  // node -> edge index used to reach it
  std::size_t order = 0;
  g[start] = 0.0;
  open.emplace(heuristic(start), order++, start);
  while (!open.empty()) {
    auto [f, ord, node] = open.top();
    open.pop();
    (void)ord;
    if (f > g[node] + heuristic(node) + 1e-12) continue;  // stale entry
    if (node == goal) break;
    for (auto ei : track.edges_from(node)) {
      const Edge& e = track.edges()[ei];
      const double cand = g[node] + e.length;
      auto it = g.find(e.to);
      if (it == g.end() || cand < it->second - 1e-12) {
        g[e.to] = cand;
        came_by[e.to] = ei;
        open.emplace(cand + heuristic(e.to), order++, e.to);
      }
    }
  }
  if (!came_by.count(goal)) throw NoPath("no path from '" + start + "' to '" + goal + "'");

  std::vector<std::size_t> edges;
  for (std::string at = goal; at != start;) {
    const auto ei = came_by.at(at);
    edges.push_back(ei);
    at = track.edges()[ei].from;
  }
  std::reverse(edges.begin(), edges.end());
  return route_from_edges(track, edges, n);
}

Route default_route(const Track& track, std::size_t n) {
  if (track.spec().route_start.empty()) throw InvalidArgument("track '" + track.name() + "' declares no route");
  return plan_route(track, track.spec().route_start, track.spec().route_goal, n);
}

}  // namespace xdrive::sim
