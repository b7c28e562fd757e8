#include "xdrive/sim/track.hpp"

#include <cmath>
#include <set>

#include "xdrive/errors.hpp"

namespace xdrive::sim {
namespace {

constexpr double kContinuityTol = 1e-9;

void require(bool ok, const std::string& msg) {
  if (!ok) throw InvalidTrack(msg);
}

}  // namespace

std::string_view to_string(SegmentKind k) {
  switch (k) {
    case SegmentKind::straight: return "straight";
    case SegmentKind::arc_left: return "arc-left";
    case SegmentKind::arc_right: return "arc-right";
    case SegmentKind::t_junction: return "t-junction";
  }
  return "?";
}

std::string_view to_string(ActionCategory c) {
  switch (c) {
    case ActionCategory::go_straight: return "go_straight";
    case ActionCategory::turn_left: return "turn_left";
    case ActionCategory::turn_left_t: return "turn_left_t";
    case ActionCategory::turn_right: return "turn_right";
    case ActionCategory::turn_right_t: return "turn_right_t";
  }
  return "?";
}

std::optional<ActionCategory> parse_category(std::string_view s) {
  for (auto c : kAllCategories)
    if (to_string(c) == s) return c;
  return std::nullopt;
}

int index_of(ActionCategory c) { return static_cast<int>(c); }

ActionCategory category_of(SegmentTag tag) {
  switch (tag.kind) {
    case SegmentKind::straight: return ActionCategory::go_straight;
    case SegmentKind::arc_left: return ActionCategory::turn_left;
    case SegmentKind::arc_right: return ActionCategory::turn_right;
    case SegmentKind::t_junction:
      return tag.branch == Branch::right ? ActionCategory::turn_right_t : ActionCategory::turn_left_t;
  }
  return ActionCategory::go_straight;
}

Track::Track(TrackSpec spec) : spec_(std::move(spec)) {
  require(spec_.lane_width > 0.0, "lane_width must be positive");
  const double half = spec_.lane_width / 2.0;

  for (const auto& [id, pose] : spec_.anchors) {
    require(!nodes_.count(id), "node '" + id + "' declared twice");
    nodes_[id] = make_pose(pose.x, pose.y, pose.yaw);
  }

  auto resolve_end = [&](const std::string& seg, const std::string& id, const Pose& computed) {
    auto it = nodes_.find(id);
    if (it == nodes_.end()) {
      nodes_[id] = computed;
      return;
    }
    const Pose& known = it->second;
    const double gap = std::hypot(known.x - computed.x, known.y - computed.y);
    const double turn = std::abs(normalize_angle(known.yaw - computed.yaw));
    require(gap <= kContinuityTol * std::max(1.0, std::hypot(known.x, known.y)) && turn <= kContinuityTol,
            "segment '" + seg + "' does not join node '" + id + "' continuously");
  };

  std::set<std::string> segment_ids;
  for (std::size_t i = 0; i < spec_.segments.size(); ++i) {
    const Segment& s = spec_.segments[i];
    require(!s.id.empty() && segment_ids.insert(s.id).second, "segment id '" + s.id + "' missing or duplicated");
    auto from_it = nodes_.find(s.from);
    require(from_it != nodes_.end(), "segment '" + s.id + "' starts at unresolved node '" + s.from + "'");
    const Pose from = from_it->second;

    switch (s.kind) {
      case SegmentKind::straight: {
        require(s.length > 0.0, "segment '" + s.id + "' needs a positive length");
        require(!s.to.empty() && s.to != s.from, "segment '" + s.id + "' needs a distinct target node");
        Edge e{i, Branch::none, s.from, s.to, s.length, {s.kind, Branch::none}, {make_line(from, s.length)}};
        resolve_end(s.id, s.to, e.pieces.back().end_pose());
        road_.push_back(e.pieces.back());
        edges_.push_back(std::move(e));
        break;
      }
      case SegmentKind::arc_left:
      case SegmentKind::arc_right: {
        require(s.radius > half, "segment '" + s.id + "' radius must exceed half the lane width");
        require(s.sweep > 0.0 && s.sweep < 2.0 * std::numbers::pi, "segment '" + s.id + "' sweep must be in (0, 2pi)");
        require(!s.to.empty() && s.to != s.from, "segment '" + s.id + "' needs a distinct target node");
        const bool left = s.kind == SegmentKind::arc_left;
        Primitive arc = make_arc(from, s.radius, s.sweep, left);
        Edge e{i, Branch::none, s.from, s.to, arc.length, {s.kind, Branch::none}, {arc}};
        resolve_end(s.id, s.to, arc.end_pose());
        road_.push_back(arc);
        edges_.push_back(std::move(e));
        break;
      }
      case SegmentKind::t_junction: {
        require(s.radius > half, "junction '" + s.id + "' radius must exceed half the lane width");
        require(s.approach >= 0.0, "junction '" + s.id + "' approach must be non-negative");
        require(!s.left_to.empty() && !s.right_to.empty() && s.left_to != s.right_to,
                "junction '" + s.id + "' needs exactly two distinct branches (left, right)");
        const Primitive stem = make_line(from, s.approach);
        const Pose turn_start = stem.end_pose();
        for (Branch b : {Branch::left, Branch::right}) {
          const bool left = b == Branch::left;
          Primitive arc = make_arc(turn_start, s.radius, std::numbers::pi / 2.0, left);
          Edge e{i, b, s.from, left ? s.left_to : s.right_to, s.approach + arc.length, {s.kind, b}, {}};
          if (s.approach > 0.0) e.pieces.push_back(stem);
          e.pieces.push_back(arc);
          resolve_end(s.id, e.to, arc.end_pose());
          road_.push_back(arc);
          edges_.push_back(std::move(e));
        }
        if (s.approach > 0.0) road_.push_back(stem);
        // Crossbar of the T: through the turn centre line, spanning both branch ends.
        const Vec2 center = turn_start.position() + s.radius * turn_start.heading();
        const Pose bar_start{center.x() - s.radius * turn_start.left().x(), center.y() - s.radius * turn_start.left().y(),
                             normalize_angle(turn_start.yaw + std::numbers::pi / 2.0)};
        road_.push_back(make_line(bar_start, 2.0 * s.radius));
        road_.push_back(make_line(turn_start, s.radius));
        break;
      }
    }
  }

  for (const auto& o : spec_.obstacles)
    require(o.lo.x() < o.hi.x() && o.lo.y() < o.hi.y(), "obstacle rectangles need lo < hi");
  if (!spec_.route_start.empty()) {
    require(nodes_.count(spec_.route_start), "route start '" + spec_.route_start + "' is not a node");
    require(nodes_.count(spec_.route_goal), "route goal '" + spec_.route_goal + "' is not a node");
  }
}

const Pose& Track::node(const std::string& id) const {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw InvalidNode("unknown node '" + id + "'");
  return it->second;
}

std::vector<std::size_t> Track::edges_from(const std::string& node) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < edges_.size(); ++i)
    if (edges_[i].from == node) out.push_back(i);
  return out;
}

}  // namespace xdrive::sim
