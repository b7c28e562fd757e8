#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "xdrive/sim/geometry.hpp"

namespace xdrive::sim {

enum class SegmentKind { straight, arc_left, arc_right, t_junction };
enum class Branch { none, left, right };

// The five explained driving actions, in the order they are tabulated.
enum class ActionCategory { go_straight, turn_left, turn_left_t, turn_right, turn_right_t };
inline constexpr int kCategoryCount = 5;
inline constexpr ActionCategory kAllCategories[kCategoryCount] = {
    ActionCategory::go_straight, ActionCategory::turn_left, ActionCategory::turn_left_t, ActionCategory::turn_right,
    ActionCategory::turn_right_t};

std::string_view to_string(SegmentKind k);
std::string_view to_string(ActionCategory c);
std::optional<ActionCategory> parse_category(std::string_view s);
int index_of(ActionCategory c);

struct SegmentTag {
  SegmentKind kind = SegmentKind::straight;
  Branch branch = Branch::none;
  bool operator==(const SegmentTag&) const = default;
};

ActionCategory category_of(SegmentTag tag);

struct Segment {
  std::string id;
  SegmentKind kind = SegmentKind::straight;
  std::string from;
  std::string to;         // straight and arcs
  double length = 0.0;    // straight
  double radius = 0.0;    // arcs and junction turns
  double sweep = 0.0;     // arcs, radians
  double approach = 0.0;  // t-junction: straight stem before the turn
  std::string left_to;    // t-junction branch targets
  std::string right_to;
  bool operator==(const Segment&) const = default;
};

struct Obstacle {
  Vec2 lo = Vec2::Zero();
  Vec2 hi = Vec2::Zero();
  bool operator==(const Obstacle&) const = default;
};

// Declarative track description (see docs/formats.md for the file syntax).
struct TrackSpec {
  std::string name;
  double lane_width = 4.0;
  std::vector<std::pair<std::string, Pose>> anchors;  // nodes with explicit poses
  std::vector<Segment> segments;
  std::vector<Obstacle> obstacles;
  std::string route_start;  // default route, may be empty
  std::string route_goal;
  bool operator==(const TrackSpec&) const = default;
};

// A traversable directed connection between two nodes. A t-junction segment
// contributes two edges, one per branch.
struct Edge {
  std::size_t segment = 0;
  Branch branch = Branch::none;
  std::string from;
  std::string to;
  double length = 0.0;
  SegmentTag tag;
  std::vector<Primitive> pieces;
};

// Validated, geometry-resolved track.
class Track {
 public:
  explicit Track(TrackSpec spec);

  const TrackSpec& spec() const { return spec_; }
  const std::string& name() const { return spec_.name; }
  double lane_width() const { return spec_.lane_width; }

  bool has_node(const std::string& id) const { return nodes_.count(id) != 0; }
  const Pose& node(const std::string& id) const;
  const std::map<std::string, Pose>& nodes() const { return nodes_; }

  const std::vector<Edge>& edges() const { return edges_; }
  std::vector<std::size_t> edges_from(const std::string& node) const;

  // Every centerline piece that should be drawn as road, including junction
  // crossbars that are not part of any single edge.
  const std::vector<Primitive>& road() const { return road_; }
  const std::vector<Obstacle>& obstacles() const { return spec_.obstacles; }

 private:
  TrackSpec spec_;
  std::map<std::string, Pose> nodes_;
  std::vector<Edge> edges_;
  std::vector<Primitive> road_;
};

TrackSpec parse_track(std::string_view text);
std::string format_track(const TrackSpec& spec);
TrackSpec load_track_file(const std::string& path);

// Built-in layouts: "track-a" (training), "track-b" (held-out, similar
// layout), "track-mini" (single straight lane).
std::vector<std::string> builtin_track_names();
TrackSpec builtin_track(const std::string& name);

}  // namespace xdrive::sim
