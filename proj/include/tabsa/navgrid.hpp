#pragma once

#include <limits>
#include <optional>
#include <vector>

#include "tabsa/geometry.hpp"
#include "tabsa/worldgen.hpp"

namespace tabsa {

struct PedestrianState;

/// Static map plus a per-step dynamic layer of pedestrian-blocked cells.
/// The engine rewrites the dynamic layer between steps; planning calls
/// within a step are read-only.
class OccupancyView {
public:
    explicit OccupancyView(const EnvironmentMap& map)
        : map_(&map), dynamic_(map.grid.size(), 0) {}

    const EnvironmentMap& map() const { return *map_; }

    bool traversable(const Cell& c) const {
        if (!map_->in_bounds(c)) return false;
        std::size_t idx = static_cast<std::size_t>(map_->index(c));
        return map_->grid[idx] == CellType::Free && dynamic_[idx] == 0;
    }
    bool dynamic_blocked(const Cell& c) const {
        return dynamic_[static_cast<std::size_t>(map_->index(c))] != 0;
    }
    int dynamic_blocked_count() const;

    /// Replace the dynamic layer with the cells covered by the given
    /// pedestrian footprint discs. A cell is blocked when the disc
    /// intersects its square.
    void embed_pedestrians(const std::vector<PedestrianState>& pedestrians);

    void clear_dynamic();

private:
    const EnvironmentMap* map_;
    std::vector<std::uint8_t> dynamic_;
};

struct PlannedPath {
    std::vector<Vec2> waypoints; // cell centers, meters
    double length = 0.0;         // meters, sum of segment lengths
};

inline constexpr double kUnreachable = std::numeric_limits<double>::infinity();

/// Shortest 8-connected grid path by Euclidean edge cost, A* with an octile
/// heuristic and lexicographic (f, h, cell index) tie-breaking. Returns
/// nullopt when the goal cell is blocked or unreachable.
std::optional<PlannedPath> plan_path(const OccupancyView& view, const Vec2& start,
                                     const Vec2& goal);

/// Path length in meters, or infinity when no path exists.
double path_length(const OccupancyView& view, const Vec2& a, const Vec2& b);

/// Shortest-path lengths from one start to many targets in a single
/// search (Dijkstra with early exit once every target is settled).
/// Element i corresponds to targets[i]; infinity when unreachable.
std::vector<double> distances_to_targets(const OccupancyView& view, const Vec2& start,
                                         const std::vector<Cell>& targets);

/// Walk `dist` meters along the waypoint polyline starting from `from`
/// (which is snapped onto the path by prepending it as the first segment
/// when it differs from the first waypoint). Returns the reached position
/// and the distance actually traveled.
struct PathAdvance {
    Vec2 position;
    double traveled = 0.0;
    bool reached_end = false;
    std::size_t next_waypoint = 0; // first waypoint not yet reached
};
PathAdvance advance_along(const PlannedPath& path, const Vec2& from, double dist);

} // namespace tabsa
