#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "tabsa/geometry.hpp"
#include "tabsa/rng.hpp"

namespace tabsa {

class GenerationFailed : public std::runtime_error {
public:
    explicit GenerationFailed(const std::string& what) : std::runtime_error(what) {}
};

class AllZeroWeights : public std::runtime_error {
public:
    AllZeroWeights() : std::runtime_error("spawn weights sum to zero") {}
};

enum class CellType : std::uint8_t { Free = 0, Wall = 1, Furniture = 2 };

struct Room {
    CellRect rect; // interior cells, walls excluded
};

struct Door {
    std::vector<Cell> cells; // the opening, one door-width span
    bool entrance = false;   // opening in the outer boundary wall
};

struct FurniturePiece {
    CellRect rect;
    int room_id = -1;
};

struct ManipObject {
    int id = -1;
    Vec2 position;          // meters, cell center
    int furniture_id = -1;
};

/// Pedestrian spawn weights per region class. `room` holds one weight per
/// room; a single entry is broadcast to every room.
struct SpawnWeights {
    std::vector<double> room = {1.0};
    double door = 1.0;
    double entrance = 1.0;
};

struct EnvParams {
    double width_m = 16.0;
    double height_m = 16.0;
    double resolution = 0.1;      // meters per cell
    double min_room_m = 3.0;      // smallest room side after division
    double door_width_m = 1.0;
    int max_depth = 3;            // recursive division depth limit
    int furniture_per_room = 3;   // upper bound, placement may fall short
    int furniture_retry_limit = 20;
    double furniture_min_m = 0.4; // furniture side length range
    double furniture_max_m = 1.2;
    int objects_per_furniture = 2;
    double door_clearance_m = 1.0; // no furniture within this Chebyshev radius of a door
    SpawnWeights spawn_weights;

    void validate() const;
};

/// Normalized per-cell spawn distribution over Free cells.
struct SpawnDistribution {
    std::vector<double> weight; // per cell, sums to 1 over the grid
    std::vector<int> support;   // indices of cells with positive weight
    std::vector<double> cdf;    // cumulative weight over `support`
};

/// Static indoor environment: occupancy grid, rooms, doors, furniture,
/// manipulable objects and the pedestrian spawn-probability layer.
/// Immutable after generation; safe to share read-only.
struct EnvironmentMap {
    double width_m = 0.0;
    double height_m = 0.0;
    double resolution = 0.1;
    int width_cells = 0;
    int height_cells = 0;
    std::vector<CellType> grid; // row-major, y * width_cells + x
    std::vector<Room> rooms;
    std::vector<Door> doors;
    std::vector<FurniturePiece> furniture;
    std::vector<ManipObject> objects;
    SpawnDistribution spawn;

    int index(const Cell& c) const { return c.y * width_cells + c.x; }
    bool in_bounds(const Cell& c) const {
        return c.x >= 0 && c.x < width_cells && c.y >= 0 && c.y < height_cells;
    }
    CellType at(const Cell& c) const { return grid[static_cast<std::size_t>(index(c))]; }
    bool is_free(const Cell& c) const { return in_bounds(c) && at(c) == CellType::Free; }

    Vec2 cell_center(const Cell& c) const {
        return {(c.x + 0.5) * resolution, (c.y + 0.5) * resolution};
    }
    Cell cell_of(const Vec2& p) const {
        return {static_cast<int>(p.x / resolution), static_cast<int>(p.y / resolution)};
    }
    double diagonal_m() const { return std::hypot(width_m, height_m); }
};

/// Generate rooms by recursive division, punch doors, place furniture and
/// objects, open one map entrance, and build the spawn-probability layer.
/// Pure function of (params, seed).
EnvironmentMap generate_environment(const EnvParams& params, std::uint64_t seed);

/// Recompute the per-cell spawn distribution for an existing map.
/// Free cells get the weight of their region class (room interior, door,
/// map entrance), normalized to sum 1. Walls and furniture get 0.
SpawnDistribution build_spawn_probability(const EnvironmentMap& map,
                                          const SpawnWeights& weights);

/// Draw a cell from the distribution. Deterministic given the stream state.
Cell sample_spawn(const EnvironmentMap& map, const SpawnDistribution& dist,
                  RandomStream& stream);

/// JSON document with a run-length encoded grid; round-trips through
/// load_map_json.
std::string map_to_json(const EnvironmentMap& map);
EnvironmentMap map_from_json(const std::string& text);

/// SVG rendering: walls black, furniture blue, spawn probability as green
/// shading, objects as dots.
std::string map_to_svg(const EnvironmentMap& map);

} // namespace tabsa
