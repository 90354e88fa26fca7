#pragma once

#include <vector>

#include "tabsa/navgrid.hpp"
#include "tabsa/rng.hpp"
#include "tabsa/worldgen.hpp"

namespace tabsa {

/// What a pedestrian does after finishing its current path.
enum class PedestrianBehavior {
    CircleBetween,   // walk back and forth between two fixed points
    NewGoal,         // pick a new destination and walk there
    TeleportNewGoal, // jump to a sampled cell, then pick a new destination
    Disappear,       // deactivate
};

struct PedestrianState {
    int id = -1;
    Vec2 position;
    double speed = 1.0;  // m/s
    double radius = 0.2; // footprint disc, meters
    PedestrianBehavior behavior = PedestrianBehavior::NewGoal;
    Vec2 endpoint_a; // CircleBetween endpoints
    Vec2 endpoint_b;
    Vec2 goal;
    PlannedPath current_path;
    bool active = true;
    RandomStream stream; // private stream: trajectories do not depend on step order
};

struct CrowdParams {
    int count = 6;
    double speed = 1.0;
    double radius = 0.2;
    // Behavior mix weights in declaration order of PedestrianBehavior.
    std::vector<double> behavior_weights = {0.4, 0.4, 0.1, 0.1};
    int goal_retry_limit = 10;
    bool respawn_disappeared = false;
};

/// Sample initial pedestrian states from the spawn distribution. Positions
/// and behaviors come from `stream`; per-pedestrian randomness afterwards
/// comes from each pedestrian's own sub-stream.
std::vector<PedestrianState> spawn_pedestrians(const EnvironmentMap& map,
                                               const SpawnDistribution& dist,
                                               const CrowdParams& params,
                                               std::uint64_t pedestrian_seed);

/// Advance one pedestrian by dt seconds along its path; on path completion
/// the behavior resolves (replan, resample, teleport, or disappear).
/// Pedestrians plan on the static map only.
void step_pedestrian(PedestrianState& p, const OccupancyView& static_view,
                     const SpawnDistribution& dist, const CrowdParams& params, double dt);

} // namespace tabsa
