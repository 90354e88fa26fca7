#include "tabsa/crowd.hpp"

#include <cmath>

namespace tabsa {

namespace {

PedestrianBehavior sample_behavior(const std::vector<double>& weights, RandomStream& stream) {
    double total = 0.0;
    for (double w : weights) total += w;
    if (total <= 0.0) return PedestrianBehavior::NewGoal;
    double u = stream.uniform01() * total;
    double cum = 0.0;
    for (std::size_t i = 0; i < weights.size() && i < 4; ++i) {
        cum += weights[i];
        if (u < cum) return static_cast<PedestrianBehavior>(i);
    }
    return PedestrianBehavior::Disappear;
}

bool plan_to(PedestrianState& p, const OccupancyView& view, const Vec2& goal) {
    auto path = plan_path(view, p.position, goal);
    if (!path) return false;
    p.goal = goal;
    p.current_path = std::move(*path);
    return true;
}

// Pick a fresh goal, replanning up to the retry limit; deactivates the
// pedestrian when no reachable goal is found.
void resample_goal(PedestrianState& p, const OccupancyView& view,
                   const EnvironmentMap& map, const SpawnDistribution& dist,
                   int retry_limit) {
    for (int attempt = 0; attempt < retry_limit; ++attempt) {
        Cell c = sample_spawn(map, dist, p.stream);
        if (plan_to(p, view, map.cell_center(c))) return;
    }
    p.active = false;
}

} // namespace

std::vector<PedestrianState> spawn_pedestrians(const EnvironmentMap& map,
                                               const SpawnDistribution& dist,
                                               const CrowdParams& params,
                                               std::uint64_t pedestrian_seed) {
    RandomStream master(split(pedestrian_seed, "crowd/spawn"));
    std::vector<PedestrianState> out;
    out.reserve(static_cast<std::size_t>(std::max(0, params.count)));
    for (int i = 0; i < params.count; ++i) {
        PedestrianState p;
        p.id = i;
        p.speed = params.speed;
        p.radius = params.radius;
        p.position = map.cell_center(sample_spawn(map, dist, master));
        p.behavior = sample_behavior(params.behavior_weights, master);
        p.stream = RandomStream(split(pedestrian_seed, "crowd/ped", static_cast<std::uint64_t>(i)));
        if (p.behavior == PedestrianBehavior::CircleBetween) {
            p.endpoint_a = p.position;
            p.endpoint_b = map.cell_center(sample_spawn(map, dist, p.stream));
            p.goal = p.endpoint_b;
        } else {
            p.goal = map.cell_center(sample_spawn(map, dist, p.stream));
        }
        out.push_back(std::move(p));
    }
    return out;
}

void step_pedestrian(PedestrianState& p, const OccupancyView& static_view,
                     const SpawnDistribution& dist, const CrowdParams& params, double dt) {
    if (!p.active || dt <= 0.0) return;
    const EnvironmentMap& map = static_view.map();

    if (p.current_path.waypoints.empty()) {
        if (!plan_to(p, static_view, p.goal)) {
            if (p.behavior == PedestrianBehavior::CircleBetween) {
                p.active = false;
                return;
            }
            resample_goal(p, static_view, map, dist, params.goal_retry_limit);
        }
        if (!p.active) return;
    }

    PathAdvance adv = advance_along(p.current_path, p.position, p.speed * dt);
    p.position = adv.position;
    if (!adv.reached_end) {
        // Drop consumed waypoints so the stored path resumes from here.
        p.current_path.waypoints.erase(p.current_path.waypoints.begin(),
                                       p.current_path.waypoints.begin() +
                                           static_cast<std::ptrdiff_t>(adv.next_waypoint));
        return;
    }

    // Path finished: resolve the behavior. Movement stops for this step.
    p.current_path = PlannedPath{};
    switch (p.behavior) {
    case PedestrianBehavior::CircleBetween: {
        Vec2 next = distance(p.position, p.endpoint_b) <= distance(p.position, p.endpoint_a)
                        ? p.endpoint_a
                        : p.endpoint_b;
        if (!plan_to(p, static_view, next)) p.active = false;
        break;
    }
    case PedestrianBehavior::NewGoal:
        resample_goal(p, static_view, map, dist, params.goal_retry_limit);
        break;
    case PedestrianBehavior::TeleportNewGoal:
        p.position = map.cell_center(sample_spawn(map, dist, p.stream));
        resample_goal(p, static_view, map, dist, params.goal_retry_limit);
        break;
    case PedestrianBehavior::Disappear:
        if (params.respawn_disappeared) {
            p.position = map.cell_center(sample_spawn(map, dist, p.stream));
            resample_goal(p, static_view, map, dist, params.goal_retry_limit);
        } else {
            p.active = false;
        }
        break;
    }
}

} // namespace tabsa
