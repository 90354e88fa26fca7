#include "doctest.h"

#include <cmath>
#include <set>

#include "tabsa/crowd.hpp"

using namespace tabsa;

namespace {

EnvironmentMap open_map(int cells = 40) {
    EnvironmentMap m;
    m.resolution = 0.1;
    m.width_cells = cells;
    m.height_cells = cells;
    m.width_m = cells * 0.1;
    m.height_m = cells * 0.1;
    m.grid.assign(static_cast<std::size_t>(cells) * cells, CellType::Free);
    m.rooms.push_back(Room{{0, 0, cells, cells}});
    m.spawn = build_spawn_probability(m, SpawnWeights{});
    return m;
}

// Uniform distribution over all free cells, bypassing region classes.
SpawnDistribution uniform_dist(const EnvironmentMap& m) {
    SpawnDistribution d;
    d.weight.assign(m.grid.size(), 0.0);
    int free = 0;
    for (std::size_t i = 0; i < m.grid.size(); ++i) {
        if (m.grid[i] == CellType::Free) ++free;
    }
    double w = 1.0 / free;
    double cum = 0.0;
    for (std::size_t i = 0; i < m.grid.size(); ++i) {
        if (m.grid[i] != CellType::Free) continue;
        d.weight[i] = w;
        cum += w;
        d.support.push_back(static_cast<int>(i));
        d.cdf.push_back(cum);
    }
    d.cdf.back() = 1.0;
    return d;
}

SpawnDistribution point_mass(const EnvironmentMap& m, Cell c) {
    SpawnDistribution d;
    d.weight.assign(m.grid.size(), 0.0);
    d.weight[static_cast<std::size_t>(m.index(c))] = 1.0;
    d.support = {m.index(c)};
    d.cdf = {1.0};
    return d;
}

} // namespace

TEST_CASE("spawn count zero gives an empty crowd") {
    EnvironmentMap m = open_map();
    CrowdParams p;
    p.count = 0;
    CHECK(spawn_pedestrians(m, uniform_dist(m), p, 1).empty());
}

TEST_CASE("point-mass distribution puts everyone on the same cell with distinct ids") {
    EnvironmentMap m = open_map();
    SpawnDistribution d = point_mass(m, {7, 7});
    CrowdParams p;
    p.count = 5;
    auto peds = spawn_pedestrians(m, d, p, 3);
    REQUIRE(peds.size() == 5);
    std::set<int> ids;
    for (const PedestrianState& ped : peds) {
        CHECK(ped.position == m.cell_center({7, 7}));
        ids.insert(ped.id);
    }
    CHECK(ids.size() == 5);
}

TEST_CASE("a pure behavior mix is honoured") {
    EnvironmentMap m = open_map();
    CrowdParams p;
    p.count = 20;
    p.behavior_weights = {1.0, 0.0, 0.0, 0.0};
    for (const PedestrianState& ped : spawn_pedestrians(m, uniform_dist(m), p, 5)) {
        CHECK(ped.behavior == PedestrianBehavior::CircleBetween);
    }
}

TEST_CASE("mid-path displacement equals speed times dt") {
    EnvironmentMap m = open_map();
    OccupancyView v(m);
    SpawnDistribution d = point_mass(m, {35, 5});

    PedestrianState ped;
    ped.id = 0;
    ped.position = m.cell_center({5, 5});
    ped.speed = 1.0;
    ped.behavior = PedestrianBehavior::NewGoal;
    ped.goal = m.cell_center({35, 5}); // straight 3 m corridor
    ped.stream = RandomStream(1);

    CrowdParams p;
    double dt = 0.5;
    Vec2 before = ped.position;
    step_pedestrian(ped, v, d, p, dt);
    // Arc-length interpolation oracle: straight path, so displacement is
    // exactly speed * dt.
    CHECK(distance(ped.position, before) == doctest::Approx(ped.speed * dt).epsilon(1e-9));
    CHECK(ped.active);
}

TEST_CASE("position continuity holds for non-teleport behaviors") {
    EnvironmentMap m = open_map();
    OccupancyView v(m);
    SpawnDistribution d = uniform_dist(m);
    CrowdParams p;
    p.count = 8;
    p.behavior_weights = {0.5, 0.5, 0.0, 0.0};
    auto peds = spawn_pedestrians(m, d, p, 11);
    double dt = 0.7;
    for (int step = 0; step < 50; ++step) {
        for (PedestrianState& ped : peds) {
            if (!ped.active) continue;
            Vec2 before = ped.position;
            step_pedestrian(ped, v, d, p, dt);
            CHECK(distance(ped.position, before) <= ped.speed * dt + m.resolution + 1e-9);
        }
    }
}

TEST_CASE("disappear deactivates at path end and never reactivates") {
    EnvironmentMap m = open_map();
    OccupancyView v(m);
    SpawnDistribution d = uniform_dist(m);

    PedestrianState ped;
    ped.position = m.cell_center({5, 5});
    ped.speed = 10.0;
    ped.behavior = PedestrianBehavior::Disappear;
    ped.goal = m.cell_center({8, 5});
    ped.stream = RandomStream(2);

    CrowdParams p;
    for (int i = 0; i < 10; ++i) step_pedestrian(ped, v, d, p, 1.0);
    CHECK_FALSE(ped.active);
    Vec2 frozen = ped.position;
    step_pedestrian(ped, v, d, p, 1.0);
    CHECK(ped.position == frozen);
    CHECK_FALSE(ped.active);
}

TEST_CASE("circle-between alternates endpoints forever") {
    EnvironmentMap m = open_map();
    OccupancyView v(m);
    SpawnDistribution d = uniform_dist(m);

    PedestrianState ped;
    ped.position = m.cell_center({5, 5});
    ped.speed = 2.0;
    ped.behavior = PedestrianBehavior::CircleBetween;
    ped.endpoint_a = m.cell_center({5, 5});
    ped.endpoint_b = m.cell_center({15, 5});
    ped.goal = ped.endpoint_b;
    ped.stream = RandomStream(3);

    CrowdParams p;
    int visits_a = 0, visits_b = 0;
    for (int i = 0; i < 200; ++i) {
        step_pedestrian(ped, v, d, p, 0.25);
        if (ped.position == ped.endpoint_a) ++visits_a;
        if (ped.position == ped.endpoint_b) ++visits_b;
    }
    CHECK(ped.active);
    CHECK(visits_a >= 2);
    CHECK(visits_b >= 2);
}

TEST_CASE("teleport jumps to a sampled cell") {
    EnvironmentMap m = open_map();
    OccupancyView v(m);
    SpawnDistribution far = point_mass(m, {30, 30});

    PedestrianState ped;
    ped.position = m.cell_center({2, 2});
    ped.speed = 100.0; // finish the first path in one step
    ped.behavior = PedestrianBehavior::TeleportNewGoal;
    ped.goal = m.cell_center({3, 2});
    ped.stream = RandomStream(4);

    CrowdParams p;
    step_pedestrian(ped, v, far, p, 1.0);
    CHECK(ped.position == m.cell_center({30, 30}));
}

TEST_CASE("crowd trajectories are deterministic in the seed") {
    EnvironmentMap m = open_map();
    OccupancyView v(m);
    SpawnDistribution d = uniform_dist(m);
    CrowdParams p;
    p.count = 6;

    auto run = [&](std::uint64_t seed) {
        auto peds = spawn_pedestrians(m, d, p, seed);
        std::vector<Vec2> positions;
        for (int i = 0; i < 40; ++i) {
            for (PedestrianState& ped : peds) step_pedestrian(ped, v, d, p, 0.5);
        }
        for (const PedestrianState& ped : peds) positions.push_back(ped.position);
        return positions;
    };

    auto a = run(123), b = run(123), c = run(124);
    CHECK(a == b);
    CHECK(a != c);
}

TEST_CASE("trajectories do not depend on stepping order") {
    EnvironmentMap m = open_map();
    OccupancyView v(m);
    SpawnDistribution d = uniform_dist(m);
    CrowdParams p;
    p.count = 5;

    auto forward = spawn_pedestrians(m, d, p, 9);
    auto backward = spawn_pedestrians(m, d, p, 9);
    for (int i = 0; i < 60; ++i) {
        for (std::size_t k = 0; k < forward.size(); ++k) {
            step_pedestrian(forward[k], v, d, p, 0.5);
        }
        for (std::size_t k = backward.size(); k-- > 0;) {
            step_pedestrian(backward[k], v, d, p, 0.5);
        }
    }
    for (std::size_t k = 0; k < forward.size(); ++k) {
        CHECK(forward[k].position == backward[k].position);
        CHECK(forward[k].active == backward[k].active);
    }
}
