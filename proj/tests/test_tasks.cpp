#include "doctest.h"

#include <cmath>

#include "tabsa/tasks.hpp"

using namespace tabsa;

namespace {

EnvironmentMap corridor_map(int cells = 60) {
    EnvironmentMap m;
    m.resolution = 0.1;
    m.width_cells = cells;
    m.height_cells = cells;
    m.width_m = cells * 0.1;
    m.height_m = cells * 0.1;
    m.grid.assign(static_cast<std::size_t>(cells) * cells, CellType::Free);
    m.rooms.push_back(Room{{0, 0, cells, cells}});
    return m;
}

Task fall_task(Vec2 target, double dwell = 60.0) {
    Task t;
    t.id = 0;
    t.type = TaskType::Fall;
    t.priority = 10;
    t.preemptive = false;
    t.max_delay = 900.0;
    TaskLeg leg;
    leg.target = target;
    leg.dwell_total = dwell;
    leg.dwell_remaining = dwell;
    t.legs = {leg};
    recompute_deathtime(t);
    return t;
}

EnvParams gen_env_params() {
    EnvParams p;
    p.width_m = 12.0;
    p.height_m = 12.0;
    return p;
}

} // namespace

TEST_CASE("is_called is inclusive at the request time") {
    Task t;
    t.request_time = 100.0;
    CHECK(is_called(t, 100.0));
    CHECK_FALSE(is_called(t, 99.0));
    t.request_time = 0.0;
    CHECK(is_called(t, 0.0));
    CHECK(is_called(t, 1e9));
}

TEST_CASE("fresh tasks are incomplete; exhausted dwell at target completes") {
    EnvironmentMap m = corridor_map();
    Task t = fall_task(m.cell_center({10, 10}));
    CHECK_FALSE(is_completed(t));
    t.legs[0].arrived = true;
    t.legs[0].dwell_remaining = 0.0;
    // cursor not yet advanced; work_for normally advances it
    RobotState robot;
    robot.pose = m.cell_center({10, 10});
    OccupancyView v(m);
    work_for(t, robot, v, 0.001);
    CHECK(is_completed(t));
}

TEST_CASE("complex task with incomplete subtasks is incomplete") {
    EnvironmentMap m = corridor_map();
    Task t;
    t.type = TaskType::PickAndPlace;
    t.subtasks = {fall_task(m.cell_center({1, 1}), 1.0), fall_task(m.cell_center({2, 1}), 1.0),
                  fall_task(m.cell_center({3, 1}), 1.0)};
    t.subtask_index = 2;
    CHECK_FALSE(is_completed(t));
    t.subtask_index = 3;
    CHECK(is_completed(t));
}

TEST_CASE("deathtime follows Eq. deadline + max_delay") {
    Task t;
    t.deadline = 1000.0;
    t.max_delay = 900.0;
    recompute_deathtime(t);
    CHECK(t.deathtime == 1900.0);
    t.max_delay = kNever;
    recompute_deathtime(t);
    CHECK(std::isinf(t.deathtime));
}

TEST_CASE("patrol-style tasks with infinite max_delay never die") {
    Task t;
    t.deadline = 10.0;
    t.max_delay = kNever;
    recompute_deathtime(t);
    CHECK(is_alive(t, 1e12));
}

TEST_CASE("an incomplete fall dies one instant past deadline + max_delay") {
    EnvironmentMap m = corridor_map();
    Task t = fall_task(m.cell_center({5, 5}));
    t.deadline = 100.0;
    t.max_delay = 900.0;
    recompute_deathtime(t);
    CHECK(is_alive(t, 1000.0));
    CHECK_FALSE(is_alive(t, 1001.0));
}

TEST_CASE("a task completed before its deathtime stays alive forever") {
    EnvironmentMap m = corridor_map();
    Task t = fall_task(m.cell_center({5, 5}));
    t.deadline = 100.0;
    t.max_delay = 900.0;
    recompute_deathtime(t);
    t.legs[0].arrived = true;
    t.legs[0].dwell_remaining = 0.0;
    t.leg_index = 1;
    CHECK(is_completed(t));
    CHECK(is_alive(t, 1e12));
}

TEST_CASE("dwell arithmetic: at target, dt reduces the dwell") {
    EnvironmentMap m = corridor_map();
    OccupancyView v(m);
    Task t = fall_task(m.cell_center({10, 10}), 60.0);
    RobotState robot;
    robot.pose = m.cell_center({10, 10});
    robot.velocity = 0.5;
    WorkStatus ws = work_for(t, robot, v, 5.0);
    CHECK_FALSE(ws.stalled);
    CHECK(t.legs[0].dwell_remaining == doctest::Approx(55.0));
    CHECK(t.started());
}

TEST_CASE("travel then dwell within one step: closed-form oracle") {
    EnvironmentMap m = corridor_map();
    OccupancyView v(m);
    // Straight free path, exactly 1.0 m: 10 cells at 0.1 m.
    Vec2 start = m.cell_center({10, 10});
    Vec2 target = m.cell_center({20, 10});
    Task t = fall_task(target, 60.0);
    RobotState robot;
    robot.pose = start;
    robot.velocity = 0.5;
    // Oracle: travel = 1.0 / 0.5 = 2 s, surplus 3 s goes into the dwell.
    WorkStatus ws = work_for(t, robot, v, 5.0);
    CHECK_FALSE(ws.stalled);
    CHECK(robot.pose.x == doctest::Approx(target.x));
    CHECK(robot.pose.y == doctest::Approx(target.y));
    CHECK(t.legs[0].dwell_remaining == doctest::Approx(57.0));
    CHECK(robot.odometer == doctest::Approx(1.0));
}

TEST_CASE("mid-travel budget exhaustion moves the robot by velocity * dt") {
    EnvironmentMap m = corridor_map();
    OccupancyView v(m);
    Vec2 start = m.cell_center({10, 10});
    Vec2 target = m.cell_center({40, 10});
    Task t = fall_task(target);
    RobotState robot;
    robot.pose = start;
    robot.velocity = 0.5;
    work_for(t, robot, v, 2.0);
    CHECK(distance(robot.pose, start) == doctest::Approx(1.0));
    CHECK_FALSE(t.legs[0].arrived);
}

TEST_CASE("completing a subtask advances the pick-and-place cursor in-step") {
    EnvironmentMap m = corridor_map();
    OccupancyView v(m);
    Task pick = fall_task(m.cell_center({10, 10}), 1.0);
    pick.type = TaskType::Pick;
    Task patrol;
    patrol.type = TaskType::Patrol;
    patrol.preemptive = true;
    {
        TaskLeg a, b;
        a.target = m.cell_center({10, 10});
        b.target = m.cell_center({15, 10});
        patrol.legs = {a, b};
    }
    Task place = fall_task(m.cell_center({15, 10}), 1.0);
    place.type = TaskType::Place;

    Task pnp;
    pnp.type = TaskType::PickAndPlace;
    pnp.preemptive = false;
    pnp.subtasks = {pick, patrol, place};

    RobotState robot;
    robot.pose = m.cell_center({10, 10});
    robot.velocity = 1.0;
    // 1 s dwell completes the pick and the cursor moves to the patrol.
    work_for(pnp, robot, v, 1.5);
    CHECK(pnp.subtask_index == 1);
    CHECK_FALSE(is_completed(pnp));
    // Finish everything: 0.5 m remain of patrol, then 1 s of place dwell.
    work_for(pnp, robot, v, 10.0);
    CHECK(is_completed(pnp));
    CHECK(robot.pose.x == doctest::Approx(m.cell_center({15, 10}).x));
}

TEST_CASE("unreachable target stalls the step without failing") {
    EnvironmentMap m = corridor_map(20);
    // Wall off the right half.
    for (int y = 0; y < 20; ++y) m.grid[static_cast<std::size_t>(y * 20 + 10)] = CellType::Wall;
    OccupancyView v(m);
    Task t = fall_task(m.cell_center({15, 10}));
    RobotState robot;
    robot.pose = m.cell_center({2, 10});
    robot.velocity = 0.5;
    Vec2 before = robot.pose;
    WorkStatus ws = work_for(t, robot, v, 5.0);
    CHECK(ws.stalled);
    CHECK(robot.pose == before);
    CHECK_FALSE(t.started());
}

TEST_CASE("estimate at the target is the remaining dwell plus the minimum") {
    EnvironmentMap m = corridor_map();
    OccupancyView v(m);
    Task t = fall_task(m.cell_center({10, 10}), 60.0);
    t.legs[0].arrived = true;
    RobotState robot;
    robot.pose = m.cell_center({10, 10});
    robot.velocity = 0.5;
    CHECK(estimate_duration(t, robot, v, 0.0) == doctest::Approx(60.0));
    CHECK(estimate_duration(t, robot, v, 5.0) == doctest::Approx(65.0));
}

TEST_CASE("estimate adds travel time: dwell 60 + travel 20 + min 5 = 85") {
    EnvironmentMap m = corridor_map();
    OccupancyView v(m);
    // 10 m straight at 0.5 m/s = 20 s travel: cells 10 -> 110 won't fit, use
    // velocity 0.1 and 2 m instead: travel = 2.0 / 0.1 = 20 s.
    Vec2 start = m.cell_center({10, 10});
    Vec2 target = m.cell_center({30, 10});
    Task t = fall_task(target, 60.0);
    RobotState robot;
    robot.pose = start;
    robot.velocity = 0.1;
    CHECK(estimate_duration(t, robot, v, 5.0) == doctest::Approx(85.0));
}

TEST_CASE("estimate is infinite when a leg is unreachable") {
    EnvironmentMap m = corridor_map(20);
    for (int y = 0; y < 20; ++y) m.grid[static_cast<std::size_t>(y * 20 + 10)] = CellType::Wall;
    OccupancyView v(m);
    Task t = fall_task(m.cell_center({15, 10}));
    RobotState robot;
    robot.pose = m.cell_center({2, 10});
    CHECK(std::isinf(estimate_duration(t, robot, v, 0.0)));
}

TEST_CASE("complex estimate chains start poses and sums subtask estimates") {
    EnvironmentMap m = corridor_map();
    OccupancyView v(m);
    EnvironmentMap gen = generate_environment(gen_env_params(), 7);
    auto tasks = generate_tasks(
        [] {
            TaskGenParams p;
            p.fall_count = 0;
            p.patrol_count = 0;
            p.pick_and_place_count = 4;
            return p;
        }(),
        gen, 7);
    OccupancyView gv(gen);
    RobotState robot;
    robot.pose = gen.cell_center({15, 15});
    robot.velocity = 0.5;
    if (!gv.traversable(gen.cell_of(robot.pose))) return;
    for (const Task& t : tasks) {
        REQUIRE(t.subtasks.size() == 3);
        // Independent oracle: per-leg path lengths chained by hand.
        double expect = 0.0;
        Vec2 pos = robot.pose;
        bool unreachable = false;
        for (const Task& sub : t.subtasks) {
            for (const TaskLeg& leg : sub.legs) {
                double len = path_length(gv, pos, leg.target);
                if (std::isinf(len)) unreachable = true;
                expect += len / robot.velocity + leg.dwell_remaining;
                pos = leg.target;
            }
        }
        double actual = estimate_duration(t, robot, gv, 0.0);
        if (unreachable) {
            CHECK(std::isinf(actual));
        } else {
            CHECK(actual == doctest::Approx(expect).epsilon(1e-9));
        }
    }
}

TEST_CASE("generate_tasks with zero counts is empty") {
    EnvironmentMap gen = generate_environment(gen_env_params(), 7);
    TaskGenParams p;
    p.fall_count = p.patrol_count = p.pick_count = p.place_count = p.pick_and_place_count = 0;
    CHECK(generate_tasks(p, gen, 1).empty());
}

TEST_CASE("generated counts, window and types match the configuration") {
    EnvironmentMap gen = generate_environment(gen_env_params(), 7);
    TaskGenParams p; // 12 falls, 12 patrols, 12 pick-and-places over 4 h
    auto tasks = generate_tasks(p, gen, 42);
    CHECK(tasks.size() == 36);
    int counts[kTaskTypeCount] = {0, 0, 0, 0, 0};
    for (const Task& t : tasks) {
        counts[static_cast<int>(t.type)]++;
        CHECK(t.request_time >= 0.0);
        CHECK(t.request_time < 14400.0);
        CHECK(t.deadline >= t.request_time + p.deadline_slack_min);
        CHECK(t.deadline <= 14400.0);
        CHECK(t.deathtime == t.deadline + t.max_delay);
    }
    CHECK(counts[static_cast<int>(TaskType::Fall)] == 12);
    CHECK(counts[static_cast<int>(TaskType::Patrol)] == 12);
    CHECK(counts[static_cast<int>(TaskType::PickAndPlace)] == 12);
}

TEST_CASE("generation is deterministic in the seed") {
    EnvironmentMap gen = generate_environment(gen_env_params(), 7);
    TaskGenParams p;
    CHECK(tasks_to_json(generate_tasks(p, gen, 5)) == tasks_to_json(generate_tasks(p, gen, 5)));
    CHECK(tasks_to_json(generate_tasks(p, gen, 5)) != tasks_to_json(generate_tasks(p, gen, 6)));
}

TEST_CASE("generated priorities and preemption flags follow the rules") {
    EnvironmentMap gen = generate_environment(gen_env_params(), 7);
    TaskGenParams p;
    p.pick_count = 3;
    p.place_count = 3;
    for (const Task& t : generate_tasks(p, gen, 9)) {
        switch (t.type) {
        case TaskType::Fall:
            CHECK(t.priority == 10);
            CHECK_FALSE(t.preemptive);
            CHECK(t.max_delay == 900.0);
            break;
        case TaskType::Patrol:
            CHECK(t.priority >= 1);
            CHECK(t.priority <= 9);
            CHECK(t.preemptive);
            CHECK(std::isinf(t.max_delay));
            break;
        case TaskType::Pick:
        case TaskType::Place:
            CHECK(t.priority == 0);
            break;
        case TaskType::PickAndPlace: {
            CHECK_FALSE(t.preemptive);
            int max_sub = 0;
            for (const Task& sub : t.subtasks) max_sub = std::max(max_sub, sub.priority);
            CHECK(t.priority == max_sub);
            CHECK(t.subtasks.size() == 3);
            CHECK(t.subtasks[0].type == TaskType::Pick);
            CHECK(t.subtasks[1].type == TaskType::Patrol);
            CHECK(t.subtasks[2].type == TaskType::Place);
            break;
        }
        }
    }
}

TEST_CASE("pick and place work positions are free cells near their objects") {
    EnvironmentMap gen = generate_environment(gen_env_params(), 7);
    TaskGenParams p;
    p.fall_count = 0;
    p.patrol_count = 0;
    p.pick_and_place_count = 8;
    for (const Task& t : generate_tasks(p, gen, 3)) {
        const Task& pick = t.subtasks[0];
        Cell work = gen.cell_of(pick.legs[0].target);
        CHECK(gen.at(work) == CellType::Free);
        REQUIRE(pick.object_id >= 0);
        const ManipObject& obj = gen.objects[static_cast<std::size_t>(pick.object_id)];
        CHECK(distance(pick.legs[0].target, obj.position) < 0.5);
    }
}

TEST_CASE("task generation requiring objects fails on an object-free map") {
    EnvironmentMap m = corridor_map();
    TaskGenParams p;
    p.fall_count = 0;
    p.patrol_count = 0;
    p.pick_and_place_count = 1;
    CHECK_THROWS_AS(generate_tasks(p, m, 1), GenerationFailed);
}

TEST_CASE("lifecycle monotonicity: completion and death are one-way") {
    EnvironmentMap m = corridor_map();
    OccupancyView v(m);
    Task t = fall_task(m.cell_center({20, 10}), 5.0);
    t.deadline = 30.0;
    t.max_delay = 50.0;
    recompute_deathtime(t);
    RobotState robot;
    robot.pose = m.cell_center({10, 10});
    robot.velocity = 0.5;
    bool was_completed = false;
    bool was_dead = false;
    for (int step = 0; step < 60; ++step) {
        double now = step * 5.0;
        if (was_completed) CHECK(is_completed(t));
        if (was_dead && !was_completed) CHECK_FALSE(is_alive(t, now));
        if (!is_completed(t)) work_for(t, robot, v, 5.0);
        was_completed = was_completed || is_completed(t);
        was_dead = was_dead || !is_alive(t, now);
    }
    CHECK(was_completed);
}
