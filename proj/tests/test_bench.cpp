#include "doctest.h"

#include <algorithm>
#include <set>

#include "tabsa/bench.hpp"

using namespace tabsa;

namespace {

BenchmarkPlan tiny_plan() {
    BenchmarkPlan plan;
    AgentSpec shortest;
    shortest.name = "simple-shortest";
    AgentSpec dist;
    dist.name = "distance";
    plan.agents = {shortest, dist};
    plan.runs_per_agent = 2;
    plan.base_seed = 77;

    RunConfig& tmpl = plan.scenario_template;
    tmpl.scenario.env.width_m = 8.0;
    tmpl.scenario.env.height_m = 8.0;
    tmpl.scenario.env.max_depth = 1;
    tmpl.scenario.tasks.scenario_duration = 600.0;
    tmpl.scenario.tasks.fall_count = 1;
    tmpl.scenario.tasks.patrol_count = 1;
    tmpl.scenario.tasks.pick_and_place_count = 1;
    tmpl.scenario.tasks.deadline_slack_min = 60.0;
    tmpl.scenario.tasks.deadline_slack_max = 300.0;
    tmpl.scenario.crowd.count = 2;
    tmpl.scenario.horizon = 600.0;
    tmpl.scenario.robot.velocity = 0.5;
    return plan;
}

std::string strip_wall_times(std::vector<RunSummary> runs) {
    for (RunSummary& r : runs) r.wall_ms = 0.0;
    return summaries_to_json(runs);
}

} // namespace

TEST_CASE("a 1x1 plan yields one summary") {
    BenchmarkPlan plan = tiny_plan();
    plan.agents.resize(1);
    plan.runs_per_agent = 1;
    auto runs = run_batch(plan);
    REQUIRE(runs.size() == 1);
    CHECK(runs[0].agent == "simple-shortest");
    CHECK(runs[0].error.empty());
}

TEST_CASE("shared seed policy gives every agent identical seed lists") {
    BenchmarkPlan plan = tiny_plan();
    plan.seed_policy = SeedPolicy::SharedAcrossAgents;
    auto runs = run_batch(plan);
    REQUIRE(runs.size() == 4);
    // Same run index -> same seeds across agents, so identical maps/tasks.
    CHECK(runs[0].seeds.map_seed == runs[2].seeds.map_seed);
    CHECK(runs[0].seeds.task_seed == runs[2].seeds.task_seed);
    CHECK(runs[1].seeds.map_seed == runs[3].seeds.map_seed);
    // Within one agent the runs differ.
    CHECK(runs[0].seeds.task_seed != runs[1].seeds.task_seed);

    ScenarioConfig a = plan.scenario_template.scenario;
    a.seeds = runs[0].seeds;
    ScenarioConfig b = plan.scenario_template.scenario;
    b.seeds = runs[2].seeds;
    CHECK(tasks_to_json(Scenario(a).state().tasks) == tasks_to_json(Scenario(b).state().tasks));
}

TEST_CASE("fresh seed policy gives distinct seeds per agent and run") {
    BenchmarkPlan plan = tiny_plan();
    plan.seed_policy = SeedPolicy::FreshPerRun;
    auto runs = run_batch(plan);
    REQUIRE(runs.size() == 4);
    std::set<std::uint64_t> seeds;
    for (const RunSummary& r : runs) seeds.insert(r.seeds.task_seed);
    CHECK(seeds.size() == 4);
}

TEST_CASE("summaries are invariant to the worker count") {
    BenchmarkPlan plan = tiny_plan();
    auto serial = run_batch(plan, 1);
    auto parallel = run_batch(plan, 4);
    CHECK(strip_wall_times(serial) == strip_wall_times(parallel));
}

TEST_CASE("reruns reproduce every summary") {
    BenchmarkPlan plan = tiny_plan();
    CHECK(strip_wall_times(run_batch(plan)) == strip_wall_times(run_batch(plan)));
}

TEST_CASE("csv has one row per run plus a header") {
    BenchmarkPlan plan = tiny_plan();
    auto runs = run_batch(plan);
    std::string csv = summaries_to_csv(runs);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
    CHECK(csv.find("simple-shortest") != std::string::npos);
    CHECK(csv.find("outcome") != std::string::npos);
}

TEST_CASE("summaries JSON round-trips") {
    BenchmarkPlan plan = tiny_plan();
    auto runs = run_batch(plan);
    auto parsed = summaries_from_json(summaries_to_json(runs));
    CHECK(strip_wall_times(runs) == strip_wall_times(parsed));
}

TEST_CASE("aggregate outcome counts sum to the runs per agent") {
    BenchmarkPlan plan = tiny_plan();
    plan.runs_per_agent = 3;
    auto runs = run_batch(plan);
    std::string agg = aggregate_report_json(runs);
    nlohmann::json j = nlohmann::json::parse(agg);
    REQUIRE(j.size() == 2);
    for (const auto& agent : j) {
        int total = 0;
        for (const auto& [cause, n] : agent.at("outcomes").items()) total += n.get<int>();
        CHECK(total == 3);
    }
    // csv + svg render without error
    CHECK(aggregate_report_csv(runs).find("agent") == 0);
    CHECK(aggregate_report_svg(runs).find("<svg") != std::string::npos);
}

TEST_CASE("render_course on an empty trace draws only axes") {
    std::string svg = render_course({}, {});
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(std::count(svg.begin(), svg.end(), '\n') == 5); // svg, rect, two axes, close
}

TEST_CASE("render_course draws one segment per contiguous execution") {
    Task fall;
    fall.id = 0;
    fall.type = TaskType::Fall;
    Task patrol;
    patrol.id = 1;
    patrol.type = TaskType::Patrol;
    std::vector<Task> tasks{fall, patrol};

    auto event = [](long step, double now, AgentDecision d) {
        TraceEvent e;
        e.step = step;
        e.now = now;
        e.effective = d;
        return e;
    };

    // Single task executing two steps -> one segment.
    std::vector<TraceEvent> trace{event(0, 0.0, AgentDecision::job(0)),
                                  event(1, 5.0, AgentDecision::job(0))};
    std::string one = render_course(trace, tasks);
    CHECK(std::count(one.begin(), one.end(), '\n') == 6); // axes + 1 segment

    // a,b,a switching -> three segments with matching timestamps.
    std::vector<TraceEvent> thrash{event(0, 0.0, AgentDecision::job(0)),
                                   event(1, 5.0, AgentDecision::job(1)),
                                   event(2, 10.0, AgentDecision::job(0))};
    std::string three = render_course(thrash, tasks);
    CHECK(std::count(three.begin(), three.end(), '\n') == 8);
    // Byte-identical on identical traces.
    CHECK(three == render_course(thrash, tasks));
}

TEST_CASE("pedestrian csv lists every snapshot") {
    TraceEvent e;
    e.now = 5.0;
    e.pedestrians = {{0, 1.0, 2.0, true}, {1, 3.0, 4.0, false}};
    std::string csv = pedestrian_trace_csv({e});
    CHECK(csv.find("5,0,1,2,1") != std::string::npos);
    CHECK(csv.find("5,1,3,4,0") != std::string::npos);
}

TEST_CASE("plan JSON parsing") {
    nlohmann::json j;
    j["agents"] = {{{"name", "scheduler"}}, {{"name", "distance"}, {"ratio", 0.7}}};
    j["runs"] = 4;
    j["base_seed"] = 9;
    j["seed_policy"] = "shared";
    j["scenario"] = {{"horizon", 600.0}};
    BenchmarkPlan plan = plan_from_json(j);
    CHECK(plan.agents.size() == 2);
    CHECK(plan.agents[1].ratio == 0.7);
    CHECK(plan.runs_per_agent == 4);
    CHECK(plan.seed_policy == SeedPolicy::SharedAcrossAgents);
    CHECK(plan.scenario_template.scenario.horizon == 600.0);
    nlohmann::json bad = j;
    bad["seed_policy"] = "nonsense";
    CHECK_THROWS_AS(plan_from_json(bad), std::invalid_argument);
}

TEST_CASE("per-run failures are recorded and the batch continues") {
    BenchmarkPlan plan = tiny_plan();
    plan.agents[1].name = "distance";
    plan.agents[1].ratio = -1.0; // invalid: the agent factory throws
    auto runs = run_batch(plan);
    REQUIRE(runs.size() == 4);
    CHECK(runs[0].error.empty());
    CHECK(runs[2].outcome == Outcome::RunFailed);
    CHECK_FALSE(runs[2].error.empty());
}
