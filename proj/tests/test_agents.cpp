#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <map>

#include "tabsa/agents.hpp"

using namespace tabsa;

namespace {

Task job(int id, TaskType type, double duration, double dist = 0.0, double deadline = 0.0,
         int priority = 0, double request = 0.0, bool preemptive = true) {
    Task t;
    t.id = id;
    t.type = type;
    t.estimated_duration = duration;
    t.distance_from_robot = dist;
    t.deadline = deadline;
    t.priority = priority;
    t.request_time = request;
    t.preemptive = preemptive;
    return t;
}

std::vector<const Task*> ptrs(const std::vector<Task>& tasks) {
    std::vector<const Task*> out;
    for (const Task& t : tasks) out.push_back(&t);
    return out;
}

// Independent oracle: replay the greedy rule with its own sort and its own
// closed-interval collision test.
ScheduleTable oracle_request_table(std::vector<const Task*> jobs) {
    std::stable_sort(jobs.begin(), jobs.end(), [](const Task* a, const Task* b) {
        return std::tuple(-a->priority, a->request_time, a->id) <
               std::tuple(-b->priority, b->request_time, b->id);
    });
    ScheduleTable table;
    for (const Task* t : jobs) {
        if (std::isinf(t->estimated_duration)) {
            table.rejected.push_back(t->id);
            continue;
        }
        double s = t->deadline - t->estimated_duration;
        double e = t->deadline;
        bool hit = false;
        for (const ScheduledEntry& other : table.scheduled) {
            bool disjoint = e < other.start || other.end < s;
            if (!disjoint) hit = true;
        }
        if (hit) {
            table.rejected.push_back(t->id);
        } else {
            table.scheduled.push_back({t->id, s, e});
        }
    }
    return table;
}

} // namespace

TEST_CASE("simple agent: argmax and argmin with hesitance zero") {
    std::vector<Task> tasks{job(0, TaskType::Fall, 10.0), job(1, TaskType::Patrol, 30.0)};
    RandomStream s(1);
    AgentDecision longest = simple_select(ptrs(tasks), SimpleMode::Longest, 0.0, s, std::nullopt);
    CHECK(longest.job_id == 1);
    AgentDecision shortest = simple_select(ptrs(tasks), SimpleMode::Shortest, 0.0, s, std::nullopt);
    CHECK(shortest.job_id == 0);
}

TEST_CASE("simple agent: hesitance one repeats a still-present previous pick") {
    std::vector<Task> tasks{job(0, TaskType::Fall, 10.0), job(1, TaskType::Patrol, 30.0)};
    RandomStream s(1);
    AgentDecision d = simple_select(ptrs(tasks), SimpleMode::Longest, 1.0, s, 0);
    CHECK(d.job_id == 0); // repeated despite job 1 being longer
}

TEST_CASE("simple agent: a vanished previous pick falls back to the extreme") {
    std::vector<Task> tasks{job(1, TaskType::Patrol, 30.0), job(2, TaskType::Fall, 5.0)};
    RandomStream s(1);
    AgentDecision d = simple_select(ptrs(tasks), SimpleMode::Longest, 1.0, s, 0);
    CHECK(d.job_id == 1);
}

TEST_CASE("simple agent: empty jobs give none") {
    RandomStream s(1);
    CHECK(simple_select({}, SimpleMode::Longest, 0.5, s, 3).kind == AgentDecision::Kind::None);
}

TEST_CASE("simple agent: hesitance zero consumes no randomness") {
    std::vector<Task> tasks{job(0, TaskType::Fall, 10.0), job(1, TaskType::Patrol, 30.0)};
    RandomStream s(42);
    std::uint64_t before = s.state();
    simple_select(ptrs(tasks), SimpleMode::Shortest, 0.0, s, 0);
    CHECK(s.state() == before);
}

TEST_CASE("simple agent: ties break to the lowest id") {
    std::vector<Task> tasks{job(3, TaskType::Fall, 10.0), job(1, TaskType::Patrol, 10.0),
                            job(2, TaskType::Patrol, 10.0)};
    RandomStream s(1);
    CHECK(simple_select(ptrs(tasks), SimpleMode::Longest, 0.0, s, std::nullopt).job_id == 1);
    CHECK(simple_select(ptrs(tasks), SimpleMode::Shortest, 0.0, s, std::nullopt).job_id == 1);
}

TEST_CASE("simple agent: repeat frequency tracks the hesitance value") {
    std::vector<Task> tasks{job(0, TaskType::Fall, 10.0), job(1, TaskType::Patrol, 30.0)};
    RandomStream s(2024);
    int repeats = 0;
    const int n = 1000;
    for (int i = 0; i < n; ++i) {
        // prev = 0, the shorter job; a repeat returns 0, a re-evaluation
        // under Longest returns 1.
        AgentDecision d = simple_select(ptrs(tasks), SimpleMode::Longest, 0.5, s, 0);
        if (d.job_id == 0) ++repeats;
    }
    double freq = static_cast<double>(repeats) / n;
    CHECK(freq > 0.45);
    CHECK(freq < 0.55);
}

TEST_CASE("distance agent: ratio zero is argmax of distance") {
    std::vector<Task> tasks{job(0, TaskType::Fall, 100.0, 4.0), job(1, TaskType::Patrol, 1.0, 9.0)};
    CHECK(distance_select(ptrs(tasks), 0.0).job_id == 1);
}

TEST_CASE("distance agent: worked example of the score") {
    // a: d=10, e=20; b: d=9, e=0; ratio 0.5 -> scores a: 0, b: 9 -> b.
    std::vector<Task> tasks{job(0, TaskType::Fall, 20.0, 10.0), job(1, TaskType::Patrol, 0.0, 9.0)};
    CHECK(distance_select(ptrs(tasks), 0.5).job_id == 1);
}

TEST_CASE("distance agent: equal scores break to the lowest id") {
    std::vector<Task> tasks{job(2, TaskType::Fall, 10.0, 5.0), job(1, TaskType::Patrol, 10.0, 5.0)};
    CHECK(distance_select(ptrs(tasks), 0.5).job_id == 1);
}

TEST_CASE("distance agent: adding a constant to every distance changes nothing") {
    RandomStream rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<Task> tasks;
        int n = 2 + static_cast<int>(rng.uniform_index(6));
        for (int i = 0; i < n; ++i) {
            tasks.push_back(job(i, TaskType::Patrol, rng.uniform(0, 300), rng.uniform(0, 20)));
        }
        double ratio = rng.uniform(0, 2);
        int base = distance_select(ptrs(tasks), ratio).job_id;
        for (Task& t : tasks) t.distance_from_robot += 13.37;
        CHECK(distance_select(ptrs(tasks), ratio).job_id == base);
    }
}

TEST_CASE("distance agent: non-finite jobs are skipped") {
    std::vector<Task> tasks{job(0, TaskType::Fall, kNever, 5.0), job(1, TaskType::Patrol, 1.0, 1.0)};
    CHECK(distance_select(ptrs(tasks), 0.5).job_id == 1);
    std::vector<Task> all_inf{job(0, TaskType::Fall, kNever, kNever)};
    CHECK(distance_select(ptrs(all_inf), 0.5).kind == AgentDecision::Kind::None);
}

TEST_CASE("request table: single job occupies [deadline - duration, deadline]") {
    std::vector<Task> tasks{job(0, TaskType::Fall, 30.0, 0.0, 100.0, 10)};
    ScheduleTable t = request_table(ptrs(tasks), 0.0);
    REQUIRE(t.scheduled.size() == 1);
    CHECK(t.scheduled[0].start == 70.0);
    CHECK(t.scheduled[0].end == 100.0);
    CHECK(t.rejected.empty());
}

TEST_CASE("request table: priority wins a collision") {
    std::vector<Task> tasks{job(0, TaskType::Patrol, 30.0, 0.0, 100.0, 5),
                            job(1, TaskType::Fall, 30.0, 0.0, 100.0, 10)};
    ScheduleTable t = request_table(ptrs(tasks), 0.0);
    REQUIRE(t.scheduled.size() == 1);
    CHECK(t.scheduled[0].job_id == 1);
    CHECK(t.rejected == std::vector<int>{0});
}

TEST_CASE("request table: same priority sorts by earliest request time") {
    std::vector<Task> tasks{job(0, TaskType::Patrol, 30.0, 0.0, 100.0, 5, 50.0),
                            job(1, TaskType::Patrol, 30.0, 0.0, 100.0, 5, 10.0)};
    ScheduleTable t = request_table(ptrs(tasks), 0.0);
    REQUIRE(t.scheduled.size() == 1);
    CHECK(t.scheduled[0].job_id == 1);
}

TEST_CASE("request table: infinite durations are rejected") {
    std::vector<Task> tasks{job(0, TaskType::Fall, kNever, 0.0, 100.0, 10)};
    ScheduleTable t = request_table(ptrs(tasks), 0.0);
    CHECK(t.scheduled.empty());
    CHECK(t.rejected == std::vector<int>{0});
}

TEST_CASE("request table matches the brute-force oracle on random job sets") {
    RandomStream rng(split(11, "request-table"));
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<Task> tasks;
        int n = 1 + static_cast<int>(rng.uniform_index(8));
        for (int i = 0; i < n; ++i) {
            Task t = job(i, TaskType::Patrol, rng.uniform(5, 120), 0.0, rng.uniform(50, 500),
                         rng.uniform_int(0, 10), rng.uniform(0, 100));
            tasks.push_back(t);
        }
        ScheduleTable actual = request_table(ptrs(tasks), 0.0);
        ScheduleTable expect = oracle_request_table(ptrs(tasks));
        REQUIRE(actual.scheduled.size() == expect.scheduled.size());
        for (std::size_t i = 0; i < actual.scheduled.size(); ++i) {
            CHECK(actual.scheduled[i].job_id == expect.scheduled[i].job_id);
            CHECK(actual.scheduled[i].start == doctest::Approx(expect.scheduled[i].start));
            CHECK(actual.scheduled[i].end == doctest::Approx(expect.scheduled[i].end));
        }
        CHECK(actual.rejected == expect.rejected);
        // Scheduled intervals pairwise disjoint.
        for (std::size_t a = 0; a < actual.scheduled.size(); ++a) {
            for (std::size_t b = a + 1; b < actual.scheduled.size(); ++b) {
                bool disjoint = actual.scheduled[a].end < actual.scheduled[b].start ||
                                actual.scheduled[b].end < actual.scheduled[a].start;
                CHECK(disjoint);
            }
        }
        // Partition: scheduled + rejected cover the input exactly once.
        CHECK(actual.scheduled.size() + actual.rejected.size() == tasks.size());
    }
}

TEST_CASE("scheduler select: the interval containing now wins, else none") {
    std::vector<Task> tasks{job(0, TaskType::Fall, 30.0, 0.0, 100.0, 10)};
    ScheduleTable t = request_table(ptrs(tasks), 0.0);
    CHECK(scheduler_select(ptrs(tasks), 80.0, t).job_id == 0);
    CHECK(scheduler_select(ptrs(tasks), 100.0, t).job_id == 0); // inclusive end
    CHECK(scheduler_select(ptrs(tasks), 50.0, t).kind == AgentDecision::Kind::None);
    CHECK(scheduler_select(ptrs(tasks), 101.0, t).kind == AgentDecision::Kind::None);
}

TEST_CASE("dqn encoding: zero jobs give an all-zero tensor") {
    DqnEncoding enc = dqn_encode({}, 0.0, 4, 3600.0, 20.0);
    CHECK(enc.input.size() == 36);
    for (double v : enc.input) CHECK(v == 0.0);
    for (const auto& s : enc.slot_job) CHECK_FALSE(s.has_value());
}

TEST_CASE("dqn encoding: one fall fills exactly one slot in the fall band") {
    std::vector<Task> tasks{job(5, TaskType::Fall, 360.0, 5.0, 100.0)};
    tasks[0].preemptive = false;
    DqnEncoding enc = dqn_encode(ptrs(tasks), 0.0, 4, 3600.0, 20.0);
    CHECK(enc.slot_job[0] == 5);
    CHECK(enc.input[0] == doctest::Approx(0.1));  // 360 / 3600
    CHECK(enc.input[1] == 0.0);                   // non-preemptive
    CHECK(enc.input[2] == doctest::Approx(0.25)); // 5 / 20
    int nonzero_slots = 0;
    for (std::size_t s = 0; s < enc.slot_job.size(); ++s) {
        if (enc.slot_job[s]) ++nonzero_slots;
    }
    CHECK(nonzero_slots == 1);
}

TEST_CASE("dqn encoding: earliest deadlines fill the band, sorted") {
    std::vector<Task> tasks;
    for (int i = 0; i < 5; ++i) {
        tasks.push_back(job(i, TaskType::Fall, 100.0, 1.0, 500.0 - 100.0 * i));
    }
    DqnEncoding enc = dqn_encode(ptrs(tasks), 0.0, 4, 3600.0, 20.0);
    // Sort oracle: deadlines 100 (id 4), 200 (id 3), 300 (id 2), 400 (id 1).
    CHECK(enc.slot_job[0] == 4);
    CHECK(enc.slot_job[1] == 3);
    CHECK(enc.slot_job[2] == 2);
    CHECK(enc.slot_job[3] == 1);
}

TEST_CASE("dqn encoding: non-finite features are clamped") {
    std::vector<Task> tasks{job(0, TaskType::Fall, kNever, kNever, 10.0)};
    DqnEncoding enc = dqn_encode(ptrs(tasks), 0.0, 2, 3600.0, 20.0);
    CHECK(enc.input[0] == 10.0);
    CHECK(enc.input[2] == 10.0);
}

TEST_CASE("dqn agent: handcrafted weights pick the intended slot") {
    DqnAgentConfig cfg;
    cfg.n_per_type = 2;
    cfg.hidden = {4};
    cfg.distance_scale = 20.0;
    DqnAgent agent(cfg, 1);

    Mlp net = agent.network();
    // Zero everything, then bias slot 0 (Fall band, first slot) to the top.
    for (auto& layer : net.weights) std::fill(layer.begin(), layer.end(), 0.0);
    for (auto& layer : net.biases) std::fill(layer.begin(), layer.end(), 0.0);
    net.biases.back()[0] = 1.0;
    DqnAgent loaded(cfg, net, 1);

    std::vector<Task> tasks{job(7, TaskType::Fall, 60.0, 2.0, 100.0)};
    EvalResult none;
    AgentDecision d = loaded.select_task(ptrs(tasks), 0.0, none);
    CHECK(d.kind == AgentDecision::Kind::Job);
    CHECK(d.job_id == 7);
}

TEST_CASE("dqn agent: an empty argmax slot is a nonexistent decision") {
    DqnAgentConfig cfg;
    cfg.n_per_type = 2;
    cfg.hidden = {4};
    cfg.distance_scale = 20.0;
    DqnAgent seed_agent(cfg, 1);
    Mlp net = seed_agent.network();
    for (auto& layer : net.weights) std::fill(layer.begin(), layer.end(), 0.0);
    for (auto& layer : net.biases) std::fill(layer.begin(), layer.end(), 0.0);
    net.biases.back()[5] = 1.0; // PickAndPlace band second slot, always empty here
    DqnAgent agent(cfg, net, 1);

    std::vector<Task> tasks{job(7, TaskType::Fall, 60.0, 2.0, 100.0)};
    EvalResult none;
    AgentDecision d = agent.select_task(ptrs(tasks), 0.0, none);
    CHECK(d.kind == AgentDecision::Kind::Nonexistent);
}

TEST_CASE("dqn agent: epsilon one explores uniformly over all slots") {
    DqnAgentConfig cfg;
    cfg.n_per_type = 2; // 6 slots
    cfg.hidden = {4};
    cfg.distance_scale = 20.0;
    cfg.training = true;
    cfg.hyper.eps_start = 1.0;
    cfg.hyper.eps_end = 1.0;
    cfg.hyper.batch_size = 1000000; // never learn during this test
    DqnAgent agent(cfg, 3);

    std::vector<Task> tasks{job(0, TaskType::Fall, 60.0, 2.0, 100.0)};
    EvalResult none;
    std::map<int, int> slot_counts;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
        AgentDecision d = agent.select_task(ptrs(tasks), 0.0, none);
        // Recover the slot: job means slot 0; nonexistent means some other.
        slot_counts[d.kind == AgentDecision::Kind::Job ? 0 : 1]++;
    }
    // Slot 0 of 6 under uniform exploration: expect 1/6 = 0.1667.
    double freq = static_cast<double>(slot_counts[0]) / n;
    CHECK(freq > 1.0 / 6.0 - 0.03);
    CHECK(freq < 1.0 / 6.0 + 0.03);
}

TEST_CASE("predictor slots summarize requests, schedule and priorities") {
    std::vector<Task> tasks{job(0, TaskType::Fall, 30.0, 0.0, 100.0, 10, 50.0),
                            job(1, TaskType::Patrol, 30.0, 0.0, 400.0, 5, 250.0)};
    auto slots = predictor_slots(ptrs(tasks), 0.0, 600.0, 3);
    REQUIRE(slots.size() == 3);
    CHECK(slots[0].task_count == 1); // request 50 in [0,200)
    CHECK(slots[1].task_count == 1); // request 250 in [200,400)
    // Schedule: fall [70,100] in slot 0, patrol [370,400] in slot 1.
    CHECK(slots[0].executable_count == 1);
    CHECK(slots[0].priority_sum == 10);
    CHECK(slots[1].executable_count == 1);
    CHECK(slots[1].priority_sum == 5);
    CHECK(slots[2].task_count == 0);
}
