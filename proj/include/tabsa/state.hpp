#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tabsa/crowd.hpp"
#include "tabsa/robot.hpp"
#include "tabsa/tasks.hpp"

namespace tabsa {

/// What a decision agent returned: a job from the presented list, nothing,
/// or a slot that does not correspond to any job (the DQN can pick an empty
/// input slot; the eval function penalizes that).
struct AgentDecision {
    enum class Kind { None, Job, Nonexistent };
    Kind kind = Kind::None;
    int job_id = -1;
    std::vector<int> considered; // job ids the agent actually evaluated

    static AgentDecision none() { return {}; }
    static AgentDecision job(int id) {
        AgentDecision d;
        d.kind = Kind::Job;
        d.job_id = id;
        return d;
    }
    static AgentDecision nonexistent() {
        AgentDecision d;
        d.kind = Kind::Nonexistent;
        return d;
    }

    bool same_action(const AgentDecision& o) const {
        return kind == o.kind && (kind != Kind::Job || job_id == o.job_id);
    }
};

struct CompletionEvent {
    int task_id = -1;
    TaskType type = TaskType::Patrol;
    double time = 0.0;
};

/// Everything one scenario owns. Fully determined by seeds and config.
struct ScenarioState {
    double now = 0.0;
    double dt = 5.0;
    double horizon = 14400.0;
    long step_count = 0;

    std::vector<Task> tasks;
    std::vector<int> jobs; // ids of called-and-incomplete tasks
    RobotState robot;
    std::vector<PedestrianState> pedestrians;

    // Per-step bookkeeping read by eval functions and the trace.
    AgentDecision last_raw_decision;
    AgentDecision effective_decision;          // post non-preemption override
    std::vector<CompletionEvent> completions_last_step;
    std::vector<int> dead_jobs;                // refreshed each step

    Task& task(int id) {
        if (id >= 0 && id < static_cast<int>(tasks.size()) &&
            tasks[static_cast<std::size_t>(id)].id == id) {
            return tasks[static_cast<std::size_t>(id)];
        }
        for (Task& t : tasks) {
            if (t.id == id) return t;
        }
        throw std::out_of_range("unknown task id " + std::to_string(id));
    }
    const Task& task(int id) const { return const_cast<ScenarioState*>(this)->task(id); }

    bool in_jobs(int id) const {
        for (int j : jobs) {
            if (j == id) return true;
        }
        return false;
    }
    bool all_tasks_completed() const {
        for (const Task& t : tasks) {
            if (!is_completed(t)) return false;
        }
        return true;
    }
};

} // namespace tabsa
