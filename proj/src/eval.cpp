#include "tabsa/eval.hpp"

#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace tabsa {

void RewardParams::validate() const {
    if (!(reward_all_complete > 0) || !(reward_job_complete > 0) || !(reward_real_job > 0)) {
        throw std::invalid_argument("RewardParams: rewards must be strictly positive");
    }
    if (!(penalty_dead_job < 0) || !(penalty_nonexistent_job < 0) || !(penalty_change_job < 0)) {
        throw std::invalid_argument("RewardParams: penalties must be strictly negative");
    }
}

std::pair<double, bool> dqn_reward(const RewardSituation& s, const RewardParams& p) {
    if (s.all_complete) return {p.reward_all_complete, true};
    if (s.any_dead_job) return {p.penalty_dead_job, true};
    if (s.job_just_completed) return {p.reward_job_complete, false};
    if (s.jobs_empty) return {0.0, false};
    double change = s.action_changed ? p.penalty_change_job : 0.0;
    if (s.real_job_selected) return {p.reward_real_job + change, false};
    return {p.penalty_nonexistent_job + change, false};
}

DqnEval::DqnEval(RewardParams params) : params_(params) { params_.validate(); }

EvalResult DqnEval::calculate_results(double, const AgentDecision& decision,
                                      const ScenarioState& state) {
    RewardSituation s;
    s.all_complete = state.all_tasks_completed();
    s.any_dead_job = !state.dead_jobs.empty();
    s.job_just_completed = !state.completions_last_step.empty();
    s.jobs_empty = state.jobs.empty();
    s.real_job_selected =
        decision.kind == AgentDecision::Kind::Job && state.in_jobs(decision.job_id);
    s.action_changed = !decision.same_action(previous_action_);

    auto [reward, terminate] = dqn_reward(s, params_);
    previous_action_ = decision;

    EvalResult out;
    out.terminate = terminate;
    out.reward = reward;
    return out;
}

StatisticEval::StatisticEval(StatisticEvalParams params) : params_(params) {
    record_.abandonment_distance = params.abandonment_distance;
}

EvalResult StatisticEval::calculate_results(double now, const AgentDecision& decision,
                                            const ScenarioState& state) {
    if (!initialized_) {
        record_.last_robot_pos = state.robot.pose;
        initialized_ = true;
    }
    record_.full_travel_distance += distance(state.robot.pose, record_.last_robot_pos);
    record_.last_robot_pos = state.robot.pose;

    for (const CompletionEvent& c : state.completions_last_step) {
        const Task& t = state.task(c.task_id);
        record_.num_completed[static_cast<std::size_t>(t.type)]++;
        CompletionDelta d;
        d.task_id = c.task_id;
        d.type = t.type;
        d.to_deadline = c.time - t.original_deadline;
        if (!std::isinf(t.original_max_delay)) {
            d.to_deathtime = c.time - (t.original_deadline + t.original_max_delay);
        }
        record_.completions.push_back(d);
    }

    // Interruption: the previously executed task was started, preemptible
    // work remains, and the robot moves on to something else this step.
    if (state.robot.active_task) {
        const Task& prev = state.task(*state.robot.active_task);
        bool switched = state.effective_decision.kind != AgentDecision::Kind::Job ||
                        state.effective_decision.job_id != prev.id;
        if (switched && prev.started() && !is_completed(prev) && is_alive(prev, now)) {
            record_.num_interrupted[static_cast<std::size_t>(prev.type)]++;
            record_.task_interruptions[prev.id]++;
        }
    }

    // Abandonment: the robot enters the radius of an unserved fall without
    // working on it. Counted once per entry.
    for (int id : state.jobs) {
        const Task& t = state.task(id);
        if (t.type != TaskType::Fall || is_completed(t)) continue;
        if (t.legs.empty()) continue;
        double d = distance(state.robot.pose, t.legs.front().target);
        bool inside = d <= params_.abandonment_distance;
        bool working = state.effective_decision.kind == AgentDecision::Kind::Job &&
                       state.effective_decision.job_id == id;
        bool was_inside = inside_fall_radius_[id];
        if (inside && !was_inside && !working) record_.num_human_abandonment++;
        inside_fall_radius_[id] = inside;
    }

    // Oscillation is tracked on the post-override decision: with the engine
    // enforcing non-preemption, the effective stream is what the system
    // actually returns for execution.
    bool oscillation = false;
    const AgentDecision& executed = state.effective_decision;
    if (executed.kind == AgentDecision::Kind::Job && !executed.same_action(last_executed_)) {
        auto& starts = visit_starts_[executed.job_id];
        starts.push_back(now);
        while (!starts.empty() && starts.front() < now - params_.oscillation_window) {
            starts.pop_front();
        }
        if (static_cast<int>(starts.size()) >= params_.oscillation_limit) oscillation = true;
    }
    last_executed_ = executed;

    EvalResult out;
    out.terminate = state.all_tasks_completed() || !state.dead_jobs.empty() || oscillation;
    out.stats = record_;
    return out;
}

std::string stat_record_to_json(const StatRecord& r) {
    nlohmann::json j;
    j["full_travel_distance"] = r.full_travel_distance;
    for (int i = 0; i < kTaskTypeCount; ++i) {
        j["num_completed"][task_type_name(static_cast<TaskType>(i))] =
            r.num_completed[static_cast<std::size_t>(i)];
        j["num_interrupted"][task_type_name(static_cast<TaskType>(i))] =
            r.num_interrupted[static_cast<std::size_t>(i)];
    }
    j["completions"] = nlohmann::json::array();
    for (const CompletionDelta& d : r.completions) {
        nlohmann::json e;
        e["task"] = d.task_id;
        e["type"] = task_type_name(d.type);
        e["to_deadline"] = d.to_deadline;
        if (d.to_deathtime) {
            e["to_deathtime"] = *d.to_deathtime;
        } else {
            e["to_deathtime"] = nullptr;
        }
        j["completions"].push_back(e);
    }
    j["task_interruptions"] = nlohmann::json::object();
    for (const auto& [id, n] : r.task_interruptions) {
        j["task_interruptions"][std::to_string(id)] = n;
    }
    j["num_human_abandonment"] = r.num_human_abandonment;
    j["abandonment_distance"] = r.abandonment_distance;
    j["last_robot_pos"] = {r.last_robot_pos.x, r.last_robot_pos.y};
    return j.dump();
}

} // namespace tabsa
