#pragma once

#include <array>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "tabsa/state.hpp"

namespace tabsa {

struct RewardParams {
    double reward_all_complete = 100.0;
    double penalty_dead_job = -100.0;
    double reward_job_complete = 10.0;
    double reward_real_job = 1.0;
    double penalty_nonexistent_job = -10.0;
    double penalty_change_job = -1.0;

    /// Rewards must be strictly positive and penalties strictly negative.
    /// Checked at construction of every consumer.
    void validate() const;
};

struct CompletionDelta {
    int task_id = -1;
    TaskType type = TaskType::Patrol;
    double to_deadline = 0.0;                 // completion time - original deadline
    std::optional<double> to_deathtime;       // none for tasks that cannot die
};

struct StatRecord {
    double full_travel_distance = 0.0;
    std::array<int, kTaskTypeCount> num_completed{};
    std::vector<CompletionDelta> completions;
    std::array<int, kTaskTypeCount> num_interrupted{};
    std::map<int, int> task_interruptions;
    int num_human_abandonment = 0;
    double abandonment_distance = 1.0;
    Vec2 last_robot_pos;
};

struct EvalResult {
    bool terminate = false;
    double reward = 0.0;
    std::optional<StatRecord> stats;
};

class EvalFunction {
public:
    virtual ~EvalFunction() = default;
    virtual EvalResult calculate_results(double now, const AgentDecision& decision,
                                         const ScenarioState& state) = 0;
    virtual std::string name() const = 0;
};

/// Condensed per-step situation the reward ladder is evaluated over.
struct RewardSituation {
    bool all_complete = false;
    bool any_dead_job = false;
    bool job_just_completed = false;
    bool jobs_empty = false;
    bool real_job_selected = false;   // decision names a job present in the list
    bool action_changed = false;      // decision differs from the previous action
};

/// Reward case ladder, evaluated top-down, first match wins:
/// all complete / dead job / just completed / no jobs / real job /
/// nonexistent job. The change penalty applies only in the last two cases.
/// Returns (reward, terminate); terminate is set for the first two cases.
std::pair<double, bool> dqn_reward(const RewardSituation& s, const RewardParams& p);

/// Reward eval used to train the DQN agent. A decision of "none" while jobs
/// exist counts as choosing a nonexistent job: doing nothing is penalized.
class DqnEval : public EvalFunction {
public:
    explicit DqnEval(RewardParams params = {});
    EvalResult calculate_results(double now, const AgentDecision& decision,
                                 const ScenarioState& state) override;
    std::string name() const override { return "dqn"; }

private:
    RewardParams params_;
    AgentDecision previous_action_;
};

struct StatisticEvalParams {
    double abandonment_distance = 1.0; // meters
    double oscillation_window = 180.0; // seconds
    int oscillation_limit = 3;         // visits to the same task within the window
};

/// Accumulates run statistics each step and terminates on completion, any
/// job death, or the agent returning to the same task for the third time
/// within a sliding 3-minute window.
class StatisticEval : public EvalFunction {
public:
    explicit StatisticEval(StatisticEvalParams params = {});
    EvalResult calculate_results(double now, const AgentDecision& decision,
                                 const ScenarioState& state) override;
    std::string name() const override { return "statistic"; }

    const StatRecord& record() const { return record_; }

private:
    StatisticEvalParams params_;
    StatRecord record_;
    bool initialized_ = false;
    AgentDecision last_executed_;
    std::map<int, std::deque<double>> visit_starts_;
    std::map<int, bool> inside_fall_radius_;
};

std::string stat_record_to_json(const StatRecord& r);

} // namespace tabsa
