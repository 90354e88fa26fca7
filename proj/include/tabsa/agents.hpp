#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tabsa/dqn.hpp"
#include "tabsa/eval.hpp"
#include "tabsa/state.hpp"

namespace tabsa {

class DecisionAgent {
public:
    virtual ~DecisionAgent() = default;
    virtual AgentDecision select_task(const std::vector<const Task*>& jobs, double now,
                                      const EvalResult& last_eval) = 0;
    /// Called once when a scenario ends; training agents flush the terminal
    /// transition here.
    virtual void episode_finished(const EvalResult&) {}
    virtual std::string name() const = 0;
};

enum class SimpleMode { Longest, Shortest };

/// With probability `hesitance` repeat the previous selection when it is
/// still among the jobs (the existence check happens before the draw);
/// otherwise pick the extreme estimated_duration, lowest id on ties.
AgentDecision simple_select(const std::vector<const Task*>& jobs, SimpleMode mode,
                            double hesitance, RandomStream& stream, std::optional<int> prev);

/// Highest dist_score = distance_from_robot - ratio * estimated_duration.
/// Jobs with non-finite distance or duration are skipped.
AgentDecision distance_select(const std::vector<const Task*>& jobs, double ratio);

struct ScheduledEntry {
    int job_id = -1;
    double start = 0.0;
    double end = 0.0;
};

/// Greedy deadline-anchored schedule: jobs sorted by (priority desc,
/// request_time asc, id asc); a candidate occupies [deadline - duration,
/// deadline] and is rejected when that closed interval intersects anything
/// already scheduled.
struct ScheduleTable {
    std::vector<ScheduledEntry> scheduled;
    std::vector<int> rejected;
};

/// `pinned`, when given and still applicable, reserves the currently
/// executing job's remembered interval before the greedy pass.
ScheduleTable request_table(const std::vector<const Task*>& jobs, double now,
                            const ScheduledEntry* pinned = nullptr);

/// The unique scheduled entry whose [start, end] contains now, or none.
AgentDecision scheduler_select(const std::vector<const Task*>& jobs, double now,
                               const ScheduleTable& table);

class SimpleAgent : public DecisionAgent {
public:
    SimpleAgent(SimpleMode mode, double hesitance, std::uint64_t seed);
    AgentDecision select_task(const std::vector<const Task*>& jobs, double now,
                              const EvalResult& last_eval) override;
    std::string name() const override;

private:
    SimpleMode mode_;
    double hesitance_;
    RandomStream stream_;
    std::optional<int> prev_;
};

class DistanceAgent : public DecisionAgent {
public:
    explicit DistanceAgent(double ratio);
    AgentDecision select_task(const std::vector<const Task*>& jobs, double now,
                              const EvalResult& last_eval) override;
    std::string name() const override { return "distance"; }

private:
    double ratio_;
};

class SchedulerAgent : public DecisionAgent {
public:
    SchedulerAgent() = default;
    AgentDecision select_task(const std::vector<const Task*>& jobs, double now,
                              const EvalResult& last_eval) override;
    std::string name() const override { return "scheduler"; }

    const ScheduleTable& table() const { return table_; }

private:
    ScheduleTable table_;
    std::optional<ScheduledEntry> executing_;
};

/// DQN input: for each of the 3 service task types (Fall, Patrol,
/// PickAndPlace) the N jobs with the earliest deadlines fill slots of
/// (estimated_duration, preemptive, distance_from_robot), normalized and
/// clamped; empty slots stay zero.
struct DqnEncoding {
    std::vector<double> input;                // 3 * N * 3 values
    std::vector<std::optional<int>> slot_job; // 3 * N slots -> job id
};

DqnEncoding dqn_encode(const std::vector<const Task*>& jobs, double now, int n_per_type,
                       double duration_scale, double distance_scale);

struct DqnAgentConfig {
    int n_per_type = 4;
    std::vector<int> hidden = {64, 64};
    double duration_scale = 3600.0; // seconds mapped to 1.0
    double distance_scale = 1.0;    // set to the map diagonal by the factory
    double feature_clamp = 10.0;
    bool training = false;
    DqnHyper hyper;
};

class DqnAgent : public DecisionAgent {
public:
    DqnAgent(DqnAgentConfig cfg, std::uint64_t seed);
    DqnAgent(DqnAgentConfig cfg, Mlp net, std::uint64_t seed);

    AgentDecision select_task(const std::vector<const Task*>& jobs, double now,
                              const EvalResult& last_eval) override;
    void episode_finished(const EvalResult& final_eval) override;
    std::string name() const override { return training_ ? "dqn-train" : "dqn"; }

    const Mlp& network() const { return net_; }
    const Mlp& target_network() const { return target_; }
    const ReplayBuffer& replay() const { return buffer_; }
    long selection_steps() const { return step_count_; }
    double last_loss() const { return last_loss_; }

private:
    void learn();

    DqnAgentConfig cfg_;
    Mlp net_;
    Mlp target_;
    ReplayBuffer buffer_;
    RandomStream explore_;
    RandomStream sampler_;
    bool training_ = false;
    long step_count_ = 0;
    long learn_count_ = 0;
    double last_loss_ = 0.0;
    std::vector<double> prev_input_;
    int prev_slot_ = -1;
    bool has_prev_ = false;
};

/// Time-horizon slot summary that a task-request predictor plugin consumes:
/// per slot, the number of jobs requested in it, the number scheduled to
/// execute in it (per the request table), and the sum of their priorities.
/// The predictor network itself is not part of this artifact; this is its
/// input-side contract.
struct PredictorSlot {
    int task_count = 0;
    int executable_count = 0;
    int priority_sum = 0;
};
std::vector<PredictorSlot> predictor_slots(const std::vector<const Task*>& jobs, double now,
                                           double horizon, int slot_count);

} // namespace tabsa
