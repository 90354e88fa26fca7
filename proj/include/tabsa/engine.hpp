#pragma once

#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "tabsa/agents.hpp"
#include "tabsa/crowd.hpp"
#include "tabsa/eval.hpp"
#include "tabsa/state.hpp"
#include "tabsa/tasks.hpp"
#include "tabsa/worldgen.hpp"

namespace tabsa {

/// Per-job hook run inside the engine's update pass. Built-in refreshes
/// (duration estimate, distance, planned paths) run first, then plugins in
/// configured order; deathtime is recomputed afterwards so Eq. deadline +
/// max_delay always holds when the agents see the job.
class ScenarioPlugin {
public:
    virtual ~ScenarioPlugin() = default;
    virtual void update_job(Task& task, double now) = 0;
    virtual std::string name() const = 0;
};

/// Multiplicative noise on estimated_duration: factor 1 + std * N(0,1),
/// clamped at zero. std 0 is the identity plugin.
std::unique_ptr<ScenarioPlugin> duration_noise_plugin(double noise_std, std::uint64_t seed);

struct PluginSpec {
    std::string name;       // "duration-noise"
    double noise_std = 0.1;
};

struct RobotParams {
    double velocity = 0.25; // m/s
    std::optional<Vec2> start;
};

struct ScenarioConfig {
    SeedSet seeds;
    EnvParams env;
    TaskGenParams tasks;
    CrowdParams crowd;
    RobotParams robot;
    double dt = 5.0;
    double horizon = 14400.0;
    double min_task_duration = 0.0;
    std::vector<PluginSpec> plugins;
};

enum class Outcome { AllCompleted, JobDied, Terminated, TimedOut, RunFailed };
const char* outcome_name(Outcome o);

struct PedestrianSnapshot {
    int id = -1;
    double x = 0.0;
    double y = 0.0;
    bool active = true;
};

struct TraceEvent {
    long step = 0;
    double now = 0.0;
    std::vector<int> admitted;
    std::vector<int> jobs;
    AgentDecision raw;
    AgentDecision effective;
    bool terminate = false;
    double reward = 0.0;
    Vec2 robot;
    double odometer = 0.0;
    bool stalled = false;
    std::vector<int> completed;
    std::vector<int> dead;
    std::vector<PedestrianSnapshot> pedestrians;
};

std::string trace_event_to_json(const TraceEvent& e);
std::uint64_t trace_hash(const std::vector<TraceEvent>& trace);
void write_trace_jsonl(const std::vector<TraceEvent>& trace, const std::string& path);

struct ScenarioOutcome {
    Outcome outcome = Outcome::RunFailed;
    double end_time = 0.0;
    long steps = 0;
    double total_reward = 0.0;
    EvalResult final_eval;
    std::uint64_t trace_hash = 0;
    std::vector<TraceEvent> trace;
};

/// One seeded simulation episode: generated map, tasks and pedestrians, the
/// robot, and the fixed-order step loop. Strictly single-threaded; run many
/// scenarios in parallel by giving each its own instance.
class Scenario {
public:
    explicit Scenario(const ScenarioConfig& cfg);
    /// Injection constructor for tests: supplies prebuilt world content.
    Scenario(const ScenarioConfig& cfg, EnvironmentMap map, std::vector<Task> tasks,
             std::vector<PedestrianState> pedestrians);

    void add_plugin(std::unique_ptr<ScenarioPlugin> plugin);

    ScenarioState& state() { return state_; }
    const ScenarioState& state() const { return state_; }
    const EnvironmentMap& map() const { return map_; }
    const OccupancyView& view() const { return view_; }
    const EvalResult& last_eval() const { return last_eval_; }
    const std::vector<TraceEvent>& trace() const { return trace_; }

    /// One step in fixed phase order: admit called tasks, update jobs,
    /// agent decision, evaluation, robot execution (skipped once terminated),
    /// pedestrian step and re-embedding, removal of completed jobs, clock
    /// advance.
    void step(DecisionAgent& agent, EvalFunction& eval);

    /// Step until the eval terminates or the horizon runs out; classify the
    /// outcome and notify the agent that the episode ended.
    ScenarioOutcome run(DecisionAgent& agent, EvalFunction& eval);

private:
    void init_world();
    void update_job(Task& task, double live_distance);
    double static_leg_length(const Vec2& a, const Vec2& b);
    void check_jobs_invariant(const char* phase) const;

    ScenarioConfig cfg_;
    EnvironmentMap map_;
    OccupancyView view_;        // pedestrians embedded, used by robot planning
    OccupancyView static_view_; // static map only, used by pedestrians
    ScenarioState state_;
    EvalResult last_eval_;
    std::vector<std::unique_ptr<ScenarioPlugin>> plugins_;
    std::vector<TraceEvent> trace_;
    // Static-map lengths of task-internal legs, keyed by (from, to) cell.
    std::unordered_map<std::uint64_t, double> static_leg_cache_;
};

/// Build a scenario from config and run it to completion.
ScenarioOutcome run_scenario(const ScenarioConfig& cfg, DecisionAgent& agent,
                             EvalFunction& eval, std::vector<TraceEvent>* trace_out = nullptr);

} // namespace tabsa
