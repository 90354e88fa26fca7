#pragma once

#include <string>
#include <vector>

#include "tabsa/config.hpp"
#include "tabsa/engine.hpp"

namespace tabsa {

enum class SeedPolicy { FreshPerRun, SharedAcrossAgents };

struct BenchmarkPlan {
    std::vector<AgentSpec> agents;
    RunConfig scenario_template; // seeds are derived per run from base_seed
    EvalSpec eval;
    SeedPolicy seed_policy = SeedPolicy::FreshPerRun;
    int runs_per_agent = 30;
    std::uint64_t base_seed = 1;

    void validate() const;
};

BenchmarkPlan plan_from_json(const nlohmann::json& j);
BenchmarkPlan load_plan(const std::string& path);

struct RunSummary {
    std::string agent;
    int agent_index = 0;
    int run_index = 0;
    SeedSet seeds;
    Outcome outcome = Outcome::RunFailed;
    double end_time = 0.0;
    long steps = 0;
    StatRecord stats;
    double wall_ms = 0.0;
    std::string error;
};

/// Derive the seed set for (agent_index, run_index) under the plan's policy.
SeedSet plan_seeds(const BenchmarkPlan& plan, int agent_index, int run_index);

/// Execute every (agent, run) pair, `workers` at a time. Each run is fully
/// isolated; failures are recorded in the summary and the batch continues.
/// Results are sorted by (agent_index, run_index) regardless of scheduling.
std::vector<RunSummary> run_batch(const BenchmarkPlan& plan, int workers = 1);

std::string summaries_to_csv(const std::vector<RunSummary>& runs);
std::string summaries_to_json(const std::vector<RunSummary>& runs);
std::vector<RunSummary> summaries_from_json(const std::string& text);

/// Aggregate tables: termination-cause histogram, per-type completion
/// counts, and per-type |completion - deadline| means, one row per agent.
std::string aggregate_report_json(const std::vector<RunSummary>& runs);
std::string aggregate_report_csv(const std::vector<RunSummary>& runs);
std::string aggregate_report_svg(const std::vector<RunSummary>& runs);

/// Timeline of the executed task: time on the horizontal axis, the active
/// task on the vertical axis at its per-type generation index, colored by
/// type. Identical traces produce byte-identical SVG.
std::string render_course(const std::vector<TraceEvent>& trace, const std::vector<Task>& tasks);

/// Pedestrian positions per step as CSV (t, id, x, y, active).
std::string pedestrian_trace_csv(const std::vector<TraceEvent>& trace);

} // namespace tabsa
