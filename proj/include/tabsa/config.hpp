#pragma once

#include <memory>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "tabsa/engine.hpp"

namespace tabsa {

struct AgentSpec {
    std::string name = "simple-shortest";
    double hesitance = 0.5;       // simple agents
    double ratio = 0.5;           // distance agent
    int n_per_type = 4;           // dqn
    std::vector<int> hidden = {64, 64};
    std::optional<std::string> net_file;
    bool training = false;
    DqnHyper hyper;
};

struct EvalSpec {
    std::string name = "statistic"; // or "dqn"
    RewardParams reward;
    StatisticEvalParams stat;
};

struct RunConfig {
    ScenarioConfig scenario;
    AgentSpec agent;
    EvalSpec eval;
};

/// Parse a run config; absent fields keep their defaults.
RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::string& path);
nlohmann::json run_config_to_json(const RunConfig& cfg);

AgentSpec agent_spec_from_json(const nlohmann::json& j);
nlohmann::json agent_spec_to_json(const AgentSpec& spec);

std::unique_ptr<DecisionAgent> make_agent(const AgentSpec& spec, std::uint64_t agent_seed,
                                          double map_diagonal_m);
std::unique_ptr<EvalFunction> make_eval(const EvalSpec& spec);

} // namespace tabsa
