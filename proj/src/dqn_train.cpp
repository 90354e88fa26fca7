#include "tabsa/dqn_train.hpp"

#include <sstream>

namespace tabsa {

TrainResult train_dqn(const RunConfig& base, int episodes) {
    if (episodes < 1) throw std::invalid_argument("train_dqn: episodes must be >= 1");
    base.eval.reward.validate(); // reward sign audit before any training

    EnvironmentMap map = generate_environment(base.scenario.env, base.scenario.seeds.map_seed);

    AgentSpec agent_spec = base.agent;
    agent_spec.name = "dqn";
    agent_spec.training = true;
    auto agent = make_agent(agent_spec, base.scenario.seeds.agent_seed, map.diagonal_m());
    auto* dqn = dynamic_cast<DqnAgent*>(agent.get());

    TrainResult result;
    result.episode_rewards.reserve(static_cast<std::size_t>(episodes));
    for (int e = 0; e < episodes; ++e) {
        ScenarioConfig cfg = base.scenario;
        cfg.seeds.task_seed =
            split(base.scenario.seeds.task_seed, "episode", static_cast<std::uint64_t>(e));
        cfg.seeds.pedestrian_seed =
            split(base.scenario.seeds.pedestrian_seed, "episode", static_cast<std::uint64_t>(e));
        Scenario scenario(cfg);
        DqnEval eval(base.eval.reward);
        ScenarioOutcome outcome = scenario.run(*agent, eval);
        result.episode_rewards.push_back(outcome.total_reward);
        result.episode_outcomes.push_back(outcome.outcome);
    }
    result.net = dqn->network();
    return result;
}

std::string learning_curve_csv(const TrainResult& result) {
    std::ostringstream out;
    out << "episode,total_reward,outcome\n";
    for (std::size_t i = 0; i < result.episode_rewards.size(); ++i) {
        out << i << ',' << result.episode_rewards[i] << ','
            << outcome_name(result.episode_outcomes[i]) << '\n';
    }
    return out.str();
}

} // namespace tabsa
