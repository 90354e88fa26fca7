#pragma once

#include <vector>

#include "tabsa/config.hpp"
#include "tabsa/engine.hpp"

namespace tabsa {

struct TrainResult {
    Mlp net;
    std::vector<double> episode_rewards;
    std::vector<Outcome> episode_outcomes;
};

/// Train the DQN agent by rehearsing scenarios: one fixed environment, a
/// fresh task and pedestrian seed per episode, rewards from the DQN eval.
/// Deterministic in (config, episodes).
TrainResult train_dqn(const RunConfig& base, int episodes);

std::string learning_curve_csv(const TrainResult& result);

} // namespace tabsa
