#include "tabsa/config.hpp"

#include <fstream>

namespace tabsa {

namespace {

template <typename T>
void read(const nlohmann::json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

void read_seeds(const nlohmann::json& j, SeedSet& seeds) {
    read(j, "map", seeds.map_seed);
    read(j, "tasks", seeds.task_seed);
    read(j, "pedestrians", seeds.pedestrian_seed);
    read(j, "agent", seeds.agent_seed);
}

void read_env(const nlohmann::json& j, EnvParams& env) {
    read(j, "width_m", env.width_m);
    read(j, "height_m", env.height_m);
    read(j, "resolution", env.resolution);
    read(j, "min_room_m", env.min_room_m);
    read(j, "door_width_m", env.door_width_m);
    read(j, "max_depth", env.max_depth);
    read(j, "furniture_per_room", env.furniture_per_room);
    read(j, "furniture_retry_limit", env.furniture_retry_limit);
    read(j, "furniture_min_m", env.furniture_min_m);
    read(j, "furniture_max_m", env.furniture_max_m);
    read(j, "objects_per_furniture", env.objects_per_furniture);
    read(j, "door_clearance_m", env.door_clearance_m);
    if (j.contains("spawn_weights")) {
        const auto& w = j.at("spawn_weights");
        read(w, "room", env.spawn_weights.room);
        read(w, "door", env.spawn_weights.door);
        read(w, "entrance", env.spawn_weights.entrance);
    }
}

void read_tasks(const nlohmann::json& j, TaskGenParams& t) {
    read(j, "scenario_duration", t.scenario_duration);
    read(j, "fall_count", t.fall_count);
    read(j, "patrol_count", t.patrol_count);
    read(j, "pick_count", t.pick_count);
    read(j, "place_count", t.place_count);
    read(j, "pick_and_place_count", t.pick_and_place_count);
    read(j, "fall_dwell", t.fall_dwell);
    read(j, "pick_dwell", t.pick_dwell);
    read(j, "place_dwell", t.place_dwell);
    read(j, "fall_max_delay", t.fall_max_delay);
    read(j, "fall_priority", t.fall_priority);
    read(j, "patrol_priority_min", t.patrol_priority_min);
    read(j, "patrol_priority_max", t.patrol_priority_max);
    read(j, "deadline_slack_min", t.deadline_slack_min);
    read(j, "deadline_slack_max", t.deadline_slack_max);
    read(j, "nearest_furniture_k", t.nearest_furniture_k);
}

void read_crowd(const nlohmann::json& j, CrowdParams& c) {
    read(j, "count", c.count);
    read(j, "speed", c.speed);
    read(j, "radius", c.radius);
    read(j, "behavior_weights", c.behavior_weights);
    read(j, "goal_retry_limit", c.goal_retry_limit);
    read(j, "respawn_disappeared", c.respawn_disappeared);
}

void read_hyper(const nlohmann::json& j, DqnHyper& h) {
    read(j, "learning_rate", h.learning_rate);
    read(j, "gamma", h.gamma);
    read(j, "batch_size", h.batch_size);
    read(j, "target_sync_period", h.target_sync_period);
    read(j, "eps_start", h.eps_start);
    read(j, "eps_end", h.eps_end);
    read(j, "eps_decay_steps", h.eps_decay_steps);
    read(j, "replay_capacity", h.replay_capacity);
    read(j, "grad_clip_norm", h.grad_clip_norm);
}

} // namespace

AgentSpec agent_spec_from_json(const nlohmann::json& j) {
    AgentSpec spec;
    read(j, "name", spec.name);
    read(j, "hesitance", spec.hesitance);
    read(j, "ratio", spec.ratio);
    read(j, "n_per_type", spec.n_per_type);
    read(j, "hidden", spec.hidden);
    if (j.contains("net_file") && !j.at("net_file").is_null()) {
        spec.net_file = j.at("net_file").get<std::string>();
    }
    read(j, "training", spec.training);
    if (j.contains("hyper")) read_hyper(j.at("hyper"), spec.hyper);
    return spec;
}

nlohmann::json agent_spec_to_json(const AgentSpec& spec) {
    nlohmann::json j;
    j["name"] = spec.name;
    j["hesitance"] = spec.hesitance;
    j["ratio"] = spec.ratio;
    j["n_per_type"] = spec.n_per_type;
    j["hidden"] = spec.hidden;
    if (spec.net_file) j["net_file"] = *spec.net_file;
    j["training"] = spec.training;
    return j;
}

RunConfig run_config_from_json(const nlohmann::json& j) {
    RunConfig cfg;
    if (j.contains("seeds")) read_seeds(j.at("seeds"), cfg.scenario.seeds);
    if (j.contains("env")) read_env(j.at("env"), cfg.scenario.env);
    if (j.contains("tasks")) read_tasks(j.at("tasks"), cfg.scenario.tasks);
    if (j.contains("crowd")) read_crowd(j.at("crowd"), cfg.scenario.crowd);
    if (j.contains("robot")) {
        const auto& r = j.at("robot");
        read(r, "velocity", cfg.scenario.robot.velocity);
        if (r.contains("start") && !r.at("start").is_null()) {
            cfg.scenario.robot.start =
                Vec2{r.at("start")[0].get<double>(), r.at("start")[1].get<double>()};
        }
    }
    read(j, "dt", cfg.scenario.dt);
    read(j, "horizon", cfg.scenario.horizon);
    read(j, "min_task_duration", cfg.scenario.min_task_duration);
    if (j.contains("plugins")) {
        for (const auto& p : j.at("plugins")) {
            PluginSpec spec;
            spec.name = p.at("name").get<std::string>();
            read(p, "std", spec.noise_std);
            cfg.scenario.plugins.push_back(spec);
        }
    }
    if (j.contains("agent")) cfg.agent = agent_spec_from_json(j.at("agent"));
    if (j.contains("eval")) {
        const auto& e = j.at("eval");
        read(e, "name", cfg.eval.name);
        read(e, "reward_all_complete", cfg.eval.reward.reward_all_complete);
        read(e, "penalty_dead_job", cfg.eval.reward.penalty_dead_job);
        read(e, "reward_job_complete", cfg.eval.reward.reward_job_complete);
        read(e, "reward_real_job", cfg.eval.reward.reward_real_job);
        read(e, "penalty_nonexistent_job", cfg.eval.reward.penalty_nonexistent_job);
        read(e, "penalty_change_job", cfg.eval.reward.penalty_change_job);
        read(e, "abandonment_distance", cfg.eval.stat.abandonment_distance);
        read(e, "oscillation_window", cfg.eval.stat.oscillation_window);
        read(e, "oscillation_limit", cfg.eval.stat.oscillation_limit);
    }
    if (cfg.scenario.tasks.scenario_duration != cfg.scenario.horizon && !j.contains("tasks")) {
        cfg.scenario.tasks.scenario_duration = cfg.scenario.horizon;
    }
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file: " + path);
    nlohmann::json j;
    in >> j;
    return run_config_from_json(j);
}

nlohmann::json run_config_to_json(const RunConfig& cfg) {
    nlohmann::json j;
    j["seeds"] = {{"map", cfg.scenario.seeds.map_seed},
                  {"tasks", cfg.scenario.seeds.task_seed},
                  {"pedestrians", cfg.scenario.seeds.pedestrian_seed},
                  {"agent", cfg.scenario.seeds.agent_seed}};
    const EnvParams& e = cfg.scenario.env;
    j["env"] = {{"width_m", e.width_m},
                {"height_m", e.height_m},
                {"resolution", e.resolution},
                {"min_room_m", e.min_room_m},
                {"door_width_m", e.door_width_m},
                {"max_depth", e.max_depth},
                {"furniture_per_room", e.furniture_per_room},
                {"furniture_retry_limit", e.furniture_retry_limit},
                {"furniture_min_m", e.furniture_min_m},
                {"furniture_max_m", e.furniture_max_m},
                {"objects_per_furniture", e.objects_per_furniture},
                {"door_clearance_m", e.door_clearance_m},
                {"spawn_weights",
                 {{"room", e.spawn_weights.room},
                  {"door", e.spawn_weights.door},
                  {"entrance", e.spawn_weights.entrance}}}};
    const TaskGenParams& t = cfg.scenario.tasks;
    j["tasks"] = {{"scenario_duration", t.scenario_duration},
                  {"fall_count", t.fall_count},
                  {"patrol_count", t.patrol_count},
                  {"pick_count", t.pick_count},
                  {"place_count", t.place_count},
                  {"pick_and_place_count", t.pick_and_place_count},
                  {"fall_dwell", t.fall_dwell},
                  {"pick_dwell", t.pick_dwell},
                  {"place_dwell", t.place_dwell},
                  {"fall_max_delay", t.fall_max_delay},
                  {"fall_priority", t.fall_priority},
                  {"patrol_priority_min", t.patrol_priority_min},
                  {"patrol_priority_max", t.patrol_priority_max},
                  {"deadline_slack_min", t.deadline_slack_min},
                  {"deadline_slack_max", t.deadline_slack_max},
                  {"nearest_furniture_k", t.nearest_furniture_k}};
    const CrowdParams& c = cfg.scenario.crowd;
    j["crowd"] = {{"count", c.count},
                  {"speed", c.speed},
                  {"radius", c.radius},
                  {"behavior_weights", c.behavior_weights},
                  {"goal_retry_limit", c.goal_retry_limit},
                  {"respawn_disappeared", c.respawn_disappeared}};
    j["robot"] = {{"velocity", cfg.scenario.robot.velocity}};
    if (cfg.scenario.robot.start) {
        j["robot"]["start"] = {cfg.scenario.robot.start->x, cfg.scenario.robot.start->y};
    }
    j["dt"] = cfg.scenario.dt;
    j["horizon"] = cfg.scenario.horizon;
    j["min_task_duration"] = cfg.scenario.min_task_duration;
    j["plugins"] = nlohmann::json::array();
    for (const PluginSpec& p : cfg.scenario.plugins) {
        j["plugins"].push_back({{"name", p.name}, {"std", p.noise_std}});
    }
    j["agent"] = agent_spec_to_json(cfg.agent);
    j["eval"] = {{"name", cfg.eval.name}};
    return j;
}

std::unique_ptr<DecisionAgent> make_agent(const AgentSpec& spec, std::uint64_t agent_seed,
                                          double map_diagonal_m) {
    if (spec.name == "simple-longest") {
        return std::make_unique<SimpleAgent>(SimpleMode::Longest, spec.hesitance, agent_seed);
    }
    if (spec.name == "simple-shortest") {
        return std::make_unique<SimpleAgent>(SimpleMode::Shortest, spec.hesitance, agent_seed);
    }
    if (spec.name == "distance") {
        return std::make_unique<DistanceAgent>(spec.ratio);
    }
    if (spec.name == "scheduler") {
        return std::make_unique<SchedulerAgent>();
    }
    if (spec.name == "dqn") {
        DqnAgentConfig cfg;
        cfg.n_per_type = spec.n_per_type;
        cfg.hidden = spec.hidden;
        cfg.distance_scale = map_diagonal_m;
        cfg.training = spec.training;
        cfg.hyper = spec.hyper;
        if (spec.net_file) {
            std::ifstream in(*spec.net_file);
            if (!in) throw std::invalid_argument("cannot open network file: " + *spec.net_file);
            std::string text((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
            return std::make_unique<DqnAgent>(cfg, mlp_from_json(text), agent_seed);
        }
        return std::make_unique<DqnAgent>(cfg, agent_seed);
    }
    throw std::invalid_argument("unknown agent: " + spec.name);
}

std::unique_ptr<EvalFunction> make_eval(const EvalSpec& spec) {
    if (spec.name == "statistic") return std::make_unique<StatisticEval>(spec.stat);
    if (spec.name == "dqn") return std::make_unique<DqnEval>(spec.reward);
    throw std::invalid_argument("unknown eval function: " + spec.name);
}

} // namespace tabsa
