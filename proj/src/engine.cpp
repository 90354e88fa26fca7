#include "tabsa/engine.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

namespace tabsa {

namespace {

class DurationNoisePlugin : public ScenarioPlugin {
public:
    DurationNoisePlugin(double noise_std, std::uint64_t seed)
        : std_(noise_std), stream_(split(seed, "plugin/duration-noise")) {
        if (noise_std < 0) throw std::invalid_argument("duration noise std must be >= 0");
    }

    void update_job(Task& task, double) override {
        if (std_ == 0.0) return;
        double factor = std::max(0.0, 1.0 + std_ * stream_.gaussian());
        task.estimated_duration *= factor;
    }

    std::string name() const override { return "duration-noise"; }

private:
    double std_;
    RandomStream stream_;
};

} // namespace

std::unique_ptr<ScenarioPlugin> duration_noise_plugin(double noise_std, std::uint64_t seed) {
    return std::make_unique<DurationNoisePlugin>(noise_std, seed);
}

const char* outcome_name(Outcome o) {
    switch (o) {
    case Outcome::AllCompleted: return "all_completed";
    case Outcome::JobDied: return "job_died";
    case Outcome::Terminated: return "terminated";
    case Outcome::TimedOut: return "timed_out";
    case Outcome::RunFailed: return "run_failed";
    }
    return "unknown";
}

namespace {

nlohmann::json decision_to_json(const AgentDecision& d) {
    switch (d.kind) {
    case AgentDecision::Kind::None: return nullptr;
    case AgentDecision::Kind::Job: return d.job_id;
    case AgentDecision::Kind::Nonexistent: return "nonexistent";
    }
    return nullptr;
}

} // namespace

std::string trace_event_to_json(const TraceEvent& e) {
    nlohmann::json j;
    j["step"] = e.step;
    j["now"] = e.now;
    j["admitted"] = e.admitted;
    j["jobs"] = e.jobs;
    j["decision"] = decision_to_json(e.raw);
    j["executed"] = decision_to_json(e.effective);
    j["terminate"] = e.terminate;
    j["reward"] = e.reward;
    j["robot"] = {e.robot.x, e.robot.y};
    j["odometer"] = e.odometer;
    j["stalled"] = e.stalled;
    j["completed"] = e.completed;
    j["dead"] = e.dead;
    nlohmann::json peds = nlohmann::json::array();
    for (const PedestrianSnapshot& p : e.pedestrians) {
        peds.push_back({p.id, p.x, p.y, p.active});
    }
    j["pedestrians"] = std::move(peds);
    return j.dump();
}

std::uint64_t trace_hash(const std::vector<TraceEvent>& trace) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (const TraceEvent& e : trace) {
        std::string line = trace_event_to_json(e);
        for (unsigned char c : line) {
            h ^= c;
            h *= 0x100000001B3ull;
        }
        h ^= '\n';
        h *= 0x100000001B3ull;
    }
    return h;
}

void write_trace_jsonl(const std::vector<TraceEvent>& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open trace file: " + path);
    for (const TraceEvent& e : trace) out << trace_event_to_json(e) << '\n';
}

Scenario::Scenario(const ScenarioConfig& cfg)
    : cfg_(cfg),
      map_(generate_environment(cfg.env, cfg.seeds.map_seed)),
      view_(map_),
      static_view_(map_) {
    state_.tasks = generate_tasks(cfg.tasks, map_, cfg.seeds.task_seed);
    state_.pedestrians = spawn_pedestrians(map_, map_.spawn, cfg.crowd, cfg.seeds.pedestrian_seed);
    init_world();
}

Scenario::Scenario(const ScenarioConfig& cfg, EnvironmentMap map, std::vector<Task> tasks,
                   std::vector<PedestrianState> pedestrians)
    : cfg_(cfg), map_(std::move(map)), view_(map_), static_view_(map_) {
    state_.tasks = std::move(tasks);
    state_.pedestrians = std::move(pedestrians);
    init_world();
}

void Scenario::init_world() {
    state_.dt = cfg_.dt;
    state_.horizon = cfg_.horizon;
    state_.robot.velocity = cfg_.robot.velocity;
    if (cfg_.robot.start) {
        state_.robot.pose = *cfg_.robot.start;
    } else {
        // Nearest free cell to the map center.
        Vec2 center{map_.width_m / 2.0, map_.height_m / 2.0};
        Cell best{-1, -1};
        double best_d = kUnreachable;
        for (int y = 0; y < map_.height_cells; ++y) {
            for (int x = 0; x < map_.width_cells; ++x) {
                if (map_.at({x, y}) != CellType::Free) continue;
                double d = distance(map_.cell_center({x, y}), center);
                if (d < best_d) {
                    best = {x, y};
                    best_d = d;
                }
            }
        }
        if (best.x < 0) throw GenerationFailed("no free cell for the robot start pose");
        state_.robot.pose = map_.cell_center(best);
    }
    view_.embed_pedestrians(state_.pedestrians);

    for (const PluginSpec& spec : cfg_.plugins) {
        if (spec.name == "duration-noise") {
            plugins_.push_back(duration_noise_plugin(
                spec.noise_std, split(cfg_.seeds.task_seed, "plugin/duration-noise")));
        } else {
            throw std::invalid_argument("unknown scenario plugin: " + spec.name);
        }
    }
}

void Scenario::add_plugin(std::unique_ptr<ScenarioPlugin> plugin) {
    plugins_.push_back(std::move(plugin));
}

void Scenario::check_jobs_invariant(const char* phase) const {
    for (int id : state_.jobs) {
        if (id < 0 || id >= static_cast<int>(state_.tasks.size())) {
            throw std::logic_error(std::string("jobs invariant violated (unknown id) at ") + phase);
        }
        const Task& t = state_.task(id);
        if (!is_called(t, state_.now)) {
            throw std::logic_error(std::string("jobs invariant violated (not called) at ") + phase);
        }
    }
}

double Scenario::static_leg_length(const Vec2& a, const Vec2& b) {
    std::uint64_t key = (static_cast<std::uint64_t>(map_.index(map_.cell_of(a))) << 32) |
                        static_cast<std::uint64_t>(static_cast<std::uint32_t>(map_.index(map_.cell_of(b))));
    auto it = static_leg_cache_.find(key);
    if (it != static_leg_cache_.end()) return it->second;
    double len = path_length(static_view_, a, b);
    static_leg_cache_.emplace(key, len);
    return len;
}

void Scenario::update_job(Task& task, double live_distance) {
    // Built-in refresh: distance and the immediate travel leg come from the
    // current view (robot-to-target distances are computed in one batched
    // search per step); future legs between fixed task positions are priced
    // on the static map and cached.
    task.distance_from_robot = current_target(task) ? live_distance : 0.0;

    LegCostModel model;
    model.live = [&](const Vec2&, const Vec2&) { return live_distance; };
    model.internal = [this](const Vec2& a, const Vec2& b) { return static_leg_length(a, b); };
    task.estimated_duration = estimate_duration_model(task, state_.robot.pose,
                                                      state_.robot.velocity, model,
                                                      cfg_.min_task_duration);

    for (auto& plugin : plugins_) plugin->update_job(task, state_.now);

    // Plugins may touch deadline or max_delay; deathtime follows.
    recompute_deathtime(task);
    if (task.deathtime != task.deadline + task.max_delay) {
        throw std::logic_error("deathtime invariant violated after plugin pass");
    }
}

void Scenario::step(DecisionAgent& agent, EvalFunction& eval) {
    TraceEvent ev;
    ev.step = state_.step_count;
    ev.now = state_.now;

    // (1) admit newly called tasks
    for (const Task& t : state_.tasks) {
        if (is_called(t, state_.now) && !is_completed(t) && !state_.in_jobs(t.id)) {
            state_.jobs.push_back(t.id);
            ev.admitted.push_back(t.id);
        }
    }
    check_jobs_invariant("admission");

    // (2) update every job: built-ins, then plugins, then Eq.1 recompute.
    // Distances from the robot to every job target come from one search.
    std::vector<Cell> targets;
    targets.reserve(state_.jobs.size());
    for (int id : state_.jobs) {
        auto target = current_target(state_.task(id));
        targets.push_back(target ? map_.cell_of(*target) : Cell{-1, -1});
    }
    std::vector<double> live = distances_to_targets(view_, state_.robot.pose, targets);
    for (std::size_t k = 0; k < state_.jobs.size(); ++k) {
        update_job(state_.task(state_.jobs[k]), live[k]);
    }
    check_jobs_invariant("update");

    state_.dead_jobs.clear();
    for (int id : state_.jobs) {
        if (!is_alive(state_.task(id), state_.now)) state_.dead_jobs.push_back(id);
    }

    // (3) agent decision plus the non-preemption override: a started,
    // alive, non-preemptive task keeps the robot regardless of the agent.
    std::vector<const Task*> job_ptrs;
    job_ptrs.reserve(state_.jobs.size());
    for (int id : state_.jobs) job_ptrs.push_back(&state_.task(id));
    AgentDecision raw = agent.select_task(job_ptrs, state_.now, last_eval_);
    if (raw.kind == AgentDecision::Kind::Job && !state_.in_jobs(raw.job_id)) {
        raw.kind = AgentDecision::Kind::Nonexistent; // passed to eval, not an engine error
    }

    AgentDecision effective = raw;
    if (state_.robot.active_task && state_.in_jobs(*state_.robot.active_task)) {
        const Task& active = state_.task(*state_.robot.active_task);
        if (!active.preemptive && active.started() && !is_completed(active) &&
            is_alive(active, state_.now)) {
            effective = AgentDecision::job(active.id);
        }
    }
    state_.effective_decision = effective;

    // (4) evaluation of the decision, before execution
    last_eval_ = eval.calculate_results(state_.now, raw, state_);

    // (5) robot execution, skipped once the eval terminated the scenario
    std::vector<CompletionEvent> completions;
    bool stalled = false;
    if (!last_eval_.terminate) {
        if (effective.kind == AgentDecision::Kind::Job) {
            Task& t = state_.task(effective.job_id);
            WorkStatus ws = work_for(t, state_.robot, view_, state_.dt);
            stalled = ws.stalled;
            state_.robot.active_task = t.id;
            if (ws.completed_now) {
                completions.push_back({t.id, t.type, state_.now});
            }
        } else {
            state_.robot.active_task.reset();
        }
    }

    // (6) pedestrians move on the static map, then get re-embedded
    for (PedestrianState& p : state_.pedestrians) {
        step_pedestrian(p, static_view_, map_.spawn, cfg_.crowd, state_.dt);
    }
    view_.embed_pedestrians(state_.pedestrians);

    // (7) drop completed jobs
    std::erase_if(state_.jobs, [&](int id) { return is_completed(state_.task(id)); });
    check_jobs_invariant("removal");

    // (8) advance the clock
    ev.jobs = state_.jobs;
    ev.raw = raw;
    ev.effective = effective;
    ev.terminate = last_eval_.terminate;
    ev.reward = last_eval_.reward;
    ev.robot = state_.robot.pose;
    ev.odometer = state_.robot.odometer;
    ev.stalled = stalled;
    for (const CompletionEvent& c : completions) ev.completed.push_back(c.task_id);
    ev.dead = state_.dead_jobs;
    ev.pedestrians.reserve(state_.pedestrians.size());
    for (const PedestrianState& p : state_.pedestrians) {
        ev.pedestrians.push_back({p.id, p.position.x, p.position.y, p.active});
    }
    trace_.push_back(std::move(ev));

    state_.completions_last_step = std::move(completions);
    state_.last_raw_decision = raw;
    state_.step_count += 1;
    state_.now = static_cast<double>(state_.step_count) * state_.dt;
}

ScenarioOutcome Scenario::run(DecisionAgent& agent, EvalFunction& eval) {
    while (state_.now < state_.horizon && !last_eval_.terminate) {
        step(agent, eval);
    }
    agent.episode_finished(last_eval_);

    ScenarioOutcome out;
    if (state_.all_tasks_completed()) {
        out.outcome = Outcome::AllCompleted;
    } else if (!state_.dead_jobs.empty()) {
        out.outcome = Outcome::JobDied;
    } else if (last_eval_.terminate) {
        out.outcome = Outcome::Terminated;
    } else {
        out.outcome = Outcome::TimedOut;
    }
    out.end_time = state_.now;
    out.steps = state_.step_count;
    out.final_eval = last_eval_;
    for (const TraceEvent& e : trace_) out.total_reward += e.reward;
    out.trace_hash = tabsa::trace_hash(trace_);
    out.trace = trace_;
    return out;
}

ScenarioOutcome run_scenario(const ScenarioConfig& cfg, DecisionAgent& agent,
                             EvalFunction& eval, std::vector<TraceEvent>* trace_out) {
    Scenario scenario(cfg);
    ScenarioOutcome out = scenario.run(agent, eval);
    if (trace_out) *trace_out = out.trace;
    return out;
}

} // namespace tabsa
