#include "tabsa/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

namespace tabsa {

void BenchmarkPlan::validate() const {
    if (agents.empty()) throw std::invalid_argument("benchmark plan needs at least one agent");
    if (runs_per_agent < 1) throw std::invalid_argument("runs_per_agent must be >= 1");
}

BenchmarkPlan plan_from_json(const nlohmann::json& j) {
    BenchmarkPlan plan;
    if (j.contains("scenario")) plan.scenario_template = run_config_from_json(j.at("scenario"));
    if (j.contains("agents")) {
        for (const auto& a : j.at("agents")) plan.agents.push_back(agent_spec_from_json(a));
    }
    if (j.contains("eval")) {
        nlohmann::json wrapper;
        wrapper["eval"] = j.at("eval");
        plan.eval = run_config_from_json(wrapper).eval;
    }
    if (j.contains("seed_policy")) {
        std::string p = j.at("seed_policy").get<std::string>();
        if (p == "fresh") {
            plan.seed_policy = SeedPolicy::FreshPerRun;
        } else if (p == "shared") {
            plan.seed_policy = SeedPolicy::SharedAcrossAgents;
        } else {
            throw std::invalid_argument("seed_policy must be 'fresh' or 'shared'");
        }
    }
    if (j.contains("runs")) plan.runs_per_agent = j.at("runs").get<int>();
    if (j.contains("base_seed")) plan.base_seed = j.at("base_seed").get<std::uint64_t>();
    plan.validate();
    return plan;
}

BenchmarkPlan load_plan(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open plan file: " + path);
    nlohmann::json j;
    in >> j;
    return plan_from_json(j);
}

SeedSet plan_seeds(const BenchmarkPlan& plan, int agent_index, int run_index) {
    std::uint64_t run_seed =
        plan.seed_policy == SeedPolicy::SharedAcrossAgents
            ? split(plan.base_seed, "run", static_cast<std::uint64_t>(run_index))
            : split(split(plan.base_seed, "agent", static_cast<std::uint64_t>(agent_index)),
                    "run", static_cast<std::uint64_t>(run_index));
    SeedSet seeds;
    seeds.map_seed = split(run_seed, "map");
    seeds.task_seed = split(run_seed, "tasks");
    seeds.pedestrian_seed = split(run_seed, "pedestrians");
    seeds.agent_seed = plan.seed_policy == SeedPolicy::SharedAcrossAgents
                           ? split(run_seed, "agent")
                           : split(run_seed, "agent-draws");
    return seeds;
}

std::vector<RunSummary> run_batch(const BenchmarkPlan& plan, int workers) {
    plan.validate();
    const int total = static_cast<int>(plan.agents.size()) * plan.runs_per_agent;
    std::vector<RunSummary> out(static_cast<std::size_t>(total));

    std::atomic<int> next{0};
    auto worker = [&]() {
        while (true) {
            int k = next.fetch_add(1);
            if (k >= total) return;
            int agent_index = k / plan.runs_per_agent;
            int run_index = k % plan.runs_per_agent;

            RunSummary& summary = out[static_cast<std::size_t>(k)];
            summary.agent_index = agent_index;
            summary.run_index = run_index;
            summary.agent = plan.agents[static_cast<std::size_t>(agent_index)].name;
            summary.seeds = plan_seeds(plan, agent_index, run_index);

            auto t0 = std::chrono::steady_clock::now();
            try {
                ScenarioConfig cfg = plan.scenario_template.scenario;
                cfg.seeds = summary.seeds;
                Scenario scenario(cfg);
                auto agent = make_agent(plan.agents[static_cast<std::size_t>(agent_index)],
                                        summary.seeds.agent_seed, scenario.map().diagonal_m());
                auto eval = make_eval(plan.eval);
                ScenarioOutcome result = scenario.run(*agent, *eval);
                summary.outcome = result.outcome;
                summary.end_time = result.end_time;
                summary.steps = result.steps;
                if (result.final_eval.stats) summary.stats = *result.final_eval.stats;
            } catch (const std::exception& e) {
                summary.outcome = Outcome::RunFailed;
                summary.error = e.what();
            }
            summary.wall_ms = std::chrono::duration<double, std::milli>(
                                  std::chrono::steady_clock::now() - t0)
                                  .count();
        }
    };

    workers = std::max(1, workers);
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }
    return out;
}

namespace {

double mean_abs_deadline_delta(const StatRecord& s) {
    if (s.completions.empty()) return std::nan("");
    double sum = 0.0;
    for (const CompletionDelta& d : s.completions) sum += std::abs(d.to_deadline);
    return sum / static_cast<double>(s.completions.size());
}

} // namespace

std::string summaries_to_csv(const std::vector<RunSummary>& runs) {
    std::ostringstream out;
    out << "agent,agent_index,run_index,map_seed,task_seed,pedestrian_seed,agent_seed,"
           "outcome,end_time,steps,full_travel_distance";
    for (int i = 0; i < kTaskTypeCount; ++i) {
        out << ",completed_" << task_type_name(static_cast<TaskType>(i));
    }
    for (int i = 0; i < kTaskTypeCount; ++i) {
        out << ",interrupted_" << task_type_name(static_cast<TaskType>(i));
    }
    out << ",completions,mean_abs_to_deadline,abandonments,last_x,last_y,wall_ms,error\n";
    for (const RunSummary& r : runs) {
        out << r.agent << ',' << r.agent_index << ',' << r.run_index << ',' << r.seeds.map_seed
            << ',' << r.seeds.task_seed << ',' << r.seeds.pedestrian_seed << ','
            << r.seeds.agent_seed << ',' << outcome_name(r.outcome) << ',' << r.end_time << ','
            << r.steps << ',' << r.stats.full_travel_distance;
        for (int i = 0; i < kTaskTypeCount; ++i) {
            out << ',' << r.stats.num_completed[static_cast<std::size_t>(i)];
        }
        for (int i = 0; i < kTaskTypeCount; ++i) {
            out << ',' << r.stats.num_interrupted[static_cast<std::size_t>(i)];
        }
        double mad = mean_abs_deadline_delta(r.stats);
        out << ',' << r.stats.completions.size() << ',';
        if (std::isnan(mad)) {
            out << "";
        } else {
            out << mad;
        }
        out << ',' << r.stats.num_human_abandonment << ',' << r.stats.last_robot_pos.x << ','
            << r.stats.last_robot_pos.y << ',' << r.wall_ms << ',' << r.error << '\n';
    }
    return out.str();
}

std::string summaries_to_json(const std::vector<RunSummary>& runs) {
    nlohmann::json arr = nlohmann::json::array();
    for (const RunSummary& r : runs) {
        nlohmann::json j;
        j["agent"] = r.agent;
        j["agent_index"] = r.agent_index;
        j["run_index"] = r.run_index;
        j["seeds"] = {{"map", r.seeds.map_seed},
                      {"tasks", r.seeds.task_seed},
                      {"pedestrians", r.seeds.pedestrian_seed},
                      {"agent", r.seeds.agent_seed}};
        j["outcome"] = outcome_name(r.outcome);
        j["end_time"] = r.end_time;
        j["steps"] = r.steps;
        j["stats"] = nlohmann::json::parse(stat_record_to_json(r.stats));
        j["wall_ms"] = r.wall_ms;
        if (!r.error.empty()) j["error"] = r.error;
        arr.push_back(std::move(j));
    }
    return arr.dump(2);
}

std::vector<RunSummary> summaries_from_json(const std::string& text) {
    nlohmann::json arr = nlohmann::json::parse(text);
    std::vector<RunSummary> out;
    std::map<std::string, TaskType> type_by_name;
    for (int i = 0; i < kTaskTypeCount; ++i) {
        type_by_name[task_type_name(static_cast<TaskType>(i))] = static_cast<TaskType>(i);
    }
    std::map<std::string, Outcome> outcome_by_name = {
        {"all_completed", Outcome::AllCompleted}, {"job_died", Outcome::JobDied},
        {"terminated", Outcome::Terminated},      {"timed_out", Outcome::TimedOut},
        {"run_failed", Outcome::RunFailed}};
    for (const auto& j : arr) {
        RunSummary r;
        r.agent = j.at("agent").get<std::string>();
        r.agent_index = j.at("agent_index").get<int>();
        r.run_index = j.at("run_index").get<int>();
        r.seeds.map_seed = j.at("seeds").at("map").get<std::uint64_t>();
        r.seeds.task_seed = j.at("seeds").at("tasks").get<std::uint64_t>();
        r.seeds.pedestrian_seed = j.at("seeds").at("pedestrians").get<std::uint64_t>();
        r.seeds.agent_seed = j.at("seeds").at("agent").get<std::uint64_t>();
        r.outcome = outcome_by_name.at(j.at("outcome").get<std::string>());
        r.end_time = j.at("end_time").get<double>();
        r.steps = j.at("steps").get<long>();
        const auto& s = j.at("stats");
        r.stats.full_travel_distance = s.at("full_travel_distance").get<double>();
        for (int i = 0; i < kTaskTypeCount; ++i) {
            const char* name = task_type_name(static_cast<TaskType>(i));
            r.stats.num_completed[static_cast<std::size_t>(i)] =
                s.at("num_completed").at(name).get<int>();
            r.stats.num_interrupted[static_cast<std::size_t>(i)] =
                s.at("num_interrupted").at(name).get<int>();
        }
        for (const auto& c : s.at("completions")) {
            CompletionDelta d;
            d.task_id = c.at("task").get<int>();
            d.type = type_by_name.at(c.at("type").get<std::string>());
            d.to_deadline = c.at("to_deadline").get<double>();
            if (!c.at("to_deathtime").is_null()) d.to_deathtime = c.at("to_deathtime").get<double>();
            r.stats.completions.push_back(d);
        }
        for (const auto& [id, n] : s.at("task_interruptions").items()) {
            r.stats.task_interruptions[std::stoi(id)] = n.get<int>();
        }
        r.stats.num_human_abandonment = s.at("num_human_abandonment").get<int>();
        r.stats.abandonment_distance = s.at("abandonment_distance").get<double>();
        r.stats.last_robot_pos = {s.at("last_robot_pos")[0].get<double>(),
                                  s.at("last_robot_pos")[1].get<double>()};
        r.wall_ms = j.value("wall_ms", 0.0);
        if (j.contains("error")) r.error = j.at("error").get<std::string>();
        out.push_back(std::move(r));
    }
    return out;
}

namespace {

struct AgentAggregate {
    std::string agent;
    std::map<std::string, int> outcomes;
    std::array<int, kTaskTypeCount> completed{};
    std::array<double, kTaskTypeCount> deadline_delta_sum{};
    std::array<int, kTaskTypeCount> deadline_delta_count{};
    int runs = 0;
};

std::vector<AgentAggregate> aggregate(const std::vector<RunSummary>& runs) {
    std::map<int, AgentAggregate> by_index;
    for (const RunSummary& r : runs) {
        AgentAggregate& a = by_index[r.agent_index];
        a.agent = r.agent + "#" + std::to_string(r.agent_index);
        a.outcomes[outcome_name(r.outcome)]++;
        a.runs++;
        for (int i = 0; i < kTaskTypeCount; ++i) {
            a.completed[static_cast<std::size_t>(i)] +=
                r.stats.num_completed[static_cast<std::size_t>(i)];
        }
        for (const CompletionDelta& d : r.stats.completions) {
            a.deadline_delta_sum[static_cast<std::size_t>(d.type)] += std::abs(d.to_deadline);
            a.deadline_delta_count[static_cast<std::size_t>(d.type)]++;
        }
    }
    std::vector<AgentAggregate> out;
    for (auto& [idx, a] : by_index) out.push_back(std::move(a));
    return out;
}

} // namespace

std::string aggregate_report_json(const std::vector<RunSummary>& runs) {
    nlohmann::json out = nlohmann::json::array();
    for (const AgentAggregate& a : aggregate(runs)) {
        nlohmann::json j;
        j["agent"] = a.agent;
        j["runs"] = a.runs;
        j["outcomes"] = a.outcomes;
        for (int i = 0; i < kTaskTypeCount; ++i) {
            const char* name = task_type_name(static_cast<TaskType>(i));
            j["completed"][name] = a.completed[static_cast<std::size_t>(i)];
            int n = a.deadline_delta_count[static_cast<std::size_t>(i)];
            if (n > 0) {
                j["mean_abs_to_deadline"][name] =
                    a.deadline_delta_sum[static_cast<std::size_t>(i)] / n;
            }
        }
        out.push_back(std::move(j));
    }
    return out.dump(2);
}

std::string aggregate_report_csv(const std::vector<RunSummary>& runs) {
    std::ostringstream out;
    out << "agent,runs,all_completed,job_died,terminated,timed_out,run_failed";
    for (int i = 0; i < kTaskTypeCount; ++i) {
        out << ",completed_" << task_type_name(static_cast<TaskType>(i));
    }
    out << ",mean_abs_to_deadline\n";
    for (const AgentAggregate& a : aggregate(runs)) {
        auto count = [&](const char* k) {
            auto it = a.outcomes.find(k);
            return it == a.outcomes.end() ? 0 : it->second;
        };
        out << a.agent << ',' << a.runs << ',' << count("all_completed") << ','
            << count("job_died") << ',' << count("terminated") << ',' << count("timed_out") << ','
            << count("run_failed");
        double sum = 0.0;
        int n = 0;
        for (int i = 0; i < kTaskTypeCount; ++i) {
            out << ',' << a.completed[static_cast<std::size_t>(i)];
            sum += a.deadline_delta_sum[static_cast<std::size_t>(i)];
            n += a.deadline_delta_count[static_cast<std::size_t>(i)];
        }
        out << ',';
        if (n > 0) out << sum / n;
        out << '\n';
    }
    return out.str();
}

std::string aggregate_report_svg(const std::vector<RunSummary>& runs) {
    // Grouped bars: termination causes per agent.
    std::vector<AgentAggregate> agg = aggregate(runs);
    const char* causes[4] = {"all_completed", "job_died", "terminated", "timed_out"};
    const char* colors[4] = {"#2ca02c", "#d62728", "#ff7f0e", "#7f7f7f"};
    const double bar_w = 18.0;
    const double group_w = bar_w * 4 + 30.0;
    const double height = 260.0;
    const double base_y = 210.0;
    int max_count = 1;
    for (const AgentAggregate& a : agg) {
        for (const char* c : causes) {
            auto it = a.outcomes.find(c);
            if (it != a.outcomes.end()) max_count = std::max(max_count, it->second);
        }
    }
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\""
        << static_cast<int>(group_w * agg.size() + 40) << "\" height=\""
        << static_cast<int>(height) << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    char buf[256];
    for (std::size_t ai = 0; ai < agg.size(); ++ai) {
        double gx = 20.0 + group_w * static_cast<double>(ai);
        for (int c = 0; c < 4; ++c) {
            auto it = agg[ai].outcomes.find(causes[c]);
            int n = it == agg[ai].outcomes.end() ? 0 : it->second;
            double h = 180.0 * n / max_count;
            std::snprintf(buf, sizeof(buf),
                          "<rect x=\"%.1f\" y=\"%.1f\" width=\"%.1f\" height=\"%.1f\" "
                          "fill=\"%s\"/>\n",
                          gx + bar_w * c, base_y - h, bar_w - 2.0, h, colors[c]);
            out << buf;
        }
        std::snprintf(buf, sizeof(buf),
                      "<text x=\"%.1f\" y=\"%.1f\" font-size=\"10\">%s</text>\n", gx,
                      base_y + 14.0, agg[ai].agent.c_str());
        out << buf;
    }
    out << "<text x=\"20\" y=\"245\" font-size=\"10\">green=all_completed red=job_died "
           "orange=terminated gray=timed_out</text>\n";
    out << "</svg>\n";
    return out.str();
}

std::string render_course(const std::vector<TraceEvent>& trace, const std::vector<Task>& tasks) {
    // Per-type generation index (1-based), the vertical position of a task.
    std::map<int, std::pair<TaskType, int>> slot;
    std::array<int, kTaskTypeCount> counters{};
    for (const Task& t : tasks) {
        slot[t.id] = {t.type, ++counters[static_cast<std::size_t>(t.type)]};
    }
    auto color = [](TaskType t) {
        switch (t) {
        case TaskType::Fall: return "#d62728";
        case TaskType::Patrol: return "#1f77b4";
        case TaskType::PickAndPlace: return "#2ca02c";
        case TaskType::Pick: return "#9467bd";
        case TaskType::Place: return "#8c564b";
        }
        return "#000000";
    };

    // Contiguous executed-task segments.
    struct Segment {
        int task_id;
        double t0, t1;
    };
    std::vector<Segment> segments;
    for (const TraceEvent& e : trace) {
        if (e.effective.kind != AgentDecision::Kind::Job) continue;
        double t0 = e.now;
        double t1 = e.now + (trace.size() > 1 ? trace[1].now - trace[0].now : 1.0);
        if (!segments.empty() && segments.back().task_id == e.effective.job_id &&
            segments.back().t1 == t0) {
            segments.back().t1 = t1;
        } else {
            segments.push_back({e.effective.job_id, t0, t1});
        }
    }

    double t_max = trace.empty() ? 1.0 : trace.back().now + 1.0;
    int y_max = 1;
    for (const auto& [id, info] : slot) y_max = std::max(y_max, info.second);

    const double width = 800.0, height = 300.0;
    const double ml = 40.0, mb = 30.0, mt = 10.0, mr = 10.0;
    auto sx = [&](double t) { return ml + (width - ml - mr) * t / t_max; };
    auto sy = [&](int idx) {
        return height - mb - (height - mb - mt) * static_cast<double>(idx) / (y_max + 1);
    };

    std::ostringstream out;
    char buf[256];
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"300\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    std::snprintf(buf, sizeof(buf),
                  "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"black\"/>\n",
                  ml, height - mb, width - mr, height - mb);
    out << buf;
    std::snprintf(buf, sizeof(buf),
                  "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"black\"/>\n",
                  ml, mt, ml, height - mb);
    out << buf;
    for (const Segment& s : segments) {
        auto it = slot.find(s.task_id);
        if (it == slot.end()) continue;
        std::snprintf(buf, sizeof(buf),
                      "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"%s\" "
                      "stroke-width=\"4\"/>\n",
                      sx(s.t0), sy(it->second.second), sx(s.t1), sy(it->second.second),
                      color(it->second.first));
        out << buf;
    }
    out << "</svg>\n";
    return out.str();
}

std::string pedestrian_trace_csv(const std::vector<TraceEvent>& trace) {
    std::ostringstream out;
    out << "t,id,x,y,active\n";
    for (const TraceEvent& e : trace) {
        for (const PedestrianSnapshot& p : e.pedestrians) {
            out << e.now << ',' << p.id << ',' << p.x << ',' << p.y << ',' << (p.active ? 1 : 0)
                << '\n';
        }
    }
    return out.str();
}

} // namespace tabsa
