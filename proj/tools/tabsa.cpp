#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "tabsa/bench.hpp"
#include "tabsa/config.hpp"
#include "tabsa/dqn_train.hpp"
#include "tabsa/engine.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 1;
constexpr int kExitGenerationFailure = 2;
constexpr int kExitRunFailure = 3;

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open " + path);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

int cmd_gen_env(const std::string& config_path, const std::string& out_path,
                const std::string& svg_path) {
    tabsa::RunConfig cfg = tabsa::load_run_config(config_path);
    tabsa::EnvironmentMap map =
        tabsa::generate_environment(cfg.scenario.env, cfg.scenario.seeds.map_seed);
    write_file(out_path, tabsa::map_to_json(map));
    if (!svg_path.empty()) write_file(svg_path, tabsa::map_to_svg(map));
    std::cout << "map: " << map.width_cells << "x" << map.height_cells << " cells, "
              << map.rooms.size() << " rooms, " << map.furniture.size() << " furniture, "
              << map.objects.size() << " objects\n";
    return kExitOk;
}

int cmd_gen_tasks(const std::string& config_path, const std::string& out_path) {
    tabsa::RunConfig cfg = tabsa::load_run_config(config_path);
    tabsa::EnvironmentMap map =
        tabsa::generate_environment(cfg.scenario.env, cfg.scenario.seeds.map_seed);
    auto tasks = tabsa::generate_tasks(cfg.scenario.tasks, map, cfg.scenario.seeds.task_seed);
    write_file(out_path, tabsa::tasks_to_json(tasks));
    std::cout << tasks.size() << " tasks written to " << out_path << "\n";
    return kExitOk;
}

int cmd_run(const std::string& config_path, const std::string& out_dir) {
    tabsa::RunConfig cfg = tabsa::load_run_config(config_path);
    std::filesystem::create_directories(out_dir);

    tabsa::Scenario scenario(cfg.scenario);
    auto agent = tabsa::make_agent(cfg.agent, cfg.scenario.seeds.agent_seed,
                                   scenario.map().diagonal_m());
    auto eval = tabsa::make_eval(cfg.eval);

    // Keep a copy of the generated tasks for the course plot.
    std::vector<tabsa::Task> tasks = scenario.state().tasks;
    tabsa::ScenarioOutcome outcome = scenario.run(*agent, *eval);

    tabsa::write_trace_jsonl(outcome.trace, out_dir + "/trace.jsonl");
    write_file(out_dir + "/tasks.json", tabsa::tasks_to_json(tasks));
    write_file(out_dir + "/course.svg", tabsa::render_course(outcome.trace, tasks));
    write_file(out_dir + "/pedestrians.csv", tabsa::pedestrian_trace_csv(outcome.trace));

    nlohmann::json result;
    result["outcome"] = tabsa::outcome_name(outcome.outcome);
    result["end_time"] = outcome.end_time;
    result["steps"] = outcome.steps;
    result["total_reward"] = outcome.total_reward;
    result["trace_hash"] = outcome.trace_hash;
    result["seeds"] = {{"map", cfg.scenario.seeds.map_seed},
                       {"tasks", cfg.scenario.seeds.task_seed},
                       {"pedestrians", cfg.scenario.seeds.pedestrian_seed},
                       {"agent", cfg.scenario.seeds.agent_seed}};
    if (outcome.final_eval.stats) {
        result["stats"] = nlohmann::json::parse(tabsa::stat_record_to_json(*outcome.final_eval.stats));
    }
    write_file(out_dir + "/result.json", result.dump(2));
    std::cout << "outcome: " << tabsa::outcome_name(outcome.outcome) << " after "
              << outcome.steps << " steps (" << outcome.end_time << " s)\n";
    return kExitOk;
}

int cmd_batch(const std::string& plan_path, const std::string& out_dir, int jobs) {
    tabsa::BenchmarkPlan plan = tabsa::load_plan(plan_path);
    std::filesystem::create_directories(out_dir);
    std::vector<tabsa::RunSummary> runs = tabsa::run_batch(plan, jobs);
    write_file(out_dir + "/runs.json", tabsa::summaries_to_json(runs));
    write_file(out_dir + "/runs.csv", tabsa::summaries_to_csv(runs));
    write_file(out_dir + "/aggregate.json", tabsa::aggregate_report_json(runs));
    int failed = 0;
    for (const auto& r : runs) {
        if (r.outcome == tabsa::Outcome::RunFailed) ++failed;
    }
    std::cout << runs.size() << " runs written to " << out_dir;
    if (failed) std::cout << " (" << failed << " failed)";
    std::cout << "\n";
    return failed == static_cast<int>(runs.size()) && failed > 0 ? kExitRunFailure : kExitOk;
}

int cmd_train(const std::string& config_path, int episodes, const std::string& out_path,
              const std::string& curve_path) {
    tabsa::RunConfig cfg = tabsa::load_run_config(config_path);
    cfg.eval.name = "dqn";
    tabsa::TrainResult result = tabsa::train_dqn(cfg, episodes);
    write_file(out_path, tabsa::mlp_to_json(result.net));
    if (!curve_path.empty()) write_file(curve_path, tabsa::learning_curve_csv(result));
    double last = result.episode_rewards.empty() ? 0.0 : result.episode_rewards.back();
    std::cout << "trained " << episodes << " episodes, final episode reward " << last << "\n";
    return kExitOk;
}

int cmd_report(const std::string& in_dir, const std::string& format) {
    std::vector<tabsa::RunSummary> runs =
        tabsa::summaries_from_json(read_file(in_dir + "/runs.json"));
    if (format == "csv") {
        write_file(in_dir + "/aggregate.csv", tabsa::aggregate_report_csv(runs));
        std::cout << in_dir << "/aggregate.csv\n";
    } else if (format == "json") {
        write_file(in_dir + "/aggregate.json", tabsa::aggregate_report_json(runs));
        std::cout << in_dir << "/aggregate.json\n";
    } else if (format == "svg") {
        write_file(in_dir + "/termination.svg", tabsa::aggregate_report_svg(runs));
        std::cout << in_dir << "/termination.svg\n";
    } else {
        throw std::invalid_argument("unknown report format: " + format);
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"tabsa - task scheduling benchmark framework"};
    app.require_subcommand(1);

    std::string config_path, plan_path, out_path = "out", svg_path, curve_path, format = "csv";
    int jobs = 1, episodes = 200;

    auto* gen_env = app.add_subcommand("gen-env", "generate an environment map");
    gen_env->add_option("--config", config_path, "run config JSON")->required();
    gen_env->add_option("--out", out_path, "output map JSON")->required();
    gen_env->add_option("--svg", svg_path, "optional SVG rendering");

    auto* gen_tasks = app.add_subcommand("gen-tasks", "generate a task list");
    gen_tasks->add_option("--config", config_path, "run config JSON")->required();
    gen_tasks->add_option("--out", out_path, "output tasks JSON")->required();

    auto* run = app.add_subcommand("run", "run one scenario");
    run->add_option("--config", config_path, "run config JSON")->required();
    run->add_option("--out", out_path, "output directory")->required();

    auto* batch = app.add_subcommand("batch", "run a benchmark plan");
    batch->add_option("--plan", plan_path, "benchmark plan JSON")->required();
    batch->add_option("--out", out_path, "output directory")->required();
    batch->add_option("--jobs", jobs, "worker threads");

    auto* train = app.add_subcommand("train-dqn", "train the DQN agent");
    train->add_option("--config", config_path, "run config JSON")->required();
    train->add_option("--episodes", episodes, "training episodes");
    train->add_option("--out", out_path, "output network JSON")->required();
    train->add_option("--curve", curve_path, "learning curve CSV");

    auto* report = app.add_subcommand("report", "aggregate batch results");
    report->add_option("--in", out_path, "batch output directory")->required();
    report->add_option("--format", format, "csv, json, or svg");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen_env->parsed()) return cmd_gen_env(config_path, out_path, svg_path);
        if (gen_tasks->parsed()) return cmd_gen_tasks(config_path, out_path);
        if (run->parsed()) return cmd_run(config_path, out_path);
        if (batch->parsed()) return cmd_batch(plan_path, out_path, jobs);
        if (train->parsed()) return cmd_train(config_path, episodes, out_path, curve_path);
        if (report->parsed()) return cmd_report(out_path, format);
    } catch (const tabsa::GenerationFailed& e) {
        std::cerr << "generation failed: " << e.what() << "\n";
        return kExitGenerationFailure;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "run failed: " << e.what() << "\n";
        return kExitRunFailure;
    }
    return kExitOk;
}
