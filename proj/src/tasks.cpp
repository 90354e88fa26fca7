#include "tabsa/tasks.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

namespace tabsa {

const char* task_type_name(TaskType t) {
    switch (t) {
    case TaskType::Fall: return "fall";
    case TaskType::Patrol: return "patrol";
    case TaskType::Pick: return "pick";
    case TaskType::Place: return "place";
    case TaskType::PickAndPlace: return "pick_and_place";
    }
    return "unknown";
}

bool is_called(const Task& t, double now) { return now >= t.request_time; }

bool is_completed(const Task& t) {
    if (t.is_complex()) return t.subtask_index >= static_cast<int>(t.subtasks.size());
    return t.leg_index >= static_cast<int>(t.legs.size());
}

bool is_alive(const Task& t, double now) {
    if (is_completed(t)) return true;
    return !(now > t.deathtime);
}

namespace {

Task* active_atom(Task& t) {
    if (is_completed(t)) return nullptr;
    if (t.is_complex()) return active_atom(t.subtasks[static_cast<std::size_t>(t.subtask_index)]);
    return &t;
}

const Task* active_atom(const Task& t) {
    if (is_completed(t)) return nullptr;
    if (t.is_complex()) return active_atom(t.subtasks[static_cast<std::size_t>(t.subtask_index)]);
    return &t;
}

// Advance leg/subtask indices past finished work.
void advance_cursor(Task& t) {
    while (!is_completed(t)) {
        if (t.is_complex()) {
            Task& sub = t.subtasks[static_cast<std::size_t>(t.subtask_index)];
            advance_cursor(sub);
            if (is_completed(sub)) {
                ++t.subtask_index;
                continue;
            }
            return;
        }
        TaskLeg& leg = t.legs[static_cast<std::size_t>(t.leg_index)];
        if (leg.arrived && leg.dwell_remaining <= 0.0) {
            ++t.leg_index;
            continue;
        }
        return;
    }
}

} // namespace

std::optional<Vec2> current_target(const Task& t) {
    const Task* atom = active_atom(t);
    if (!atom) return std::nullopt;
    return atom->legs[static_cast<std::size_t>(atom->leg_index)].target;
}

WorkStatus work_for(Task& t, RobotState& robot, const OccupancyView& view, double dt) {
    WorkStatus status;
    double budget = dt;
    const double eps = 1e-9;

    while (budget > eps && !is_completed(t)) {
        Task* atom = active_atom(t);
        TaskLeg& leg = atom->legs[static_cast<std::size_t>(atom->leg_index)];

        if (!leg.arrived) {
            auto path = plan_path(view, robot.pose, leg.target);
            if (!path) {
                status.stalled = true;
                return status;
            }
            PathAdvance adv = advance_along(*path, robot.pose, robot.velocity * budget);
            robot.pose = adv.position;
            robot.odometer += adv.traveled;
            double used = robot.velocity > 0.0 ? adv.traveled / robot.velocity : budget;
            budget -= used;
            t.work_time += used;
            if (adv.reached_end) {
                leg.arrived = true;
            } else {
                break; // budget exhausted mid-travel
            }
        } else {
            double dec = std::min(leg.dwell_remaining, budget);
            leg.dwell_remaining -= dec;
            budget -= dec;
            t.work_time += dec;
            if (leg.dwell_remaining > 0.0) break;
            advance_cursor(t);
        }
    }
    status.completed_now = is_completed(t);
    return status;
}

namespace {

double estimate_walk(const Task& t, const Vec2& start, double velocity,
                     const LegCostModel& model, double min_task_duration, bool& first_leg) {
    if (is_completed(t)) return min_task_duration;
    if (t.is_complex()) {
        double total = 0.0;
        Vec2 pos = start;
        for (std::size_t i = static_cast<std::size_t>(t.subtask_index); i < t.subtasks.size(); ++i) {
            total += estimate_walk(t.subtasks[i], pos, velocity, model, min_task_duration,
                                   first_leg);
            if (std::isinf(total)) return kNever;
            if (!t.subtasks[i].legs.empty()) pos = t.subtasks[i].legs.back().target;
        }
        return total;
    }
    double travel = 0.0;
    double dwell = 0.0;
    Vec2 pos = start;
    for (std::size_t i = static_cast<std::size_t>(t.leg_index); i < t.legs.size(); ++i) {
        const TaskLeg& leg = t.legs[i];
        bool current_and_arrived = (i == static_cast<std::size_t>(t.leg_index)) && leg.arrived;
        if (!current_and_arrived) {
            double len = first_leg ? model.live(pos, leg.target) : model.internal(pos, leg.target);
            if (std::isinf(len)) return kNever;
            travel += velocity > 0.0 ? len / velocity : kNever;
        }
        first_leg = false;
        dwell += leg.dwell_remaining;
        pos = leg.target;
    }
    return travel + dwell + min_task_duration;
}

} // namespace

double estimate_duration_model(const Task& t, const Vec2& start, double velocity,
                               const LegCostModel& model, double min_task_duration) {
    bool first_leg = true;
    return estimate_walk(t, start, velocity, model, min_task_duration, first_leg);
}

double estimate_duration_from(const Task& t, const Vec2& start, double velocity,
                              const OccupancyView& view, double min_task_duration) {
    LegCostModel model;
    model.live = [&view](const Vec2& a, const Vec2& b) { return path_length(view, a, b); };
    model.internal = model.live;
    return estimate_duration_model(t, start, velocity, model, min_task_duration);
}

double estimate_duration(const Task& t, const RobotState& robot, const OccupancyView& view,
                         double min_task_duration) {
    return estimate_duration_from(t, robot.pose, robot.velocity, view, min_task_duration);
}

void TaskGenParams::validate() const {
    if (scenario_duration <= 0) throw std::invalid_argument("TaskGenParams: duration must be > 0");
    if (fall_count < 0 || patrol_count < 0 || pick_count < 0 || place_count < 0 ||
        pick_and_place_count < 0) {
        throw std::invalid_argument("TaskGenParams: counts must be >= 0");
    }
    if (fall_dwell <= 0 || pick_dwell <= 0 || place_dwell <= 0) {
        throw std::invalid_argument("TaskGenParams: dwell durations must be > 0");
    }
    if (fall_max_delay < 0) throw std::invalid_argument("TaskGenParams: max delay must be >= 0");
    if (patrol_priority_min < 0 || patrol_priority_max < patrol_priority_min ||
        patrol_priority_max >= fall_priority) {
        throw std::invalid_argument(
            "TaskGenParams: patrol priority range must sit below the fall priority");
    }
    if (deadline_slack_min < 0 || deadline_slack_max < deadline_slack_min ||
        deadline_slack_min >= scenario_duration) {
        throw std::invalid_argument("TaskGenParams: invalid deadline slack range");
    }
    if (nearest_furniture_k < 1) {
        throw std::invalid_argument("TaskGenParams: nearest_furniture_k must be >= 1");
    }
}

namespace {

std::vector<Cell> free_cells(const EnvironmentMap& map) {
    std::vector<Cell> out;
    for (int y = 0; y < map.height_cells; ++y) {
        for (int x = 0; x < map.width_cells; ++x) {
            if (map.at({x, y}) == CellType::Free) out.push_back({x, y});
        }
    }
    return out;
}

// Nearest free cell to a point: smallest Euclidean distance to the cell
// center, lowest cell index on ties. This is the standing spot for working
// on an object placed on furniture.
Cell nearest_free_cell(const EnvironmentMap& map, const Vec2& p) {
    Cell anchor = map.cell_of(p);
    for (int radius = 0; radius < std::max(map.width_cells, map.height_cells); ++radius) {
        Cell best{-1, -1};
        double best_d = kNever;
        int best_idx = -1;
        for (int y = anchor.y - radius; y <= anchor.y + radius; ++y) {
            for (int x = anchor.x - radius; x <= anchor.x + radius; ++x) {
                Cell c{x, y};
                if (chebyshev(c, anchor) != radius) continue;
                if (!map.is_free(c)) continue;
                double d = distance(map.cell_center(c), p);
                int idx = map.index(c);
                if (d < best_d || (d == best_d && idx < best_idx)) {
                    best = c;
                    best_d = d;
                    best_idx = idx;
                }
            }
        }
        if (best.x >= 0) return best;
    }
    throw GenerationFailed("no free cell near position");
}

Task make_atomic(TaskType type, std::vector<TaskLeg> legs, int priority, bool preemptive) {
    Task t;
    t.type = type;
    t.legs = std::move(legs);
    t.priority = priority;
    t.preemptive = preemptive;
    return t;
}

TaskLeg leg_at(const Vec2& target, double dwell) {
    TaskLeg l;
    l.target = target;
    l.dwell_total = dwell;
    l.dwell_remaining = dwell;
    return l;
}

void stamp_times(Task& t, RandomStream& rng, const TaskGenParams& p) {
    double request_span = p.scenario_duration - p.deadline_slack_min;
    t.request_time = rng.uniform(0.0, request_span);
    double hi = std::min(t.request_time + p.deadline_slack_max, p.scenario_duration);
    t.deadline = rng.uniform(t.request_time + p.deadline_slack_min, hi);
    t.original_deadline = t.deadline;
    t.original_max_delay = t.max_delay;
    recompute_deathtime(t);
}

} // namespace

std::vector<Task> generate_tasks(const TaskGenParams& params, const EnvironmentMap& map,
                                 std::uint64_t seed) {
    params.validate();
    RandomStream rng(split(seed, "taskgen"));

    std::vector<Cell> cells = free_cells(map);
    if (cells.empty()) throw GenerationFailed("map has no free cells");
    auto random_free = [&]() { return map.cell_center(cells[rng.uniform_index(cells.size())]); };

    bool needs_objects = params.pick_count > 0 || params.place_count > 0 ||
                         params.pick_and_place_count > 0;
    if (needs_objects && map.objects.empty()) {
        throw GenerationFailed("task generation requires objects on furniture");
    }

    auto furniture_center = [&](int fid) {
        const CellRect& r = map.furniture[static_cast<std::size_t>(fid)].rect;
        return Vec2{(r.x + r.w * 0.5) * map.resolution, (r.y + r.h * 0.5) * map.resolution};
    };

    // Destination drawn among the k nearest furniture pieces to the source
    // object, so transport tasks tend to start and end close together.
    auto pick_destination = [&](const ManipObject& source) {
        std::vector<std::pair<double, int>> order;
        for (int fid = 0; fid < static_cast<int>(map.furniture.size()); ++fid) {
            order.emplace_back(distance(furniture_center(fid), source.position), fid);
        }
        std::sort(order.begin(), order.end());
        std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(params.nearest_furniture_k),
                                              order.size());
        int fid = order[rng.uniform_index(k)].second;
        const CellRect& r = map.furniture[static_cast<std::size_t>(fid)].rect;
        int local = static_cast<int>(rng.uniform_index(static_cast<std::size_t>(r.area())));
        return map.cell_center({r.x + local % r.w, r.y + local / r.w});
    };

    auto make_pick = [&](const ManipObject& obj) {
        Task t = make_atomic(TaskType::Pick, {leg_at(map.cell_center(nearest_free_cell(map, obj.position)),
                                                     params.pick_dwell)},
                             0, false);
        t.object_id = obj.id;
        return t;
    };
    auto make_place = [&](const ManipObject& obj, const Vec2& dest) {
        Task t = make_atomic(TaskType::Place,
                             {leg_at(map.cell_center(nearest_free_cell(map, dest)), params.place_dwell)},
                             0, false);
        t.object_id = obj.id;
        return t;
    };

    std::vector<Task> out;
    int next_id = 0;

    for (int i = 0; i < params.fall_count; ++i) {
        Task t = make_atomic(TaskType::Fall, {leg_at(random_free(), params.fall_dwell)},
                             params.fall_priority, false);
        t.max_delay = params.fall_max_delay;
        t.id = next_id++;
        stamp_times(t, rng, params);
        out.push_back(std::move(t));
    }
    for (int i = 0; i < params.patrol_count; ++i) {
        Vec2 a = random_free();
        Vec2 b = random_free();
        Task t = make_atomic(TaskType::Patrol, {leg_at(a, 0.0), leg_at(b, 0.0)},
                             rng.uniform_int(params.patrol_priority_min, params.patrol_priority_max),
                             true);
        t.id = next_id++;
        stamp_times(t, rng, params);
        out.push_back(std::move(t));
    }
    for (int i = 0; i < params.pick_count; ++i) {
        const ManipObject& obj = map.objects[rng.uniform_index(map.objects.size())];
        Task t = make_pick(obj);
        t.id = next_id++;
        stamp_times(t, rng, params);
        out.push_back(std::move(t));
    }
    for (int i = 0; i < params.place_count; ++i) {
        const ManipObject& obj = map.objects[rng.uniform_index(map.objects.size())];
        Task t = make_place(obj, pick_destination(obj));
        t.id = next_id++;
        stamp_times(t, rng, params);
        out.push_back(std::move(t));
    }
    for (int i = 0; i < params.pick_and_place_count; ++i) {
        const ManipObject& obj = map.objects[rng.uniform_index(map.objects.size())];
        Vec2 dest = pick_destination(obj);
        Task pick = make_pick(obj);
        Task place = make_place(obj, dest);
        Vec2 from = pick.legs.front().target;
        Vec2 to = place.legs.front().target;
        Task transport = make_atomic(
            TaskType::Patrol, {leg_at(from, 0.0), leg_at(to, 0.0)},
            rng.uniform_int(params.patrol_priority_min, params.patrol_priority_max), true);

        Task t;
        t.type = TaskType::PickAndPlace;
        t.preemptive = false;
        t.object_id = obj.id;
        t.subtasks = {std::move(pick), std::move(transport), std::move(place)};
        t.priority = 0;
        for (const Task& sub : t.subtasks) t.priority = std::max(t.priority, sub.priority);
        t.id = next_id++;
        stamp_times(t, rng, params);
        out.push_back(std::move(t));
    }
    return out;
}

namespace {

nlohmann::json task_to_json(const Task& t) {
    nlohmann::json j;
    j["id"] = t.id;
    j["type"] = task_type_name(t.type);
    j["request_time"] = t.request_time;
    j["deadline"] = t.deadline;
    j["max_delay"] = std::isinf(t.max_delay) ? -1.0 : t.max_delay;
    j["deathtime"] = std::isinf(t.deathtime) ? -1.0 : t.deathtime;
    j["priority"] = t.priority;
    j["preemptive"] = t.preemptive;
    if (t.object_id >= 0) j["object"] = t.object_id;
    if (!t.legs.empty()) {
        j["legs"] = nlohmann::json::array();
        for (const TaskLeg& l : t.legs) {
            j["legs"].push_back({{"x", l.target.x}, {"y", l.target.y}, {"dwell", l.dwell_total}});
        }
    }
    if (!t.subtasks.empty()) {
        j["subtasks"] = nlohmann::json::array();
        for (const Task& sub : t.subtasks) j["subtasks"].push_back(task_to_json(sub));
    }
    return j;
}

} // namespace

std::string tasks_to_json(const std::vector<Task>& tasks) {
    nlohmann::json j = nlohmann::json::array();
    for (const Task& t : tasks) j.push_back(task_to_json(t));
    return j.dump(2);
}

} // namespace tabsa
