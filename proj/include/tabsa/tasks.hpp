#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "tabsa/navgrid.hpp"
#include "tabsa/robot.hpp"
#include "tabsa/rng.hpp"
#include "tabsa/worldgen.hpp"

namespace tabsa {

enum class TaskType { Fall, Patrol, Pick, Place, PickAndPlace };
inline constexpr int kTaskTypeCount = 5;

const char* task_type_name(TaskType t);

inline constexpr double kNever = std::numeric_limits<double>::infinity();

/// One stop of a task: travel to `target`, then hold for the remaining
/// dwell time.
struct TaskLeg {
    Vec2 target;
    double dwell_total = 0.0;
    double dwell_remaining = 0.0;
    bool arrived = false;
};

/// Unified job record. Atomic tasks carry legs; PickAndPlace carries
/// subtasks worked in order. `deathtime` is always deadline + max_delay;
/// the engine recomputes it whenever plugins touch deadline or max_delay.
struct Task {
    int id = -1;
    TaskType type = TaskType::Patrol;
    double request_time = 0.0;
    double deadline = 0.0;
    double max_delay = kNever;
    double deathtime = kNever;
    int priority = 0;
    bool preemptive = true;
    double estimated_duration = 0.0;
    double distance_from_robot = 0.0;

    // Generation-time values; statistics compare against these even when
    // plugins mutate the live deadline.
    double original_deadline = 0.0;
    double original_max_delay = kNever;

    std::vector<TaskLeg> legs;
    int leg_index = 0;
    std::vector<Task> subtasks;
    int subtask_index = 0;

    double work_time = 0.0; // seconds of actual progress; > 0 means started
    int object_id = -1;     // Pick/Place: the manipulated object

    bool started() const { return work_time > 0.0; }
    bool is_complex() const { return !subtasks.empty(); }
};

inline void recompute_deathtime(Task& t) { t.deathtime = t.deadline + t.max_delay; }

bool is_called(const Task& t, double now);
bool is_completed(const Task& t);
/// False only when the task has outlived deadline + max_delay without
/// completing. Tasks with infinite max_delay cannot die.
bool is_alive(const Task& t, double now);

/// Target the robot must reach next for this task, or nullopt when done.
std::optional<Vec2> current_target(const Task& t);

struct WorkStatus {
    bool stalled = false;       // replanning found no path this step
    bool completed_now = false; // task finished during this call
};

/// Advance execution by dt: travel along a freshly planned path toward the
/// active target, and apply any leftover time to the dwell; legs and
/// subtasks chain within the same step. A NoPath result stalls the task for
/// this step without failing it.
WorkStatus work_for(Task& t, RobotState& robot, const OccupancyView& view, double dt);

/// Remaining-work estimate: travel time over all remaining legs (chained
/// start poses) plus remaining dwell, extended by min_task_duration. For
/// PickAndPlace the estimate is the sum over remaining subtasks, each fully
/// chained and each extended by min_task_duration. Infinite when any leg is
/// unreachable.
double estimate_duration(const Task& t, const RobotState& robot, const OccupancyView& view,
                         double min_task_duration);
double estimate_duration_from(const Task& t, const Vec2& start, double velocity,
                              const OccupancyView& view, double min_task_duration);

/// Leg travel costs in meters. The robot's immediate leg is priced by
/// `live` (current view); future legs between fixed task positions by
/// `internal`, which the engine may cache on the static map.
struct LegCostModel {
    std::function<double(const Vec2&, const Vec2&)> live;
    std::function<double(const Vec2&, const Vec2&)> internal;
};
double estimate_duration_model(const Task& t, const Vec2& start, double velocity,
                               const LegCostModel& model, double min_task_duration);

struct TaskGenParams {
    double scenario_duration = 14400.0; // seconds
    int fall_count = 12;
    int patrol_count = 12;
    int pick_count = 0;
    int place_count = 0;
    int pick_and_place_count = 12;
    double fall_dwell = 60.0;
    double pick_dwell = 30.0;
    double place_dwell = 30.0;
    double fall_max_delay = 900.0;
    int fall_priority = 10;
    int patrol_priority_min = 1;
    int patrol_priority_max = 9;
    double deadline_slack_min = 600.0;
    double deadline_slack_max = 3600.0;
    int nearest_furniture_k = 3; // PickAndPlace destination candidates

    void validate() const;
};

/// Seeded task generation: per-type counts, request/deadline times inside
/// the scenario window, robot targets on free cells, pick/place positions
/// on furniture objects. Deterministic in (params, map, seed).
std::vector<Task> generate_tasks(const TaskGenParams& params, const EnvironmentMap& map,
                                 std::uint64_t seed);

std::string tasks_to_json(const std::vector<Task>& tasks);

} // namespace tabsa
