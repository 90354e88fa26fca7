#include "tabsa/agents.hpp"

#include <algorithm>
#include <cmath>

namespace tabsa {

namespace {

std::vector<int> all_ids(const std::vector<const Task*>& jobs) {
    std::vector<int> ids;
    ids.reserve(jobs.size());
    for (const Task* t : jobs) ids.push_back(t->id);
    return ids;
}

bool contains(const std::vector<const Task*>& jobs, int id) {
    for (const Task* t : jobs) {
        if (t->id == id) return true;
    }
    return false;
}

} // namespace

AgentDecision simple_select(const std::vector<const Task*>& jobs, SimpleMode mode,
                            double hesitance, RandomStream& stream, std::optional<int> prev) {
    AgentDecision out;
    out.considered = all_ids(jobs);
    if (jobs.empty()) return out;

    if (prev && hesitance > 0.0 && contains(jobs, *prev)) {
        if (stream.uniform01() < hesitance) {
            out.kind = AgentDecision::Kind::Job;
            out.job_id = *prev;
            return out;
        }
    }

    const Task* best = nullptr;
    for (const Task* t : jobs) {
        if (!best) {
            best = t;
            continue;
        }
        bool better = mode == SimpleMode::Longest
                          ? t->estimated_duration > best->estimated_duration
                          : t->estimated_duration < best->estimated_duration;
        bool tie = t->estimated_duration == best->estimated_duration && t->id < best->id;
        if (better || tie) best = t;
    }
    out.kind = AgentDecision::Kind::Job;
    out.job_id = best->id;
    return out;
}

AgentDecision distance_select(const std::vector<const Task*>& jobs, double ratio) {
    AgentDecision out;
    out.considered = all_ids(jobs);
    const Task* best = nullptr;
    double best_score = 0.0;
    for (const Task* t : jobs) {
        if (!std::isfinite(t->distance_from_robot) || !std::isfinite(t->estimated_duration)) {
            continue;
        }
        double score = t->distance_from_robot - ratio * t->estimated_duration;
        if (!best || score > best_score || (score == best_score && t->id < best->id)) {
            best = t;
            best_score = score;
        }
    }
    if (best) {
        out.kind = AgentDecision::Kind::Job;
        out.job_id = best->id;
    }
    return out;
}

ScheduleTable request_table(const std::vector<const Task*>& jobs, double now,
                            const ScheduledEntry* pinned) {
    ScheduleTable table;

    bool pin_applied = false;
    if (pinned && now <= pinned->end) {
        for (const Task* t : jobs) {
            if (t->id == pinned->job_id) {
                table.scheduled.push_back(*pinned);
                pin_applied = true;
                break;
            }
        }
    }

    std::vector<const Task*> sorted(jobs);
    std::sort(sorted.begin(), sorted.end(), [](const Task* a, const Task* b) {
        if (a->priority != b->priority) return a->priority > b->priority;
        if (a->request_time != b->request_time) return a->request_time < b->request_time;
        return a->id < b->id;
    });

    for (const Task* t : sorted) {
        if (pin_applied && t->id == pinned->job_id) continue;
        if (!std::isfinite(t->estimated_duration)) {
            table.rejected.push_back(t->id);
            continue;
        }
        double end = t->deadline;
        double start = end - t->estimated_duration;
        bool collides = false;
        for (const ScheduledEntry& e : table.scheduled) {
            if (start <= e.end && e.start <= end) {
                collides = true;
                break;
            }
        }
        if (collides) {
            table.rejected.push_back(t->id);
        } else {
            table.scheduled.push_back({t->id, start, end});
        }
    }
    return table;
}

AgentDecision scheduler_select(const std::vector<const Task*>& jobs, double now,
                               const ScheduleTable& table) {
    AgentDecision out;
    out.considered = all_ids(jobs);
    for (const ScheduledEntry& e : table.scheduled) {
        if (now >= e.start && now <= e.end) {
            out.kind = AgentDecision::Kind::Job;
            out.job_id = e.job_id;
            return out;
        }
    }
    return out;
}

SimpleAgent::SimpleAgent(SimpleMode mode, double hesitance, std::uint64_t seed)
    : mode_(mode), hesitance_(hesitance), stream_(split(seed, "agent/simple")) {
    if (hesitance < 0.0 || hesitance > 1.0) {
        throw std::invalid_argument("SimpleAgent: hesitance must be in [0,1]");
    }
}

AgentDecision SimpleAgent::select_task(const std::vector<const Task*>& jobs, double,
                                       const EvalResult&) {
    AgentDecision d = simple_select(jobs, mode_, hesitance_, stream_, prev_);
    if (d.kind == AgentDecision::Kind::Job) prev_ = d.job_id;
    return d;
}

std::string SimpleAgent::name() const {
    return mode_ == SimpleMode::Longest ? "simple-longest" : "simple-shortest";
}

DistanceAgent::DistanceAgent(double ratio) : ratio_(ratio) {
    if (ratio < 0.0) throw std::invalid_argument("DistanceAgent: ratio must be >= 0");
}

AgentDecision DistanceAgent::select_task(const std::vector<const Task*>& jobs, double,
                                         const EvalResult&) {
    return distance_select(jobs, ratio_);
}

AgentDecision SchedulerAgent::select_task(const std::vector<const Task*>& jobs, double now,
                                          const EvalResult&) {
    table_ = request_table(jobs, now, executing_ ? &*executing_ : nullptr);
    AgentDecision d = scheduler_select(jobs, now, table_);
    if (d.kind == AgentDecision::Kind::Job) {
        for (const ScheduledEntry& e : table_.scheduled) {
            if (e.job_id == d.job_id) {
                executing_ = e;
                break;
            }
        }
    } else {
        executing_.reset();
    }
    return d;
}

DqnEncoding dqn_encode(const std::vector<const Task*>& jobs, double, int n_per_type,
                       double duration_scale, double distance_scale) {
    if (n_per_type < 1) throw std::invalid_argument("dqn_encode: n_per_type must be >= 1");
    const double clamp_hi = 10.0;
    auto norm = [&](double v, double scale) {
        if (!std::isfinite(v)) return clamp_hi;
        return std::clamp(v / scale, 0.0, clamp_hi);
    };

    DqnEncoding enc;
    enc.input.assign(static_cast<std::size_t>(3 * n_per_type * 3), 0.0);
    enc.slot_job.assign(static_cast<std::size_t>(3 * n_per_type), std::nullopt);

    const TaskType bands[3] = {TaskType::Fall, TaskType::Patrol, TaskType::PickAndPlace};
    for (int band = 0; band < 3; ++band) {
        std::vector<const Task*> of_type;
        for (const Task* t : jobs) {
            if (t->type == bands[band]) of_type.push_back(t);
        }
        std::sort(of_type.begin(), of_type.end(), [](const Task* a, const Task* b) {
            if (a->deadline != b->deadline) return a->deadline < b->deadline;
            return a->id < b->id;
        });
        int n = std::min<int>(n_per_type, static_cast<int>(of_type.size()));
        for (int s = 0; s < n; ++s) {
            const Task* t = of_type[static_cast<std::size_t>(s)];
            int slot = band * n_per_type + s;
            enc.slot_job[static_cast<std::size_t>(slot)] = t->id;
            double* f = &enc.input[static_cast<std::size_t>(slot) * 3];
            f[0] = norm(t->estimated_duration, duration_scale);
            f[1] = t->preemptive ? 1.0 : 0.0;
            f[2] = norm(t->distance_from_robot, distance_scale);
        }
    }
    return enc;
}

DqnAgent::DqnAgent(DqnAgentConfig cfg, std::uint64_t seed)
    : cfg_(cfg),
      net_([&] {
          std::vector<int> sizes{3 * cfg.n_per_type * 3};
          sizes.insert(sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
          sizes.push_back(3 * cfg.n_per_type);
          RandomStream init(split(seed, "agent/dqn/init"));
          return Mlp::randomized(sizes, init);
      }()),
      target_(net_),
      buffer_(cfg.hyper.replay_capacity),
      explore_(split(seed, "agent/dqn/explore")),
      sampler_(split(seed, "agent/dqn/sample")),
      training_(cfg.training) {
    cfg_.hyper.validate();
}

DqnAgent::DqnAgent(DqnAgentConfig cfg, Mlp net, std::uint64_t seed)
    : cfg_(cfg),
      net_(std::move(net)),
      target_(net_),
      buffer_(cfg.hyper.replay_capacity),
      explore_(split(seed, "agent/dqn/explore")),
      sampler_(split(seed, "agent/dqn/sample")),
      training_(cfg.training) {
    cfg_.hyper.validate();
    if (net_.input_size() != 3 * cfg_.n_per_type * 3 ||
        net_.output_size() != 3 * cfg_.n_per_type) {
        throw std::invalid_argument("DqnAgent: network shape does not match n_per_type");
    }
}

void DqnAgent::learn() {
    if (buffer_.size() < static_cast<std::size_t>(cfg_.hyper.batch_size)) return;
    auto batch = buffer_.sample(static_cast<std::size_t>(cfg_.hyper.batch_size), sampler_);
    last_loss_ = td_update(net_, target_, batch, cfg_.hyper);
    ++learn_count_;
    if (learn_count_ % cfg_.hyper.target_sync_period == 0) target_ = net_;
}

AgentDecision DqnAgent::select_task(const std::vector<const Task*>& jobs, double now,
                                    const EvalResult& last_eval) {
    DqnEncoding enc = dqn_encode(jobs, now, cfg_.n_per_type, cfg_.duration_scale,
                                 cfg_.distance_scale);
    if (training_ && has_prev_) {
        buffer_.push({prev_input_, prev_slot_, last_eval.reward, enc.input, false});
        learn();
    }

    int slot;
    double eps = training_ ? cfg_.hyper.epsilon(step_count_) : 0.0;
    if (eps > 0.0 && explore_.uniform01() < eps) {
        slot = static_cast<int>(explore_.uniform_index(enc.slot_job.size()));
    } else {
        std::vector<double> q = net_.forward(enc.input);
        slot = 0;
        for (int i = 1; i < static_cast<int>(q.size()); ++i) {
            if (q[static_cast<std::size_t>(i)] > q[static_cast<std::size_t>(slot)]) slot = i;
        }
    }
    ++step_count_;
    prev_input_ = enc.input;
    prev_slot_ = slot;
    has_prev_ = true;

    AgentDecision out;
    for (const auto& id : enc.slot_job) {
        if (id) out.considered.push_back(*id);
    }
    if (enc.slot_job[static_cast<std::size_t>(slot)]) {
        out.kind = AgentDecision::Kind::Job;
        out.job_id = *enc.slot_job[static_cast<std::size_t>(slot)];
    } else {
        out.kind = AgentDecision::Kind::Nonexistent;
    }
    return out;
}

void DqnAgent::episode_finished(const EvalResult& final_eval) {
    if (training_ && has_prev_) {
        std::vector<double> zero(static_cast<std::size_t>(net_.input_size()), 0.0);
        buffer_.push({prev_input_, prev_slot_, final_eval.reward, std::move(zero), true});
        learn();
    }
    has_prev_ = false;
    prev_slot_ = -1;
    prev_input_.clear();
}

std::vector<PredictorSlot> predictor_slots(const std::vector<const Task*>& jobs, double now,
                                           double horizon, int slot_count) {
    if (slot_count < 1) throw std::invalid_argument("predictor_slots: slot_count must be >= 1");
    std::vector<PredictorSlot> slots(static_cast<std::size_t>(slot_count));
    double width = horizon / slot_count;
    ScheduleTable table = request_table(jobs, now);

    auto slot_of = [&](double t) {
        int s = static_cast<int>((t - now) / width);
        return (t < now || s < 0 || s >= slot_count) ? -1 : s;
    };
    for (const Task* t : jobs) {
        int s = slot_of(t->request_time);
        if (s >= 0) slots[static_cast<std::size_t>(s)].task_count++;
    }
    for (const ScheduledEntry& e : table.scheduled) {
        int s = slot_of(e.start);
        if (s < 0) continue;
        slots[static_cast<std::size_t>(s)].executable_count++;
        for (const Task* t : jobs) {
            if (t->id == e.job_id) {
                slots[static_cast<std::size_t>(s)].priority_sum += t->priority;
                break;
            }
        }
    }
    return slots;
}

} // namespace tabsa
