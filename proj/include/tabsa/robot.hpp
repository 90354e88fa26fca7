#pragma once

#include <optional>

#include "tabsa/geometry.hpp"

namespace tabsa {

/// Point robot with a scalar travel velocity. No rotation is modeled.
struct RobotState {
    Vec2 pose;
    double velocity = 0.25;               // m/s
    std::optional<int> active_task;       // task currently being executed
    double odometer = 0.0;                // meters, non-decreasing
};

} // namespace tabsa
