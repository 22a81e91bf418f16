#pragma once

#include <optional>
#include <span>

#include "firewatch/fire_sim.hpp"

namespace firewatch {

// Time for a pursuer at `chaser` with speed v_max to reach a target that is
// at target_pos now and moves at constant target_vel. Fixed-point iteration
// on the interception point, to 1e-9 displacement or 100 iterations; nullopt
// when it fails to converge (target at least as fast as the pursuer).
std::optional<double> intercept_time(const Vec2& chaser, const Vec2& target_pos,
                                     const Vec2& target_vel, double v_max);

// Ground-truth optimal service-cycle time: over every visiting order of the
// n <= 8 targets, fly from `start`, intercept each target in order at its
// true future position, then re-intercept the first target of the order; the
// minimum completion time over orders. Static targets reduce to the optimal
// TSP tour time. Throws std::invalid_argument for n > 8; nullopt when no
// order can be completed.
std::optional<double> t_star_oracle(const Vec2& start,
                                    std::span<const Vec2> spots,
                                    std::span<const Vec2> velocities,
                                    double v_max);

}  // namespace firewatch
