#include "firewatch/sim/t_star.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace firewatch {

namespace {
constexpr double kTol = 1e-9;
constexpr int kMaxIters = 100;
constexpr int kMaxSpots = 8;
}  // namespace

std::optional<double> intercept_time(const Vec2& chaser, const Vec2& target_pos,
                                     const Vec2& target_vel, double v_max) {
  double t = 0.0;
  Vec2 point = target_pos;
  for (int i = 0; i < kMaxIters; ++i) {
    const double next_t = (point - chaser).norm() / v_max;
    const Vec2 next_point = target_pos + target_vel * next_t;
    const double moved = (next_point - point).norm();
    t = next_t;
    point = next_point;
    if (moved <= kTol) return t;
  }
  return std::nullopt;
}

std::optional<double> t_star_oracle(const Vec2& start,
                                    std::span<const Vec2> spots,
                                    std::span<const Vec2> velocities,
                                    double v_max) {
  const int n = static_cast<int>(spots.size());
  if (n > kMaxSpots) {
    throw std::invalid_argument("t_star_oracle: exhaustive search capped at 8 spots");
  }
  if (n == 0) return 0.0;

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);

  double best = std::numeric_limits<double>::infinity();
  bool any = false;
  do {
    double t = 0.0;
    Vec2 pos = start;
    bool ok = true;
    for (int k = 0; k < n && ok; ++k) {
      const int i = order[k];
      const Vec2 now = spots[i] + velocities[i] * t;
      const std::optional<double> leg = intercept_time(pos, now, velocities[i], v_max);
      if (!leg) {
        ok = false;
        break;
      }
      t += *leg;
      pos = spots[i] + velocities[i] * t;
      if (t >= best) {  // cannot improve; abandon this order
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    // Close the cycle on the first-serviced target.
    const int first = order[0];
    const Vec2 now = spots[first] + velocities[first] * t;
    const std::optional<double> leg = intercept_time(pos, now, velocities[first], v_max);
    if (!leg) continue;
    t += *leg;
    if (t < best) {
      best = t;
      any = true;
    }
  } while (std::next_permutation(order.begin(), order.end()));

  if (!any) return std::nullopt;
  return best;
}

}  // namespace firewatch
