#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace hplb::env {

// Classic mountain car with the gravity term scaled by a per-trajectory
// hidden factor. Action 0/1/2 = push left / coast / push right.
struct MountainCarState {
    double position = 0.0;
    double velocity = 0.0;
};

namespace mc {
constexpr double kMinPosition = -1.2;
constexpr double kMaxPosition = 0.6;
constexpr double kMaxSpeed = 0.07;
constexpr double kForce = 0.001;
constexpr double kGravity = 0.0025;
}  // namespace mc

inline MountainCarState mc_step(const MountainCarState& s, int action, double g_scale) {
    if (action < 0 || action > 2) {
        throw std::invalid_argument("mountain car: action " + std::to_string(action) +
                                    " outside {0,1,2}");
    }
    MountainCarState n;
    n.velocity = s.velocity + (action - 1) * mc::kForce -
                 mc::kGravity * g_scale * std::cos(3.0 * s.position);
    n.velocity = std::clamp(n.velocity, -mc::kMaxSpeed, mc::kMaxSpeed);
    n.position = std::clamp(s.position + n.velocity, mc::kMinPosition, mc::kMaxPosition);
    return n;
}

}  // namespace hplb::env
