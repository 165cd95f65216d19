#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>

namespace hplb::env {

// Two decoupled actuated joints with viscous damping. The hidden parameter
// scales the torque the motors actually deliver.
struct ArmState {
    double theta1 = 0.0;
    double theta2 = 0.0;
    double omega1 = 0.0;
    double omega2 = 0.0;
};

namespace arm {
constexpr double kDt = 0.05;
constexpr double kMaxTorque = 1.0;
constexpr double kDamping = 0.1;
constexpr double kInertia = 0.25;
constexpr double kMaxOmega = 10.0;
}  // namespace arm

// Wraps an angle to (-pi, pi].
inline double wrap_angle(double theta) {
    double w = std::remainder(theta, 2.0 * std::numbers::pi);
    if (w <= -std::numbers::pi) w = std::numbers::pi;
    return w;
}

inline ArmState arm_step(const ArmState& s, double tau1, double tau2, double strength) {
    using namespace arm;
    tau1 = std::clamp(tau1, -1.0, 1.0);
    tau2 = std::clamp(tau2, -1.0, 1.0);
    ArmState n;
    n.omega1 = s.omega1 + kDt * (strength * tau1 * kMaxTorque - kDamping * s.omega1) / kInertia;
    n.omega2 = s.omega2 + kDt * (strength * tau2 * kMaxTorque - kDamping * s.omega2) / kInertia;
    n.omega1 = std::clamp(n.omega1, -kMaxOmega, kMaxOmega);
    n.omega2 = std::clamp(n.omega2, -kMaxOmega, kMaxOmega);
    n.theta1 = wrap_angle(s.theta1 + kDt * n.omega1);
    n.theta2 = wrap_angle(s.theta2 + kDt * n.omega2);
    return n;
}

}  // namespace hplb::env
