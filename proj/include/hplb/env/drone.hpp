#pragma once

#include <algorithm>
#include <cmath>

namespace hplb::env {

// Planar quadrotor-style vehicle with thrust along the body axis and a
// battery that drains with throttle. Payload mass enters the translational
// dynamics only; ambient temperature enters the battery drain only, so each
// latent parameter has a distinct signature in the state.
struct DroneState {
    double x = 0.0;
    double z = 0.0;
    double vx = 0.0;
    double vz = 0.0;
    double pitch = 0.0;
    double battery = 1.0;
};

namespace drone {
constexpr double kDt = 0.05;
constexpr double kBaseMass = 1.0;       // kg, vehicle without payload
constexpr double kMaxThrust = 25.0;     // N
constexpr double kGravity = 9.81;
constexpr double kMaxPitch = 0.6;       // rad
constexpr double kMaxSpeed = 10.0;      // m/s per axis
constexpr double kMaxPosition = 50.0;   // m per axis
constexpr double kIdleDrain = 0.01;     // battery fraction per second
constexpr double kThrustDrain = 0.08;
constexpr double kTempDrainCoeff = 0.05;  // per degC away from 20
constexpr double kReferenceTemp = 20.0;

constexpr double kPayloadMin = 0.0;
constexpr double kPayloadMax = 0.5;
constexpr double kTempMin = -10.0;
constexpr double kTempMax = 40.0;
}  // namespace drone

struct DroneStepResult {
    DroneState next;
    int saturations = 0;  // action components that had to be clipped
};

inline DroneStepResult drone_step(const DroneState& s, double thrust, double pitch_rate,
                                  double payload_mass, double ambient_temp) {
    using namespace drone;
    DroneStepResult res;
    if (thrust < 0.0 || thrust > 1.0) {
        thrust = std::clamp(thrust, 0.0, 1.0);
        ++res.saturations;
    }
    if (pitch_rate < -1.0 || pitch_rate > 1.0) {
        pitch_rate = std::clamp(pitch_rate, -1.0, 1.0);
        ++res.saturations;
    }

    const double m = kBaseMass + payload_mass;
    DroneState n;
    n.pitch = std::clamp(s.pitch + 0.5 * pitch_rate * kDt, -kMaxPitch, kMaxPitch);
    const double ax = thrust * kMaxThrust * (-std::sin(n.pitch)) / m;
    const double az = thrust * kMaxThrust * std::cos(n.pitch) / m - kGravity;
    // semi-implicit Euler
    n.vx = std::clamp(s.vx + ax * kDt, -kMaxSpeed, kMaxSpeed);
    n.vz = std::clamp(s.vz + az * kDt, -kMaxSpeed, kMaxSpeed);
    n.x = std::clamp(s.x + n.vx * kDt, -kMaxPosition, kMaxPosition);
    n.z = std::clamp(s.z + n.vz * kDt, -kMaxPosition, kMaxPosition);
    const double drain =
        kIdleDrain +
        kThrustDrain * thrust * (1.0 + kTempDrainCoeff * std::abs(ambient_temp - kReferenceTemp));
    n.battery = std::max(0.0, s.battery - kDt * drain);
    res.next = n;
    return res;
}

}  // namespace hplb::env
