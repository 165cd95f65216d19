#pragma once

#include <Eigen/Dense>

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "hplb/core/rng.hpp"
#include "hplb/env/arm.hpp"
#include "hplb/env/drone.hpp"
#include "hplb/env/hidden_param.hpp"
#include "hplb/env/mountain_car.hpp"

namespace hplb::env {

// Uniform vector-in / vector-out view over the simulators, used by dataset
// generation and the analysis tools. Stepping is pure: the hidden value is
// passed in, never stored.
class Environment {
public:
    virtual ~Environment() = default;

    virtual std::string id() const = 0;
    virtual std::size_t state_dim() const = 0;
    virtual std::size_t action_dim() const = 0;
    virtual const HiddenParamSpec& hidden_spec() const = 0;
    virtual std::vector<std::string> feature_names() const = 0;
    // Number of leading state features that are genuine dynamic quantities;
    // anything beyond is an appended visible parameter and is skipped by
    // per-feature error reports.
    virtual std::size_t report_dim() const { return state_dim(); }
    virtual Eigen::VectorXd state_lower_bound() const = 0;
    virtual Eigen::VectorXd state_upper_bound() const = 0;

    virtual Eigen::VectorXd initial_state(Rng& rng) const = 0;
    virtual Eigen::VectorXd sample_action(Rng& rng) const = 0;
    virtual Eigen::VectorXd step(const Eigen::VectorXd& state, const Eigen::VectorXd& action,
                                 double hidden) const = 0;

protected:
    void check_dims(const Eigen::VectorXd& state, const Eigen::VectorXd& action) const {
        if (static_cast<std::size_t>(state.size()) != state_dim() ||
            static_cast<std::size_t>(action.size()) != action_dim()) {
            throw std::invalid_argument(id() + ": state/action dimensions (" +
                                        std::to_string(state.size()) + ", " +
                                        std::to_string(action.size()) + "), expected (" +
                                        std::to_string(state_dim()) + ", " +
                                        std::to_string(action_dim()) + ")");
        }
    }
};

class MountainCarEnv final : public Environment {
public:
    MountainCarEnv()
        : spec_(HiddenParamSpec::discrete("gravity_scale", {0.75, 1.0, 1.25})) {}

    std::string id() const override { return "mountain-car"; }
    std::size_t state_dim() const override { return 2; }
    std::size_t action_dim() const override { return 1; }
    const HiddenParamSpec& hidden_spec() const override { return spec_; }
    std::vector<std::string> feature_names() const override { return {"position", "velocity"}; }

    Eigen::VectorXd state_lower_bound() const override {
        return Eigen::Vector2d(mc::kMinPosition, -mc::kMaxSpeed);
    }
    Eigen::VectorXd state_upper_bound() const override {
        return Eigen::Vector2d(mc::kMaxPosition, mc::kMaxSpeed);
    }

    Eigen::VectorXd initial_state(Rng& rng) const override {
        return Eigen::Vector2d(rng.uniform(-0.6, -0.4), 0.0);
    }

    Eigen::VectorXd sample_action(Rng& rng) const override {
        Eigen::VectorXd a(1);
        a(0) = static_cast<double>(rng.uniform_int(3));
        return a;
    }

    Eigen::VectorXd step(const Eigen::VectorXd& state, const Eigen::VectorXd& action,
                         double hidden) const override {
        check_dims(state, action);
        const double raw = action(0);
        const int a = static_cast<int>(std::lround(raw));
        if (static_cast<double>(a) != raw) {
            throw std::invalid_argument("mountain-car: non-integer action " + std::to_string(raw));
        }
        MountainCarState s{state(0), state(1)};
        MountainCarState n = mc_step(s, a, hidden);
        return Eigen::Vector2d(n.position, n.velocity);
    }

private:
    HiddenParamSpec spec_;
};

class ArmEnv final : public Environment {
public:
    ArmEnv() : spec_(HiddenParamSpec::discrete("torque_strength", {0.5, 0.75, 1.0})) {}

    std::string id() const override { return "arm"; }
    std::size_t state_dim() const override { return 4; }
    std::size_t action_dim() const override { return 2; }
    const HiddenParamSpec& hidden_spec() const override { return spec_; }
    std::vector<std::string> feature_names() const override {
        return {"theta1", "theta2", "omega1", "omega2"};
    }

    Eigen::VectorXd state_lower_bound() const override {
        Eigen::VectorXd lo(4);
        lo << -std::numbers::pi, -std::numbers::pi, -arm::kMaxOmega, -arm::kMaxOmega;
        return lo;
    }
    Eigen::VectorXd state_upper_bound() const override {
        Eigen::VectorXd hi(4);
        hi << std::numbers::pi, std::numbers::pi, arm::kMaxOmega, arm::kMaxOmega;
        return hi;
    }

    Eigen::VectorXd initial_state(Rng&) const override { return Eigen::VectorXd::Zero(4); }

    Eigen::VectorXd sample_action(Rng& rng) const override {
        Eigen::VectorXd a(2);
        a(0) = rng.uniform(-1.0, 1.0);
        a(1) = rng.uniform(-1.0, 1.0);
        return a;
    }

    Eigen::VectorXd step(const Eigen::VectorXd& state, const Eigen::VectorXd& action,
                         double hidden) const override {
        check_dims(state, action);
        ArmState s{state(0), state(1), state(2), state(3)};
        ArmState n = arm_step(s, action(0), action(1), hidden);
        Eigen::VectorXd out(4);
        out << n.theta1, n.theta2, n.omega1, n.omega2;
        return out;
    }

private:
    HiddenParamSpec spec_;
};

// Drone with one hidden and one visible latent parameter. The visible one is
// appended to the observable state as a constant feature; which of
// payload/temperature is hidden selects the variant.
class DroneEnv final : public Environment {
public:
    enum class Hidden { Payload, Temperature };

    explicit DroneEnv(Hidden hidden)
        : hidden_(hidden),
          spec_(hidden == Hidden::Payload
                    ? HiddenParamSpec::continuous("payload_mass", drone::kPayloadMin,
                                                  drone::kPayloadMax)
                    : HiddenParamSpec::continuous("ambient_temp", drone::kTempMin,
                                                  drone::kTempMax)),
          visible_spec_(hidden == Hidden::Payload
                            ? HiddenParamSpec::continuous("ambient_temp", drone::kTempMin,
                                                          drone::kTempMax)
                            : HiddenParamSpec::continuous("payload_mass", drone::kPayloadMin,
                                                          drone::kPayloadMax)) {}

    std::string id() const override {
        return hidden_ == Hidden::Payload ? "drone-payload" : "drone-temperature";
    }
    std::size_t state_dim() const override { return 7; }
    std::size_t action_dim() const override { return 2; }
    const HiddenParamSpec& hidden_spec() const override { return spec_; }
    std::size_t report_dim() const override { return 6; }

    std::vector<std::string> feature_names() const override {
        return {"x", "z", "vx", "vz", "pitch", "battery", visible_spec_.name};
    }

    Eigen::VectorXd state_lower_bound() const override {
        Eigen::VectorXd lo(7);
        lo << -drone::kMaxPosition, -drone::kMaxPosition, -drone::kMaxSpeed, -drone::kMaxSpeed,
            -drone::kMaxPitch, 0.0, visible_spec_.low;
        return lo;
    }
    Eigen::VectorXd state_upper_bound() const override {
        Eigen::VectorXd hi(7);
        hi << drone::kMaxPosition, drone::kMaxPosition, drone::kMaxSpeed, drone::kMaxSpeed,
            drone::kMaxPitch, 1.0, visible_spec_.high;
        return hi;
    }

    Eigen::VectorXd initial_state(Rng& rng) const override {
        Eigen::VectorXd s = Eigen::VectorXd::Zero(7);
        s(5) = 1.0;  // battery
        s(6) = visible_spec_.sample(rng);
        return s;
    }

    Eigen::VectorXd sample_action(Rng& rng) const override {
        Eigen::VectorXd a(2);
        a(0) = rng.uniform(0.0, 1.0);   // thrust
        a(1) = rng.uniform(-1.0, 1.0);  // pitch rate
        return a;
    }

    Eigen::VectorXd step(const Eigen::VectorXd& state, const Eigen::VectorXd& action,
                         double hidden) const override {
        check_dims(state, action);
        DroneState s{state(0), state(1), state(2), state(3), state(4), state(5)};
        const double visible = state(6);
        const double payload = hidden_ == Hidden::Payload ? hidden : visible;
        const double temp = hidden_ == Hidden::Payload ? visible : hidden;
        DroneState n = drone_step(s, action(0), action(1), payload, temp).next;
        Eigen::VectorXd out(7);
        out << n.x, n.z, n.vx, n.vz, n.pitch, n.battery, visible;
        return out;
    }

private:
    Hidden hidden_;
    HiddenParamSpec spec_;
    HiddenParamSpec visible_spec_;
};

inline std::unique_ptr<Environment> make_environment(const std::string& id) {
    if (id == "mountain-car") return std::make_unique<MountainCarEnv>();
    if (id == "arm") return std::make_unique<ArmEnv>();
    if (id == "drone-payload") return std::make_unique<DroneEnv>(DroneEnv::Hidden::Payload);
    if (id == "drone-temperature") {
        return std::make_unique<DroneEnv>(DroneEnv::Hidden::Temperature);
    }
    throw std::invalid_argument("unknown environment id '" + id + "'");
}

}  // namespace hplb::env
