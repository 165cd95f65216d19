#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "hplb/core/rng.hpp"

namespace hplb::env {

// Description of the single latent parameter an environment hides: either a
// finite support of values or a continuous uniform range.
struct HiddenParamSpec {
    enum class Kind { Discrete, Continuous };

    Kind kind = Kind::Discrete;
    std::vector<double> support;  // discrete
    double low = 0.0;             // continuous
    double high = 0.0;
    std::string name;

    static HiddenParamSpec discrete(std::string name, std::vector<double> support) {
        if (support.empty()) throw std::invalid_argument("hidden param: empty support");
        HiddenParamSpec s;
        s.kind = Kind::Discrete;
        s.support = std::move(support);
        s.name = std::move(name);
        return s;
    }

    static HiddenParamSpec continuous(std::string name, double low, double high) {
        if (!(low < high)) throw std::invalid_argument("hidden param: requires low < high");
        HiddenParamSpec s;
        s.kind = Kind::Continuous;
        s.low = low;
        s.high = high;
        s.name = std::move(name);
        return s;
    }

    double sample(Rng& rng) const {
        if (kind == Kind::Discrete) {
            return support[static_cast<std::size_t>(rng.uniform_int(support.size()))];
        }
        return rng.uniform(low, high);
    }

    bool contains(double v) const {
        if (kind == Kind::Discrete) {
            for (double s : support) {
                if (s == v) return true;
            }
            return false;
        }
        return v >= low && v <= high;
    }

    // Min-max normalization to [0, 1], used when reporting regression errors
    // on continuous parameters.
    double normalize(double v) const {
        if (kind == Kind::Discrete) {
            double lo = support.front(), hi = support.front();
            for (double s : support) {
                lo = std::min(lo, s);
                hi = std::max(hi, s);
            }
            return hi > lo ? (v - lo) / (hi - lo) : 0.0;
        }
        return (v - low) / (high - low);
    }
};

}  // namespace hplb::env
