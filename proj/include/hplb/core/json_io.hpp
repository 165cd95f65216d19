#pragma once

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>

#include "hplb/core/numfmt.hpp"

namespace hplb {

// Serializer matching the persisted-file contract: floating point numbers are
// written with 17 significant digits (bit-exact decimal round-trip), object
// keys in sorted order, no insignificant whitespace. nlohmann's own dump()
// would emit shortest-round-trip doubles instead.
inline void dump_json_g17(const nlohmann::json& j, std::string& out) {
    using value_t = nlohmann::json::value_t;
    switch (j.type()) {
        case value_t::null:
            out += "null";
            break;
        case value_t::boolean:
            out += j.get<bool>() ? "true" : "false";
            break;
        case value_t::number_integer:
            out += std::to_string(j.get<std::int64_t>());
            break;
        case value_t::number_unsigned:
            out += std::to_string(j.get<std::uint64_t>());
            break;
        case value_t::number_float: {
            const double v = j.get<double>();
            if (!std::isfinite(v)) {
                throw std::invalid_argument("json: refusing to serialize non-finite number");
            }
            append_g17(out, v);
            break;
        }
        case value_t::string:
            out += nlohmann::json(j.get<std::string>()).dump();
            break;
        case value_t::array: {
            out += '[';
            bool first = true;
            for (const auto& item : j) {
                if (!first) out += ',';
                first = false;
                dump_json_g17(item, out);
            }
            out += ']';
            break;
        }
        case value_t::object: {
            out += '{';
            bool first = true;
            for (auto it = j.cbegin(); it != j.cend(); ++it) {
                if (!first) out += ',';
                first = false;
                out += nlohmann::json(it.key()).dump();
                out += ':';
                dump_json_g17(it.value(), out);
            }
            out += '}';
            break;
        }
        default:
            throw std::invalid_argument("json: unsupported value type");
    }
}

inline std::string dump_json_g17(const nlohmann::json& j) {
    std::string out;
    dump_json_g17(j, out);
    return out;
}

inline void save_json_file(const nlohmann::json& j, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("json: cannot open " + path + " for writing");
    out << dump_json_g17(j) << '\n';
    if (!out) throw std::runtime_error("json: write to " + path + " failed");
}

inline nlohmann::json load_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("json: cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error("json: parse error in " + path + ": " + e.what());
    }
    return j;
}

}  // namespace hplb
