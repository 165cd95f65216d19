#pragma once

#include <charconv>
#include <cstdio>
#include <string>
#include <system_error>

namespace hplb {

// Formats a double with 17 significant digits, enough to round-trip
// bit-exactly through a correctly-rounded parser. Used for every number we
// persist (datasets, checkpoints, CSV), so that rewriting a file from the
// same data is byte-identical.
inline std::string format_g17(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), x,
                             std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

inline void append_g17(std::string& out, double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), x,
                             std::chars_format::general, 17);
    out.append(buf, res.ptr);
}

}  // namespace hplb
