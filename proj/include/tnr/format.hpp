#pragma once

#include <charconv>
#include <string>

namespace tnr {

// Shortest decimal form that round-trips exactly; used for all CSV output.
inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return {buf, res.ptr};
}

}  // namespace tnr
