#pragma once

#include <charconv>
#include <string>
#include <system_error>

namespace gridrrt {

// Locale-independent, shortest round-trip formatting for artifact files.
inline std::string fmt_double(double v) {
    char buf[40];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

inline std::string fmt_fixed(double v, int precision) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, precision);
    if (ec != std::errc{}) return fmt_double(v);
    return std::string(buf, ptr);
}

}  // namespace gridrrt
