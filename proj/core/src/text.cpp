#include "text.hpp"

#include <charconv>
#include <cstdio>
#include <system_error>

namespace churnforge::detail {

std::string format_double(double value) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc{}) return "nan";
    return std::string(buf, ptr);
}

std::string format_fixed2(double value) {
    char buf[64];
    const int n = std::snprintf(buf, sizeof(buf), "%.2f", value);
    return std::string(buf, buf + (n > 0 ? n : 0));
}

} // namespace churnforge::detail
