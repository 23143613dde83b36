#pragma once

#include <string>

// Internal text helpers shared by the core serializers. Not installed.
namespace churnforge::detail {

// Shortest decimal string that round-trips the exact double value.
std::string format_double(double value);

// Fixed two-decimal rendering used by the human-facing report tables.
std::string format_fixed2(double value);

} // namespace churnforge::detail
