#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace esrlab::text {

/// Shortest representation that parses back to the same double; never locale dependent.
std::string format_double(double value);

/// Strict parse of the whole token; throws std::invalid_argument otherwise.
double parse_double(std::string_view token);
long long parse_integer(std::string_view token);

std::vector<std::string_view> split(std::string_view line, char delimiter);
std::string_view trim(std::string_view s);

}  // namespace esrlab::text
