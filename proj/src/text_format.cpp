#include "esrlab/text_format.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

namespace esrlab::text {

std::string format_double(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (std::isnan(value)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view token) {
  token = trim(token);
  if (token == "inf" || token == "+inf") return HUGE_VAL;
  if (token == "-inf") return -HUGE_VAL;
  double value = 0.0;
  const char* first = token.data();
  if (!token.empty() && token.front() == '+') ++first;
  const auto res = std::from_chars(first, token.data() + token.size(), value);
  if (token.empty() || res.ec != std::errc{} || res.ptr != token.data() + token.size()) {
    throw std::invalid_argument("not a number: '" + std::string(token) + "'");
  }
  return value;
}

long long parse_integer(std::string_view token) {
  token = trim(token);
  long long value = 0;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), value);
  if (token.empty() || res.ec != std::errc{} || res.ptr != token.data() + token.size()) {
    throw std::invalid_argument("not an integer: '" + std::string(token) + "'");
  }
  return value;
}

std::vector<std::string_view> split(std::string_view line, char delimiter) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(delimiter, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

}  // namespace esrlab::text
