#pragma once

#include <charconv>
#include <stdexcept>
#include <string>

namespace feel {

/// Shortest decimal form that parses back to the identical double.
inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string &text) {
  double v = 0;
  const char *begin = text.data();
  const char *end = begin + text.size();
  const auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc() || res.ptr != end)
    throw std::invalid_argument("not a number: '" + text + "'");
  return v;
}

inline long long parse_int(const std::string &text) {
  long long v = 0;
  const char *begin = text.data();
  const char *end = begin + text.size();
  const auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc() || res.ptr != end)
    throw std::invalid_argument("not an integer: '" + text + "'");
  return v;
}

inline unsigned long long parse_uint(const std::string &text) {
  unsigned long long v = 0;
  const char *begin = text.data();
  const char *end = begin + text.size();
  const auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc() || res.ptr != end)
    throw std::invalid_argument("not an unsigned integer: '" + text + "'");
  return v;
}

} // namespace feel
