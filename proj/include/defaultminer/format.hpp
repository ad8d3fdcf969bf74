#pragma once

#include <charconv>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <string_view>

namespace defaultminer {

// Shortest decimal form that parses back to the identical double. All text
// artifacts (CSV, LP, JSON sidecars) go through this so that write/read
// round-trips are bit-exact and byte-deterministic.
inline std::string format_double(double value) {
  char buf[40];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw std::logic_error("format_double: buffer too small");
  return std::string(buf, ptr);
}

inline double parse_double(std::string_view text, const std::string& context) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw std::invalid_argument(context + ": bad number '" + std::string(text) + "'");
  }
  return value;
}

inline long parse_long(std::string_view text, const std::string& context) {
  long value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw std::invalid_argument(context + ": bad integer '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace defaultminer
