#pragma once

#include <charconv>
#include <string>
#include <string_view>

#include "mtlab/errors.hpp"

namespace mtlab {

// Shortest decimal form that parses back to the identical double. Keeps
// serialized files byte-stable and round-trip exact.
inline std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, p);
}

inline double parse_double(std::string_view s) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw InputError("bad number '" + std::string(s) + "'");
  return v;
}

inline long long parse_int(std::string_view s) {
  long long v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw InputError("bad integer '" + std::string(s) + "'");
  return v;
}

}  // namespace mtlab
