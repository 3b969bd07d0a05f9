#pragma once

#include <cmath>
#include <cstdio>
#include <string>

namespace ergolab {

// Round-trip representation with 17 significant digits.
inline std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

}  // namespace ergolab
