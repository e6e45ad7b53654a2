#pragma once

// Shared numeric formatting for CSV and report output: 17 significant
// digits, C locale, no grouping.

#include <cstdio>
#include <string>

namespace emlag {

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace emlag
