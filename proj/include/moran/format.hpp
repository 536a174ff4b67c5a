#pragma once

#include <cstdio>
#include <string>

namespace moran {

// 17 significant digits: doubles round-trip exactly through text.
inline std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace moran
