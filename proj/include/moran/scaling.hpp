#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "moran/model.hpp"

namespace moran {

// The time/size constants of the adaptation bound:
//   big_t = 16 (log log N)^2 / (gamma log N)
//   big_w = log N / (8 log log N)
//   birth_rate_w = gamma big_w / 2
//   death_rate_d = (1 + q) mu + 1
//   grid s_i = 2 i big_t, and M with M < t / (2 big_t) <= M + 1.
// Built from log N directly so astronomically large N never touches an
// integer type. All logs are natural.
struct ScalingConstants {
  double log_n = 0.0;
  double big_t = 0.0;        // T
  double big_w = 0.0;        // W
  double birth_rate_w = 0.0; // w
  double death_rate_d = 0.0; // d
  double horizon_t = std::numeric_limits<double>::quiet_NaN();
  std::int64_t m_steps = 0;  // M
  std::vector<double> grid;  // s_0 .. s_{M+1}; empty without a horizon

  bool has_horizon() const { return !std::isnan(horizon_t); }
};

// Throws if log log N <= 0 (N <= e).
ScalingConstants scaling_from_log_n(double log_n, const RateParams& rates);
ScalingConstants scaling_from_n(double n, const RateParams& rates);

// Adds the horizon-dependent pieces (M and the grid) to `base`.
ScalingConstants with_horizon(ScalingConstants base, double t);

}  // namespace moran
