#include "moran/scaling.hpp"

#include <stdexcept>

namespace moran {

ScalingConstants scaling_from_log_n(double log_n, const RateParams& rates) {
  rates.validate();
  if (!(log_n > 1.0))
    throw std::invalid_argument("scaling constants need log log N > 0 (N > e)");
  const double loglog_n = std::log(log_n);
  ScalingConstants c;
  c.log_n = log_n;
  c.big_t = 16.0 * loglog_n * loglog_n / (rates.selection_strength * log_n);
  c.big_w = log_n / (8.0 * loglog_n);
  c.birth_rate_w = rates.selection_strength * c.big_w / 2.0;
  c.death_rate_d = rates.death_event_rate();
  return c;
}

ScalingConstants scaling_from_n(double n, const RateParams& rates) {
  return scaling_from_log_n(std::log(n), rates);
}

ScalingConstants with_horizon(ScalingConstants base, double t) {
  if (!(t > 0.0)) throw std::invalid_argument("with_horizon: t must be > 0");
  base.horizon_t = t;
  const double ratio = t / (2.0 * base.big_t);
  // M < ratio <= M+1
  double m = std::ceil(ratio) - 1.0;
  if (m < 0.0) m = 0.0;
  base.m_steps = static_cast<std::int64_t>(m);
  base.grid.clear();
  base.grid.reserve(static_cast<std::size_t>(base.m_steps) + 2);
  for (std::int64_t i = 0; i <= base.m_steps + 1; ++i)
    base.grid.push_back(2.0 * static_cast<double>(i) * base.big_t);
  return base;
}

}  // namespace moran
