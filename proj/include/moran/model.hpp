#pragma once

#include <cstdint>
#include <stdexcept>

namespace moran {

// Per-capita rates of the population process, without the population size.
// Useful on their own because the analytic evaluators take N (or log N)
// separately and never as an integer.
struct RateParams {
  double mutation_rate = 1.0;       // mu
  double beneficial_fraction = 1.0; // q
  double selection_strength = 1.0;  // gamma

  void validate() const {
    if (!(mutation_rate > 0.0))
      throw std::invalid_argument("mutation_rate must be > 0");
    if (!(beneficial_fraction > 0.0) || beneficial_fraction > 1.0)
      throw std::invalid_argument("beneficial_fraction must be in (0, 1]");
    if (!(selection_strength >= 0.0))
      throw std::invalid_argument("selection_strength must be >= 0");
  }

  // Rate of events at which an individual's fitness may drop: (1+q)*mu + 1.
  double death_event_rate() const {
    return (1.0 + beneficial_fraction) * mutation_rate + 1.0;
  }
};

struct ModelParams {
  std::int64_t n_individuals = 2;   // N
  double mutation_rate = 1.0;       // mu
  double beneficial_fraction = 1.0; // q
  double selection_strength = 1.0;  // gamma

  RateParams rates() const {
    return {mutation_rate, beneficial_fraction, selection_strength};
  }

  void validate() const {
    if (n_individuals < 2)
      throw std::invalid_argument("n_individuals must be >= 2");
    rates().validate();
  }
};

}  // namespace moran
