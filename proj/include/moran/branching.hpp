#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "moran/model.hpp"
#include "moran/rng.hpp"
#include "moran/scaling.hpp"

namespace moran {

// Birth-death process with a one-way type advance: particles die at rate
// `death`, give birth at rate `birth`, and type-0 particles become advanced
// at rate `type_advance`.
struct BranchingParams {
  double birth = 1.0;         // w
  double death = 1.0;         // d
  double type_advance = 0.0;  // q mu

  void validate() const;
};

BranchingParams branching_at_scale(const ScalingConstants& c, const RateParams& rates);

// Extinction probability f(s) = d (e^{(w-d)s} - 1) / (w e^{(w-d)s} - d);
// switches to the critical limit d s / (1 + d s) when |w-d| s < 1e-8.
double extinction_prob(const BranchingParams& bp, double s);

// g(s) = w (e^{(w-d)s} - 1) / (w e^{(w-d)s} - d) = (w/d) f(s).
double tail_param(const BranchingParams& bp, double s);

// 1 - g(s) and 1 - f(s) computed without cancellation.
double one_minus_tail(const BranchingParams& bp, double s);
double one_minus_extinction(const BranchingParams& bp, double s);

// P(Z_s = i | Z_0 = 1): f(s) at i = 0, else (1-f)(1-g) g^{i-1}.
double count_pmf(const BranchingParams& bp, double s, std::int64_t i);

// Generating function F(x, s) = sum_i P(Z_s = i) x^i, 0 <= x <= 1.
double generating_function(const BranchingParams& bp, double x, double s);

// P(Z_s > threshold) = (1 - f(s)) g(s)^threshold; real thresholds allowed.
double survival_above(const BranchingParams& bp, double s, double threshold);
double log_survival_above(const BranchingParams& bp, double s, double threshold);

// The Z_T diagnostics whose limits are w f(T) -> d, (log N) P(Z_T = 1) -> 1
// and P(Z_T > W) -> 1.
struct Prop2Report {
  double log10_n = 0.0;
  double w = 0.0;
  double big_t = 0.0;
  double big_w = 0.0;
  double d = 0.0;
  double wf_t = 0.0;        // w f(T)
  double log_n_p1 = 0.0;    // (log N)(1-f(T))(1-g(T))
  double survival = 0.0;    // P(Z_T > W)
  double w_t = 0.0;         // w T, equals log log N exactly
  double e_wt_relerr = 0.0; // |wT - log log N| / log log N  (e^{wT} = log N in log space)

  std::string to_json() const;
};

Prop2Report prop2_report_log_n(double log_n, const RateParams& rates);
Prop2Report prop2_report(double n, const RateParams& rates);

// One row of an exact simulation path: counts by type after each event.
struct BdPathPoint {
  double time = 0.0;
  std::int64_t type0 = 0;
  std::int64_t advanced = 0;
  std::int64_t total() const { return type0 + advanced; }
};

// Exact simulation of the branching process from one type-0 particle.
// Deterministic given the seed; stops at extinction or the horizon.
std::vector<BdPathPoint> simulate_bd(const BranchingParams& bp, double horizon,
                                     std::uint64_t seed);

}  // namespace moran
