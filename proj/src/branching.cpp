#include "moran/branching.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace moran {

namespace {

constexpr double kCriticalWindow = 1e-8;  // |w-d| s below this: series limit
constexpr double kLargeExponent = 500.0;  // (w-d) s above this: e^{-x} form

// f, 1-f, g, 1-g evaluated together from stable building blocks.
struct FgValues {
  double f, one_minus_f, g, one_minus_g;
};

FgValues evaluate_fg(const BranchingParams& bp, double s) {
  if (s < 0.0) throw std::invalid_argument("branching: s must be >= 0");
  const double w = bp.birth, d = bp.death;
  const double x = (w - d) * s;
  FgValues v{};
  if (std::abs(x) < kCriticalWindow) {
    v.f = d * s / (1.0 + d * s);
    v.one_minus_f = 1.0 / (1.0 + d * s);
    v.g = w * s / (1.0 + w * s);
    v.one_minus_g = 1.0 / (1.0 + w * s);
    return v;
  }
  if (x > kLargeExponent) {
    const double em = std::exp(-x);
    const double denom = w - d * em;
    v.f = d * (1.0 - em) / denom;
    v.one_minus_f = (w - d) / denom;
    v.one_minus_g = (w - d) * em / denom;
    v.g = 1.0 - v.one_minus_g;
    return v;
  }
  const double e = std::expm1(x);  // e^x - 1, exact near critical
  const double denom = w * e + (w - d);
  v.f = d * e / denom;
  v.g = w * e / denom;
  v.one_minus_g = (w - d) / denom;
  v.one_minus_f = (w - d) * (e + 1.0) / denom;
  return v;
}

}  // namespace

void BranchingParams::validate() const {
  if (!(birth > 0.0)) throw std::invalid_argument("branching: birth must be > 0");
  if (!(death > 0.0)) throw std::invalid_argument("branching: death must be > 0");
  if (!(type_advance >= 0.0))
    throw std::invalid_argument("branching: type_advance must be >= 0");
}

BranchingParams branching_at_scale(const ScalingConstants& c, const RateParams& rates) {
  return {c.birth_rate_w, c.death_rate_d,
          rates.beneficial_fraction * rates.mutation_rate};
}

double extinction_prob(const BranchingParams& bp, double s) {
  bp.validate();
  return evaluate_fg(bp, s).f;
}

double tail_param(const BranchingParams& bp, double s) {
  bp.validate();
  return evaluate_fg(bp, s).g;
}

double one_minus_tail(const BranchingParams& bp, double s) {
  bp.validate();
  return evaluate_fg(bp, s).one_minus_g;
}

double one_minus_extinction(const BranchingParams& bp, double s) {
  bp.validate();
  return evaluate_fg(bp, s).one_minus_f;
}

double count_pmf(const BranchingParams& bp, double s, std::int64_t i) {
  bp.validate();
  if (i < 0) throw std::invalid_argument("count_pmf: negative count");
  const FgValues v = evaluate_fg(bp, s);
  if (i == 0) return v.f;
  return v.one_minus_f * v.one_minus_g * std::pow(v.g, static_cast<double>(i - 1));
}

double generating_function(const BranchingParams& bp, double x, double s) {
  bp.validate();
  if (x < 0.0 || x > 1.0)
    throw std::invalid_argument("generating_function: x must be in [0, 1]");
  const FgValues v = evaluate_fg(bp, s);
  const double one_minus_gx = (1.0 - x) + x * v.one_minus_g;
  return v.f + v.one_minus_f * v.one_minus_g * x / one_minus_gx;
}

double survival_above(const BranchingParams& bp, double s, double threshold) {
  return std::exp(log_survival_above(bp, s, threshold));
}

double log_survival_above(const BranchingParams& bp, double s, double threshold) {
  bp.validate();
  if (threshold < 0.0)
    throw std::invalid_argument("survival_above: threshold must be >= 0");
  const FgValues v = evaluate_fg(bp, s);
  const double head = std::log1p(-v.f);
  if (threshold == 0.0) return head;
  return head + threshold * std::log1p(-v.one_minus_g);
}

Prop2Report prop2_report_log_n(double log_n, const RateParams& rates) {
  const ScalingConstants c = scaling_from_log_n(log_n, rates);
  const BranchingParams bp = branching_at_scale(c, rates);
  const FgValues v = evaluate_fg(bp, c.big_t);
  Prop2Report r;
  r.log10_n = log_n / std::log(10.0);
  r.w = c.birth_rate_w;
  r.big_t = c.big_t;
  r.big_w = c.big_w;
  r.d = c.death_rate_d;
  r.wf_t = c.birth_rate_w * v.f;
  // (log N)(1-f)(1-g) assembled in log space so the ladder can run far past
  // the double range of N itself.
  r.log_n_p1 =
      std::exp(std::log(log_n) + std::log(v.one_minus_f) + std::log(v.one_minus_g));
  r.survival = std::exp(log_survival_above(bp, c.big_t, c.big_w));
  r.w_t = c.birth_rate_w * c.big_t;
  const double loglog_n = std::log(log_n);
  r.e_wt_relerr = std::abs(r.w_t - loglog_n) / loglog_n;
  return r;
}

Prop2Report prop2_report(double n, const RateParams& rates) {
  return prop2_report_log_n(std::log(n), rates);
}

std::string Prop2Report::to_json() const {
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "{\"N_log10\": %.17g, \"w\": %.17g, \"T\": %.17g, \"wf_T\": %.17g, "
                "\"d\": %.17g, \"logN_P1\": %.17g, \"survival\": %.17g}",
                log10_n, w, big_t, wf_t, d, log_n_p1, survival);
  return buf;
}

std::vector<BdPathPoint> simulate_bd(const BranchingParams& bp, double horizon,
                                     std::uint64_t seed) {
  bp.validate();
  if (!(horizon > 0.0)) throw std::invalid_argument("simulate_bd: horizon must be > 0");
  Rng rng(seed);
  std::vector<BdPathPoint> path;
  BdPathPoint p{0.0, 1, 0};
  path.push_back(p);
  for (;;) {
    const double n0 = static_cast<double>(p.type0);
    const double n1 = static_cast<double>(p.advanced);
    const double birth0 = bp.birth * n0;
    const double birth1 = bp.birth * n1;
    const double death0 = bp.death * n0;
    const double death1 = bp.death * n1;
    const double advance = bp.type_advance * n0;
    const double total = birth0 + birth1 + death0 + death1 + advance;
    if (total <= 0.0) break;  // extinct
    const double t_next = p.time + rng.exponential(total);
    if (t_next > horizon) break;
    p.time = t_next;
    const double u = rng.uniform01() * total;
    if (u < birth0) {
      p.type0 += 1;  // offspring inherits the parent's type
    } else if (u < birth0 + birth1) {
      p.advanced += 1;
    } else if (u < birth0 + birth1 + death0) {
      p.type0 -= 1;
    } else if (u < birth0 + birth1 + death0 + death1) {
      p.advanced -= 1;
    } else {
      p.type0 -= 1;
      p.advanced += 1;
    }
    path.push_back(p);
    if (p.total() == 0) break;
  }
  return path;
}

}  // namespace moran
