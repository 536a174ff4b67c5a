#include "moran/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/special_functions/gamma.hpp>

namespace moran::stats {

MeanSe mean_se(std::span<const double> xs) {
  MeanSe r;
  r.n = xs.size();
  if (r.n == 0) return r;
  double sum = 0.0;
  for (double x : xs) sum += x;
  r.mean = sum / static_cast<double>(r.n);
  if (r.n < 2) return r;
  double ss = 0.0;
  for (double x : xs) {
    const double d = x - r.mean;
    ss += d * d;
  }
  const double var = ss / static_cast<double>(r.n - 1);
  r.se = std::sqrt(var / static_cast<double>(r.n));
  return r;
}

WilsonInterval wilson(std::int64_t successes, std::int64_t n, double z) {
  if (n <= 0) throw std::invalid_argument("wilson: n must be positive");
  WilsonInterval w;
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(successes) / nn;
  w.freq = p;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = (p + z2 / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
  w.lo = successes == 0 ? 0.0 : std::max(0.0, center - half);
  w.hi = successes == n ? 1.0 : std::min(1.0, center + half);
  return w;
}

double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

ChiSquare chi_square_gof(std::span<const std::int64_t> observed,
                         std::span<const double> expected_probs,
                         double min_expected) {
  if (observed.size() != expected_probs.size() || observed.empty())
    throw std::invalid_argument("chi_square_gof: size mismatch");
  std::int64_t total = 0;
  for (auto o : observed) total += o;
  if (total <= 0) throw std::invalid_argument("chi_square_gof: no observations");

  // Pool adjacent cells until every expected count reaches min_expected.
  std::vector<double> exp_counts;
  std::vector<double> obs_counts;
  double acc_e = 0.0, acc_o = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    acc_e += expected_probs[i] * static_cast<double>(total);
    acc_o += static_cast<double>(observed[i]);
    if (acc_e >= min_expected) {
      exp_counts.push_back(acc_e);
      obs_counts.push_back(acc_o);
      acc_e = acc_o = 0.0;
    }
  }
  if (acc_e > 0.0 || acc_o > 0.0) {
    if (!exp_counts.empty()) {
      exp_counts.back() += acc_e;
      obs_counts.back() += acc_o;
    } else {
      exp_counts.push_back(acc_e);
      obs_counts.push_back(acc_o);
    }
  }

  ChiSquare c;
  for (std::size_t i = 0; i < exp_counts.size(); ++i) {
    if (exp_counts[i] <= 0.0) continue;
    const double d = obs_counts[i] - exp_counts[i];
    c.statistic += d * d / exp_counts[i];
  }
  c.dof = static_cast<double>(exp_counts.size()) - 1.0;
  if (c.dof < 1.0) {
    c.dof = 0.0;
    c.p_value = 1.0;
    return c;
  }
  c.p_value = boost::math::gamma_q(c.dof / 2.0, c.statistic / 2.0);
  return c;
}

namespace {

// Sum of t*(t-1)*factor(t) over tie groups of a sorted copy.
template <typename F>
double tie_sum(std::vector<double> v, F factor) {
  std::sort(v.begin(), v.end());
  double out = 0.0;
  std::size_t i = 0;
  while (i < v.size()) {
    std::size_t j = i;
    while (j < v.size() && v[j] == v[i]) ++j;
    const double t = static_cast<double>(j - i);
    out += t * (t - 1.0) * factor(t);
    i = j;
  }
  return out;
}

}  // namespace

Kendall kendall_tau_b(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("kendall_tau_b: need paired data");
  const std::size_t n = x.size();
  std::int64_t concordant = 0, discordant = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = x[i] - x[j];
      const double dy = y[i] - y[j];
      const double prod = dx * dy;
      if (prod > 0.0) ++concordant;
      else if (prod < 0.0) ++discordant;
    }
  }
  const double nn = static_cast<double>(n);
  const double n0 = nn * (nn - 1.0) / 2.0;
  const double tx = tie_sum({x.begin(), x.end()}, [](double) { return 0.5; });
  const double ty = tie_sum({y.begin(), y.end()}, [](double) { return 0.5; });
  const double s = static_cast<double>(concordant - discordant);

  Kendall k;
  k.n = n;
  const double denom = std::sqrt((n0 - tx) * (n0 - ty));
  k.tau_b = denom > 0.0 ? s / denom : 0.0;

  // Tie-corrected variance of S (Kendall 1970).
  const double vt = tie_sum({x.begin(), x.end()},
                            [](double t) { return 2.0 * t + 5.0; });
  const double vu = tie_sum({y.begin(), y.end()},
                            [](double t) { return 2.0 * t + 5.0; });
  const double v0 = nn * (nn - 1.0) * (2.0 * nn + 5.0);
  const double txs = tie_sum({x.begin(), x.end()}, [](double) { return 1.0; });
  const double tys = tie_sum({y.begin(), y.end()}, [](double) { return 1.0; });
  const double tx2 = tie_sum({x.begin(), x.end()}, [](double t) { return t - 2.0; });
  const double ty2 = tie_sum({y.begin(), y.end()}, [](double t) { return t - 2.0; });
  double var_s = (v0 - vt - vu) / 18.0;
  var_s += txs * tys / (2.0 * nn * (nn - 1.0));
  if (n > 2) var_s += tx2 * ty2 / (9.0 * nn * (nn - 1.0) * (nn - 2.0));
  if (var_s > 0.0) {
    k.z = s / std::sqrt(var_s);
    k.p_greater = normal_sf(k.z);
  } else {
    k.z = 0.0;
    k.p_greater = 1.0;
  }
  return k;
}

LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("linear_fit: need >= 2 points");
  const double n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0.0) throw std::invalid_argument("linear_fit: degenerate predictor");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    ss_res += r * r;
  }
  f.r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  f.slope_se = x.size() > 2 ? std::sqrt(ss_res / (n - 2.0) / sxx) : 0.0;
  return f;
}

}  // namespace moran::stats
