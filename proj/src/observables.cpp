#include "moran/observables.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace moran {

TopLabels labels_at(const LevelHistogram& hist) {
  const auto entries = hist.entries();
  if (entries.empty()) throw std::invalid_argument("labels_at: empty histogram");
  TopLabels l;
  const auto& top = entries.back();
  l.alpha_level = top.level;
  l.top_multiplicity = top.count;
  if (top.count >= 2 || entries.size() == 1) {
    l.beta_level = top.level;
  } else {
    l.beta_level = entries[entries.size() - 2].level;
  }
  return l;
}

std::string DeathMarkSeries::to_json() const {
  std::string out = "[";
  char buf[64];
  for (std::size_t i = 0; i < marks.size(); ++i) {
    if (i) out += ", ";
    std::snprintf(buf, sizeof(buf), "%.17g", marks[i]);
    out += buf;
  }
  out += "]";
  return out;
}

bool lambda_k_member(const DeathMarkSeries& marks, const ScalingConstants& c,
                     std::int64_t big_k) {
  if (big_k < 0) throw std::invalid_argument("lambda_k_member: K must be >= 0");
  if (!c.has_horizon() || c.grid.size() < 2)
    throw std::invalid_argument("lambda_k_member: constants need a horizon grid");
  const double s1 = c.grid[1];
  const double s_last = c.grid.back();  // s_{M+1}

  std::int64_t total = 0;
  for (double m : marks.marks) {
    if (m <= s1) return false;  // no marks in [0, s_1]
    if (m <= s_last) ++total;
  }
  if (total > big_k) return false;

  for (std::size_t i = 1; i + 1 < c.grid.size(); ++i) {
    const double lo = c.grid[i], hi = c.grid[i + 1];
    std::int64_t in_window = 0;
    for (double m : marks.marks)
      if (m >= lo && m < hi && ++in_window > 1) return false;
  }
  return true;
}

double prop1_bound(const ScalingConstants& c, std::int64_t big_k, std::int64_t k) {
  if (k < 0 || k > big_k) throw std::invalid_argument("prop1_bound: need 0 <= k <= K");
  if (!c.has_horizon()) throw std::invalid_argument("prop1_bound: constants need t");
  const double t1 = c.horizon_t + 1.0;
  if (2.0 * static_cast<double>(k) * c.big_t >= t1)
    throw std::invalid_argument("prop1_bound: vacuous (2kT >= t+1)");
  double bound = 1.0;
  for (std::int64_t i = 1; i <= k; ++i)
    bound *= (t1 - 2.0 * static_cast<double>(i) * c.big_t) / t1;
  return bound;
}

PhiTheta phi_theta(const LevelHistogram& hist, std::int64_t level_j,
                   double threshold_w) {
  PhiTheta r;
  for (const auto& e : hist.entries()) {
    if (e.level >= level_j) break;
    const double gap = static_cast<double>(level_j - e.level);
    const double mass = gap * static_cast<double>(e.count);
    r.phi += mass;
    if (gap >= threshold_w) r.theta += mass;
  }
  return r;
}

namespace {

// Index of the trajectory piece holding time `s` (last sample with time <= s).
std::size_t piece_at(std::span<const TrajectorySample> traj, double s) {
  if (traj.empty() || traj.front().time > s)
    throw std::invalid_argument("trajectory does not cover the requested time");
  std::size_t lo = 0, hi = traj.size() - 1;
  while (lo < hi) {
    const std::size_t mid = (lo + hi + 1) / 2;
    if (traj[mid].time <= s) lo = mid;
    else hi = mid - 1;
  }
  return lo;
}

}  // namespace

std::optional<double> stopping_time_tau(std::span<const TrajectorySample> trajectory,
                                        const ScalingConstants& c, std::int64_t i) {
  if (!c.has_horizon() || i < 0 ||
      static_cast<std::size_t>(i) + 1 >= c.grid.size())
    throw std::invalid_argument("stopping_time_tau: i outside the grid");
  const double s_i = c.grid[static_cast<std::size_t>(i)];
  const double s_next = c.grid[static_cast<std::size_t>(i) + 1];
  if (trajectory.empty() || trajectory.back().time < s_next)
    throw std::invalid_argument("stopping_time_tau: trajectory must cover [s_i, s_{i+1}]");

  const std::size_t start = piece_at(trajectory, s_i);
  if (!trajectory[start].histogram_snapshot)
    throw std::invalid_argument("stopping_time_tau: piece at s_i lacks a snapshot");
  const std::int64_t beta = labels_at(*trajectory[start].histogram_snapshot).beta_level;

  for (std::size_t j = start; j < trajectory.size(); ++j) {
    const auto& piece = trajectory[j];
    if (piece.time > s_next) break;
    const double gap = static_cast<double>(beta - piece.median_level);
    if (gap < c.big_w) return std::max(piece.time, s_i);
  }
  return std::nullopt;
}

bool event_e_indicator(std::span<const TrajectorySample> trajectory,
                       const ScalingConstants& c, double t) {
  if (!c.has_horizon())
    throw std::invalid_argument("event_e_indicator: constants need t");
  if (trajectory.empty() || trajectory.front().time > c.big_t ||
      trajectory.back().time < t)
    throw std::invalid_argument("event_e_indicator: trajectory must cover [T, t]");
  if (t < c.big_t) return true;  // empty window [T, t]
  const double barrier = static_cast<double>(c.m_steps) / 2.0;
  for (std::size_t j = 0; j < trajectory.size(); ++j) {
    const double begin = trajectory[j].time;
    const double end = (j + 1 < trajectory.size()) ? trajectory[j + 1].time
                                                   : std::max(begin, t);
    if (end <= c.big_t) continue;  // piece lies before the window
    if (begin > t) break;
    const double hi = std::min(end, t);
    if (static_cast<double>(trajectory[j].max_fitness) < barrier * hi) return false;
  }
  return true;
}

double AsymptoticReport::value(const std::string& name) const {
  for (const auto& [k, v] : entries)
    if (k == name) return v;
  throw std::invalid_argument("AsymptoticReport: unknown entry " + name);
}

std::string AsymptoticReport::to_json() const {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "{\"log_n\": %.17g", log_n);
  std::string out = buf;
  for (const auto& [k, v] : entries) {
    std::snprintf(buf, sizeof(buf), ", \"%s\": %.17g", k.c_str(), v);
    out += buf;
  }
  out += "}";
  return out;
}

AsymptoticReport lemma4_diagnostics(double log_n, const RateParams& rates) {
  const ScalingConstants c = scaling_from_log_n(log_n, rates);
  const double loglog_n = std::log(log_n);
  const double q_mu = rates.beneficial_fraction * rates.mutation_rate;
  const double x = q_mu * c.big_t;
  const double ceil_2w = std::ceil(2.0 * c.big_w);

  AsymptoticReport r;
  r.log_n = log_n;
  const double poisson_tail_log =
      log_n + ceil_2w * std::log(x) - x - std::log(4.0) - std::lgamma(ceil_2w + 1.0);
  const double stirling_log =
      log_n * (0.5 + std::log(8.0 * loglog_n) / (2.0 * loglog_n)) +
      ceil_2w * std::log(2.0 * q_mu * loglog_n) - x - ceil_2w -
      2.0 * c.big_w * std::log(2.0 * rates.selection_strength) -
      0.5 * std::log(4.0 * M_PI * c.big_w) - std::log(4.0);
  const double w4w_lhs = 4.0 * c.big_w * std::log(c.big_w);
  const double w4w_rhs = log_n * (0.5 - std::log(8.0 * loglog_n) / (2.0 * loglog_n));
  const double wt = c.big_w * c.big_t;
  const double wt_rhs = 2.0 * loglog_n / rates.selection_strength;

  r.entries = {
      {"poisson_tail_log", poisson_tail_log},
      {"stirling_bound_log", stirling_log},
      {"w4w_log_lhs", w4w_lhs},
      {"w4w_log_rhs", w4w_rhs},
      {"w4w_relerr", std::abs(w4w_lhs - w4w_rhs) / std::abs(w4w_rhs)},
      {"wt_product", wt},
      {"wt_identity_rhs", wt_rhs},
      {"wt_relerr", std::abs(wt - wt_rhs) / wt_rhs},
  };
  return r;
}

AsymptoticReport lemma5_diagnostics(double log_n, const RateParams& rates) {
  const ScalingConstants c = scaling_from_log_n(log_n, rates);
  const double loglog_n = std::log(log_n);
  const double x = rates.beneficial_fraction * rates.mutation_rate * c.big_t;
  const double value = (c.big_w / 2.0) * (-std::expm1(-x));
  // 1 - e^{-x} > x - x^2/2 gives (W/2)(x - x^2/2); the quadratic as displayed
  // in the source derivation, (2Wx - Wx^2)/2, carries a factor-2 slip and is
  // reported separately.
  const double lower = (c.big_w / 2.0) * (x - x * x / 2.0);
  const double displayed = (2.0 * c.big_w * x - c.big_w * x * x) / 2.0;
  const double leading = rates.beneficial_fraction * rates.mutation_rate *
                         loglog_n / rates.selection_strength;
  AsymptoticReport r;
  r.log_n = log_n;
  r.entries = {
      {"value", value},
      {"lower_bound", lower},
      {"displayed_rhs", displayed},
      {"leading_order", leading},
      {"bound_holds", value > lower ? 1.0 : 0.0},
  };
  return r;
}

DeathMarkWatcher::DeathMarkWatcher(const ModelParams& params,
                                   double refresh_spacing, Rng rng)
    : params_(params), refresh_spacing_(refresh_spacing), rng_(rng) {
  if (!(refresh_spacing > 0.0))
    throw std::invalid_argument("DeathMarkWatcher: refresh spacing must be > 0");
}

void DeathMarkWatcher::refresh(double /*now*/, const LevelHistogram& state) {
  const TopLabels labels = labels_at(state);
  watch_levels_ = {labels.alpha_level, labels.beta_level};
}

void DeathMarkWatcher::fill_same_level_marks(double t0, double t1,
                                             const LevelHistogram& state) {
  const double len = t1 - t0;
  if (!(len > 0.0) || watch_levels_.empty()) return;
  const double n = static_cast<double>(params_.n_individuals);
  std::vector<double> batch;
  for (std::int64_t level : watch_levels_) {
    const double rate =
        static_cast<double>(state.count_at(level) - 1) / n;
    if (rate <= 0.0) continue;
    const std::int64_t k = rng_.poisson(rate * len);
    for (std::int64_t j = 0; j < k; ++j)
      batch.push_back(t0 + rng_.uniform01() * len);
  }
  if (!batch.empty()) {
    std::sort(batch.begin(), batch.end());
    marks_.insert(marks_.end(), batch.begin(), batch.end());
  }
}

void DeathMarkWatcher::on_interval(double t0, double t1,
                                   const LevelHistogram& state) {
  double cur = t0;
  while (next_refresh_ < t1) {
    if (next_refresh_ >= cur) {
      fill_same_level_marks(cur, next_refresh_, state);
      refresh(next_refresh_, state);
      cur = next_refresh_;
    }
    next_refresh_ += refresh_spacing_;
  }
  fill_same_level_marks(cur, t1, state);
}

void DeathMarkWatcher::on_event(const Event& event, const LevelHistogram& pre_state) {
  if (watch_levels_.empty()) return;
  std::int64_t watchers_here = 0;
  for (std::int64_t level : watch_levels_)
    if (level == event.from_level) ++watchers_here;
  if (watchers_here == 0) return;

  const std::int64_t c_from = pre_state.count_at(event.from_level);
  const std::int64_t idx =
      static_cast<std::int64_t>(rng_.below(static_cast<std::uint64_t>(c_from)));
  if (idx >= watchers_here) return;

  // idx-th watch at this level (in stable watch order) is the individual hit.
  std::int64_t seen = 0;
  for (std::int64_t& level : watch_levels_) {
    if (level != event.from_level) continue;
    if (seen++ != idx) continue;
    switch (event.kind) {
      case EventKind::DeleteriousMutation:
      case EventKind::Resample:
        marks_.push_back(event.time);
        break;
      case EventKind::BeneficialMutation:
      case EventKind::Selection:
        break;
    }
    level = event.to_level;  // the label follows the coordinate
    break;
  }
}

DeathMarkSeries DeathMarkWatcher::take_marks() {
  std::sort(marks_.begin(), marks_.end());
  return DeathMarkSeries{std::move(marks_)};
}

TrackResult track_death_marks(const ModelParams& params, double horizon,
                              const ScalingConstants& c, std::uint64_t seed) {
  if (!(horizon > 0.0))
    throw std::invalid_argument("track_death_marks: horizon must be > 0");
  DeathMarkWatcher watcher(params, 2.0 * c.big_t,
                           Rng::stream(seed, 0x6d61726b73ull));
  std::vector<double> sample_times;
  for (double s = 0.0; s <= horizon; s += 2.0 * c.big_t) sample_times.push_back(s);
  if (sample_times.back() < horizon) sample_times.push_back(horizon);

  TrackResult result;
  result.trajectory =
      simulate(params, horizon, sample_times, seed, SimulateOptions{}, &watcher);
  result.marks = watcher.take_marks();
  result.horizon = horizon;
  result.n_watches = watcher.watch_count();
  return result;
}

EventEMonitor::EventEMonitor(const ScalingConstants& c,
                             std::optional<std::int64_t> m_override)
    : big_t_(c.big_t),
      t_end_(c.horizon_t),
      m_(m_override.value_or(c.m_steps)) {
  if (!c.has_horizon())
    throw std::invalid_argument("EventEMonitor: constants need t");
}

void EventEMonitor::on_interval(double /*t0*/, double t1,
                                const LevelHistogram& state) {
  if (!holds_) return;
  if (t1 <= big_t_) return;
  const double hi = std::min(t1, t_end_);
  if (hi < big_t_) return;
  const double barrier = static_cast<double>(m_) * hi / 2.0;
  if (static_cast<double>(max_fitness(state)) < barrier) holds_ = false;
}

}  // namespace moran
