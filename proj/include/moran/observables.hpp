#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "moran/engine.hpp"
#include "moran/model.hpp"
#include "moran/rng.hpp"
#include "moran/scaling.hpp"

namespace moran {

// Levels of the top and second-ranked individuals. Under exchangeability the
// index tie-break is unobservable, so labels are level + multiplicity: the
// second label sits at the top level whenever that level holds two or more
// individuals.
struct TopLabels {
  std::int64_t alpha_level = 0;
  std::int64_t beta_level = 0;
  std::int64_t top_multiplicity = 0;
};

TopLabels labels_at(const LevelHistogram& hist);

// Times at which a tracked top/second individual suffered a deleterious
// mutation or a resampling death; strictly increasing.
struct DeathMarkSeries {
  std::vector<double> marks;

  std::string to_json() const;  // JSON array of times
};

// Membership in Lambda_K: at most K marks in [0, s_{M+1}], none in [0, s_1],
// and at most one per window [s_i, s_{i+1}) for 1 <= i <= M.
bool lambda_k_member(const DeathMarkSeries& marks, const ScalingConstants& c,
                     std::int64_t big_k);

// Conditional-uniform lower bound prod_{i=1..k} (t+1 - 2 i T) / (t+1) on the
// Lambda_K membership probability given k marks in [0, t+1].
double prop1_bound(const ScalingConstants& c, std::int64_t big_k, std::int64_t k);

struct PhiTheta {
  double phi = 0.0;    // sum over individuals of (j - X^k)^+
  double theta = 0.0;  // same sum restricted to gaps >= threshold
};

PhiTheta phi_theta(const LevelHistogram& hist, std::int64_t level_j,
                   double threshold_w);

// First sampled time in [s_i, s_{i+1}] at which the beta(i) level minus the
// running median drops below big_w, or nullopt. The trajectory piece holding
// s_i must carry a histogram snapshot (labels need the full state).
std::optional<double> stopping_time_tau(std::span<const TrajectorySample> trajectory,
                                        const ScalingConstants& c, std::int64_t i);

// Indicator of {max fitness >= M s / 2 for all s in [T, t]} over a dense
// trajectory (one sample per event, final sample at the trajectory end).
// Exact for piecewise-constant max against the increasing barrier: each
// constancy piece is checked at its right endpoint.
bool event_e_indicator(std::span<const TrajectorySample> trajectory,
                       const ScalingConstants& c, double t);

// Named diagnostics evaluated at one ladder point.
struct AsymptoticReport {
  double log_n = 0.0;
  std::vector<std::pair<std::string, double>> entries;

  double value(const std::string& name) const;
  std::string to_json() const;  // object keyed by diagnostic name
};

// Divergence bounds from the many-mutations argument: the Poisson-tail lower
// bound N (q mu T)^ceil(2W) e^{-q mu T} / (4 ceil(2W)!), its Stirling form,
// and the exact identities W^{4W} = N^{1/2 - log(8 log log N)/(2 log log N)}
// and W T = 2 log log N / gamma. All reported in log space.
AsymptoticReport lemma4_diagnostics(double log_n, const RateParams& rates);

// The single-mutation argument: (W/2)(1 - e^{-q mu T}) against its quadratic
// lower bound (2 W q mu T - W (q mu T)^2) / 2 and the leading-order value
// q mu log log N / gamma.
AsymptoticReport lemma5_diagnostics(double log_n, const RateParams& rates);

// Tracks one individual at the top level and one at the second level as
// coordinate labels (tags never pass to offspring; an overwritten individual
// keeps its label with its new fitness), refreshing both at every grid time
// s_i. Records a mark whenever a labelled individual gets a deleterious
// mutation or dies by resampling. Same-level resampling deaths, which the
// histogram engine elides as statistical no-ops, are restored here from
// their own Poisson clock so the marginal mark rate per individual is
// exactly (1-q) mu + (N-1)/N.
class DeathMarkWatcher : public EventSink {
 public:
  DeathMarkWatcher(const ModelParams& params, double refresh_spacing, Rng rng);

  void on_interval(double t0, double t1, const LevelHistogram& state) override;
  void on_event(const Event& event, const LevelHistogram& pre_state) override;

  DeathMarkSeries take_marks();
  std::int64_t watch_count() const { return static_cast<std::int64_t>(watch_levels_.size()); }

 private:
  void refresh(double now, const LevelHistogram& state);
  void fill_same_level_marks(double t0, double t1, const LevelHistogram& state);

  ModelParams params_;
  double refresh_spacing_;
  double next_refresh_ = 0.0;
  Rng rng_;
  std::vector<std::int64_t> watch_levels_;
  std::vector<double> marks_;
};

struct TrackResult {
  std::vector<TrajectorySample> trajectory;  // samples at the grid times
  DeathMarkSeries marks;
  double horizon = 0.0;
  std::int64_t n_watches = 2;
};

// Runs the engine with the two labelled individuals over [0, horizon].
TrackResult track_death_marks(const ModelParams& params, double horizon,
                              const ScalingConstants& c, std::uint64_t seed);

// On-line form of event_e_indicator for long runs where storing a dense
// trajectory is not practical.
class EventEMonitor : public EventSink {
 public:
  EventEMonitor(const ScalingConstants& c, std::optional<std::int64_t> m_override = {});

  void on_interval(double t0, double t1, const LevelHistogram& state) override;

  bool holds() const { return holds_; }
  std::int64_t barrier_m() const { return m_; }

 private:
  double big_t_;
  double t_end_;
  std::int64_t m_;
  bool holds_ = true;
};

}  // namespace moran
