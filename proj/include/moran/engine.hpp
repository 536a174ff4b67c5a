#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "moran/level_histogram.hpp"
#include "moran/model.hpp"
#include "moran/rng.hpp"

namespace moran {

enum class EventKind {
  BeneficialMutation,
  DeleteriousMutation,
  Resample,
  Selection,
};

const char* event_kind_name(EventKind k);

// One transition of the population process.
//  - mutations: from_level is the mutating individual's level,
//    to_level = from_level +/- 1;
//  - Resample(a, b), a != b: the individual at a adopts the fitness b of a
//    uniformly chosen individual at a different level;
//  - Selection(a, b), b > a: the individual at a is replaced by a copy of an
//    individual at b, picked with weight proportional to the fitness gap.
struct Event {
  EventKind kind = EventKind::BeneficialMutation;
  std::int64_t from_level = 0;
  std::int64_t to_level = 0;
  double time = 0.0;
};

// Event plus the resolved identity bits needed to apply it: whether the
// removed individual carried a tag and whether the added one does.
struct Transition {
  Event event;
  bool removed_tagged = false;
  bool added_tagged = false;
};

struct RateBundle {
  double mutation_total = 0.0;
  double resample_total = 0.0;
  double selection_total = 0.0;
  double total() const { return mutation_total + resample_total + selection_total; }
};

// Integer pair moments behind the rates; exact, so category probabilities
// are reproducible bit-for-bit.
struct PairMoments {
  std::int64_t cross_pairs = 0;    // N^2 - sum_k counts(k)^2
  std::int64_t selection_gap = 0;  // sum_{a<b} (b-a) counts(a) counts(b)
};

PairMoments pair_moments(const LevelHistogram& hist);
RateBundle total_rates(const LevelHistogram& hist, const ModelParams& params);

// Samples the next event without applying it. Throws if the total rate is
// not positive (impossible for mu > 0; signals corrupted state).
Transition propose_event(const LevelHistogram& hist, const ModelParams& params,
                         Rng& rng, double now);

// Resolves the tag bits of a forced event with fresh draws; used by tests
// and anything that needs to inject a specific transition.
Transition resolve_transition(const LevelHistogram& hist, const Event& event,
                              Rng& rng);

void apply_transition(LevelHistogram& hist, const Transition& tr);

// propose + apply; returns the event.
Event step(LevelHistogram& hist, const ModelParams& params, Rng& rng,
           double now = 0.0);

// Observables over the histogram (exact arithmetic).
double mean_fitness(const LevelHistogram& hist);
double centered_variance(const LevelHistogram& hist);
std::int64_t max_fitness(const LevelHistogram& hist);
// Largest k with at least N/2 individuals in [k, inf) and fewer than N/2
// in (k, inf).
std::int64_t median_level(const LevelHistogram& hist);

struct TrajectorySample {
  double time = 0.0;
  double mean_fitness = 0.0;
  double centered_variance = 0.0;
  std::int64_t max_fitness = 0;
  std::int64_t median_level = 0;
  std::optional<LevelHistogram> histogram_snapshot;
};

TrajectorySample sample_state(const LevelHistogram& hist, double t,
                              bool with_snapshot = false);

// Hooks into the simulation loop. The state passed to on_interval is
// constant over [t0, t1); on_event fires at t1 with the pre-event state.
class EventSink {
 public:
  virtual ~EventSink() = default;
  virtual void on_interval(double /*t0*/, double /*t1*/,
                           const LevelHistogram& /*state*/) {}
  virtual void on_event(const Event& /*event*/,
                        const LevelHistogram& /*pre_state*/) {}
};

struct SimulateOptions {
  bool keep_snapshots = false;   // attach histogram snapshots to samples
  bool dense = false;            // one sample after every event + at horizon
  std::optional<LevelHistogram> initial_state;  // default: everyone at 0
};

// Exact event-driven simulation from t = 0 to `horizon`. Samples record the
// state holding at each requested time. Deterministic given the seed.
std::vector<TrajectorySample> simulate(const ModelParams& params,
                                       double horizon,
                                       std::span<const double> sample_times,
                                       std::uint64_t seed,
                                       const SimulateOptions& options = {},
                                       EventSink* sink = nullptr);

// tag_lineage: wrapper kept for symmetry with the free-function surface.
void tag_lineage(LevelHistogram& hist, std::int64_t level, std::int64_t count);

}  // namespace moran
