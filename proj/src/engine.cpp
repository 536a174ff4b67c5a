#include "moran/engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace moran {

const char* event_kind_name(EventKind k) {
  switch (k) {
    case EventKind::BeneficialMutation: return "beneficial_mutation";
    case EventKind::DeleteriousMutation: return "deleterious_mutation";
    case EventKind::Resample: return "resample";
    case EventKind::Selection: return "selection";
  }
  return "?";
}

PairMoments pair_moments(const LevelHistogram& hist) {
  PairMoments m;
  const std::int64_t n = hist.total();
  std::int64_t sum_sq = 0;
  std::int64_t prefix_count = 0;   // C_b = sum_{a<b} counts(a)
  std::int64_t prefix_moment = 0;  // S_b = sum_{a<b} a * counts(a)
  for (const auto& e : hist.entries()) {
    sum_sq += e.count * e.count;
    m.selection_gap += e.count * (e.level * prefix_count - prefix_moment);
    prefix_count += e.count;
    prefix_moment += e.level * e.count;
  }
  m.cross_pairs = n * n - sum_sq;
  return m;
}

RateBundle total_rates(const LevelHistogram& hist, const ModelParams& params) {
  const PairMoments m = pair_moments(hist);
  const double n = static_cast<double>(hist.total());
  RateBundle r;
  r.mutation_total = n * params.mutation_rate;
  r.resample_total = static_cast<double>(m.cross_pairs) / n;
  r.selection_total =
      params.selection_strength / n * static_cast<double>(m.selection_gap);
  return r;
}

namespace {

// Locates the level holding global individual index `idx` (0-based over the
// sorted entries); returns the entry and the index within its level.
std::pair<const LevelHistogram::Entry*, std::int64_t> locate_individual(
    const LevelHistogram& hist, std::int64_t idx) {
  for (const auto& e : hist.entries()) {
    if (idx < e.count) return {&e, idx};
    idx -= e.count;
  }
  throw std::logic_error("locate_individual: index out of range");
}

}  // namespace

Transition propose_event(const LevelHistogram& hist, const ModelParams& params,
                         Rng& rng, double now) {
  const PairMoments moments = pair_moments(hist);
  const std::int64_t n = hist.total();
  const double nd = static_cast<double>(n);
  RateBundle rates;
  rates.mutation_total = nd * params.mutation_rate;
  rates.resample_total = static_cast<double>(moments.cross_pairs) / nd;
  rates.selection_total =
      params.selection_strength / nd * static_cast<double>(moments.selection_gap);
  const double total = rates.total();
  if (!(total > 0.0))
    throw std::runtime_error("propose_event: total rate is not positive");

  Transition tr;
  tr.event.time = now + rng.exponential(total);
  const bool tagging = hist.tagging_active();
  const double u = rng.uniform01() * total;

  if (u < rates.mutation_total) {
    // Mutation: individual uniform, direction Bernoulli(q).
    auto [entry, idx] = locate_individual(hist, static_cast<std::int64_t>(rng.below(n)));
    const bool beneficial = rng.bernoulli(params.beneficial_fraction);
    tr.event.kind = beneficial ? EventKind::BeneficialMutation
                               : EventKind::DeleteriousMutation;
    tr.event.from_level = entry->level;
    tr.event.to_level = entry->level + (beneficial ? 1 : -1);
    tr.removed_tagged = tagging && idx < entry->tagged;
    tr.added_tagged = tr.removed_tagged;  // a moved individual carries its tag
    return tr;
  }

  if (u < rates.mutation_total + rates.resample_total) {
    // Resample: uniform over ordered cross-level pairs. One integer draw
    // encodes (dying level a, dying index within a, partner individual
    // among the N - counts(a) at other levels).
    std::int64_t w = static_cast<std::int64_t>(
        rng.below(static_cast<std::uint64_t>(moments.cross_pairs)));
    const LevelHistogram::Entry* src = nullptr;
    for (const auto& e : hist.entries()) {
      const std::int64_t weight = e.count * (n - e.count);
      if (w < weight) {
        src = &e;
        break;
      }
      w -= weight;
    }
    const std::int64_t others = n - src->count;
    const std::int64_t dying_idx = w / others;
    std::int64_t partner = w % others;
    const LevelHistogram::Entry* dst = nullptr;
    std::int64_t partner_idx = 0;
    for (const auto& e : hist.entries()) {
      if (e.level == src->level) continue;
      if (partner < e.count) {
        dst = &e;
        partner_idx = partner;
        break;
      }
      partner -= e.count;
    }
    tr.event.kind = EventKind::Resample;
    tr.event.from_level = src->level;
    tr.event.to_level = dst->level;
    tr.removed_tagged = tagging && dying_idx < src->tagged;
    tr.added_tagged = tagging && partner_idx < dst->tagged;
    return tr;
  }

  // Selection: pair (a, b), a < b, with weight (b - a) c_a c_b. Pick the
  // parent level b by its marginal weight c_b (b C_b - S_b), then the dying
  // level a below it with weight (b - a) c_a; the residual of one integer
  // draw resolves both individuals.
  std::int64_t w = static_cast<std::int64_t>(
      rng.below(static_cast<std::uint64_t>(moments.selection_gap)));
  std::int64_t prefix_count = 0;
  std::int64_t prefix_moment = 0;
  const LevelHistogram::Entry* parent = nullptr;
  std::int64_t per_parent = 0;  // b C_b - S_b
  for (const auto& e : hist.entries()) {
    const std::int64_t inner = e.level * prefix_count - prefix_moment;
    const std::int64_t weight = e.count * inner;
    if (w < weight) {
      parent = &e;
      per_parent = inner;
      break;
    }
    w -= weight;
    prefix_count += e.count;
    prefix_moment += e.level * e.count;
  }
  const std::int64_t parent_idx = w / per_parent;
  std::int64_t r = w % per_parent;
  const LevelHistogram::Entry* victim = nullptr;
  std::int64_t dying_idx = 0;
  for (const auto& e : hist.entries()) {
    if (e.level >= parent->level) break;
    const std::int64_t gap = parent->level - e.level;
    const std::int64_t weight = gap * e.count;
    if (r < weight) {
      victim = &e;
      dying_idx = r / gap;
      break;
    }
    r -= weight;
  }
  tr.event.kind = EventKind::Selection;
  tr.event.from_level = victim->level;
  tr.event.to_level = parent->level;
  tr.removed_tagged = tagging && dying_idx < victim->tagged;
  tr.added_tagged = tagging && parent_idx < parent->tagged;
  return tr;
}

Transition resolve_transition(const LevelHistogram& hist, const Event& event,
                              Rng& rng) {
  const std::int64_t c_from = hist.count_at(event.from_level);
  if (c_from == 0)
    throw std::invalid_argument("resolve_transition: from_level unoccupied");
  switch (event.kind) {
    case EventKind::BeneficialMutation:
      if (event.to_level != event.from_level + 1)
        throw std::invalid_argument("resolve_transition: bad mutation step");
      break;
    case EventKind::DeleteriousMutation:
      if (event.to_level != event.from_level - 1)
        throw std::invalid_argument("resolve_transition: bad mutation step");
      break;
    case EventKind::Resample:
      if (event.to_level == event.from_level)
        throw std::invalid_argument("resolve_transition: same-level resample");
      if (hist.count_at(event.to_level) == 0)
        throw std::invalid_argument("resolve_transition: to_level unoccupied");
      break;
    case EventKind::Selection:
      if (event.to_level <= event.from_level)
        throw std::invalid_argument("resolve_transition: selection must move up");
      if (hist.count_at(event.to_level) == 0)
        throw std::invalid_argument("resolve_transition: to_level unoccupied");
      break;
  }

  Transition tr;
  tr.event = event;
  if (!hist.tagging_active()) return tr;
  const std::int64_t t_from = hist.tagged_at(event.from_level);
  tr.removed_tagged =
      static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(c_from))) < t_from;
  if (event.kind == EventKind::BeneficialMutation ||
      event.kind == EventKind::DeleteriousMutation) {
    tr.added_tagged = tr.removed_tagged;
  } else {
    const std::int64_t c_to = hist.count_at(event.to_level);
    const std::int64_t t_to = hist.tagged_at(event.to_level);
    tr.added_tagged =
        static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(c_to))) < t_to;
  }
  return tr;
}

void apply_transition(LevelHistogram& hist, const Transition& tr) {
  hist.move_one(tr.event.from_level, tr.event.to_level, tr.removed_tagged,
                tr.added_tagged);
}

Event step(LevelHistogram& hist, const ModelParams& params, Rng& rng, double now) {
  const Transition tr = propose_event(hist, params, rng, now);
  apply_transition(hist, tr);
  return tr.event;
}

double mean_fitness(const LevelHistogram& hist) {
  std::int64_t s1 = 0;
  for (const auto& e : hist.entries()) s1 += e.level * e.count;
  return static_cast<double>(s1) / static_cast<double>(hist.total());
}

double centered_variance(const LevelHistogram& hist) {
  std::int64_t s1 = 0, s2 = 0;
  for (const auto& e : hist.entries()) {
    s1 += e.level * e.count;
    s2 += e.level * e.level * e.count;
  }
  const double n = static_cast<double>(hist.total());
  const double mean = static_cast<double>(s1) / n;
  const double c2 = static_cast<double>(s2) / n - mean * mean;
  return c2 > 0.0 ? c2 : 0.0;
}

std::int64_t max_fitness(const LevelHistogram& hist) { return hist.max_level(); }

std::int64_t median_level(const LevelHistogram& hist) {
  const std::int64_t n = hist.total();
  std::int64_t above = 0;
  const auto entries = hist.entries();
  for (auto it = entries.rbegin(); it != entries.rend(); ++it) {
    if (2 * (above + it->count) >= n) return it->level;
    above += it->count;
  }
  throw std::logic_error("median_level: empty histogram");
}

TrajectorySample sample_state(const LevelHistogram& hist, double t,
                              bool with_snapshot) {
  TrajectorySample s;
  s.time = t;
  s.mean_fitness = mean_fitness(hist);
  s.centered_variance = centered_variance(hist);
  s.max_fitness = max_fitness(hist);
  s.median_level = median_level(hist);
  if (with_snapshot) s.histogram_snapshot = hist;
  return s;
}

std::vector<TrajectorySample> simulate(const ModelParams& params, double horizon,
                                       std::span<const double> sample_times,
                                       std::uint64_t seed,
                                       const SimulateOptions& options,
                                       EventSink* sink) {
  params.validate();
  if (horizon < 0.0) throw std::invalid_argument("simulate: negative horizon");
  for (std::size_t i = 0; i < sample_times.size(); ++i) {
    if (sample_times[i] < 0.0 || sample_times[i] > horizon)
      throw std::invalid_argument("simulate: sample time outside [0, horizon]");
    if (i > 0 && sample_times[i] < sample_times[i - 1])
      throw std::invalid_argument("simulate: sample times not sorted");
  }

  LevelHistogram hist = options.initial_state
                            ? *options.initial_state
                            : LevelHistogram::single_level(params.n_individuals);
  if (hist.total() != params.n_individuals)
    throw std::invalid_argument("simulate: initial state size != N");

  Rng rng(seed);
  std::vector<TrajectorySample> samples;
  std::size_t si = 0;
  double t = 0.0;
  if (options.dense)
    samples.push_back(sample_state(hist, 0.0, options.keep_snapshots));

  for (;;) {
    const Transition tr = propose_event(hist, params, rng, t);
    const double t_next = tr.event.time;
    if (t_next > horizon) {
      while (si < sample_times.size())
        samples.push_back(sample_state(hist, sample_times[si++], options.keep_snapshots));
      if (sink) sink->on_interval(t, horizon, hist);
      if (options.dense)
        samples.push_back(sample_state(hist, horizon, options.keep_snapshots));
      break;
    }
    while (si < sample_times.size() && sample_times[si] < t_next)
      samples.push_back(sample_state(hist, sample_times[si++], options.keep_snapshots));
    if (sink) {
      sink->on_interval(t, t_next, hist);
      sink->on_event(tr.event, hist);
    }
    apply_transition(hist, tr);
    t = t_next;
    if (options.dense)
      samples.push_back(sample_state(hist, t, options.keep_snapshots));
  }
  return samples;
}

void tag_lineage(LevelHistogram& hist, std::int64_t level, std::int64_t count) {
  hist.activate_tags(level, count);
}

}  // namespace moran
