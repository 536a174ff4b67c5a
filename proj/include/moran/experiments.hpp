#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "moran/model.hpp"
#include "moran/scaling.hpp"
#include "moran/stats.hpp"

namespace moran {

struct SweepConfig {
  std::vector<std::int64_t> n_ladder;
  double mu = 1.0;
  double q = 1.0;
  double gamma = 1.0;
  double horizon = 0.0;  // 0: use default_horizon
  std::int64_t replicates = 1;
  std::uint64_t seed = 1;
  std::int64_t samples_per_run = 33;
  std::int64_t lambda_k = 10;
  std::string out_dir = "sweep_out";

  RateParams rates() const { return {mu, q, gamma}; }
  ModelParams params_for(std::int64_t n) const { return {n, mu, q, gamma}; }

  // Throws std::invalid_argument with a JSON-pointer-style field path.
  void validate() const;
  static SweepConfig from_json_text(const std::string& text);
  std::string to_json() const;
};

// Default horizon t = max(10 T(N_min), 10), so M >= 1 for the smallest N.
double default_horizon(const SweepConfig& config);

struct ReplicateResult {
  std::int64_t n = 0;
  std::int64_t replicate = 0;
  std::uint64_t seed_stream = 0;
  double horizon_t = 0.0;
  std::int64_t m_steps = 0;
  double mean_fitness_final = 0.0;
  double c2_final = 0.0;
  std::int64_t max_fitness_final = 0;
  double rate_max = 0.0;  // max_fitness_final / horizon
  bool event_e = false;
  bool lambda_k_member = false;
  double wallclock_s = 0.0;
  std::string error;  // empty on success

  bool ok() const { return error.empty(); }
};

// Runs every (N, replicate) pair over the OpenMP worker pool. Replicate r of
// size N draws from the stream (seed, N, r), so results do not depend on the
// worker count or schedule. Failed replicates carry an error tag instead of
// aborting the sweep. `m_override` replaces the barrier M in the event-E
// monitor only.
std::vector<ReplicateResult> run_sweep(
    const SweepConfig& config, std::optional<std::int64_t> m_override = {});

// Serial reference of the same loop, kept for testing and benchmarking.
std::vector<ReplicateResult> run_sweep_serial(
    const SweepConfig& config, std::optional<std::int64_t> m_override = {});

struct DriftEstimate {
  double estimate = 0.0;
  double se = 0.0;
  std::int64_t replicates = 0;
  double target = 0.0;  // mu (2q - 1)
};

// Ensemble mean of mean_fitness(t)/t under gamma = 0 (rejects gamma != 0,
// where the variance term is not controlled analytically).
DriftEstimate drift_check(const ModelParams& params, double horizon,
                          std::int64_t replicates, std::uint64_t seed);

struct PerNStats {
  std::int64_t n = 0;
  double predictor = 0.0;  // log N / (log log N)^2
  double mean_rate = 0.0;
  double se_rate = 0.0;
  std::int64_t n_ok = 0;
  std::int64_t m_steps = 0;
  double event_e_freq = 0.0;
  double event_e_lo = 0.0;  // Wilson 95%
  double event_e_hi = 0.0;
  double lambda_freq = 0.0;
};

struct FitReport {
  std::vector<PerNStats> per_n;
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  double slope_ci95_lo = 0.0;
  double slope_ci95_hi = 0.0;
  double kendall_tau = 0.0;       // rate vs predictor, over replicates
  double kendall_p_greater = 1.0;
  double kendall_tau_vs_n = 0.0;  // rate vs log N, context diagnostic
  double kendall_p_vs_n = 1.0;
  std::int64_t excluded = 0;
  bool underpowered = false;  // some N has fewer than 30 ok replicates

  std::string to_json() const;
};

// Regresses per-N mean rate of max-fitness growth on log N / (log log N)^2.
// Requires >= 3 distinct N and a non-degenerate predictor; aggregation is a
// pure fold over canonically sorted results.
FitReport fit_scaling(std::span<const ReplicateResult> results);

struct EventProbRow {
  std::int64_t n = 0;
  std::int64_t m_steps = 0;
  double freq = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  std::int64_t n_ok = 0;
  bool vacuous = false;  // M == 0: zero barrier
};

std::vector<EventProbRow> event_probability_rows(
    std::span<const ReplicateResult> results);

// Fresh sweep with an optional barrier override, then Wilson rows per N.
std::vector<EventProbRow> estimate_event_probability(
    const SweepConfig& config, std::optional<std::int64_t> m_override = {});

std::string results_csv_header();
std::string result_csv_row(const ReplicateResult& r);

// Worker-pool width currently available (1 without OpenMP).
int max_workers();

}  // namespace moran
