// Benchmark: the histogram engine against the O(N^2) reference simulator,
// and the OpenMP ensemble runner against its serial twin. The ensemble
// comparison also asserts that both paths fold to identical results.

#include <chrono>
#include <cstdio>
#include <cstring>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "moran/engine.hpp"
#include "moran/experiments.hpp"
#include "support/brute_force.hpp"

using namespace moran;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void bench_engine_vs_reference() {
  std::printf("== event engine vs N-vector reference ==\n");
  for (std::int64_t n : {20, 50, 100}) {
    const ModelParams params{n, 1.0, 0.8, 1.0};
    const double horizon = 400.0 / static_cast<double>(n);

    auto t0 = std::chrono::steady_clock::now();
    std::int64_t engine_events = 0;
    {
      LevelHistogram hist = LevelHistogram::single_level(n);
      Rng rng(7);
      double t = 0.0;
      for (;;) {
        const auto tr = propose_event(hist, params, rng, t);
        if (tr.event.time > horizon) break;
        apply_transition(hist, tr);
        t = tr.event.time;
        ++engine_events;
      }
    }
    const double engine_s = seconds_since(t0);

    t0 = std::chrono::steady_clock::now();
    const auto ref = testsupport::brute_force_run(params, horizon, 7);
    const double ref_s = seconds_since(t0);

    std::printf(
        "  N=%4lld  engine: %8lld events in %7.4fs (%9.0f ev/s)   "
        "reference: %7.4fs   speedup %5.1fx\n",
        static_cast<long long>(n), static_cast<long long>(engine_events),
        engine_s, engine_events / std::max(engine_s, 1e-9), ref_s,
        ref_s / std::max(engine_s, 1e-9));
    (void)ref;
  }
}

void bench_parallel_ensemble() {
  std::printf("== ensemble: serial reference vs OpenMP ==\n");
  SweepConfig config;
  config.n_ladder = {400, 800};
  config.mu = 1.0;
  config.q = 0.8;
  config.gamma = 1.0;
  config.horizon = 4.0;
  config.replicates = 16;
  config.seed = 4242;
  config.samples_per_run = 4;

  auto t0 = std::chrono::steady_clock::now();
  const auto serial = run_sweep_serial(config);
  const double serial_s = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  const auto parallel = run_sweep(config);
  const double parallel_s = seconds_since(t0);

  bool identical = serial.size() == parallel.size();
  double serial_mean = 0.0, parallel_mean = 0.0;
  for (std::size_t i = 0; identical && i < serial.size(); ++i) {
    identical = serial[i].seed_stream == parallel[i].seed_stream &&
                serial[i].mean_fitness_final == parallel[i].mean_fitness_final &&
                serial[i].max_fitness_final == parallel[i].max_fitness_final &&
                serial[i].event_e == parallel[i].event_e &&
                serial[i].lambda_k_member == parallel[i].lambda_k_member;
    serial_mean += serial[i].mean_fitness_final;
    parallel_mean += parallel[i].mean_fitness_final;
  }
#ifdef _OPENMP
  const int workers = omp_get_max_threads();
#else
  const int workers = 1;
#endif
  std::printf("  %zu replicates  serial: %7.3fs   openmp(%d workers): %7.3fs   speedup %4.2fx\n",
              serial.size(), serial_s, workers, parallel_s,
              serial_s / std::max(parallel_s, 1e-9));
  std::printf("  results identical across schedules: %s (mean %g vs %g)\n",
              identical ? "yes" : "NO", serial_mean, parallel_mean);
  if (!identical) std::exit(1);
}

}  // namespace

int main() {
  bench_engine_vs_reference();
  bench_parallel_ensemble();
  return 0;
}
