#include "moran/experiments.hpp"

#include "moran/format.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <nlohmann/json.hpp>

#include "moran/engine.hpp"
#include "moran/observables.hpp"
#include "moran/rng.hpp"

namespace moran {

namespace {

double adaptation_predictor(double n) {
  const double ln = std::log(n);
  const double lln = std::log(ln);
  return ln / (lln * lln);
}

struct FanOutSink : EventSink {
  std::vector<EventSink*> sinks;
  void on_interval(double t0, double t1, const LevelHistogram& s) override {
    for (auto* sink : sinks) sink->on_interval(t0, t1, s);
  }
  void on_event(const Event& e, const LevelHistogram& s) override {
    for (auto* sink : sinks) sink->on_event(e, s);
  }
};

ReplicateResult run_one_replicate(const SweepConfig& config, std::int64_t n,
                                  std::int64_t r, double horizon,
                                  std::optional<std::int64_t> m_override) {
  ReplicateResult out;
  out.n = n;
  out.replicate = r;
  out.seed_stream = Rng::stream_seed(config.seed, static_cast<std::uint64_t>(n),
                                     static_cast<std::uint64_t>(r));
  out.horizon_t = horizon;
  const auto t_begin = std::chrono::steady_clock::now();
  try {
    const ModelParams params = config.params_for(n);
    const ScalingConstants constants =
        with_horizon(scaling_from_n(static_cast<double>(n), params.rates()), horizon);
    out.m_steps = m_override.value_or(constants.m_steps);

    // Run to the end of the last grid window so Lambda_K membership sees the
    // full [0, s_{M+1}]; stats are sampled at t = horizon.
    const double sim_horizon = std::max(horizon, constants.grid.back());
    DeathMarkWatcher watcher(
        params, 2.0 * constants.big_t,
        Rng::stream(out.seed_stream, 0x6d61726b73ull));  // "marks"
    EventEMonitor monitor(constants, m_override);
    FanOutSink fan;
    fan.sinks = {&watcher, &monitor};

    std::vector<double> sample_times;
    const std::int64_t k = std::max<std::int64_t>(config.samples_per_run, 1);
    for (std::int64_t i = 0; i < k; ++i)
      sample_times.push_back(horizon * static_cast<double>(i) /
                             static_cast<double>(k));
    sample_times.push_back(horizon);

    const auto samples =
        simulate(params, sim_horizon, sample_times, out.seed_stream, {}, &fan);
    const TrajectorySample& last = samples.back();
    out.mean_fitness_final = last.mean_fitness;
    out.c2_final = last.centered_variance;
    out.max_fitness_final = last.max_fitness;
    out.rate_max = static_cast<double>(last.max_fitness) / horizon;
    out.event_e = monitor.holds();
    out.lambda_k_member =
        lambda_k_member(watcher.take_marks(), constants, config.lambda_k);
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  out.wallclock_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_begin)
          .count();
  return out;
}

std::vector<ReplicateResult> run_sweep_impl(const SweepConfig& config,
                                            std::optional<std::int64_t> m_override,
                                            bool parallel) {
  config.validate();
  const double horizon = config.horizon > 0.0 ? config.horizon : default_horizon(config);
  const std::int64_t ladder = static_cast<std::int64_t>(config.n_ladder.size());
  const std::int64_t tasks = ladder * config.replicates;
  std::vector<ReplicateResult> results(static_cast<std::size_t>(tasks));

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) if (parallel)
#endif
  for (std::int64_t task = 0; task < tasks; ++task) {
    const std::int64_t n = config.n_ladder[static_cast<std::size_t>(task / config.replicates)];
    const std::int64_t r = task % config.replicates;
    results[static_cast<std::size_t>(task)] =
        run_one_replicate(config, n, r, horizon, m_override);
  }
  (void)parallel;
  return results;
}

}  // namespace

void SweepConfig::validate() const {
  if (n_ladder.empty())
    throw std::invalid_argument("/n_ladder: must have at least one entry");
  for (std::size_t i = 0; i < n_ladder.size(); ++i) {
    if (n_ladder[i] < 2)
      throw std::invalid_argument("/n_ladder: entries must be >= 2");
    if (i > 0 && n_ladder[i] <= n_ladder[i - 1])
      throw std::invalid_argument("/n_ladder: must be strictly increasing");
  }
  try {
    rates().validate();
  } catch (const std::exception& e) {
    throw std::invalid_argument(std::string("/params: ") + e.what());
  }
  if (horizon < 0.0) throw std::invalid_argument("/horizon: must be >= 0");
  if (replicates < 1) throw std::invalid_argument("/replicates: must be >= 1");
  if (samples_per_run < 1)
    throw std::invalid_argument("/samples_per_run: must be >= 1");
  if (lambda_k < 0) throw std::invalid_argument("/lambda_k: must be >= 0");
  if (out_dir.empty()) throw std::invalid_argument("/out: must not be empty");
}

SweepConfig SweepConfig::from_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    throw std::invalid_argument(std::string("/: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("/: expected an object");

  SweepConfig c;
  const auto need = [&](const char* key) -> const nlohmann::json& {
    if (!j.contains(key))
      throw std::invalid_argument(std::string("/") + key + ": required");
    return j.at(key);
  };
  const auto as_number = [](const nlohmann::json& v, const char* key) -> double {
    if (!v.is_number())
      throw std::invalid_argument(std::string("/") + key + ": expected a number");
    return v.get<double>();
  };

  static const char* known[] = {"n_ladder", "mu", "q", "gamma",
                                "horizon",  "replicates", "seed",
                                "samples_per_run", "lambda_k", "out"};
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* k : known)
      if (key == k) ok = true;
    if (!ok) throw std::invalid_argument("/" + key + ": unknown field");
  }

  const auto& ladder = need("n_ladder");
  if (!ladder.is_array())
    throw std::invalid_argument("/n_ladder: expected an array");
  for (const auto& v : ladder) {
    if (!v.is_number_integer())
      throw std::invalid_argument("/n_ladder: expected integers");
    c.n_ladder.push_back(v.get<std::int64_t>());
  }
  c.mu = as_number(need("mu"), "mu");
  c.q = as_number(need("q"), "q");
  c.gamma = as_number(need("gamma"), "gamma");
  c.replicates = static_cast<std::int64_t>(as_number(need("replicates"), "replicates"));
  if (!need("seed").is_number())
    throw std::invalid_argument("/seed: expected a number");
  c.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("horizon")) c.horizon = as_number(j.at("horizon"), "horizon");
  if (j.contains("samples_per_run"))
    c.samples_per_run =
        static_cast<std::int64_t>(as_number(j.at("samples_per_run"), "samples_per_run"));
  if (j.contains("lambda_k"))
    c.lambda_k = static_cast<std::int64_t>(as_number(j.at("lambda_k"), "lambda_k"));
  if (j.contains("out")) {
    if (!j.at("out").is_string())
      throw std::invalid_argument("/out: expected a string");
    c.out_dir = j.at("out").get<std::string>();
  }
  c.validate();
  return c;
}

std::string SweepConfig::to_json() const {
  std::string out = "{\"n_ladder\": [";
  for (std::size_t i = 0; i < n_ladder.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(n_ladder[i]);
  }
  out += "], \"mu\": " + fmt17(mu);
  out += ", \"q\": " + fmt17(q);
  out += ", \"gamma\": " + fmt17(gamma);
  out += ", \"horizon\": " + fmt17(horizon);
  out += ", \"replicates\": " + std::to_string(replicates);
  out += ", \"seed\": " + std::to_string(seed);
  out += ", \"samples_per_run\": " + std::to_string(samples_per_run);
  out += ", \"lambda_k\": " + std::to_string(lambda_k);
  out += ", \"out\": \"" + out_dir + "\"}";
  return out;
}

double default_horizon(const SweepConfig& config) {
  config.validate();
  const ScalingConstants c =
      scaling_from_n(static_cast<double>(config.n_ladder.front()), config.rates());
  return std::max(10.0 * c.big_t, 10.0);
}

std::vector<ReplicateResult> run_sweep(const SweepConfig& config,
                                       std::optional<std::int64_t> m_override) {
  return run_sweep_impl(config, m_override, true);
}

std::vector<ReplicateResult> run_sweep_serial(const SweepConfig& config,
                                              std::optional<std::int64_t> m_override) {
  return run_sweep_impl(config, m_override, false);
}

DriftEstimate drift_check(const ModelParams& params, double horizon,
                          std::int64_t replicates, std::uint64_t seed) {
  params.validate();
  if (params.selection_strength != 0.0)
    throw std::invalid_argument("drift_check: requires gamma = 0");
  if (!(horizon > 0.0)) throw std::invalid_argument("drift_check: horizon must be > 0");
  if (replicates < 1) throw std::invalid_argument("drift_check: replicates must be >= 1");

  std::vector<double> values(static_cast<std::size_t>(replicates));
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (std::int64_t r = 0; r < replicates; ++r) {
    const std::uint64_t s = Rng::stream_seed(
        seed, static_cast<std::uint64_t>(params.n_individuals),
        static_cast<std::uint64_t>(r));
    const double sample_at[] = {horizon};
    const auto samples = simulate(params, horizon, sample_at, s);
    values[static_cast<std::size_t>(r)] = samples.back().mean_fitness / horizon;
  }
  const auto ms = stats::mean_se(values);
  DriftEstimate d;
  d.estimate = ms.mean;
  d.se = ms.se;
  d.replicates = replicates;
  d.target = params.mutation_rate * (2.0 * params.beneficial_fraction - 1.0);
  return d;
}

FitReport fit_scaling(std::span<const ReplicateResult> results) {
  std::vector<ReplicateResult> sorted(results.begin(), results.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const ReplicateResult& a, const ReplicateResult& b) {
              if (a.n != b.n) return a.n < b.n;
              return a.replicate < b.replicate;
            });

  FitReport report;
  std::vector<double> xs, ys;          // per-replicate, for rank correlation
  std::vector<double> log_ns;
  std::vector<double> px, py;          // per-N, for the regression

  std::size_t i = 0;
  while (i < sorted.size()) {
    const std::int64_t n = sorted[i].n;
    PerNStats stats_row;
    stats_row.n = n;
    stats_row.predictor = adaptation_predictor(static_cast<double>(n));
    std::vector<double> rates;
    std::int64_t e_count = 0, lambda_count = 0;
    std::size_t j = i;
    for (; j < sorted.size() && sorted[j].n == n; ++j) {
      const auto& rr = sorted[j];
      if (!rr.ok()) {
        ++report.excluded;
        continue;
      }
      stats_row.m_steps = rr.m_steps;
      rates.push_back(rr.rate_max);
      e_count += rr.event_e ? 1 : 0;
      lambda_count += rr.lambda_k_member ? 1 : 0;
      xs.push_back(stats_row.predictor);
      ys.push_back(rr.rate_max);
      log_ns.push_back(std::log(static_cast<double>(n)));
    }
    i = j;
    stats_row.n_ok = static_cast<std::int64_t>(rates.size());
    if (stats_row.n_ok == 0) continue;
    const auto ms = stats::mean_se(rates);
    stats_row.mean_rate = ms.mean;
    stats_row.se_rate = ms.se;
    const auto wl = stats::wilson(e_count, stats_row.n_ok);
    stats_row.event_e_freq = wl.freq;
    stats_row.event_e_lo = wl.lo;
    stats_row.event_e_hi = wl.hi;
    stats_row.lambda_freq =
        static_cast<double>(lambda_count) / static_cast<double>(stats_row.n_ok);
    if (stats_row.n_ok < 30) report.underpowered = true;
    report.per_n.push_back(stats_row);
    px.push_back(stats_row.predictor);
    py.push_back(stats_row.mean_rate);
  }

  if (report.per_n.size() < 3)
    throw std::invalid_argument("fit_scaling: need >= 3 distinct N with results");
  const auto [mn, mx] = std::minmax_element(px.begin(), px.end());
  if (*mn == *mx)
    throw std::invalid_argument("fit_scaling: degenerate ladder (identical predictors)");

  const auto fit = stats::linear_fit(px, py);
  report.slope = fit.slope;
  report.intercept = fit.intercept;
  report.slope_se = fit.slope_se;
  report.slope_ci95_lo = fit.slope - 1.959963984540054 * fit.slope_se;
  report.slope_ci95_hi = fit.slope + 1.959963984540054 * fit.slope_se;

  const auto kd = stats::kendall_tau_b(xs, ys);
  report.kendall_tau = kd.tau_b;
  report.kendall_p_greater = kd.p_greater;
  const auto kn = stats::kendall_tau_b(log_ns, ys);
  report.kendall_tau_vs_n = kn.tau_b;
  report.kendall_p_vs_n = kn.p_greater;
  return report;
}

std::string FitReport::to_json() const {
  std::string out = "{\"per_n\": [";
  for (std::size_t i = 0; i < per_n.size(); ++i) {
    const auto& p = per_n[i];
    if (i) out += ", ";
    out += "{\"n\": " + std::to_string(p.n);
    out += ", \"predictor\": " + fmt17(p.predictor);
    out += ", \"mean_rate\": " + fmt17(p.mean_rate);
    out += ", \"se_rate\": " + fmt17(p.se_rate);
    out += ", \"n_ok\": " + std::to_string(p.n_ok);
    out += ", \"m_steps\": " + std::to_string(p.m_steps);
    out += ", \"event_e_freq\": " + fmt17(p.event_e_freq);
    out += ", \"event_e_wilson\": [" + fmt17(p.event_e_lo) + ", " + fmt17(p.event_e_hi) + "]";
    out += ", \"lambda_freq\": " + fmt17(p.lambda_freq) + "}";
  }
  out += "], \"slope\": " + fmt17(slope);
  out += ", \"intercept\": " + fmt17(intercept);
  out += ", \"slope_se\": " + fmt17(slope_se);
  out += ", \"slope_ci95\": [" + fmt17(slope_ci95_lo) + ", " + fmt17(slope_ci95_hi) + "]";
  out += ", \"kendall_tau\": " + fmt17(kendall_tau);
  out += ", \"kendall_p_greater\": " + fmt17(kendall_p_greater);
  out += ", \"kendall_tau_vs_n\": " + fmt17(kendall_tau_vs_n);
  out += ", \"kendall_p_vs_n\": " + fmt17(kendall_p_vs_n);
  out += ", \"excluded\": " + std::to_string(excluded);
  out += std::string(", \"underpowered\": ") + (underpowered ? "true" : "false");
  out += "}";
  return out;
}

std::vector<EventProbRow> event_probability_rows(
    std::span<const ReplicateResult> results) {
  std::vector<ReplicateResult> sorted(results.begin(), results.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const ReplicateResult& a, const ReplicateResult& b) {
              if (a.n != b.n) return a.n < b.n;
              return a.replicate < b.replicate;
            });
  std::vector<EventProbRow> rows;
  std::size_t i = 0;
  while (i < sorted.size()) {
    const std::int64_t n = sorted[i].n;
    std::int64_t ok = 0, hits = 0, m = 0;
    for (; i < sorted.size() && sorted[i].n == n; ++i) {
      if (!sorted[i].ok()) continue;
      ++ok;
      m = sorted[i].m_steps;
      hits += sorted[i].event_e ? 1 : 0;
    }
    if (ok == 0) continue;
    EventProbRow row;
    row.n = n;
    row.m_steps = m;
    row.n_ok = ok;
    const auto wl = stats::wilson(hits, ok);
    row.freq = wl.freq;
    row.lo = wl.lo;
    row.hi = wl.hi;
    row.vacuous = (m == 0);
    rows.push_back(row);
  }
  return rows;
}

std::vector<EventProbRow> estimate_event_probability(
    const SweepConfig& config, std::optional<std::int64_t> m_override) {
  const auto results = run_sweep(config, m_override);
  return event_probability_rows(results);
}

std::string results_csv_header() {
  return "N,replicate,seed_stream,t,M,mean_fitness_final,c2_final,"
         "max_fitness_final,rate_max,event_E,lambda_K_member,wallclock_s,error";
}

std::string result_csv_row(const ReplicateResult& r) {
  std::string out;
  out += std::to_string(r.n);
  out += ',' + std::to_string(r.replicate);
  out += ',' + std::to_string(r.seed_stream);
  out += ',' + fmt17(r.horizon_t);
  out += ',' + std::to_string(r.m_steps);
  out += ',' + fmt17(r.mean_fitness_final);
  out += ',' + fmt17(r.c2_final);
  out += ',' + std::to_string(r.max_fitness_final);
  out += ',' + fmt17(r.rate_max);
  out += ',' + std::string(r.event_e ? "1" : "0");
  out += ',' + std::string(r.lambda_k_member ? "1" : "0");
  out += ',' + fmt17(r.wallclock_s);
  std::string err = r.error;
  for (char& ch : err)
    if (ch == ',' || ch == '\n') ch = ';';
  out += ',' + err;
  return out;
}

int max_workers() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace moran
