// Command-line front end: simulate / sweep / asymptotics / bd-compare.
// Every subcommand writes its outputs under --out plus a manifest that is
// sufficient to reproduce the run byte for byte (the manifest's own
// timestamp and the wallclock column of sweep results are the only fields
// that vary between identical runs).

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "moran/branching.hpp"
#include "moran/engine.hpp"
#include "moran/experiments.hpp"
#include "moran/format.hpp"
#include "moran/observables.hpp"
#include "moran/stats.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

namespace fs = std::filesystem;
using namespace moran;

std::string iso_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm_utc{};
  gmtime_r(&t, &tm_utc);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::string json_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

// Assembles the manifest; `params` is a preformatted JSON object.
std::string manifest_json(const std::string& subcommand, const std::string& params,
                          std::uint64_t seed, const std::vector<std::string>& outputs,
                          const std::vector<std::string>& argv) {
  std::string j = "{\"subcommand\": \"" + subcommand + "\"";
  j += ", \"version\": \"" + std::string(kVersion) + "\"";
  j += ", \"timestamp\": \"" + iso_timestamp() + "\"";
  j += ", \"seed\": " + std::to_string(seed);
  j += ", \"params\": " + params;
  j += ", \"outputs\": [";
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    if (i) j += ", ";
    j += "\"" + json_escape(outputs[i]) + "\"";
  }
  j += "], \"command_line\": [";
  for (std::size_t i = 0; i < argv.size(); ++i) {
    if (i) j += ", ";
    j += "\"" + json_escape(argv[i]) + "\"";
  }
  j += "]}";
  return j;
}

std::vector<std::string> capture_argv(int argc, char** argv) {
  std::vector<std::string> v;
  for (int i = 0; i < argc; ++i) v.emplace_back(argv[i]);
  return v;
}

struct SimulateArgs {
  std::int64_t n = 0;
  double mu = 0.0, q = 0.0, gamma = 0.0, horizon = 0.0;
  std::uint64_t seed = 0;
  std::int64_t samples = 100;
  std::string out = ".";
  bool snapshot = false;
};

int run_simulate(const SimulateArgs& a, const std::vector<std::string>& argv) {
  const ModelParams params{a.n, a.mu, a.q, a.gamma};
  params.validate();
  if (!(a.horizon > 0.0)) throw std::invalid_argument("--horizon must be > 0");
  if (a.samples < 1) throw std::invalid_argument("--samples must be >= 1");

  std::vector<double> times;
  for (std::int64_t i = 0; i <= a.samples; ++i)
    times.push_back(a.horizon * static_cast<double>(i) / static_cast<double>(a.samples));

  SimulateOptions opts;
  opts.keep_snapshots = a.snapshot;
  const auto samples = simulate(params, a.horizon, times, a.seed, opts);

  std::string csv = "t,mean,c2,max,median\n";
  for (const auto& s : samples) {
    csv += fmt17(s.time);
    csv += ',' + fmt17(s.mean_fitness);
    csv += ',' + fmt17(s.centered_variance);
    csv += ',' + std::to_string(s.max_fitness);
    csv += ',' + std::to_string(s.median_level);
    csv += '\n';
  }

  fs::create_directories(a.out);
  const fs::path out_dir(a.out);
  write_file(out_dir / "trajectory.csv", csv);
  std::vector<std::string> outputs{"trajectory.csv"};

  if (a.snapshot) {
    std::string snaps = "[";
    for (std::size_t i = 0; i < samples.size(); ++i) {
      if (i) snaps += ",\n ";
      snaps += samples[i].histogram_snapshot->snapshot_json(samples[i].time);
    }
    snaps += "]\n";
    write_file(out_dir / "snapshots.json", snaps);
    outputs.push_back("snapshots.json");
  }

  std::string params_json = "{\"n\": " + std::to_string(a.n);
  params_json += ", \"mu\": " + fmt17(a.mu);
  params_json += ", \"q\": " + fmt17(a.q);
  params_json += ", \"gamma\": " + fmt17(a.gamma);
  params_json += ", \"horizon\": " + fmt17(a.horizon);
  params_json += ", \"samples\": " + std::to_string(a.samples) + "}";
  outputs.push_back("manifest.json");
  write_file(out_dir / "manifest.json",
             manifest_json("simulate", params_json, a.seed, outputs, argv) + "\n");
  return 0;
}

struct SweepArgs {
  std::string config_path;
  std::string out_override;
  bool dry_run = false;
};

int run_sweep_cmd(const SweepArgs& a, const std::vector<std::string>& argv) {
  std::ifstream in(a.config_path);
  if (!in) throw std::runtime_error("cannot read config " + a.config_path);
  std::stringstream buf;
  buf << in.rdbuf();
  SweepConfig config = SweepConfig::from_json_text(buf.str());
  if (!a.out_override.empty()) config.out_dir = a.out_override;

  const double horizon =
      config.horizon > 0.0 ? config.horizon : default_horizon(config);
  if (a.dry_run) {
    std::cout << "plan: " << config.to_json() << "\n";
    std::cout << "resolved_horizon: " << fmt17(horizon) << "\n";
    std::cout << "tasks: " << config.n_ladder.size() * config.replicates << "\n";
    std::cout << "workers: " << max_workers() << "\n";
    return 0;
  }

  const auto results = run_sweep(config);

  std::string csv = results_csv_header() + "\n";
  for (const auto& r : results) csv += result_csv_row(r) + "\n";

  std::string fit_json;
  try {
    fit_json = fit_scaling(results).to_json();
  } catch (const std::exception& e) {
    std::cerr << "warning: scaling fit unavailable: " << e.what() << "\n";
    fit_json = "{\"error\": \"" + json_escape(e.what()) + "\"}";
  }
  const auto rows = event_probability_rows(results);
  std::string event_json = "[";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (row.vacuous)
      std::cerr << "warning: N=" << row.n
                << ": barrier M = 0, the event-E estimate is vacuous\n";
    if (i) event_json += ", ";
    event_json += "{\"n\": " + std::to_string(row.n);
    event_json += ", \"m\": " + std::to_string(row.m_steps);
    event_json += ", \"freq\": " + fmt17(row.freq);
    event_json += ", \"wilson\": [" + fmt17(row.lo) + ", " + fmt17(row.hi) + "]";
    event_json += ", \"n_ok\": " + std::to_string(row.n_ok);
    event_json += std::string(", \"vacuous\": ") + (row.vacuous ? "true" : "false") + "}";
  }
  event_json += "]";

  fs::create_directories(config.out_dir);
  const fs::path out_dir(config.out_dir);
  write_file(out_dir / "results.csv", csv);
  write_file(out_dir / "fit.json",
             "{\"fit\": " + fit_json + ", \"event_probability\": " + event_json +
                 ", \"resolved_horizon\": " + fmt17(horizon) + "}\n");
  const std::vector<std::string> outputs{"results.csv", "fit.json", "manifest.json"};
  write_file(out_dir / "manifest.json",
             manifest_json("sweep", config.to_json(), config.seed, outputs, argv) + "\n");
  return 0;
}

struct AsymptoticsArgs {
  std::vector<double> log10n_ladder;
  double mu = 1.0, q = 1.0, gamma = 1.0;
  double t = 1.0;
  std::int64_t k_cap = 10;   // K
  std::int64_t k_marks = 2;  // realized k for the prop1 bound column
  std::string out = ".";
};

int run_asymptotics(const AsymptoticsArgs& a, const std::vector<std::string>& argv) {
  const RateParams rates{a.mu, a.q, a.gamma};
  rates.validate();
  if (a.log10n_ladder.empty())
    throw std::invalid_argument("--log10n-ladder must not be empty");
  for (double v : a.log10n_ladder)
    if (!(v > 1.0))
      throw std::invalid_argument("--log10n-ladder values must be > 1");
  if (a.k_marks < 0 || a.k_marks > a.k_cap)
    throw std::invalid_argument("--k-marks must satisfy 0 <= k <= --k-cap");

  std::string csv =
      "log10_n,W,w,T,d,wf_T,logN_P1,survival,wT_relerr,"
      "w4w_relerr,wt_relerr,poisson_tail_log,stirling_bound_log,"
      "lemma5_value,lemma5_lower_bound,lemma5_leading_order,prop1_bound\n";
  for (double log10n : a.log10n_ladder) {
    const double log_n = log10n * std::log(10.0);
    const auto p2 = prop2_report_log_n(log_n, rates);
    const auto l4 = lemma4_diagnostics(log_n, rates);
    const auto l5 = lemma5_diagnostics(log_n, rates);
    const auto constants = with_horizon(scaling_from_log_n(log_n, rates), a.t);
    double bound = std::numeric_limits<double>::quiet_NaN();
    try {
      bound = prop1_bound(constants, a.k_cap, a.k_marks);
    } catch (const std::exception& e) {
      std::cerr << "warning: log10N=" << log10n << ": " << e.what() << "\n";
    }
    csv += fmt17(log10n);
    csv += ',' + fmt17(p2.big_w);
    csv += ',' + fmt17(p2.w);
    csv += ',' + fmt17(p2.big_t);
    csv += ',' + fmt17(p2.d);
    csv += ',' + fmt17(p2.wf_t);
    csv += ',' + fmt17(p2.log_n_p1);
    csv += ',' + fmt17(p2.survival);
    csv += ',' + fmt17(p2.e_wt_relerr);
    csv += ',' + fmt17(l4.value("w4w_relerr"));
    csv += ',' + fmt17(l4.value("wt_relerr"));
    csv += ',' + fmt17(l4.value("poisson_tail_log"));
    csv += ',' + fmt17(l4.value("stirling_bound_log"));
    csv += ',' + fmt17(l5.value("value"));
    csv += ',' + fmt17(l5.value("lower_bound"));
    csv += ',' + fmt17(l5.value("leading_order"));
    csv += ',' + fmt17(bound);
    csv += '\n';
  }

  fs::create_directories(a.out);
  const fs::path out_dir(a.out);
  write_file(out_dir / "asymptotics.csv", csv);

  std::string params_json = "{\"log10n_ladder\": [";
  for (std::size_t i = 0; i < a.log10n_ladder.size(); ++i) {
    if (i) params_json += ", ";
    params_json += fmt17(a.log10n_ladder[i]);
  }
  params_json += "], \"mu\": " + fmt17(a.mu) + ", \"q\": " + fmt17(a.q);
  params_json += ", \"gamma\": " + fmt17(a.gamma) + ", \"t\": " + fmt17(a.t);
  params_json += ", \"k_cap\": " + std::to_string(a.k_cap);
  params_json += ", \"k_marks\": " + std::to_string(a.k_marks) + "}";
  write_file(out_dir / "manifest.json",
             manifest_json("asymptotics", params_json, 0,
                           {"asymptotics.csv", "manifest.json"}, argv) +
                 "\n");
  return 0;
}

struct BdCompareArgs {
  double w = 0.0, d = 0.0, qmu = 0.0, s = 0.0;
  std::int64_t paths = 0;
  std::uint64_t seed = 1;
  std::string out = ".";
};

int run_bd_compare(const BdCompareArgs& a, const std::vector<std::string>& argv) {
  const BranchingParams bp{a.w, a.d, a.qmu};
  bp.validate();
  if (!(a.s > 0.0)) throw std::invalid_argument("--s must be > 0");
  if (a.paths < 1) throw std::invalid_argument("--paths must be >= 1");

  constexpr std::int64_t kMaxCount = 20;
  std::vector<std::int64_t> counts(kMaxCount + 2, 0);  // 0..20 and 21+
  std::vector<double> advanced_sum(kMaxCount + 2, 0.0);
  for (std::int64_t r = 0; r < a.paths; ++r) {
    const auto path = simulate_bd(bp, a.s, Rng::stream_seed(a.seed, r));
    const auto& last = path.back();
    const std::int64_t z = std::min<std::int64_t>(last.total(), kMaxCount + 1);
    counts[static_cast<std::size_t>(z)] += 1;
    advanced_sum[static_cast<std::size_t>(z)] +=
        static_cast<double>(last.advanced);
  }

  std::vector<double> probs(kMaxCount + 2, 0.0);
  double head = 0.0;
  for (std::int64_t i = 0; i <= kMaxCount; ++i) {
    probs[static_cast<std::size_t>(i)] = count_pmf(bp, a.s, i);
    head += probs[static_cast<std::size_t>(i)];
  }
  probs[kMaxCount + 1] = std::max(0.0, 1.0 - head);
  const auto gof = stats::chi_square_gof(counts, probs);

  std::string csv = "count,analytic_pmf,empirical_freq,stderr,mean_advanced\n";
  const double n = static_cast<double>(a.paths);
  for (std::int64_t i = 0; i <= kMaxCount; ++i) {
    const double freq = static_cast<double>(counts[static_cast<std::size_t>(i)]) / n;
    const double se = std::sqrt(freq * (1.0 - freq) / n);
    const double mean_adv =
        counts[static_cast<std::size_t>(i)] > 0
            ? advanced_sum[static_cast<std::size_t>(i)] /
                  static_cast<double>(counts[static_cast<std::size_t>(i)])
            : 0.0;
    csv += std::to_string(i);
    csv += ',' + fmt17(probs[static_cast<std::size_t>(i)]);
    csv += ',' + fmt17(freq);
    csv += ',' + fmt17(se);
    csv += ',' + fmt17(mean_adv);
    csv += '\n';
  }

  fs::create_directories(a.out);
  const fs::path out_dir(a.out);
  write_file(out_dir / "bd_compare.csv", csv);

  std::string summary = "{\"paths\": " + std::to_string(a.paths);
  summary += ", \"analytic_extinction\": " + fmt17(extinction_prob(bp, a.s));
  summary += ", \"empirical_extinction\": " + fmt17(static_cast<double>(counts[0]) / n);
  summary += ", \"gof_statistic\": " + fmt17(gof.statistic);
  summary += ", \"gof_dof\": " + fmt17(gof.dof);
  summary += ", \"gof_p_value\": " + fmt17(gof.p_value) + "}";
  write_file(out_dir / "bd_compare.json", summary + "\n");

  std::string params_json = "{\"w\": " + fmt17(a.w) + ", \"d\": " + fmt17(a.d);
  params_json += ", \"qmu\": " + fmt17(a.qmu) + ", \"s\": " + fmt17(a.s);
  params_json += ", \"paths\": " + std::to_string(a.paths) + "}";
  write_file(out_dir / "manifest.json",
             manifest_json("bd-compare", params_json, a.seed,
                           {"bd_compare.csv", "bd_compare.json", "manifest.json"},
                           argv) +
                 "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  const auto argv_copy = capture_argv(argc, argv);
  CLI::App app{"Moran-model adaptation toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  SimulateArgs sa;
  auto* sim = app.add_subcommand("simulate", "single trajectory to CSV");
  sim->add_option("--n", sa.n, "population size N")->required();
  sim->add_option("--mu", sa.mu, "mutation rate per individual")->required();
  sim->add_option("--q", sa.q, "beneficial fraction in (0,1]")->required();
  sim->add_option("--gamma", sa.gamma, "selection strength")->required();
  sim->add_option("--horizon", sa.horizon, "simulated time")->required();
  sim->add_option("--seed", sa.seed, "master seed")->required();
  sim->add_option("--samples", sa.samples, "number of sample intervals");
  sim->add_option("--out", sa.out, "output directory");
  sim->add_flag("--snapshot", sa.snapshot, "also write histogram snapshots");

  SweepArgs wa;
  auto* sweep = app.add_subcommand("sweep", "replicate ensemble over an N ladder");
  sweep->add_option("--config", wa.config_path, "JSON config file")->required();
  sweep->add_option("--out", wa.out_override, "override the config output directory");
  sweep->add_flag("--dry-run", wa.dry_run, "print the resolved plan and exit");

  AsymptoticsArgs aa;
  auto* asym = app.add_subcommand("asymptotics", "analytic ladder diagnostics");
  asym->add_option("--log10n-ladder", aa.log10n_ladder, "log10(N) ladder values")
      ->required()
      ->delimiter(',');
  asym->add_option("--mu", aa.mu, "mutation rate");
  asym->add_option("--q", aa.q, "beneficial fraction");
  asym->add_option("--gamma", aa.gamma, "selection strength");
  asym->add_option("--t", aa.t, "horizon used by the mark-count bound");
  asym->add_option("--k-cap", aa.k_cap, "K for the mark-count bound");
  asym->add_option("--k-marks", aa.k_marks, "realized k for the mark-count bound");
  asym->add_option("--out", aa.out, "output directory");

  BdCompareArgs ba;
  auto* bd = app.add_subcommand("bd-compare", "closed-form vs Monte Carlo law");
  bd->add_option("--w", ba.w, "birth rate")->required();
  bd->add_option("--d", ba.d, "death rate")->required();
  bd->add_option("--qmu", ba.qmu, "type-advance rate");
  bd->add_option("--s", ba.s, "evaluation time")->required();
  bd->add_option("--paths", ba.paths, "Monte Carlo paths")->required();
  bd->add_option("--seed", ba.seed, "master seed");
  bd->add_option("--out", ba.out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }

  try {
    if (*sim) return run_simulate(sa, argv_copy);
    if (*sweep) return run_sweep_cmd(wa, argv_copy);
    if (*asym) return run_asymptotics(aa, argv_copy);
    if (*bd) return run_bd_compare(ba, argv_copy);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
