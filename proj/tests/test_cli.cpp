#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace {

namespace fs = std::filesystem;

std::string cli_path() {
  const char* p = std::getenv("MORAN_CLI");
  return p ? p : "";
}

int run(const std::string& args) {
  const int rc = std::system((cli_path() + " " + args + " >/dev/null 2>&1").c_str());
  return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TmpDir {
  fs::path path;
  explicit TmpDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TmpDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("cli: simulate smoke, schema, and validation exit codes") {
  REQUIRE_MESSAGE(!cli_path().empty(), "MORAN_CLI must point at the binary");
  TmpDir tmp("moran_cli_sim");
  const std::string out = (tmp.path / "a").string();
  CHECK(run("simulate --n 200 --mu 1 --q 0.6 --gamma 1 --horizon 2 --seed 7 --out " +
            out) == 0);
  const auto csv = slurp(tmp.path / "a" / "trajectory.csv");
  CHECK(csv.rfind("t,mean,c2,max,median\n", 0) == 0);
  CHECK(fs::exists(tmp.path / "a" / "manifest.json"));

  // Monotone time column.
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  double prev = -1.0;
  while (std::getline(lines, line)) {
    const double t = std::stod(line.substr(0, line.find(',')));
    CHECK(t >= prev);
    prev = t;
  }

  CHECK(run("simulate --mu 1 --q 0.6 --gamma 1 --horizon 2 --seed 7") == 2);
  CHECK(run("simulate --n 200 --mu 1 --q 0.6 --gamma 1 --horizon -2 --seed 7") == 2);
  CHECK(run("simulate --n 200 --mu 1 --q 2.0 --gamma 1 --horizon 2 --seed 7") == 2);
}

TEST_CASE("cli: missing required flag names the flag on stderr") {
  TmpDir tmp("moran_cli_err");
  const std::string err_file = (tmp.path / "err.txt").string();
  const int rc = std::system(
      (cli_path() + " simulate --mu 1 --q 0.6 --gamma 1 --horizon 2 --seed 7 2>" +
       err_file + " >/dev/null")
          .c_str());
  CHECK(WEXITSTATUS(rc) == 2);
  CHECK(slurp(err_file).find("--n") != std::string::npos);
}

TEST_CASE("cli: simulate is byte-deterministic") {
  TmpDir tmp("moran_cli_det");
  const std::string a = (tmp.path / "a").string();
  const std::string b = (tmp.path / "b").string();
  const std::string flags = "simulate --n 300 --mu 1 --q 0.7 --gamma 1 --horizon 3 --seed 99 --snapshot --out ";
  CHECK(run(flags + a) == 0);
  CHECK(run(flags + b) == 0);
  CHECK(slurp(tmp.path / "a" / "trajectory.csv") == slurp(tmp.path / "b" / "trajectory.csv"));
  CHECK(slurp(tmp.path / "a" / "snapshots.json") == slurp(tmp.path / "b" / "snapshots.json"));
}

TEST_CASE("cli: sweep config validation and dry run") {
  TmpDir tmp("moran_cli_sweep");
  const fs::path cfg = tmp.path / "cfg.json";
  std::ofstream(cfg) << "{\"n_ladder\": [20, 40], \"mu\": 1, \"q\": 1, \"gamma\": 1, "
                        "\"horizon\": 0.5, \"replicates\": 2, \"seed\": 5, \"out\": \""
                     << (tmp.path / "out").string() << "\"}";
  CHECK(run("sweep --config " + cfg.string() + " --dry-run") == 0);
  CHECK_FALSE(fs::exists(tmp.path / "out" / "results.csv"));
  CHECK(run("sweep --config " + cfg.string()) == 0);
  CHECK(fs::exists(tmp.path / "out" / "results.csv"));
  CHECK(fs::exists(tmp.path / "out" / "fit.json"));
  CHECK(fs::exists(tmp.path / "out" / "manifest.json"));

  const fs::path bad = tmp.path / "bad.json";
  std::ofstream(bad) << "{\"n_ladder\": [40, 20], \"mu\": 1, \"q\": 1, \"gamma\": 1, "
                        "\"replicates\": 2, \"seed\": 5}";
  TmpDir tmp2("moran_cli_sweep_err");
  const std::string err_file = (tmp2.path / "err.txt").string();
  const int rc = std::system(
      (cli_path() + " sweep --config " + bad.string() + " 2>" + err_file + " >/dev/null").c_str());
  CHECK(WEXITSTATUS(rc) == 2);
  CHECK(slurp(err_file).find("/n_ladder") != std::string::npos);
}

TEST_CASE("cli: asymptotics single point and domain validation") {
  TmpDir tmp("moran_cli_asym");
  const std::string out = (tmp.path / "a").string();
  CHECK(run("asymptotics --log10n-ladder 10 --gamma 1 --q 1 --mu 0.1 --out " + out) == 0);
  const auto csv = slurp(tmp.path / "a" / "asymptotics.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);  // header + one row
  CHECK(run("asymptotics --log10n-ladder 0.5 --gamma 1 --q 1 --mu 0.1") == 2);
}

TEST_CASE("cli: bd-compare determinism and validation") {
  TmpDir tmp("moran_cli_bd");
  const std::string a = (tmp.path / "a").string();
  const std::string b = (tmp.path / "b").string();
  const std::string flags = "bd-compare --w 2 --d 1 --qmu 0 --s 1 --paths 2000 --seed 6 --out ";
  CHECK(run(flags + a) == 0);
  CHECK(run(flags + b) == 0);
  CHECK(slurp(tmp.path / "a" / "bd_compare.csv") == slurp(tmp.path / "b" / "bd_compare.csv"));
  CHECK(slurp(tmp.path / "a" / "bd_compare.json") == slurp(tmp.path / "b" / "bd_compare.json"));

  // qmu = 0: the advanced-type column is identically zero.
  std::istringstream lines(slurp(tmp.path / "a" / "bd_compare.csv"));
  std::string line;
  std::getline(lines, line);
  while (std::getline(lines, line)) {
    const auto pos = line.rfind(',');
    CHECK(line.substr(pos + 1) == "0");
  }

  CHECK(run("bd-compare --w 0 --d 1 --s 1 --paths 10") == 2);
  CHECK(run("bd-compare --w 2 --d 1 --s 1 --paths 0") == 2);
}
