#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "moran/rng.hpp"
#include "moran/stats.hpp"

using namespace moran;

TEST_CASE("rng streams are deterministic and distinct") {
  Rng a = Rng::stream(42, 7, 3);
  Rng b = Rng::stream(42, 7, 3);
  Rng c = Rng::stream(42, 7, 4);
  bool all_equal = true, any_equal_c = false;
  for (int i = 0; i < 64; ++i) {
    const auto x = a.next_u64(), y = b.next_u64(), z = c.next_u64();
    all_equal = all_equal && (x == y);
    any_equal_c = any_equal_c || (x == z);
  }
  CHECK(all_equal);
  CHECK_FALSE(any_equal_c);
  CHECK(Rng::stream_seed(1, 2, 3) != Rng::stream_seed(1, 3, 2));
}

TEST_CASE("uniform01 stays in [0,1) and below(n) in range") {
  Rng rng(9);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform01();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  for (std::uint64_t n : {1ull, 2ull, 7ull, 1000ull}) {
    for (int i = 0; i < 2000; ++i) CHECK(rng.below(n) < n);
  }
}

TEST_CASE("exponential and poisson match their first moments") {
  Rng rng(123);
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) sum += rng.exponential(4.0);
  CHECK(sum / n == doctest::Approx(0.25).epsilon(0.02));

  for (double mean : {0.3, 3.0, 40.0}) {
    double total = 0.0;
    const int reps = 20000;
    for (int i = 0; i < reps; ++i) total += static_cast<double>(rng.poisson(mean));
    const double got = total / reps;
    const double se = std::sqrt(mean / reps);
    CHECK(std::abs(got - mean) < 4 * se);
  }
}

TEST_CASE("wilson interval brackets the frequency") {
  const auto w = stats::wilson(8, 10);
  CHECK(w.freq == doctest::Approx(0.8));
  CHECK(w.lo < 0.8);
  CHECK(w.hi > 0.8);
  CHECK(w.lo > 0.0);
  CHECK(w.hi < 1.0);
  const auto zero = stats::wilson(0, 50);
  CHECK(zero.lo == 0.0);
  CHECK(zero.hi > 0.0);
}

TEST_CASE("chi-square GOF accepts the true law and rejects a wrong one") {
  Rng rng(55);
  std::vector<std::int64_t> counts(6, 0);
  for (int i = 0; i < 60000; ++i) ++counts[rng.below(6)];
  std::vector<double> fair(6, 1.0 / 6.0);
  CHECK(stats::chi_square_gof(counts, fair).p_value > 0.01);
  std::vector<double> skew{0.3, 0.3, 0.1, 0.1, 0.1, 0.1};
  CHECK(stats::chi_square_gof(counts, skew).p_value < 1e-6);
}

TEST_CASE("kendall tau-b: perfect order, ties, and significance") {
  std::vector<double> x{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::vector<double> y{2, 3, 5, 7, 8, 9, 12, 15, 16, 20};
  const auto k = stats::kendall_tau_b(x, y);
  CHECK(k.tau_b == doctest::Approx(1.0));
  CHECK(k.p_greater < 0.05);

  std::vector<double> anti(y.rbegin(), y.rend());
  const auto ka = stats::kendall_tau_b(x, anti);
  CHECK(ka.tau_b == doctest::Approx(-1.0));
  CHECK(ka.p_greater > 0.95);

  // Grouped predictor (ties in x only) with a clean group effect: every
  // cross-group pair is concordant, so tau_b = sqrt((n0-tx)/n0).
  std::vector<double> gx, gy;
  for (int g = 0; g < 3; ++g)
    for (int i = 0; i < 20; ++i) {
      gx.push_back(g);
      gy.push_back(g * 10.0 + i * 0.01);
    }
  const auto kg = stats::kendall_tau_b(gx, gy);
  CHECK(kg.tau_b == doctest::Approx(std::sqrt(1200.0 / 1770.0)));
  CHECK(kg.p_greater < 1e-6);
}

TEST_CASE("linear_fit recovers an exact line") {
  std::vector<double> x{1.0, 2.0, 3.0, 4.0};
  std::vector<double> y;
  for (double v : x) y.push_back(3.0 * v - 1.0);
  const auto f = stats::linear_fit(x, y);
  CHECK(f.slope == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(f.intercept == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(f.r2 == doctest::Approx(1.0));
  std::vector<double> flat{2.0, 2.0, 2.0};
  CHECK_THROWS_AS(stats::linear_fit(flat, flat), std::invalid_argument);
}

TEST_CASE("mean_se basics") {
  std::vector<double> xs{1.0, 2.0, 3.0, 4.0};
  const auto ms = stats::mean_se(xs);
  CHECK(ms.mean == doctest::Approx(2.5));
  CHECK(ms.se == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
}
