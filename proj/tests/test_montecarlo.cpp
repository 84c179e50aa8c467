#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "ginprod/montecarlo.hpp"

using namespace ginprod;

TEST_CASE("philox4x32-10 known-answer vectors") {
  // reference vectors from the published counter-based RNG test suite
  auto r0 = Philox4x32::block({0, 0, 0, 0}, {0, 0});
  CHECK(r0[0] == 0x6627e8d5u);
  CHECK(r0[1] == 0xe169c58du);
  CHECK(r0[2] == 0xbc57ac4cu);
  CHECK(r0[3] == 0x9b00dbd8u);
  auto r1 = Philox4x32::block({0x243f6a88u, 0x85a308d3u, 0x13198a2eu,
                               0x03707344u},
                              {0xa4093822u, 0x299f31d0u});
  CHECK(r1[0] == 0xd16cfe09u);
  CHECK(r1[1] == 0x94fdccebu);
  CHECK(r1[2] == 0x5001e420u);
  CHECK(r1[3] == 0x24126ea1u);
}

TEST_CASE("philox streams are reproducible and distinct") {
  Philox4x32 a(12345, 7, 2), b(12345, 7, 2), c(12345, 8, 2), d(12346, 7, 2);
  auto ba = a.next_block(), bb = b.next_block();
  CHECK(ba == bb);
  CHECK(ba != c.next_block());
  CHECK(ba != d.next_block());
  // counter advances
  CHECK(a.next_block() != ba);
}

TEST_CASE("fill_normal produces standard normals") {
  const size_t n = 100000;
  std::vector<double> z(n);
  Philox4x32 rng(99, 0, 0);
  rng.fill_normal(z.data(), n);
  double mean = 0, var = 0;
  for (double x : z) mean += x;
  mean /= n;
  for (double x : z) var += (x - mean) * (x - mean);
  var /= n - 1;
  CHECK(std::fabs(mean) < 4.0 / std::sqrt((double)n));
  CHECK(var == doctest::Approx(1.0).epsilon(0.02));
  for (double x : z) REQUIRE(std::isfinite(x));
}

TEST_CASE("sample_spectrum parity and determinism") {
  EnsembleSpec spec{10, 2, 1, 77, 1};
  for (long t = 0; t < 50; ++t) {
    SpectralSample s = sample_spectrum(spec, t);
    CHECK(s.n_real % 2 == spec.N % 2);
    CHECK((int)s.real_eigs.size() == s.n_real);
    CHECK(std::is_sorted(s.real_eigs.begin(), s.real_eigs.end()));
  }
  SpectralSample a = sample_spectrum(spec, 3);
  SpectralSample b = sample_spectrum(spec, 3);
  CHECK(a.real_eigs == b.real_eigs);  // bit-identical

  EnsembleSpec n2{2, 1, 1, 5, 1};
  for (long t = 0; t < 50; ++t) {
    const int n = sample_spectrum(n2, t).n_real;
    CHECK((n == 0 || n == 2));
  }
}

TEST_CASE("N=2 mean real-eigenvalue count is sqrt(2)") {
  EnsembleSpec spec{2, 1, 200000, 2024, 1};
  RunSummary rs = run_ensemble(spec, {obs_count()});
  const ObservableSummary& c = rs.observables[0];
  CHECK(std::fabs(c.mean - std::sqrt(2.0)) <= 3.0 * c.se_mean);
}

TEST_CASE("worker count does not change the result") {
  EnsembleSpec s1{20, 1, 200, 31, 1};
  EnsembleSpec s4 = s1;
  s4.workers = 4;
  RunSummary a = run_ensemble(s1, {obs_count(), obs_lambda_max()});
  RunSummary b = run_ensemble(s4, {obs_count(), obs_lambda_max()});
  for (size_t i = 0; i < a.observables.size(); ++i) {
    CHECK(a.observables[i].mean == b.observables[i].mean);
    CHECK(a.observables[i].variance == b.observables[i].variance);
    CHECK(a.observables[i].sorted_values == b.observables[i].sorted_values);
  }
}

TEST_CASE("support concentrates on (-1,1) and the count scales as sqrt(N)") {
  const double limit = std::sqrt(2.0 / M_PI);
  double dev100 = 0, dev400 = 0;
  {
    EnsembleSpec spec{100, 1, 600, 7, 1};
    EnsembleResult res = run_trials(spec);
    long total = 0, outside = 0;
    double count = 0;
    for (const SpectralSample& s : res.samples) {
      total += s.n_real;
      count += s.n_real;
      for (double x : s.real_eigs)
        if (std::fabs(x) >= 1.2) ++outside;
    }
    CHECK((double)outside <= 0.01 * (double)total);
    dev100 = std::fabs(count / spec.trials / 10.0 - limit);
  }
  {
    EnsembleSpec spec{400, 1, 300, 7, 1};
    EnsembleResult res = run_trials(spec);
    double count = 0;
    for (const SpectralSample& s : res.samples) count += s.n_real;
    dev400 = std::fabs(count / spec.trials / 20.0 - limit);
    CHECK(dev400 <= 0.1 * limit);
  }
  CHECK(dev400 < dev100);  // monotone approach to the limit
}

TEST_CASE("linear and mesoscopic statistics") {
  SpectralSample s;
  s.real_eigs = {-0.2, 0.5};
  s.n_real = 2;
  s.N = 100;
  CHECK(linear_statistic(s, [](double x) { return x; }) ==
        doctest::Approx(0.3).epsilon(1e-15));
  CHECK(linear_statistic(s, [](double x) {
          return (x > 0 && x < 1) ? 1.0 : 0.0;
        }) == 1.0);
  SpectralSample empty;
  CHECK(linear_statistic(empty, [](double) { return 1.0; }) == 0.0);
  CHECK_THROWS_AS(
      linear_statistic(s, [](double) { return std::nan(""); }),
      std::domain_error);

  // tau = 0, E = 0, even f: equals the plain linear statistic
  auto f = [](double x) { return std::exp(-x * x); };
  CHECK(mesoscopic_statistic(s, f, 0.0, 0.0) ==
        doctest::Approx(linear_statistic(s, f)).epsilon(1e-15));
  // window arithmetic: N^tau = 10, only eigenvalues within 0.1 of E count
  auto box = [](double x) { return std::fabs(x) <= 1.0 ? 1.0 : 0.0; };
  CHECK(mesoscopic_statistic(s, box, 0.5, 0.5) == 1.0);
  CHECK(mesoscopic_statistic(s, box, 0.5, 0.25) == 1.0);
}

TEST_CASE("extremes") {
  SpectralSample s;
  s.real_eigs = {-0.5, 0.1, 0.9};
  Extremes e = extremes(s);
  CHECK(*e.lambda_max == 0.9);
  CHECK(*e.lambda_min_positive == 0.1);
  s.real_eigs = {-0.5};
  e = extremes(s);
  CHECK(*e.lambda_max == -0.5);
  CHECK(!e.lambda_min_positive);
  s.real_eigs = {};
  e = extremes(s);
  CHECK(!e.lambda_max);
  CHECK(!e.lambda_min_positive);
}

TEST_CASE("observable plumbing: f=1 linear statistic equals the count") {
  EnsembleSpec spec{10, 1, 40, 13, 1};
  EnsembleResult res = run_trials(spec);
  Observable one = obs_linear("one", [](double) { return 1.0; });
  for (const SpectralSample& s : res.samples)
    CHECK(*one.eval(s) == (double)s.n_real);
}

TEST_CASE("summarize_values moments") {
  ObservableSummary o = summarize_values("x", {1.0, 2.0, 3.0, 4.0}, 2);
  CHECK(o.mean == doctest::Approx(2.5));
  CHECK(o.variance == doctest::Approx(5.0 / 3.0));
  CHECK(o.skewness == doctest::Approx(0.0));
  CHECK(o.excluded == 2);
  CHECK(o.sorted_values == std::vector<double>{1, 2, 3, 4});
}

TEST_CASE("ks_distance") {
  CHECK(ks_distance({0.0}, [](double) { return 0.5; }) == 0.5);
  CHECK(ks_distance({1.0, 2.0}, [](double) { return 1.0; }) == 1.0);
  CHECK_THROWS_AS(ks_distance({}, [](double) { return 0.5; }),
                  std::invalid_argument);
  CHECK_THROWS_AS(ks_distance({1.0, 2.0},
                              [](double x) { return x > 1.5 ? 0.2 : 0.8; }),
                  std::invalid_argument);
  // inverse-transform samples from the cdf itself
  const int n = 10000;
  std::vector<double> u(n);
  Philox4x32 rng(4, 0, 0);
  rng.fill_normal(u.data(), n);  // normals, against the normal cdf
  std::sort(u.begin(), u.end());
  auto phi = [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); };
  CHECK(ks_distance(u, phi) < 2.0 * 1.36 / std::sqrt((double)n));
}
