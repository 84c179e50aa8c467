#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ginprod/quad.hpp"
#include "ginprod/special.hpp"

using namespace ginprod;

namespace {
double rel_err(double a, double b) { return std::fabs(a - b) / std::fabs(b); }
}

TEST_CASE("log_erfc basics") {
  CHECK(log_erfc(0.0).sign == 1);
  CHECK(log_erfc(0.0).log_mag == doctest::Approx(0.0).epsilon(1e-14));
  // frozen high-precision values of erfc
  CHECK(log_erfc(1.0).to_real() ==
        doctest::Approx(0.15729920705028513).epsilon(1e-12));
  // reflection erfc(-z) = 2 - erfc(z) at z = 0.7
  const double e07 = 0.32219880616258153;
  CHECK(log_erfc(0.7).to_real() == doctest::Approx(e07).epsilon(1e-12));
  CHECK(log_erfc(-0.7).to_real() == doctest::Approx(2.0 - e07).epsilon(1e-12));
  CHECK_THROWS_AS(log_erfc(std::nan("")), std::domain_error);
}

TEST_CASE("log_erfc large z stays finite and accurate") {
  // moderate z: compare against a shifted brute-force integral,
  // erfc(z) = (2/sqrt(pi)) e^{-z^2} int_0^inf e^{-t^2 - 2zt} dt
  for (double z : {8.0, 12.0, 20.0}) {
    SignedLog integral = integrate_sl(
        [z](double t) { return SignedLog(1, -t * t - 2.0 * z * t); }, 0.0, 5.0);
    double lref = -z * z + std::log(2.0 / std::sqrt(M_PI)) + integral.log_mag;
    CHECK(std::fabs(log_erfc(z).log_mag - lref) < 1e-11 * std::fabs(lref));
  }
  // very large z: two correction terms of the asymptotic series suffice
  for (double z : {50.0, 1e3, 1e4}) {
    double l = log_erfc(z).log_mag;
    double lead = -z * z - std::log(z * std::sqrt(M_PI));
    double corr = std::log1p(-1.0 / (2 * z * z) + 3.0 / (4 * std::pow(z, 4)));
    CHECK(std::fabs(l - (lead + corr)) < 1e-12 * std::fabs(l) + 1e-10);
  }
}

TEST_CASE("log_erfc vs brute-force integral, z in [-5,5]") {
  for (double z = -5.0; z <= 5.0; z += 0.5) {
    SignedLog integral = integrate_sl(
        [](double t) { return SignedLog(1, -t * t); }, z, z + 30.0);
    double oracle = 2.0 / std::sqrt(M_PI) * integral.to_real();
    CHECK(rel_err(log_erfc(z).to_real(), oracle) < 1e-11);
  }
}

TEST_CASE("weight m=1 closed form") {
  WeightConfig cfg;
  CHECK(weight(1.0, cfg).to_real() == doctest::Approx(std::exp(-0.5)).epsilon(1e-14));
  CHECK(weight(0.0, cfg).to_real() == doctest::Approx(1.0));
}

TEST_CASE("weight m=2 vs brute-force 2-D quadrature oracle") {
  // delta eliminated against b: w(x) = 2 int_0^inf e^{-a^2/2 - x^2/(2a^2)} da/a
  WeightConfig cfg;
  cfg.m = 2;
  auto oracle = [](double x) {
    return 2.0 * integrate_sl(
                     [x](double u) {  // a = e^u
                       double a = std::exp(u);
                       return SignedLog(1, -0.5 * a * a - 0.5 * x * x / (a * a));
                     },
                     -30.0, 4.0)
                     .to_real();
  };
  CHECK(rel_err(weight(1.0, cfg).to_real(), oracle(1.0)) < 1e-8);
  // frozen Bessel value: w_2(x) = 2 K_0(|x|), 2 K_0(1) = 0.84204887648141667
  CHECK(rel_err(weight(1.0, cfg).to_real(), 0.84204887648141667) < 1e-10);
  CHECK(rel_err(weight(3.7, cfg).to_real(), oracle(3.7)) < 1e-8);
}

TEST_CASE("weight m=3 vs frozen oracle") {
  WeightConfig cfg;
  cfg.m = 3;
  // high-precision nested-Bessel quadrature: w_3(1) = 1.3627101080134386
  CHECK(rel_err(weight(1.0, cfg).to_real(), 1.3627101080134386) < 1e-8);
}

TEST_CASE("weight symmetry and config validation") {
  WeightConfig cfg;
  cfg.m = 2;
  for (double x : {0.3, 1.0, 17.0, 140.0})
    CHECK(weight(x, cfg).log_mag == doctest::Approx(weight(-x, cfg).log_mag));
  WeightConfig bad;
  bad.m = 0;
  CHECK_THROWS_AS(weight(1.0, bad), std::domain_error);
  bad.m = 1;
  bad.quad_order = 8;
  CHECK_THROWS_AS(weight(1.0, bad), std::domain_error);
}

TEST_CASE("moment identity to 1e-8") {
  // int_0^inf v^k w(N^{m/2} v) dv = 1/2 (2/N)^{m(k+1)/2} Gamma((k+1)/2)^m
  for (int m : {1, 2, 3}) {
    WeightConfig cfg;
    cfg.m = m;
    for (int N : {1, 50}) {
      const double scale = std::pow((double)N, 0.5 * m);
      for (int k = 0; k <= 8; ++k) {
        // substitute v = e^u: the m>=2 log singularity at v=0 becomes smooth
        auto f = [&](double u) {
          double v = std::exp(u);
          return SignedLog(1, (k + 1) * u) * weight(scale * v, cfg);
        };
        Window win = scan_window(
            [&](double u) { return f(u).log_mag; }, -2.0 - std::log(scale), 1.0,
            -700.0, 50.0, 0.5, 60.0);
        QuadOptions opt;
        opt.rel_tol = 1e-11;
        double got = integrate_sl(f, win.lo, win.hi, opt).to_real();
        double want = 0.5 * std::pow(2.0 / N, 0.5 * m * (k + 1)) *
                      std::exp(m * log_gamma(0.5 * (k + 1)));
        CAPTURE(m); CAPTURE(N); CAPTURE(k);
        CHECK(rel_err(got, want) < 1e-8);
      }
    }
  }
}

TEST_CASE("weight_asym agreement and preconditions") {
  WeightConfig cfg;
  cfg.m = 1;
  // m = 1: exactly e^{-N x^2 / 2}
  CHECK(weight_asym(0.37, 100, cfg).log_mag ==
        doctest::Approx(-100 * 0.37 * 0.37 / 2).epsilon(1e-13));
  cfg.m = 2;
  double approx = weight_asym(0.5, 200, cfg).log_mag;
  double exact = weight(std::pow(200.0, 1.0) * 0.5, cfg).log_mag;  // N^{m/2} x = 100
  CHECK(std::fabs(std::exp(approx - exact) - 1.0) < 0.04);  // error scale 1/(N x)
  CHECK_THROWS_AS(weight_asym(1e-4, 200, cfg), PreconditionError);
}

TEST_CASE("f_series frozen oracles") {
  CHECK(f_series(SignedLog::zero(), 40, 2).to_real() == doctest::Approx(1.0));
  // m=1, a=1, N=60: sum_{j<=58} 1/j! = e to machine precision
  CHECK(rel_err(f_series(SignedLog::from_real(1.0), 60, 1).to_real(),
                2.718281828459045235) < 1e-12);
  // m=2, a=-4, N=40: equals J_0(4) (frozen compensated-summation oracle)
  CHECK(rel_err(f_series(SignedLog::from_real(-4.0), 40, 2).to_real(),
                -0.39714980986384737) < 1e-10);
}

TEST_CASE("f_inf frozen oracles and tail control") {
  CHECK(f_inf(SignedLog::zero(), 3).to_real() == doctest::Approx(1.0));
  CHECK(rel_err(f_inf(SignedLog::from_real(2.5), 1).to_real(),
                12.182493960703473) < 1e-12);
  // m=2, a=9: f_inf = I_0(6) = 67.234406976477975
  CHECK(rel_err(f_inf(SignedLog::from_real(9.0), 2).to_real(),
                67.234406976477975) < 1e-12);
}

TEST_CASE("f_tail equals f_inf - f_series") {
  SignedLog a = SignedLog::from_real(30.0);
  double diff = (f_inf(a, 1) - f_series(a, 20, 1)).to_real();
  CHECK(rel_err(f_tail(a, 20, 1).to_real(), diff) < 1e-9);
}

TEST_CASE("series order and domination properties") {
  for (double av : {0.5, 4.0, 90.0}) {
    SignedLog a = SignedLog::from_real(av);
    for (int m : {1, 2}) {
      double fs = f_series(a, 30, m).log_mag;
      CHECK(f_series(a, 32, m).log_mag >= fs);            // monotone truncation
      CHECK(f_inf(a, m).log_mag >= fs - 1e-12);           // domination
    }
  }
}

TEST_CASE("f_asym_bulk vs f_inf") {
  // m=1 collapses to e^{Nx}
  CHECK(f_asym_bulk(0.3, 100, 1).log_mag == doctest::Approx(30.0).epsilon(1e-13));
  // m=2, N=200, x=0.25: relative error O(1/(sqrt(x) N))
  {
    double a = std::pow(200.0, 2) * 0.25;
    double lr = f_asym_bulk(0.25, 200, 2).log_mag -
                f_inf(SignedLog::from_real(a), 2).log_mag;
    CHECK(std::fabs(lr) < 0.02);
  }
  // m=3, N=500, x=0.5: log agreement within 0.01
  {
    double a = std::pow(500.0, 3) * 0.5;
    double lr = f_asym_bulk(0.5, 500, 3).log_mag -
                f_inf(SignedLog::from_real(a), 3).log_mag;
    CHECK(std::fabs(lr) < 0.01);
  }
  CHECK_THROWS_AS(f_asym_bulk(1e-7, 100, 2), PreconditionError);
}

TEST_CASE("f_edge window") {
  // x = 1, m = 1, N = 400: the formula evaluates to e^N/2 exactly, so the
  // ratio to the truncated series equals 1/(2 P[Pois(400) <= 398]), a frozen
  // 50-digit oracle.  The deviation from 1 is the genuine O(N^{-1/2}) error
  // of the asymptotic, not an implementation artifact.
  {
    double ratio = std::exp(f_edge(1.0, 400, 1).log_mag -
                            f_series(SignedLog::from_real(400.0), 400, 1).log_mag);
    CHECK(ratio == doctest::Approx(1.0561716186106108).epsilon(1e-9));
  }
  // x = 1 + 3/sqrt(N), N = 400, m = 2: deeper into the window the relative
  // error shrinks; 5% holds here
  {
    double x = 1.0 + 3.0 / 20.0;
    double a = std::pow(400.0, 2) * x;
    double ratio = std::exp(f_edge(x, 400, 2).log_mag -
                            f_series(SignedLog::from_real(a), 400, 2).log_mag);
    CHECK(ratio > 0.95);
    CHECK(ratio < 1.05);
  }
  CHECK_THROWS_AS(f_edge(0.2, 400, 1), PreconditionError);
}

TEST_CASE("f_transition branches") {
  auto ratio_to_series = [](double x, int N, int m) {
    SignedLog a = SignedLog::from_real(x) * SignedLog(1, m * std::log((double)N));
    SignedLog t = f_transition(x, N, m);
    SignedLog s = f_series(a, N, m);
    CHECK(t.sign == s.sign);
    return std::exp(t.log_mag - s.log_mag);
  };
  CHECK(ratio_to_series(0.5, 400, 1) == doctest::Approx(1.0).epsilon(0.1));
  CHECK(ratio_to_series(1.5, 400, 1) == doctest::Approx(1.0).epsilon(0.1));
  CHECK(ratio_to_series(-0.5, 400, 1) == doctest::Approx(1.0).epsilon(0.1));
  CHECK_THROWS_AS(f_transition(1.0, 400, 1), PreconditionError);
}
