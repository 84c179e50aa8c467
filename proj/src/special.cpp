#include "ginprod/special.hpp"

#include <gsl/gsl_sf_bessel.h>
#include <gsl/gsl_sf_erf.h>
#include <gsl/gsl_sf_gamma.h>
#include <quadmath.h>

#include <algorithm>
#include <cmath>

#include "ginprod/quad.hpp"

namespace ginprod {

double log_gamma(double x) { return gsl_sf_lngamma(x); }

SignedLog log_erfc(double z) {
  if (!std::isfinite(z)) throw std::domain_error("log_erfc: non-finite input");
  if (z < 8.0) return SignedLog(1, gsl_sf_log_erfc(z));
  // asymptotic scaled form: erfc(z) = e^{-z^2}/(z sqrt(pi)) * S,
  // S = sum_k (-1)^k (2k-1)!!/(2 z^2)^k  (truncate at the smallest term)
  const double inv2z2 = 1.0 / (2.0 * z * z);
  double term = 1.0, s = 1.0;
  for (int k = 1; k < 40; ++k) {
    const double next = term * (2 * k - 1) * inv2z2;
    if (next >= term) break;  // asymptotic series started diverging
    term = next;
    s += (k & 1) ? -term : term;
    if (term < 1e-18 * s) break;
  }
  return SignedLog(1, -z * z - std::log(z) - 0.5 * std::log(M_PI) + std::log(s));
}

namespace {

// Solve g(delta) = target for increasing g on [0, 400] by bisection.
double bisect_increasing(const std::function<double(double)>& g, double target) {
  double lo = 0.0, hi = 400.0;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    (g(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// w_d in log-lambda coordinates:
// w_d(x) = 2 * Int du exp(-e^{2u}/2) w_{d-1}(x e^{-u}),   w_1(t) = e^{-t^2/2}.
// The integrand's exponent is g(u) = -lam^2 [(d-1)e^{2(u-u*)/(d-1)} + e^{-2(u-u*)}]/2
// with lam = |x|^{1/d}, u* = ln lam (use w_{d-1}(t) ~ e^{-(d-1)t^{2/(d-1)}/2});
// the window is cut where g drops the configured number of e-folds below its
// peak -d lam^2/2. One fixed-order composite GL pass then suffices: the
// integrand is analytic and unimodal in u.
SignedLog weight_rec(double x, int d, const WeightConfig& cfg) {
  if (d == 1) return SignedLog(1, -0.5 * x * x);
  const double ax = std::fabs(x);
  const double efolds = std::min(0.5 * cfg.domain_cut * cfg.domain_cut, 80.0);
  double u_lo, u_hi;
  if (ax > 0) {
    const double lam = std::pow(ax, 1.0 / d);
    const double ustar = std::log(lam);
    const double rhs = d + 2.0 * efolds / (lam * lam);
    const double dl = bisect_increasing(
        [&](double t) { return (d - 1) * std::exp(2.0 * t / (d - 1)) + std::exp(-2.0 * t); },
        rhs);
    const double dr = bisect_increasing(
        [&](double t) { return (d - 1) * std::exp(-2.0 * t / (d - 1)) + std::exp(2.0 * t); },
        rhs);
    u_lo = ustar - dl - 1.0;
    u_hi = ustar + dr + 1.0;
  } else {  // w_d(0) has a logarithmic divergence for d >= 2; truncated window
    u_lo = -efolds;
    u_hi = 0.5 * std::log(2.0 * efolds) + 1.0;
  }
  const int panels = std::clamp((int)std::ceil((u_hi - u_lo) / 8.0), 1, 8);
  const int order = std::max(32, cfg.quad_order / panels);
  const GLRule& rule = gl_rule(order);
  SignedLogSum acc;
  const double h = (u_hi - u_lo) / panels;
  for (int p = 0; p < panels; ++p) {
    const double c = u_lo + (p + 0.5) * h;
    for (size_t i = 0; i < rule.x.size(); ++i) {
      const double u = c + 0.5 * h * rule.x[i];
      const double lg = -0.5 * std::exp(2.0 * u) +
                        weight_rec(ax * std::exp(-u), d - 1, cfg).log_mag;
      acc.add(SignedLog(1, lg + std::log(0.5 * h * rule.w[i])));
    }
  }
  return SignedLog(1, M_LN2) * acc.value();
}

}  // namespace

SignedLog weight(double x, const WeightConfig& cfg) {
  cfg.validate();
  if (cfg.m == 1) return SignedLog(1, -0.5 * x * x);
  return weight_rec(x, cfg.m, cfg);
}

SignedLog weight_asym(double x, int N, const WeightConfig& cfg) {
  cfg.validate();
  const int m = cfg.m;
  const double ax = std::fabs(x);
  // m = 1 is exact for every x, so the validity threshold only applies to the
  // genuinely asymptotic cases m >= 2.
  const double thr = m == 1 ? 0.0 : 10.0 * std::pow(N, -0.5 * m);
  if (m >= 2 && ax < thr)
    throw PreconditionError("weight_asym: |x| below validity threshold", thr);
  const double lm =
      -0.5 * (m - 1) * std::log((double)N) - 0.5 * N * m * std::pow(ax, 2.0 / m) +
      0.5 * (m - 1) * std::log(4.0 * M_PI) - 0.5 * std::log((double)m) -
      (double(m - 1) / m) * std::log(ax);
  return SignedLog(1, lm);
}

namespace {

// sum_j z^j/(j!)^m for z < 0, |z| given in log form, in __float128 (covers
// alternating-series cancellation up to ~70 e-folds beyond double).
SignedLog alt_series_quad(double log_abs_z, int m) {
  const __float128 z = -expq((__float128)log_abs_z);
  __float128 term = 1.0q, sum = 1.0q, peak = 1.0q;
  for (int j = 1; j < 2000000; ++j) {
    __float128 d = 1.0q;
    for (int r = 0; r < m; ++r) d *= (__float128)j;
    term *= z / d;
    sum += term;
    const __float128 at = fabsq(term);
    if (at > peak) peak = at;
    if (at < peak * 1e-40q && at < fabsq(sum) * 1e-40q + 1e-4900q) break;
  }
  if (sum == 0.0q) return SignedLog::zero();
  const int sgn = sum > 0.0q ? 1 : -1;
  return SignedLog(sgn, (double)logq(fabsq(sum)));
}

// f_inf on the negative axis, where the defining alternating series cancels
// from its e^{m|z|^{1/m}} peak term down to e^{m cos(pi/m)|z|^{1/m}} and
// double precision drowns in roundoff: closed forms for m = 1, 2; extended
// precision, then the leading saddle-point asymptotic
//   f_inf(z) ~ 2 (2 pi)^{-(m-1)/2} m^{-1/2} Re[ s^{(1-m)/2} e^{m s} ],
//   s = |z|^{1/m} e^{i pi/m},
// for m >= 3 (relative error O(|z|^{-1/m}); used only where the result is
// exponentially far below the neighboring positive-axis scale).
SignedLog f_inf_neg(double log_abs_z, int m) {
  if (m == 1) {
    const double az = std::exp(log_abs_z);
    return std::isfinite(az) ? SignedLog(1, -az) : SignedLog::zero();
  }
  if (m == 2) {
    const double arg = 2.0 * std::exp(0.5 * log_abs_z);
    return SignedLog::from_real(gsl_sf_bessel_J0(arg));
  }
  const double t = std::exp(log_abs_z / m);
  const double cancel = m * (1.0 - std::cos(M_PI / m)) * t;
  if (cancel < 60.0) return alt_series_quad(log_abs_z, m);
  const double re = t * std::cos(M_PI / m), im = t * std::sin(M_PI / m);
  // s^{(1-m)/2} e^{m s} = exp((1-m)/2 log s + m s)
  const double lre = 0.5 * (1 - m) * (log_abs_z / m) + m * re;
  const double phase = 0.5 * (1 - m) * (M_PI / m) + m * im;
  const double c = std::cos(phase);
  if (c == 0.0) return SignedLog::zero();
  const double logmag = std::log(2.0) -
                        0.5 * (m - 1) * std::log(2.0 * M_PI) -
                        0.5 * std::log((double)m) + lre +
                        std::log(std::fabs(c));
  return SignedLog(c > 0 ? 1 : -1, logmag);
}

}  // namespace

SignedLog f_series(SignedLog a, int N, int m) {
  if (a.sign == 0) return SignedLog::one();
  if (a.sign < 0 && a.log_mag < m * std::log((double)N - 1)) {
    // |z|^{1/m} < N-1: the truncated-sum cancellation reaches e^{2m|z|^{1/m}}
    // while the tail series decreases term by term, so f = f_inf - f_tail is
    // the numerically stable route.
    return f_inf_neg(a.log_mag, m) - f_tail(a, N, m);
  }
  SignedLogSum acc;
  double lgf = 0.0;  // log j!
  for (int j = 0; j <= N - 2; ++j) {
    if (j > 0) lgf += std::log((double)j);
    const int sign = (a.sign < 0 && (j & 1)) ? -1 : 1;
    acc.add(SignedLog(sign, j * a.log_mag - m * lgf));
  }
  return acc.value();
}

SignedLog f_inf(SignedLog a, int m, double tol) {
  if (a.sign == 0) return SignedLog::one();
  if (a.sign < 0) {
    if (m <= 2) return f_inf_neg(a.log_mag, m);
    const double t = std::exp(a.log_mag / m);
    if (m * (1.0 - std::cos(M_PI / m)) * t > 25.0)
      return f_inf_neg(a.log_mag, m);
  }
  SignedLogSum acc;
  double max_term = -std::numeric_limits<double>::infinity();
  double lgf = 0.0;  // log j!
  for (int j = 0;; ++j) {
    if (j > 0) lgf += std::log((double)j);
    const double lt = j * a.log_mag - m * lgf;
    const int sign = (a.sign < 0 && (j & 1)) ? -1 : 1;
    acc.add(SignedLog(sign, lt));
    max_term = std::max(max_term, lt);
    // past the series peak the term ratio a/(j+1)^m is < 1 and falling
    if (j > 0 && lt < max_term && lt < acc.anchor() + std::log(tol)) break;
    if (j > 2000000) break;
  }
  return acc.value();
}

SignedLog f_tail(SignedLog a, int N, int m, double tol) {
  if (a.sign == 0) return SignedLog::zero();
  SignedLogSum acc;
  double max_term = -std::numeric_limits<double>::infinity();
  double lgf = log_gamma((double)N);  // log (N-1)!
  for (int j = N - 1;; ++j) {
    if (j > N - 1) lgf += std::log((double)j);
    const double lt = j * a.log_mag - m * lgf;
    const int sign = (a.sign < 0 && (j & 1)) ? -1 : 1;
    acc.add(SignedLog(sign, lt));
    max_term = std::max(max_term, lt);
    if (j > N && lt < max_term && lt < acc.anchor() + std::log(tol)) break;
    if (j > N + 2000000) break;
  }
  return acc.value();
}

SignedLog f_asym_bulk(double x, int N, int m) {
  const double thr = 10.0 * std::pow((double)N, -(double)m);
  if (!(x > thr))
    throw PreconditionError("f_asym_bulk: x below validity threshold", thr);
  const double lm = -0.5 * (m - 1) * std::log(2.0 * M_PI) -
                    (double(m - 1) / (2.0 * m)) * std::log(x) +
                    N * m * std::pow(x, 1.0 / m) -
                    0.5 * (m - 1) * std::log((double)N) - 0.5 * std::log((double)m);
  return SignedLog(1, lm);
}

SignedLog f_edge(double x, int N, int m, double window) {
  const double thr = 1.0 - window / std::sqrt((double)N);
  if (!(x > thr))
    throw PreconditionError("f_edge: x below validity window", thr);
  const double rn = std::sqrt((double)N);
  const double lm = N * m - 0.5 * m * std::log(2.0 * M_PI) +
                    0.5 * std::log(M_PI / (2.0 * m)) -
                    0.5 * (m - 1) * std::log((double)N) + (N - 1) * std::log(x) +
                    N * (x - 1) * (x - 1) / (2.0 * m);
  return SignedLog(1, lm) * log_erfc(rn * (x - 1) / std::sqrt(2.0 * m));
}

SignedLog f_transition(double x, int N, int m) {
  const double om = 1.0 / std::sqrt((double)N);
  const double lo = std::pow(1.0 - om, m), hi = std::pow(1.0 + om, m);
  if (x > lo && x < hi)
    throw PreconditionError("f_transition: x inside the edge window; use f_edge", lo);
  SignedLog total = SignedLog::zero();
  if (x > -hi && x < lo)
    total = total + f_inf(SignedLog::from_real(x) * SignedLog(1, m * std::log((double)N)), m);
  // saddle term x^{N-1} e^{mN} / ((2 pi N)^{m/2} (x-1))
  SignedLog saddle = SignedLog::from_real(x).pow_int(N - 1) *
                     SignedLog(1, m * N - 0.5 * m * std::log(2.0 * M_PI * N)) /
                     SignedLog::from_real(x - 1.0);
  return total + saddle;
}

}  // namespace ginprod
