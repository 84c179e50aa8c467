#include "ginprod/quad.hpp"

#include <gsl/gsl_integration.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <quadmath.h>

namespace ginprod {

const GLRule& gl_rule(int order) {
  static std::map<int, GLRule> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(order);
  if (it != cache.end()) return it->second;
  gsl_integration_glfixed_table* t = gsl_integration_glfixed_table_alloc(order);
  GLRule r;
  r.x.resize(order);
  r.w.resize(order);
  for (int i = 0; i < order; ++i) {
    double xi, wi;
    gsl_integration_glfixed_point(-1.0, 1.0, i, &xi, &wi, t);
    r.x[i] = xi;
    r.w[i] = wi;
  }
  gsl_integration_glfixed_table_free(t);
  return cache.emplace(order, std::move(r)).first->second;
}

void gl_nodes(int order, double a, double b,
              std::vector<double>& nodes, std::vector<double>& weights) {
  const GLRule& r = gl_rule(order);
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  for (int i = 0; i < order; ++i) {
    nodes.push_back(c + h * r.x[i]);
    weights.push_back(h * r.w[i]);
  }
}

namespace {

SignedLog panel_sum(const std::function<SignedLog(double)>& f, double a, double b,
                    const GLRule& r, double* peak_log) {
  SignedLogSum acc;
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  for (size_t i = 0; i < r.x.size(); ++i) {
    SignedLog v = f(c + h * r.x[i]);
    if (v.sign != 0 && v.log_mag > *peak_log) *peak_log = v.log_mag;
    acc.add(v * SignedLog::from_real(h * r.w[i]));
  }
  return acc.value();
}

struct AdaptiveState {
  const std::function<SignedLog(double)>* f;
  const GLRule *lo, *hi;
  QuadOptions opt;
  double peak_log = -std::numeric_limits<double>::infinity();
  bool failed = false;
};

SignedLog adapt(AdaptiveState& st, double a, double b, SignedLog coarse, int depth) {
  SignedLog fine = panel_sum(*st.f, a, 0.5 * (a + b), *st.hi, &st.peak_log) +
                   panel_sum(*st.f, 0.5 * (a + b), b, *st.hi, &st.peak_log);
  SignedLog diff = fine - coarse;
  const double scale = std::max(fine.log_mag, st.peak_log - st.opt.cancel_guard +
                                                  std::log(std::max(b - a, 1e-300)));
  if (diff.sign == 0 || diff.log_mag <= scale + std::log(st.opt.rel_tol)) return fine;
  if (depth >= st.opt.max_depth) {
    st.failed = true;
    return fine;
  }
  const double m = 0.5 * (a + b);
  SignedLog cl = panel_sum(*st.f, a, m, *st.lo, &st.peak_log);
  SignedLog cr = panel_sum(*st.f, m, b, *st.lo, &st.peak_log);
  return adapt(st, a, m, cl, depth + 1) + adapt(st, m, b, cr, depth + 1);
}

}  // namespace

SignedLog integrate_sl(const std::function<SignedLog(double)>& f,
                       double a, double b, const QuadOptions& opt) {
  if (!(b > a)) return SignedLog::zero();
  AdaptiveState st;
  st.f = &f;
  st.lo = &gl_rule(opt.order);
  st.hi = &gl_rule(2 * opt.order + 1);
  st.opt = opt;
  SignedLog coarse = panel_sum(f, a, b, *st.lo, &st.peak_log);
  SignedLog result = adapt(st, a, b, coarse, 0);
  if (st.failed)
    throw QuadFailure("adaptive quadrature: tolerance unmet at max depth", result);
  return result;
}

double integrate(const std::function<double(double)>& f,
                 double a, double b, const QuadOptions& opt) {
  return integrate_sl([&](double x) { return SignedLog::from_real(f(x)); }, a, b, opt)
      .to_real();
}

Window scan_window(const std::function<double(double)>& logf,
                   double seed_lo, double seed_hi,
                   double lo_cap, double hi_cap,
                   double step, double efolds) {
  double peak = -std::numeric_limits<double>::infinity();
  const int kCoarse = 24;
  for (int i = 0; i <= kCoarse; ++i) {
    const double x = seed_lo + (seed_hi - seed_lo) * i / kCoarse;
    peak = std::max(peak, logf(x));
  }
  auto extend = [&](double from, double dir, double cap) {
    double x = from, h = step;
    for (int it = 0; it < 400; ++it) {
      double nx = x + dir * h;
      if ((dir > 0 && nx >= cap) || (dir < 0 && nx <= cap)) return cap;
      const double l = logf(nx);
      x = nx;
      if (l > peak) {
        peak = l;
        h = step;  // refine near a rising slope so the summit is sampled
      } else {
        if (l < peak - efolds) return x;
        h = std::min(h * 1.25, 64 * step);
      }
    }
    return x;
  };
  Window w;
  w.lo = extend(seed_lo, -1.0, lo_cap);
  w.hi = extend(seed_hi, +1.0, hi_cap);
  w.peak_log = peak;
  return w;
}

namespace {

template <typename Real>
Real legendre_pair(int n, Real x, Real* dp) {
  Real p0 = 1, p1 = x;
  for (int k = 2; k <= n; ++k) {
    Real p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / Real(k);
    p0 = p1;
    p1 = p2;
  }
  *dp = Real(n) * (x * p1 - p0) / (x * x - 1);
  return p1;
}

}  // namespace

template <typename Real>
void gl_rule01(int order, std::vector<Real>& x01, std::vector<Real>& w01) {
  x01.resize(order);
  w01.resize(order);
  for (int i = 0; i < order; ++i) {
    // standard cosine initial guess, then Newton
    Real x = Real(-std::cos(M_PI * (i + 0.75) / (order + 0.5)));
    for (int it = 0; it < 60; ++it) {
      Real dp;
      Real p = legendre_pair(order, x, &dp);
      Real dx = p / dp;
      x -= dx;
      if (fabsq((__float128)dx) < 1e-32) break;
    }
    Real dp;
    legendre_pair(order, x, &dp);
    x01[i] = (x + 1) / 2;
    w01[i] = 1 / ((1 - x * x) * dp * dp);  // full weight 2/((1-x^2)P'^2), halved for [0,1]
  }
}

template void gl_rule01<double>(int, std::vector<double>&, std::vector<double>&);
template void gl_rule01<__float128>(int, std::vector<__float128>&, std::vector<__float128>&);

}  // namespace ginprod
