#pragma once
#include <functional>
#include <stdexcept>
#include <vector>

#include "ginprod/signed_log.hpp"

namespace ginprod {

/// Gauss-Legendre nodes/weights on [-1,1], cached per order (thread-safe init).
struct GLRule {
  std::vector<double> x, w;
};
const GLRule& gl_rule(int order);

/// Map a [-1,1] rule onto [a,b]; appends (node, weight) pairs.
void gl_nodes(int order, double a, double b,
              std::vector<double>& nodes, std::vector<double>& weights);

struct QuadOptions {
  int order = 15;          // panel order (doubled for the error estimate)
  double rel_tol = 1e-9;   // tolerance on the log of the result, i.e. relative
  int max_depth = 28;
  // Give up on relative accuracy once the result is this far (in e-folds)
  // below the largest integrand magnitude encountered: the integral is
  // cancellation-dominated and the absolute scale is what matters.
  double cancel_guard = 34.0;
};

struct QuadFailure : std::runtime_error {
  SignedLog estimate;
  QuadFailure(const std::string& msg, SignedLog est)
      : std::runtime_error(msg), estimate(est) {}
};

/// Adaptive quadrature of a signed-log integrand on a finite interval.
SignedLog integrate_sl(const std::function<SignedLog(double)>& f,
                       double a, double b, const QuadOptions& opt = {});

/// Plain-double adaptive quadrature (thin wrapper over integrate_sl).
double integrate(const std::function<double(double)>& f,
                 double a, double b, const QuadOptions& opt = {});

/// Locate a finite window [lo,hi] containing the mass of a log-scale integrand:
/// starting from seed points, walk outward until log|f| falls `efolds` below
/// the observed peak (or a hard span limit is hit). Directions with a finite
/// hard boundary pass it via lo_cap/hi_cap.
struct Window { double lo, hi, peak_log; };
Window scan_window(const std::function<double(double)>& logf,
                   double seed_lo, double seed_hi,
                   double lo_cap, double hi_cap,
                   double step, double efolds = 40.0);

/// Fixed-order composite Gauss-Legendre for an arbitrary float type.
/// Used to instantiate the exact-identity quadrature in __float128: those
/// integrals cancel by up to ~1e22 relative to the integrand peak, beyond
/// any double-precision sampling scheme.
template <typename Real, typename F>
Real gl_fixed(const F& f, Real a, Real b, const std::vector<Real>& x01,
              const std::vector<Real>& w01, int panels) {
  Real total = 0;
  const Real h = (b - a) / Real(panels);
  for (int p = 0; p < panels; ++p) {
    const Real pa = a + h * Real(p);
    Real s = 0;
    for (size_t i = 0; i < x01.size(); ++i) s += w01[i] * f(pa + h * x01[i]);
    total += s * h;
  }
  return total;
}

/// Gauss-Legendre nodes/weights on [0,1] computed by Newton iteration in the
/// requested precision (supports __float128).
template <typename Real>
void gl_rule01(int order, std::vector<Real>& x01, std::vector<Real>& w01);

}  // namespace ginprod
