#include "ginprod/kernel.hpp"

#include <gsl/gsl_sf_bessel.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <vector>

namespace ginprod {

namespace {

// Signed-log of N^m * x * y without overflow.
SignedLog scaled_product(double x, double y, int N, int m) {
  return SignedLog::from_real(x) * SignedLog::from_real(y) *
         SignedLog(1, m * std::log((double)N));
}

double sgn(double t) { return t > 0 ? 1.0 : (t < 0 ? -1.0 : 0.0); }

}  // namespace

// ---------------------------------------------------------------------------
// Weight cache: log w_m as a function of lambda = |t|^{1/m}, cubic Lagrange on
// a uniform grid.  In the lambda variable log w_m ~ -(m/2) lambda^2 plus slowly
// varying corrections, so a modest grid spacing gives ~1e-9 interpolation
// error.  m = 1 and m = 2 have closed forms and bypass the table.
// ---------------------------------------------------------------------------
class WeightTable {
 public:
  WeightTable(int m, double lam_max, const WeightConfig& cfg)
      : m_(m), cfg_(cfg), h_(0.01), lam_min_(0.05), lam_max_(lam_max) {
    const int n = (int)std::ceil((lam_max_ - lam_min_) / h_) + 4;
    vals_.resize(n);
    for (int i = 0; i < n; ++i) {
      const double lam = lam_min_ + i * h_;
      vals_[i] = weight(std::pow(lam, m_), cfg_).log_mag;
    }
  }

  int m() const { return m_; }
  double lam_max() const { return lam_max_; }

  double log_w_lambda(double lam) const {
    if (lam < lam_min_ + h_ || lam > lam_max_ - 2 * h_)
      return weight(std::pow(lam, m_), cfg_).log_mag;
    const double u = (lam - lam_min_) / h_;
    int i0 = (int)u - 1;
    i0 = std::clamp(i0, 0, (int)vals_.size() - 4);
    const double t = u - i0;  // in [1, 2] typically
    // cubic Lagrange through nodes i0..i0+3 at offsets 0,1,2,3
    const double c0 = -(t - 1) * (t - 2) * (t - 3) / 6.0;
    const double c1 = t * (t - 2) * (t - 3) / 2.0;
    const double c2 = -t * (t - 1) * (t - 3) / 2.0;
    const double c3 = t * (t - 1) * (t - 2) / 6.0;
    return c0 * vals_[i0] + c1 * vals_[i0 + 1] + c2 * vals_[i0 + 2] +
           c3 * vals_[i0 + 3];
  }

 private:
  int m_;
  WeightConfig cfg_;
  double h_, lam_min_, lam_max_;
  std::vector<double> vals_;
};

namespace {

std::shared_ptr<const WeightTable> table_for(int m, double lam_max,
                                             const WeightConfig& cfg) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, std::shared_ptr<const WeightTable>> cache;
  const int bucket = (int)std::ceil(lam_max / 16.0) * 16;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_pair(m, bucket);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto tab = std::make_shared<const WeightTable>(m, (double)bucket, cfg);
  cache[key] = tab;
  return tab;
}

// log w_m(t) for t >= 0 given an optional table.
double log_weight_raw(double t, int m, const WeightConfig& cfg,
                      const WeightTable* tab) {
  t = std::fabs(t);
  if (m == 1) return -0.5 * t * t;
  if (m == 2) {
    if (t < 1e-300) return weight(0.0, cfg).log_mag;
    if (t < 650.0)
      return M_LN2 + std::log(gsl_sf_bessel_K0_scaled(t)) - t;
    // K0(t) ~ sqrt(pi/(2t)) e^{-t} beyond the range of the scaled routine
    return M_LN2 + 0.5 * std::log(M_PI / (2.0 * t)) - t;
  }
  const double lam = std::pow(t, 1.0 / m);
  if (tab && lam < tab->lam_max()) return tab->log_w_lambda(lam);
  return weight(t, cfg).log_mag;
}

}  // namespace

double KernelContext::log_weight_scaled(double u) const {
  // lambda = (N^{m/2}|u|)^{1/m} = sqrt(N) |u|^{1/m}, computed overflow-free
  const double au = std::fabs(u);
  if (m == 1) return -0.5 * N * au * au;
  const double lam = std::sqrt((double)N) * std::pow(au, 1.0 / m);
  if (m == 2) return log_weight_raw(lam * lam, 2, wcfg, nullptr);
  if (wtab && lam < wtab->lam_max()) return wtab->log_w_lambda(lam);
  return weight(std::pow(lam, m), wcfg).log_mag;
}

KernelContext make_context(int N, int m, int quad_order) {
  if (m < 1) throw PreconditionError("make_context: m must be >= 1", 1);
  if (N < 2 || N % 2 != 0)
    throw PreconditionError(
        "make_context: N must be even (the kernel formulas assume even N) and "
        ">= 2",
        2);
  KernelContext ctx;
  ctx.N = N;
  ctx.m = m;
  ctx.log_C = 1.5 * m * std::log((double)N) -
              m * std::log(2.0 * std::sqrt(2.0 * M_PI));
  ctx.log_D = m * (0.5 * (N - 3) * std::log((double)N) +
                   0.5 * (N - 1) * M_LN2 + log_gamma(0.5 * (N - 1)) -
                   log_gamma((double)N - 1.0));
  ctx.wcfg.m = m;
  ctx.wcfg.quad_order = quad_order;
  if (m >= 3) {
    // cover scaled arguments u up to ~2.5 plus slack
    const double lam_max = std::sqrt((double)N) * std::pow(2.5, 1.0 / m) + 2.0;
    ctx.wtab = table_for(m, lam_max, ctx.wcfg);
  }
  return ctx;
}

// ---------------------------------------------------------------------------
// Scalar kernel
// ---------------------------------------------------------------------------
namespace {

// log-magnitude of (x - v) w(N^{m/2} x) w(N^{m/2} v) f_{N-2}(N^m x v)
struct SIntegrand {
  double x;
  const KernelContext& ctx;
  double lwx;  // log w(N^{m/2} x), hoisted

  SignedLog operator()(double v) const {
    if (v == x) return SignedLog::zero();
    SignedLog f = f_series(scaled_product(x, v, ctx.N, ctx.m), ctx.N, ctx.m);
    return SignedLog::from_real(x - v) * f *
           SignedLog(1, lwx + ctx.log_weight_scaled(v));
  }
  double log_mag(double v) const {
    SignedLog r = (*this)(v);
    return r.sign == 0 ? -1e300 : r.log_mag;
  }
};

// C_{N,m} D_{N,m} x^{N-1} w(N^{m/2} x), the boundary term of Srep1/Srep2
SignedLog boundary_term(double x, const KernelContext& ctx) {
  if (x == 0.0) return SignedLog::zero();
  SignedLog xp = SignedLog::from_real(x).pow_int(ctx.N - 1);
  return xp * SignedLog(1, ctx.log_C + ctx.log_D + ctx.log_weight_scaled(x));
}

double scan_step(const KernelContext& ctx) {
  return 0.25 * std::sqrt((double)ctx.m / ctx.N);
}

// integral of g over the interval between `sing` and `far` (either order)
// where g has an integrable logarithmic singularity at `sing` (the m >= 2
// weight at the origin): the map lam = sing + (far - sing) e^{-u} turns the
// self-similar endpoint into a smooth exponentially damped tail.
template <typename G>
SignedLog integrate_endpoint_sing(G&& g, double sing, double far,
                                  const QuadOptions& opt) {
  const double span = far - sing;
  if (span == 0.0) return SignedLog::zero();
  auto h = [&g, sing, span](double u) {
    const double e = std::exp(-u);
    return g(sing + span * e) * SignedLog::from_real(span * e);
  };
  return integrate_sl(h, 0.0, 60.0, opt);
}

// Fixed composite GL over a scanned window. Used for outer integrals whose
// integrand is itself an adaptive kernel evaluation: the ~1e-9 relative
// noise on each inner value would drive an adaptive outer rule to full
// recursion depth, while the integrand is smooth on the scan-step scale.
template <typename F>
SignedLog composite_window(F&& f, double lo, double hi, double panel_w) {
  const int panels = std::max(1, (int)std::ceil((hi - lo) / panel_w));
  const GLRule& r = gl_rule(31);
  const double h = (hi - lo) / panels;
  SignedLogSum acc;
  for (int p = 0; p < panels; ++p) {
    const double a = lo + p * h;
    for (size_t i = 0; i < r.x.size(); ++i)
      acc.add(f(a + 0.5 * h * (r.x[i] + 1.0)) *
              SignedLog::from_real(0.5 * h * r.w[i]));
  }
  return acc.value();
}

// integral of the Srep integrand over [a, b] with window truncation; the
// integrand changes sign at v = x, so when that point falls inside the
// window the integral is split there (one fixed sign per piece keeps the
// adaptive error estimate from chasing the cancellation).
SignedLog srep_integral(const SIntegrand& g, double a, double b,
                        double seed_lo, double seed_hi,
                        const KernelContext& ctx) {
  auto logf = [&g](double v) { return g.log_mag(v); };
  Window win = scan_window(logf, seed_lo, seed_hi, a, b, scan_step(ctx));
  if (win.hi <= win.lo) return SignedLog::zero();
  auto fn = [&g](double v) { return g(v); };
  // split at the sign change v = x and (m >= 2) the weight's log singularity
  // at v = 0, so each adaptive piece is smooth with a fixed sign
  std::vector<double> cuts{win.lo};
  for (double c : {std::min(g.x, 0.0), std::max(g.x, 0.0)})
    if (c > win.lo && c < win.hi) cuts.push_back(c);
  cuts.push_back(win.hi);
  SignedLogSum acc;
  for (size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double lo = cuts[k], hi = cuts[k + 1];
    if (hi <= lo) continue;
    if (ctx.m >= 2 && lo == 0.0)
      acc.add(integrate_endpoint_sing(fn, 0.0, hi, ctx.quad));
    else if (ctx.m >= 2 && hi == 0.0)
      acc.add(SignedLog(-1, 0.0) *
              integrate_endpoint_sing(fn, 0.0, lo, ctx.quad));
    else
      acc.add(integrate_sl(fn, lo, hi, ctx.quad));
  }
  return acc.value();
}

SignedLog srep1(double x, double y, const KernelContext& ctx) {
  SIntegrand g{x, ctx, ctx.log_weight_scaled(x)};
  // domain [y, inf); integrand decays past max(x, y) on the sqrt(m/N) scale,
  // so the cap must track that scale (it dominates at small N)
  const double top = std::max(x, y);
  const double widen = 10.0 * std::sqrt((double)ctx.m / ctx.N);
  const double hi_cap = top + std::max(1.0, std::fabs(top)) + 2.0 + widen;
  SignedLog integral =
      srep_integral(g, y, hi_cap, y, top + 40.0 * scan_step(ctx), ctx);
  SignedLog term1 =
      SignedLog(-1, M_LN2 + ctx.log_C) * integral;
  return term1 + boundary_term(x, ctx);
}

SignedLog srep2(double x, double y, const KernelContext& ctx) {
  SIntegrand g{x, ctx, ctx.log_weight_scaled(x)};
  // domain (-inf, y]
  const double bot = std::min(x, y);
  const double widen = 10.0 * std::sqrt((double)ctx.m / ctx.N);
  const double lo_cap = -(std::max(std::fabs(x), std::fabs(y)) + 3.0 + widen);
  SignedLog integral =
      srep_integral(g, lo_cap, y, bot - 40.0 * scan_step(ctx), y, ctx);
  SignedLog term1 = SignedLog(1, M_LN2 + ctx.log_C) * integral;
  return term1 - boundary_term(x, ctx);
}

SignedLog srep3(double x, double y, const KernelContext& ctx) {
  SIntegrand g{x, ctx, ctx.log_weight_scaled(x)};
  // domain [0, y] with 0 < y < x; integrand grows toward v = y
  SignedLog integral =
      srep_integral(g, 0.0, y, std::max(0.0, y - 20.0 * scan_step(ctx)), y,
                    ctx);
  SignedLog term1 = SignedLog(1, M_LN2 + ctx.log_C) * integral;
  SignedLog term2 = SignedLog(
      1, ctx.log_C + ctx.m * std::log(2.0 / ctx.N) + ctx.log_weight_scaled(x));
  return term1 + term2;
}

}  // namespace

SignedLog s_kernel_rep(int rep, double x, double y, const KernelContext& ctx) {
  switch (rep) {
    case 1: return srep1(x, y, ctx);
    case 2: return srep2(x, y, ctx);
    case 3: return srep3(x, y, ctx);
    default:
      throw PreconditionError("s_kernel_rep: rep must be 1, 2 or 3", rep);
  }
}

SignedLog s_kernel_sl(double x, double y, const KernelContext& ctx) {
  if (x < 0.0 && y <= 0.0) return s_kernel_sl(-x, -y, ctx);
  if (x < 0.0 && y > 0.0) return s_kernel_sl(-x, -y, ctx);  // -> x > 0 > y
  // now x >= 0
  if (y >= x) return srep1(x, y, ctx);  // saddle v = x at/below the boundary
  if (y > 0.0) return srep3(x, y, ctx);  // 0 < y < x, saddle above the domain
  return srep1(x, y, ctx);  // mixed sign: saddle inside, smooth sign change
}

double s_kernel(double x, double y, const KernelContext& ctx) {
  return s_kernel_sl(x, y, ctx).to_real();
}

// ---------------------------------------------------------------------------
// D and I kernels
// ---------------------------------------------------------------------------
SignedLog d_kernel_sl(double x, double y, const KernelContext& ctx) {
  if (x == y) return SignedLog::zero();
  SignedLog f = f_series(scaled_product(x, y, ctx.N, ctx.m), ctx.N, ctx.m);
  return SignedLog::from_real(y - x) * f *
         SignedLog(1, M_LN2 + ctx.log_C + ctx.log_weight_scaled(x) +
                           ctx.log_weight_scaled(y));
}

double d_kernel(double x, double y, const KernelContext& ctx) {
  return d_kernel_sl(x, y, ctx).to_real();
}

namespace {

// C (2/N)^m int_0^y w(N^{m/2} t) dt; the integrand decays on the N^{-m/2}
// scale so the window is found analytically.
double weight_mass(double y, const KernelContext& ctx) {
  if (y <= 0.0) return 0.0;
  const int m = ctx.m;
  const double sqn = std::sqrt((double)ctx.N);
  // substitute t = (lam/sqrt(N))^m: the log-singularity of w_m at the origin
  // (m >= 2) becomes an integrable lam^{m-1} log factor the adaptive rule
  // handles; the integrand dies at lam ~ sqrt(90/m) (40+ e-folds)
  const double lam_hi = std::min(sqn * std::pow(y, 1.0 / m),
                                 1.5 * std::sqrt(90.0 / m));
  auto g = [&](double lam) {
    const double lw = log_weight_raw(std::pow(lam, m), m, ctx.wcfg,
                                     ctx.wtab.get());
    return SignedLog(1, lw + (m - 1) * std::log(std::max(lam, 1e-300)));
  };
  SignedLog integral = m >= 2
                           ? integrate_endpoint_sing(g, 0.0, lam_hi, ctx.quad)
                           : integrate_sl(g, 0.0, lam_hi, ctx.quad);
  const double jac = std::log((double)m) - m * std::log(sqn);
  return (SignedLog(1, ctx.log_C + m * std::log(2.0 / ctx.N) + jac) * integral)
      .to_real();
}

// int_0^x S(t, y) dt for 0 < x < y; the integrand is largest at the endpoint
// t = x, so the effective support is a window below x.
double s_partial_integral(double x, double y, const KernelContext& ctx) {
  auto f = [&](double t) { return s_kernel_sl(t, y, ctx); };
  auto logf = [&](double t) {
    SignedLog r = f(t);
    return r.sign == 0 ? -1e300 : r.log_mag;
  };
  const double step = scan_step(ctx);
  Window win =
      scan_window(logf, std::max(0.0, x - 30.0 * step), x, 0.0, x, step);
  if (win.hi <= win.lo) return 0.0;
  if (ctx.m >= 2 && win.lo == 0.0) {  // S(t,y) is log-singular at t = 0
    QuadOptions opt = ctx.quad;
    opt.rel_tol = std::max(opt.rel_tol, 1e-7);  // inner kernel evals are costly
    return integrate_endpoint_sing(f, 0.0, win.hi, opt).to_real();
  }
  return composite_window(f, win.lo, win.hi, 4.0 * step).to_real();
}

}  // namespace

double i_kernel(double x, double y, const KernelContext& ctx) {
  if (x == y) return 0.0;
  if (x > y) return -i_kernel(y, x, ctx);
  // now x < y
  if (y <= 0.0) return i_kernel(-y, -x, ctx);  // I(-x,-y) = -I(x,y) + swap
  // x < y, y > 0: I = int_x^y S(t,y) dt - 1/2
  //             = -int_0^x S(t,y) dt + C (2/N)^m int_0^y w - 1/2
  double t1;
  if (x > 0.0) {
    t1 = -s_partial_integral(x, y, ctx);
  } else if (x == 0.0) {
    t1 = 0.0;
  } else {
    // -int_0^x = +int_x^0; S(t,y) decays fast below t = 0, so truncate the
    // domain and relax the tolerance (each evaluation is itself adaptive)
    auto f = [&](double t) { return s_kernel_sl(t, y, ctx); };
    auto logf = [&](double t) {
      SignedLog r = f(t);
      return r.sign == 0 ? -1e300 : r.log_mag;
    };
    const double step = scan_step(ctx);
    Window win = scan_window(logf, std::max(x, -2.0 * step), 0.0, x, 0.0, step);
    if (win.hi <= win.lo) {
      t1 = 0.0;
    } else if (ctx.m >= 2 && win.hi == 0.0) {  // S(t,y) log-singular at t = 0
      QuadOptions opt = ctx.quad;
      opt.rel_tol = std::max(opt.rel_tol, 1e-7);
      t1 = (SignedLog(-1, 0.0) *
            integrate_endpoint_sing(f, 0.0, win.lo, opt))
               .to_real();
    } else {
      t1 = composite_window(f, win.lo, win.hi, 4.0 * step).to_real();
    }
  }
  return t1 + weight_mass(y, ctx) - 0.5;
}

double i_kernel_direct(double x, double y, const KernelContext& ctx) {
  if (x == y) return 0.0;
  const double lo = std::min(x, y), hi = std::max(x, y);
  auto f = [&](double t) { return s_kernel_sl(t, y, ctx); };
  QuadOptions opt = ctx.quad;
  opt.rel_tol = std::max(opt.rel_tol, 1e-8);
  double integral = integrate_sl(f, lo, hi, opt).to_real();
  if (x > y) integral = -integral;
  return integral + 0.5 * sgn(x - y);
}

KernelSample2x2 matrix_kernel(double x, double y, const KernelContext& ctx) {
  KernelSample2x2 k;
  k.d = d_kernel(x, y, ctx);
  k.s_xy = s_kernel(x, y, ctx);
  k.s_yx = (x == y) ? k.s_xy : s_kernel(y, x, ctx);
  k.i = i_kernel(x, y, ctx);
  return k;
}

// ---------------------------------------------------------------------------
// Limiting kernels and scalings
// ---------------------------------------------------------------------------
double rho_density(double x, int m) {
  const double ax = std::fabs(x);
  if (ax >= 1.0) return 0.0;
  if (ax == 0.0)
    return m == 1 ? 0.5 : std::numeric_limits<double>::infinity();
  return 0.5 / m * std::pow(ax, 1.0 / m - 1.0);
}

KernelSample2x2 bulk_limit_kernel(double xi, double zeta) {
  KernelSample2x2 k;
  const double u = xi - zeta;
  const double phi = std::exp(-0.5 * u * u) / std::sqrt(2.0 * M_PI);
  k.s_xy = phi;
  k.s_yx = phi;
  k.d = (zeta - xi) * std::exp(-0.5 * u * u) / std::sqrt(2.0 * M_PI);
  k.i = 0.5 * sgn(u) * std::erfc(std::fabs(u) / std::sqrt(2.0));
  return k;
}

namespace {

double s_edge_scalar(double xi, double zeta) {
  const double u = xi - zeta;
  return std::exp(-0.5 * u * u) * std::erfc((xi + zeta) / std::sqrt(2.0)) /
             (2.0 * std::sqrt(2.0 * M_PI)) +
         std::exp(-xi * xi) * std::erfc(-zeta) / (4.0 * std::sqrt(M_PI));
}

// int_xi^zeta s(t, zeta) dt + 1/2 sgn(xi - zeta) for a positive O(1) scalar s
template <typename S>
double i_from_scalar(double xi, double zeta, S&& s) {
  if (xi == zeta) return 0.0;
  const double lo = std::min(xi, zeta), hi = std::max(xi, zeta);
  QuadOptions opt;
  opt.rel_tol = 1e-10;
  double integral =
      integrate_sl([&](double t) { return SignedLog::from_real(s(t, zeta)); },
                   lo, hi, opt)
          .to_real();
  if (xi > zeta) integral = -integral;
  return integral + 0.5 * sgn(xi - zeta);
}

}  // namespace

KernelSample2x2 edge_limit_kernel(double xi, double zeta) {
  KernelSample2x2 k;
  k.s_xy = s_edge_scalar(xi, zeta);
  k.s_yx = s_edge_scalar(zeta, xi);
  const double u = xi - zeta;
  k.d = (zeta - xi) * std::exp(-0.5 * u * u) *
        std::erfc((xi + zeta) / std::sqrt(2.0)) / (2.0 * std::sqrt(2.0 * M_PI));
  k.i = i_from_scalar(xi, zeta, s_edge_scalar);
  return k;
}

namespace {

struct OriginHelper {
  int m;
  WeightConfig cfg;
  std::shared_ptr<const WeightTable> tab;

  explicit OriginHelper(int m_, const WeightConfig& cfg_) : m(m_), cfg(cfg_) {
    cfg.m = m;
    if (m >= 3) {
      const double cap = 2.0 * std::pow(90.0 / m, 0.5 * m) + 20.0;
      tab = table_for(m, std::pow(cap, 1.0 / m) + 1.0, cfg);
    }
  }

  double log_w(double t) const { return log_weight_raw(t, m, cfg, tab.get()); }

  // s^{origin}(xi, zeta) = (2 sqrt(2 pi))^{-m} w(xi) *
  //   int dn (xi - n) sgn(zeta - n) w(n) f_inf(xi n)
  double s(double xi, double zeta) const {
    const double pref = -m * std::log(2.0 * std::sqrt(2.0 * M_PI));
    auto g = [&](double n) {
      if (n == xi) return SignedLog::zero();
      SignedLog f = f_inf(SignedLog::from_real(xi * n), m);
      return SignedLog::from_real(xi - n) * f * SignedLog(1, log_w(n));
    };
    auto logg = [&](double n) {
      SignedLog r = g(n);
      return r.sign == 0 ? -1e300 : r.log_mag;
    };
    // decay cap: log integrand ~ -(m/2)|n|^{2/m} + m |xi n|^{1/m}
    const double cap =
        std::pow(90.0 / m, 0.5 * m) + 4.0 * std::fabs(xi) + 6.0;
    QuadOptions opt;
    opt.rel_tol = 1e-9;
    SignedLogSum acc;
    const double seed = std::max(std::fabs(xi), 1.0);
    // the integrand changes sign at n = xi and (m >= 2) the weight is
    // log-singular at n = 0; split at both so each adaptive piece is smooth
    // with a fixed sign
    auto add_piece = [&](double lo, double hi, int sign) {
      if (hi <= lo) return;
      std::vector<double> cuts{lo};
      for (double c : {std::min(xi, 0.0), std::max(xi, 0.0)})
        if (c > lo && c < hi) cuts.push_back(c);
      std::sort(cuts.begin(), cuts.end());
      cuts.push_back(hi);
      SignedLogSum p;
      for (size_t k = 0; k + 1 < cuts.size(); ++k) {
        const double a = cuts[k], b = cuts[k + 1];
        if (b <= a) continue;
        if (m >= 2 && a == 0.0)
          p.add(integrate_endpoint_sing(g, 0.0, b, opt));
        else if (m >= 2 && b == 0.0)
          p.add(SignedLog(-1, 0.0) * integrate_endpoint_sing(g, 0.0, a, opt));
        else
          p.add(integrate_sl(g, a, b, opt));
      }
      acc.add(SignedLog(sign, 0.0) * p.value());
    };
    // n < zeta branch, weight sgn = +1
    {
      Window w = scan_window(logg, std::min(-seed, zeta - 1.0),
                             std::min(seed, zeta), -cap, zeta, 0.25);
      add_piece(w.lo, w.hi, 1);
    }
    // n > zeta branch, weight sgn = -1
    {
      Window w = scan_window(logg, zeta, std::max(seed, zeta + 1.0), zeta, cap,
                             0.25);
      add_piece(w.lo, w.hi, -1);
    }
    SignedLog total = acc.value() * SignedLog(1, pref + log_w(xi));
    return total.to_real();
  }

  double d(double xi, double zeta) const {
    if (xi == zeta) return 0.0;
    SignedLog f = f_inf(SignedLog::from_real(xi * zeta), m);
    SignedLog v = SignedLog::from_real(zeta - xi) * f *
                  SignedLog(1, M_LN2 - m * std::log(2.0 * std::sqrt(2.0 * M_PI)) +
                                   log_w(xi) + log_w(zeta));
    return v.to_real();
  }
};

}  // namespace

KernelSample2x2 origin_limit_kernel(double xi, double zeta, int m,
                                    const WeightConfig& cfg) {
  WeightConfig c = cfg;
  c.m = m;
  c.validate();
  OriginHelper h(m, c);
  KernelSample2x2 k;
  k.s_xy = h.s(xi, zeta);
  k.s_yx = (xi == zeta) ? k.s_xy : h.s(zeta, xi);
  k.d = h.d(xi, zeta);
  k.i = i_from_scalar(xi, zeta, [&h](double t, double z) { return h.s(t, z); });
  return k;
}

KernelSample2x2 scaled_kernel(Regime regime, double xi, double zeta,
                              const KernelContext& ctx, double E) {
  const int N = ctx.N, m = ctx.m;
  KernelSample2x2 k;
  if (regime == Regime::origin) {
    const double scale = std::pow((double)N, -0.5 * m);
    const double x = xi * scale, y = zeta * scale;
    k.s_xy = scale * s_kernel(x, y, ctx);
    k.s_yx = scale * s_kernel(y, x, ctx);
    k.d = scale * scale * d_kernel(x, y, ctx);
    k.i = i_kernel(x, y, ctx);
    return k;
  }
  double cc;
  if (regime == Regime::bulk) {
    if (E == 0.0 || E <= -1.0 || E >= 1.0)
      throw PreconditionError(
          "scaled_kernel: bulk regime requires E in (-1,1) \\ {0}", E);
    cc = 2.0 * std::sqrt((double)N * m) * rho_density(E, m);
  } else {
    E = 1.0;
    cc = std::sqrt((double)N / m);  // 2 sqrt(Nm) rho(1) with rho(1) = 1/(2m)
  }
  const double x = E + xi / cc, y = E + zeta / cc;
  k.s_xy = s_kernel(x, y, ctx) / cc;
  k.s_yx = s_kernel(y, x, ctx) / cc;
  k.d = d_kernel(x, y, ctx) / (cc * cc);
  k.i = i_kernel(x, y, ctx);
  return k;
}

double nu(double xi, int N, int m) {
  const double b = 1.0 + std::sqrt((double)m / N) * xi;
  if (b <= 0.0)
    throw PreconditionError("nu: 1 + sqrt(m/N) xi must be positive", b);
  return std::exp(-0.5 * std::sqrt((double)N * m) *
                  (std::pow(b, 2.0 / m) - 1.0));
}

GlobalApprox global_approx(double x, double y, const KernelContext& ctx,
                           double eps) {
  const int N = ctx.N, m = ctx.m;
  const double lo = std::pow((double)N, -0.5 * m + eps);
  const double hi = 1.0 - std::pow((double)N, -0.5 + eps);
  for (double t : {x, y}) {
    const double at = std::fabs(t);
    if (at <= lo || at >= hi)
      throw PreconditionError(
          "global_approx: |x| must lie in (N^{-m/2+eps}, 1-N^{-1/2+eps})", at);
  }
  GlobalApprox g;
  const double u = x - y;
  const double gauss = std::exp(-0.5 * N * m * u * u);
  g.s = std::sqrt(N / (2.0 * m * M_PI)) * gauss;
  g.d = std::pow((double)N, 1.5) / (std::sqrt(m) * std::sqrt(2.0 * M_PI)) *
        (y - x) * gauss;
  g.i = 0.5 * sgn(u) * std::erfc(std::sqrt((double)N * m) * std::fabs(u) /
                                 std::sqrt(2.0));
  return g;
}

KernelSample2x2 tilde_kernel(double x, double y, const KernelContext& ctx) {
  const double rx = rho_density(x, ctx.m), ry = rho_density(y, ctx.m);
  if (rx <= 0.0 || ry <= 0.0 || !std::isfinite(rx) || !std::isfinite(ry))
    throw PreconditionError(
        "tilde_kernel: x, y must lie in the open bulk (-1,1) \\ {0}", x);
  const double sqn = std::sqrt((double)ctx.N);
  KernelSample2x2 k;
  k.d = d_kernel(x, y, ctx) / (ctx.N * rx * ry);
  k.s_xy = s_kernel(x, y, ctx) / (sqn * rx);
  k.s_yx = s_kernel(y, x, ctx) / (sqn * ry);
  k.i = i_kernel(x, y, ctx);
  return k;
}

}  // namespace ginprod
