#include "ginprod/fredholm.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

#include "ginprod/quad.hpp"
#include "ginprod/special.hpp"

namespace ginprod {

QuadratureGrid make_grid(double a, double b, int order) {
  if (!(b > a)) throw std::invalid_argument("make_grid: need b > a");
  QuadratureGrid g;
  g.a = a;
  g.b = b;
  const int panels = std::max(1, order / 8);
  for (int p = 0; p < panels; ++p)
    gl_nodes(8, a + p * (b - a) / panels, a + (p + 1) * (b - a) / panels,
             g.nodes, g.weights);
  return g;
}

GapProbResult gap_series(const KernelFn& kernel, double a, double b,
                         const std::function<double(double)>& envelope,
                         int grid_order, int ell_max, double tol) {
  if (ell_max < 1 || ell_max > 12)
    throw std::invalid_argument("gap_series: ell_max in [1, 12]");
  GapProbResult res;
  res.ell_max = ell_max;
  if (!(b > a)) return res;  // empty domain: gap probability 1

  const QuadratureGrid grid = make_grid(a, b, grid_order);
  const int g = (int)grid.nodes.size();

  // per-point scale sqrt(w_i nu_i), folded symmetrically into the 2x2 block
  // row/column pair of point i so subset Pfaffians carry prod w_i nu_i
  std::vector<double> scale(g);
  double wsum = 0;
  double env_max = 0;
  for (int i = 0; i < g; ++i) {
    const double nu_i = envelope(grid.nodes[i]);
    if (!(nu_i >= 0))
      throw std::invalid_argument("gap_series: envelope must be >= 0");
    scale[i] = std::sqrt(grid.weights[i] * nu_i);
    wsum += grid.weights[i] * nu_i;
    env_max = std::max(env_max, nu_i);
  }
  if (env_max < 1e-16) return res;  // envelope dead: empty effective domain

  const int dim = 2 * g;
  std::vector<double> B((size_t)dim * dim, 0.0);
  double ksup = 0;
  for (int i = 0; i < g; ++i)
    for (int j = i; j < g; ++j) {
      const KernelSample2x2 k = kernel(grid.nodes[i], grid.nodes[j]);
      const double c = scale[i] * scale[j];
      ksup = std::max({ksup, std::fabs(k.d), std::fabs(k.s_xy),
                       std::fabs(k.s_yx), std::fabs(k.i)});
      auto put = [&](int r, int cidx, double v) {
        B[(size_t)r * dim + cidx] = v;
        B[(size_t)cidx * dim + r] = -v;
      };
      put(2 * i, 2 * j + 1, c * k.s_xy);
      if (i == j) continue;
      put(2 * i, 2 * j, c * k.d);
      put(2 * i + 1, 2 * j, -c * k.s_yx);
      put(2 * i + 1, 2 * j + 1, c * k.i);
    }

  // Pf(J + mu B) = sum_{l=0..g} mu^l m_l with m_l the sum of Pfaffians of
  // all l-point subblocks; invert by DFT over g+1 roots of unity.
  const int n = g + 1;
  std::vector<std::complex<double>> samples(n);
  std::vector<std::complex<double>> A((size_t)dim * dim);
  for (int t = 0; t < n; ++t) {
    const std::complex<double> mu =
        std::polar(1.0, 2.0 * M_PI * t / (double)n);
    for (size_t e = 0; e < A.size(); ++e) A[e] = mu * B[e];
    for (int i = 0; i < g; ++i) {
      A[(size_t)(2 * i) * dim + 2 * i + 1] += 1.0;
      A[(size_t)(2 * i + 1) * dim + 2 * i] -= 1.0;
    }
    samples[t] = pfaffian_c(A, dim);
  }
  std::vector<double> ml(n);
  for (int l = 0; l < n; ++l) {
    std::complex<double> s = 0;
    for (int t = 0; t < n; ++t)
      s += samples[t] * std::polar(1.0, -2.0 * M_PI * t * l / (double)n);
    ml[l] = s.real() / n;
  }

  double value = 1.0, sign = 1.0;
  const int lcap = std::min(ell_max, g);
  for (int l = 1; l <= lcap; ++l) {
    sign = -sign;
    res.terms.push_back(sign * ml[l]);
    value += sign * ml[l];
  }
  // dropped discrete orders, plus a Hadamard bound beyond the grid's reach
  for (int l = lcap + 1; l < n; ++l) res.tail_estimate += std::fabs(ml[l]);
  const double hk = ksup * wsum;
  for (int l = std::max(lcap, g) + 1; l <= g + 60; ++l) {
    double lb = l * std::log(hk) + 0.5 * l * std::log(2.0 * l) -
                std::lgamma(l + 1.0);
    res.tail_estimate += std::exp(lb);
  }
  res.converged = res.tail_estimate <= tol;

  const double clipped = std::clamp(value, 0.0, 1.0);
  res.clip_amount = std::fabs(value - clipped);
  res.value = clipped;
  return res;
}

KernelSample2x2 edge_conjugated_kernel(double xi, double zeta) {
  // plain edge entries times e^{xi} (s row), e^{zeta} (s column), both for
  // d; assembled through log_erfc so the product never under/overflows
  auto s_conj = [](double x, double z) {
    const double u = x - z;
    const SignedLog t1 =
        SignedLog(1, x - 0.5 * u * u) * log_erfc((x + z) / M_SQRT2) *
        SignedLog::from_real(1.0 / (2.0 * std::sqrt(2.0 * M_PI)));
    const SignedLog t2 = SignedLog(1, x - x * x) * log_erfc(-z) *
                         SignedLog::from_real(1.0 / (4.0 * std::sqrt(M_PI)));
    return (t1 + t2).to_real();
  };
  KernelSample2x2 k;
  k.s_xy = s_conj(xi, zeta);
  k.s_yx = s_conj(zeta, xi);
  const double u = xi - zeta;
  k.d = (SignedLog::from_real(zeta - xi) *
         SignedLog(1, xi + zeta - 0.5 * u * u) *
         log_erfc((xi + zeta) / M_SQRT2) *
         SignedLog::from_real(1.0 / (2.0 * std::sqrt(2.0 * M_PI))))
            .to_real();
  // i entry is conjugation-invariant: integral of the *plain* scalar kernel
  if (xi == zeta) {
    k.i = 0.0;
  } else {
    const KernelSample2x2 plain = edge_limit_kernel(xi, zeta);
    k.i = plain.i;
  }
  return k;
}

GapProbResult edge_cdf(double s, int grid_order, double tol, bool conjugate,
                       double L, int ell_max) {
  if (conjugate) {
    return gap_series(
        [](double x, double y) { return edge_conjugated_kernel(x, y); }, s,
        s + L, [](double xi) { return std::exp(-xi); }, grid_order, ell_max,
        tol);
  }
  // direct form, feasible for s >= 0 where e^{xi} stays moderate
  return gap_series(
      [](double x, double y) { return edge_limit_kernel(x, y); }, s, s + L,
      [](double) { return 1.0; }, grid_order, ell_max, tol);
}

GapProbResult origin_survival(double s, int m, int grid_order, double tol,
                              bool symmetric, int ell_max) {
  if (!(s > 0)) throw std::invalid_argument("origin_survival: need s > 0");
  WeightConfig cfg;
  cfg.m = m;
  auto kern = [m, cfg](double x, double y) {
    return origin_limit_kernel(x, y, m, cfg);
  };
  const double a = symmetric ? -s : 0.0;
  return gap_series(kern, a, s, [](double) { return 1.0; }, grid_order,
                    ell_max, tol);
}

GapProbResult finite_n_gap(const KernelContext& ctx, double a, double b,
                           int grid_order, int ell_max) {
  if (a == b) return GapProbResult{};
  auto kern = [&ctx](double x, double y) { return tilde_kernel(x, y, ctx); };
  const double sqn = std::sqrt((double)ctx.N);
  auto env = [&ctx, sqn](double x) { return sqn * rho_density(x, ctx.m); };
  return gap_series(kern, a, b, env, grid_order, ell_max, 1e-6);
}

}  // namespace ginprod
