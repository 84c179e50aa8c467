#pragma once
#include <memory>
#include <stdexcept>

#include "ginprod/quad.hpp"
#include "ginprod/signed_log.hpp"
#include "ginprod/special.hpp"

namespace ginprod {

/// 2x2 derived-form kernel sample: [[d, s_xy], [-s_yx, i]].
struct KernelSample2x2 {
  double d = 0;     // -d/dy S(x,y)
  double s_xy = 0;  // S(x,y)
  double s_yx = 0;  // S(y,x); the matrix carries -s_yx in the (2,1) slot
  double i = 0;     // int_x^y S(t,y) dt + 1/2 sgn(x-y)
};

class WeightTable;  // cached log-weight spline for m >= 2

struct KernelContext {
  int N = 0;
  int m = 1;
  double log_C = 0;  // log C_{N,m} = (3m/2) log N - m log(2 sqrt(2 pi))
  double log_D = 0;  // log D_{N,m}
  WeightConfig wcfg;
  QuadOptions quad;
  std::shared_ptr<const WeightTable> wtab;  // null for m = 1

  /// log w(N^{m/2} u) for |u| <= table span (exact closed form at m = 1)
  double log_weight_scaled(double u) const;
};

KernelContext make_context(int N, int m, int quad_order = 200);

/// Scalar kernel S_N(x,y); representation chosen so the saddle v = x lies
/// outside the integration domain.
double s_kernel(double x, double y, const KernelContext& ctx);
SignedLog s_kernel_sl(double x, double y, const KernelContext& ctx);

/// Individual representations, exposed for the equivalence tests.
/// 1: -2C int_y^inf + C D x^{N-1} w;  2: 2C int_{-inf}^y - C D x^{N-1} w;
/// 3: 2C int_0^y + C (2/N)^m w.
SignedLog s_kernel_rep(int rep, double x, double y, const KernelContext& ctx);

/// D_N(x,y) = 2C (y-x) w(N^{m/2}x) w(N^{m/2}y) f_{N-2}(N^m xy); closed form.
double d_kernel(double x, double y, const KernelContext& ctx);
SignedLog d_kernel_sl(double x, double y, const KernelContext& ctx);

/// I_N(x,y); irep2 route for 0 < x < y, antisymmetry/symmetry otherwise.
double i_kernel(double x, double y, const KernelContext& ctx);
/// Direct definition int_x^y S(t,y) dt + 1/2 sgn(x-y), for cross-validation.
double i_kernel_direct(double x, double y, const KernelContext& ctx);

KernelSample2x2 matrix_kernel(double x, double y, const KernelContext& ctx);

/// Limiting spectral density of the m-fold product: (1/2m)|x|^{1/m-1} on (-1,1).
double rho_density(double x, int m);

KernelSample2x2 bulk_limit_kernel(double xi, double zeta);
KernelSample2x2 edge_limit_kernel(double xi, double zeta);
KernelSample2x2 origin_limit_kernel(double xi, double zeta, int m,
                                    const WeightConfig& cfg);

enum class Regime { bulk, edge, origin };

/// Finite-N kernel in the regime's rescaled coordinates, with the scalar factor
/// applied to s, its square to d, and unit factor on i.
KernelSample2x2 scaled_kernel(Regime regime, double xi, double zeta,
                              const KernelContext& ctx, double E = 0.0);

/// Exact conjugation envelope nu_N(xi) ~ e^{-xi} at the edge.
double nu(double xi, int N, int m);

struct GlobalApprox { double s, d, i; };
/// Thm-1.9-type leading order in m-th-root coordinates; valid on the region
/// {|x| > N^{-m/2+eps}} and {x < 1 - N^{-1/2+eps}}.
GlobalApprox global_approx(double x, double y, const KernelContext& ctx,
                           double eps = 0.1);

/// rho-normalized entries of the modified kernel (conditioning for Pfaffians):
/// [[N^{-1} rho(x)^{-1} rho(y)^{-1} D, N^{-1/2} rho(x)^{-1} S],
///  [-N^{-1/2} rho(y)^{-1} S(y,x), I]].
KernelSample2x2 tilde_kernel(double x, double y, const KernelContext& ctx);

}  // namespace ginprod
