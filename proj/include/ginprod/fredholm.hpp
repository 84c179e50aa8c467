#pragma once
#include <functional>
#include <vector>

#include "ginprod/kernel.hpp"
#include "ginprod/pfaffian.hpp"

namespace ginprod {

/// Composite Gauss-Legendre grid on [a, b].
struct QuadratureGrid {
  std::vector<double> nodes;    // strictly increasing, interior
  std::vector<double> weights;  // positive, sum = b - a
  double a = 0, b = 0;
};

QuadratureGrid make_grid(double a, double b, int order);

struct GapProbResult {
  double value = 1.0;               // clipped to [0,1]
  std::vector<double> terms;        // signed per-order contributions,
                                    // terms[l-1] = (-1)^l m_l
  double tail_estimate = 0;         // bound on the dropped remainder
  int ell_max = 0;
  bool converged = true;            // tail_estimate <= tol
  double clip_amount = 0;           // |value before clipping - value|
};

/// Gap probability 1 + sum_{l>=1} ((-1)^l/l!) T_l for the Pfaffian point
/// process restricted to `domain`. T_l / l! is evaluated as the sum of
/// Pfaffians of all order-l principal subblocks of the weighted kernel
/// matrix (the discrete form of the symmetrized simplex integral); the
/// subset sums of every order come from Pf(J + mu B) sampled at roots of
/// unity mu and inverted by a DFT. `envelope` is the per-point factor
/// pulled out of the conjugated kernel and folded into the weights.
GapProbResult gap_series(const KernelFn& kernel, double a, double b,
                         const std::function<double(double)>& envelope,
                         int grid_order = 48, int ell_max = 10,
                         double tol = 1e-7);

/// Limiting edge kernel conjugated by nu(xi) = e^{-xi}: entries stay O(1)
/// on [s, infinity) so the quadrature is well conditioned.
KernelSample2x2 edge_conjugated_kernel(double xi, double zeta);

/// P(lambda_max < s) in edge scaling, independent of m.
GapProbResult edge_cdf(double s, int grid_order = 48, double tol = 1e-7,
                       bool conjugate = true, double L = 16.0,
                       int ell_max = 10);

/// P(smallest positive rescaled eigenvalue > s): gap of the origin-limit
/// kernel on [0, s], or on [-s, s] with `symmetric`.
GapProbResult origin_survival(double s, int m, int grid_order = 32,
                              double tol = 1e-7, bool symmetric = false,
                              int ell_max = 10);

/// P(no real eigenvalue in (a, b)) at finite N via the rho-normalized
/// kernel.
GapProbResult finite_n_gap(const KernelContext& ctx, double a, double b,
                           int grid_order = 32, int ell_max = 10);

}  // namespace ginprod
