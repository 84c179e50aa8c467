#pragma once
#include <complex>
#include <functional>
#include <utility>
#include <vector>

#include "ginprod/kernel.hpp"
#include "ginprod/signed_log.hpp"

namespace ginprod {

/// Dense skew-symmetric matrix of even dimension.
struct SkewMatrix {
  int dim = 0;
  std::vector<double> a;  // row-major dim x dim

  SkewMatrix() = default;
  explicit SkewMatrix(int n) : dim(n), a(static_cast<size_t>(n) * n, 0.0) {}

  double& at(int i, int j) { return a[static_cast<size_t>(i) * dim + j]; }
  double at(int i, int j) const { return a[static_cast<size_t>(i) * dim + j]; }
  /// Set entry (i,j) = v and (j,i) = -v.
  void set(int i, int j, double v) {
    at(i, j) = v;
    at(j, i) = -v;
  }
};

/// Pfaffian of a skew-symmetric matrix via skew-symmetric elimination with
/// partial pivoting (Parlett-Reid family), accumulated in signed-log form
/// so kernel-scale entries spanning hundreds of orders of magnitude are safe.
/// Requires dim even and skew-symmetry within 1e-12 of the largest entry.
SignedLog pfaffian(SkewMatrix A);

/// Complex-arithmetic variant used by the Fredholm-Pfaffian series, which
/// samples Pf(J + mu B) at complex roots of unity mu. Entries are expected
/// to be O(1)-conditioned by the caller. The matrix is destroyed.
std::complex<double> pfaffian_c(std::vector<std::complex<double>>& a, int dim);

using KernelFn = std::function<KernelSample2x2(double, double)>;

struct CorrelationResult {
  double value = 0;
  bool degenerate = false;  // coincident input points: exact zero
};

/// k-point correlation function rho^(k)(x_1..x_k) = Pf of the 2k x 2k block
/// matrix with 2x2 blocks [[d, s_xy], [-s_yx, i]] built from `kernel`.
CorrelationResult correlation(const std::vector<double>& points,
                              const KernelFn& kernel);

/// Cluster (truncated/Ursell) function r^(k) as the partition sum
/// sum_{l=1}^{k} (-1)^{l-1} (l-1)! sum_{pi partitions into l blocks}
/// prod_{B in pi} rho^(|B|)(points_B). Guarded at k <= 6.
double cluster(const std::vector<double>& points, const KernelFn& kernel);

using Partition = std::vector<std::vector<int>>;  // blocks of {0..k-1}

/// All set partitions of {0..k-1}; size equals the Bell number. k <= 10.
std::vector<Partition> partitions(int k);

/// k-th cumulant of the linear statistic sum_j f(lambda_j) restricted to
/// `region` (a union of disjoint intervals), by the partition formula
/// C_k(f) = sum_{pi} int prod_j f(x_j)^{p_j} r^(n)(x_1..x_n) dx over the
/// region, n = #blocks(pi), p_j = block sizes. Tensor quadrature with a
/// diagonal band prune (cluster functions decay off-diagonal). k <= 3.
double cumulant(int k, const std::function<double(double)>& f,
                const KernelContext& ctx,
                const std::vector<std::pair<double, double>>& region,
                int quad_order);

}  // namespace ginprod
