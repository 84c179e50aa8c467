#include "ginprod/pfaffian.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "ginprod/quad.hpp"

namespace ginprod {
namespace {

void check_skew(const SkewMatrix& A) {
  if (A.dim <= 0 || A.dim % 2 != 0)
    throw std::invalid_argument("pfaffian: dimension must be positive even");
  double mx = 0;
  for (double v : A.a) mx = std::max(mx, std::fabs(v));
  const double tol = 1e-12 * std::max(1.0, mx);
  for (int i = 0; i < A.dim; ++i)
    for (int j = i; j < A.dim; ++j)
      if (std::fabs(A.at(i, j) + A.at(j, i)) > tol)
        throw std::invalid_argument("pfaffian: matrix not skew-symmetric");
}

}  // namespace

SignedLog pfaffian(SkewMatrix A) {
  check_skew(A);
  const int n = A.dim;

  // Balance: scale row+column i by 2^{-e_i}; Pf scales by prod 2^{-e_i}.
  double log_scale = 0.0;
  for (int i = 0; i < n; ++i) {
    double mx = 0;
    for (int j = 0; j < n; ++j) mx = std::max(mx, std::fabs(A.at(i, j)));
    if (mx == 0.0) return SignedLog::zero();  // zero row => Pf = 0
    const int e = std::ilogb(mx);
    const double s = std::scalbn(1.0, -e);
    log_scale += e * M_LN2;
    for (int j = 0; j < n; ++j) {
      A.at(i, j) *= s;
      A.at(j, i) *= s;
    }
  }

  int sign = 1;
  double log_mag = log_scale;
  std::vector<double> tau(n);
  for (int k = 0; k + 1 < n; k += 2) {
    // pivot: largest |A(i,k)| over i > k into position k+1
    int kp = k + 1;
    for (int i = k + 2; i < n; ++i)
      if (std::fabs(A.at(i, k)) > std::fabs(A.at(kp, k))) kp = i;
    if (kp != k + 1) {
      for (int j = 0; j < n; ++j) std::swap(A.at(k + 1, j), A.at(kp, j));
      for (int i = 0; i < n; ++i) std::swap(A.at(i, k + 1), A.at(i, kp));
      sign = -sign;
    }
    const double piv = A.at(k, k + 1);
    if (piv == 0.0) return SignedLog::zero();
    if (piv < 0.0) sign = -sign;
    log_mag += std::log(std::fabs(piv));
    for (int j = k + 2; j < n; ++j) tau[j] = A.at(k, j) / piv;
    for (int i = k + 2; i < n; ++i) {
      const double qi = A.at(k + 1, i);
      for (int j = k + 2; j < n; ++j)
        A.at(i, j) += qi * tau[j] - tau[i] * A.at(k + 1, j);
    }
  }
  return SignedLog(sign, log_mag);
}

std::complex<double> pfaffian_c(std::vector<std::complex<double>>& a, int n) {
  if (n <= 0 || n % 2 != 0)
    throw std::invalid_argument("pfaffian_c: dimension must be positive even");
  auto at = [&](int i, int j) -> std::complex<double>& {
    return a[static_cast<size_t>(i) * n + j];
  };
  std::complex<double> pf = 1.0;
  std::vector<std::complex<double>> tau(n);
  for (int k = 0; k + 1 < n; k += 2) {
    int kp = k + 1;
    for (int i = k + 2; i < n; ++i)
      if (std::abs(at(i, k)) > std::abs(at(kp, k))) kp = i;
    if (kp != k + 1) {
      for (int j = 0; j < n; ++j) std::swap(at(k + 1, j), at(kp, j));
      for (int i = 0; i < n; ++i) std::swap(at(i, k + 1), at(i, kp));
      pf = -pf;
    }
    const std::complex<double> piv = at(k, k + 1);
    if (piv == 0.0) return 0.0;
    pf *= piv;
    for (int j = k + 2; j < n; ++j) tau[j] = at(k, j) / piv;
    for (int i = k + 2; i < n; ++i) {
      const std::complex<double> qi = at(k + 1, i);
      for (int j = k + 2; j < n; ++j)
        at(i, j) += qi * tau[j] - tau[i] * at(k + 1, j);
    }
  }
  return pf;
}

namespace {

// Assemble the 2k x 2k correlation matrix and take its Pfaffian.
double correlation_pf(const std::vector<double>& pts, const KernelFn& kernel) {
  const int k = static_cast<int>(pts.size());
  if (k == 1) return kernel(pts[0], pts[0]).s_xy;
  SkewMatrix A(2 * k);
  for (int i = 0; i < k; ++i)
    for (int j = i; j < k; ++j) {
      const KernelSample2x2 s = kernel(pts[i], pts[j]);
      A.set(2 * i, 2 * j + 1, s.s_xy);            // (d-row i, i-col j)
      if (i == j) continue;
      A.set(2 * i, 2 * j, s.d);                   // d block
      A.set(2 * i + 1, 2 * j, -s.s_yx);           // (i-row i, d-col j)
      A.set(2 * i + 1, 2 * j + 1, s.i);           // i block
    }
  return pfaffian(std::move(A)).to_real();
}

}  // namespace

CorrelationResult correlation(const std::vector<double>& points,
                              const KernelFn& kernel) {
  if (points.empty())
    throw std::invalid_argument("correlation: need at least one point");
  for (size_t i = 0; i < points.size(); ++i)
    for (size_t j = i + 1; j < points.size(); ++j)
      if (points[i] == points[j]) return {0.0, true};
  return {correlation_pf(points, kernel), false};
}

std::vector<Partition> partitions(int k) {
  if (k < 1 || k > 10)
    throw std::length_error("partitions: k must be in [1, 10]");
  std::vector<Partition> out;
  // restricted growth strings: g[i] <= 1 + max(g[0..i-1])
  std::vector<int> g(k, 0);
  while (true) {
    int nb = *std::max_element(g.begin(), g.end()) + 1;
    Partition p(nb);
    for (int i = 0; i < k; ++i) p[g[i]].push_back(i);
    out.push_back(std::move(p));
    int i = k - 1;
    for (; i > 0; --i) {
      int mx = 0;
      for (int j = 0; j < i; ++j) mx = std::max(mx, g[j]);
      if (g[i] <= mx) break;
    }
    if (i == 0) break;
    ++g[i];
    std::fill(g.begin() + i + 1, g.end(), 0);
  }
  return out;
}

double cluster(const std::vector<double>& points, const KernelFn& kernel) {
  const int k = static_cast<int>(points.size());
  if (k > 6) throw std::length_error("cluster: k <= 6 (partition explosion)");
  // memoize rho over subsets (bitmask)
  std::map<unsigned, double> rho;
  auto rho_of = [&](const std::vector<int>& block) {
    unsigned mask = 0;
    for (int i : block) mask |= 1u << i;
    auto it = rho.find(mask);
    if (it != rho.end()) return it->second;
    std::vector<double> pts;
    for (int i : block) pts.push_back(points[i]);
    const double v = correlation(pts, kernel).value;
    rho.emplace(mask, v);
    return v;
  };
  double total = 0;
  for (const Partition& p : partitions(k)) {
    const int l = static_cast<int>(p.size());
    double fac = (l % 2 == 1) ? 1.0 : -1.0;  // (-1)^{l-1}
    for (int j = 2; j < l; ++j) fac *= j;    // (l-1)!
    double prod = fac;
    for (const auto& block : p) prod *= rho_of(block);
    total += prod;
  }
  return total;
}

namespace {

// 1-D composite Gauss-Legendre grid over a union of intervals.
struct Grid1D {
  std::vector<double> nodes, weights;
};

Grid1D build_grid(const std::vector<std::pair<double, double>>& region,
                  int quad_order, double min_panel) {
  Grid1D g;
  for (auto [a, b] : region) {
    if (b <= a) continue;
    const int per_panel = 8;
    int panels = std::max(1, (quad_order + per_panel - 1) / per_panel);
    panels = std::max(panels, (int)std::ceil((b - a) / min_panel));
    const double h = (b - a) / panels;
    for (int p = 0; p < panels; ++p)
      gl_nodes(per_panel, a + p * h, a + (p + 1) * h, g.nodes, g.weights);
  }
  return g;
}

}  // namespace

double cumulant(int k, const std::function<double(double)>& f,
                const KernelContext& ctx,
                const std::vector<std::pair<double, double>>& region,
                int quad_order) {
  if (k < 1 || k > 3)
    throw std::length_error("cumulant: k <= 3 (tensor quadrature)");
  // kernel-width scale in m-th-root coordinates; band prune per the cluster
  // decay (exp(-Nm (x-y)^2 / 2) in those coordinates)
  const double w_scale = 1.0 / std::sqrt((double)ctx.N * ctx.m);
  const double band = 10.0 * w_scale;
  Grid1D g = build_grid(region, quad_order, 2.0 * w_scale);
  const int G = static_cast<int>(g.nodes.size());

  // pair cache shared across partitions
  std::map<std::pair<int, int>, KernelSample2x2> pair_cache;
  auto kern = [&](int i, int j) -> const KernelSample2x2& {
    auto key = std::minmax(i, j);
    auto it = pair_cache.find(key);
    if (it == pair_cache.end())
      it = pair_cache
               .emplace(key, matrix_kernel(g.nodes[key.first],
                                           g.nodes[key.second], ctx))
               .first;
    return it->second;
  };
  auto root = [&](double x) {
    return (x < 0 ? -1.0 : 1.0) * std::pow(std::fabs(x), 1.0 / ctx.m);
  };
  std::vector<double> rt(G), rho1(G), fv(G);
  for (int i = 0; i < G; ++i) {
    rt[i] = root(g.nodes[i]);
    rho1[i] = s_kernel(g.nodes[i], g.nodes[i], ctx);
    fv[i] = f(g.nodes[i]);
  }
  auto close = [&](int i, int j) {
    return g.nodes[i] * g.nodes[j] > 0 && std::fabs(rt[i] - rt[j]) <= band;
  };
  // r2 from the cached pair kernel: rho2 - rho1 rho1 = -s_xy s_yx - d i
  // (both products are symmetric under argument swap)
  auto r2 = [&](int i, int j) {
    const KernelSample2x2& s = kern(i, j);
    return -(s.s_xy * s.s_yx) - s.d * s.i;
  };

  double total = 0;
  for (const Partition& p : partitions(k)) {
    const int n = static_cast<int>(p.size());
    std::vector<int> psize(n);
    for (int b = 0; b < n; ++b) psize[b] = (int)p[b].size();
    if (n == 1) {
      double s1 = 0;
      for (int i = 0; i < G; ++i)
        s1 += g.weights[i] * std::pow(fv[i], psize[0]) * rho1[i];
      total += s1;
    } else if (n == 2) {
      double s2 = 0;
      for (int i = 0; i < G; ++i) {
        if (fv[i] == 0.0) continue;
        for (int j = 0; j < G; ++j) {
          if (j == i || !close(i, j) || fv[j] == 0.0) continue;
          s2 += g.weights[i] * g.weights[j] * std::pow(fv[i], psize[0]) *
                std::pow(fv[j], psize[1]) * r2(i, j);
        }
      }
      total += s2;
    } else {  // n == 3, all blocks singletons
      double s3 = 0;
      for (int i = 0; i < G; ++i) {
        if (fv[i] == 0.0) continue;
        for (int j = i + 1; j < G; ++j) {
          if (!close(i, j)) continue;
          for (int l = j + 1; l < G; ++l) {
            if (!close(i, l) || !close(j, l)) continue;
            // rho3 via 6x6 Pfaffian from cached pair kernels
            const int idx[3] = {i, j, l};
            SkewMatrix A(6);
            for (int a = 0; a < 3; ++a)
              for (int b = a; b < 3; ++b) {
                const KernelSample2x2& s = kern(idx[a], idx[b]);
                A.set(2 * a, 2 * b + 1, s.s_xy);
                if (a == b) continue;
                A.set(2 * a, 2 * b, s.d);
                A.set(2 * a + 1, 2 * b, -s.s_yx);
                A.set(2 * a + 1, 2 * b + 1, s.i);
              }
            const double rho3 = pfaffian(std::move(A)).to_real();
            const double r3 = rho3 - rho1[i] * r2(j, l) - rho1[j] * r2(i, l) -
                              rho1[l] * r2(i, j) - rho1[i] * rho1[j] * rho1[l];
            // sum over the 3! orderings of (i,j,l): f-product is symmetric
            // for singleton blocks, so multiply by 6
            s3 += 6.0 * g.weights[i] * g.weights[j] * g.weights[l] * fv[i] *
                  fv[j] * fv[l] * r3;
          }
        }
      }
      total += s3;
    }
  }
  return total;
}

}  // namespace ginprod
