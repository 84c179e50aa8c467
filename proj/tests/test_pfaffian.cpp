#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "ginprod/kernel.hpp"
#include "ginprod/pfaffian.hpp"

using namespace ginprod;

namespace {

// determinant by LU with partial pivoting (oracle for Pf^2 = det)
double det_lu(SkewMatrix A) {
  const int n = A.dim;
  double det = 1.0;
  for (int k = 0; k < n; ++k) {
    int p = k;
    for (int i = k + 1; i < n; ++i)
      if (std::fabs(A.at(i, k)) > std::fabs(A.at(p, k))) p = i;
    if (A.at(p, k) == 0.0) return 0.0;
    if (p != k) {
      for (int j = 0; j < n; ++j) std::swap(A.at(k, j), A.at(p, j));
      det = -det;
    }
    det *= A.at(k, k);
    for (int i = k + 1; i < n; ++i) {
      const double f = A.at(i, k) / A.at(k, k);
      for (int j = k; j < n; ++j) A.at(i, j) -= f * A.at(k, j);
    }
  }
  return det;
}

SkewMatrix random_skew(int n, std::mt19937& rng) {
  std::normal_distribution<double> gauss;
  SkewMatrix A(n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) A.set(i, j, gauss(rng));
  return A;
}

}  // namespace

TEST_CASE("2x2 pfaffian is the off-diagonal entry") {
  SkewMatrix A(2);
  A.set(0, 1, 3.7);
  CHECK(pfaffian(A).to_real() == doctest::Approx(3.7).epsilon(1e-14));
}

TEST_CASE("4x4 pfaffian matches the closed expansion") {
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> d(-9, 9);
  for (int rep = 0; rep < 20; ++rep) {
    SkewMatrix A(4);
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j) A.set(i, j, (double)d(rng));
    const double expect = A.at(0, 1) * A.at(2, 3) - A.at(0, 2) * A.at(1, 3) +
                          A.at(0, 3) * A.at(1, 2);
    CHECK(pfaffian(A).to_real() == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("pfaffian squared equals the determinant") {
  std::mt19937 rng(42);
  int checked = 0;
  for (int rep = 0; rep < 20; ++rep)
    for (int n : {2, 4, 6, 8, 10}) {
      SkewMatrix A = random_skew(n, rng);
      const double det = det_lu(A);
      const double pf = pfaffian(A).to_real();
      CHECK(pf * pf == doctest::Approx(det).epsilon(1e-9));
      ++checked;
    }
  CHECK(checked == 100);
}

TEST_CASE("pfaffian input validation") {
  SkewMatrix A(3);
  CHECK_THROWS_AS(pfaffian(A), std::invalid_argument);
  SkewMatrix B(4);
  B.set(0, 1, 1.0);
  B.at(2, 3) = 1.0;
  B.at(3, 2) = 1.0;  // not skew
  CHECK_THROWS_AS(pfaffian(B), std::invalid_argument);
}

TEST_CASE("row/column scaling multiplies the pfaffian by the scale") {
  std::mt19937 rng(11);
  SkewMatrix A = random_skew(6, rng);
  const double base = pfaffian(A).to_real();
  const double c = 2.5;
  for (int j = 0; j < 6; ++j) {
    A.at(2, j) *= c;
    A.at(j, 2) *= c;
  }
  CHECK(pfaffian(A).to_real() == doctest::Approx(c * base).epsilon(1e-12));
}

TEST_CASE("pfaffian handles huge scale spreads in signed-log form") {
  SkewMatrix A(4);
  A.set(0, 1, 1e180);
  A.set(2, 3, 1e180);
  A.set(0, 2, 1e-170);
  A.set(1, 3, 3e-175);
  SignedLog pf = pfaffian(A);
  // dominated by a01 * a23 = 1e360, far beyond double range
  CHECK(pf.sign == 1);
  CHECK(pf.log_mag == doctest::Approx(360.0 * std::log(10.0)).epsilon(1e-12));
}

TEST_CASE("complex pfaffian agrees with the real one") {
  std::mt19937 rng(5);
  SkewMatrix A = random_skew(8, rng);
  std::vector<std::complex<double>> c(64);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) c[i * 8 + j] = A.at(i, j);
  const double pf = pfaffian(A).to_real();
  CHECK(pfaffian_c(c, 8).real() == doctest::Approx(pf).epsilon(1e-11));
  CHECK(pfaffian_c(c, 8).imag() == doctest::Approx(0.0).epsilon(1e-11));
}

TEST_CASE("partition counts are Bell numbers") {
  const long bell[] = {1, 1, 2, 5, 15, 52, 203, 877, 4140};
  for (int k = 1; k <= 8; ++k)
    CHECK((long)partitions(k).size() == bell[k]);
  // blocks are disjoint and cover {0..k-1}
  for (const Partition& p : partitions(4)) {
    std::vector<int> seen;
    for (const auto& b : p) {
      CHECK(!b.empty());
      for (int i : b) seen.push_back(i);
    }
    std::sort(seen.begin(), seen.end());
    CHECK(seen == std::vector<int>{0, 1, 2, 3});
  }
  CHECK_THROWS_AS(partitions(11), std::length_error);
}

TEST_CASE("one-point correlation is the diagonal scalar kernel") {
  KernelContext ctx = make_context(60, 1);
  auto kern = [&](double x, double y) { return matrix_kernel(x, y, ctx); };
  CHECK(correlation({0.4}, kern).value ==
        doctest::Approx(s_kernel(0.4, 0.4, ctx)).epsilon(1e-12));
}

TEST_CASE("coincident points give exact zero with the degenerate flag") {
  KernelContext ctx = make_context(40, 1);
  auto kern = [&](double x, double y) { return matrix_kernel(x, y, ctx); };
  CorrelationResult r = correlation({0.3, 0.3}, kern);
  CHECK(r.value == 0.0);
  CHECK(r.degenerate);
}

TEST_CASE("two-point function factorizes at separated bulk points") {
  KernelContext ctx = make_context(400, 1);
  auto kern = [&](double x, double y) { return matrix_kernel(x, y, ctx); };
  const double rho2 = correlation({0.3, 0.7}, kern).value;
  const double prod =
      s_kernel(0.3, 0.3, ctx) * s_kernel(0.7, 0.7, ctx);
  CHECK(std::fabs(rho2 - prod) <= 1e-4 * prod);
}

TEST_CASE("correlation and cluster are symmetric in their arguments") {
  auto kern = [](double x, double y) { return bulk_limit_kernel(x, y); };
  const double a = correlation({0.1, 1.3, -0.6}, kern).value;
  const double b = correlation({-0.6, 0.1, 1.3}, kern).value;
  CHECK(a == doctest::Approx(b).epsilon(1e-12));
  const double ca = cluster({0.1, 1.3, -0.6}, kern);
  const double cb = cluster({1.3, -0.6, 0.1}, kern);
  CHECK(ca == doctest::Approx(cb).epsilon(1e-10));
}

TEST_CASE("k=2 cluster equals rho2 minus the product of densities") {
  auto kern = [](double x, double y) { return bulk_limit_kernel(x, y); };
  const double x = 0.2, y = 1.1;
  const double r2 = cluster({x, y}, kern);
  const double expect = correlation({x, y}, kern).value -
                        correlation({x}, kern).value *
                            correlation({y}, kern).value;
  CHECK(r2 == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("k=3 cluster is tiny at separated points") {
  auto kern = [](double x, double y) { return bulk_limit_kernel(x, y); };
  const double r3 = cluster({0.0, 4.0, 8.0}, kern);
  const double rho1 = 1.0 / std::sqrt(2.0 * M_PI);
  CHECK(std::fabs(r3) <= 1e-3 * rho1 * rho1 * rho1);
  CHECK_THROWS_AS(cluster({1, 2, 3, 4, 5, 6, 7}, kern), std::length_error);
}

TEST_CASE("rescaled bulk cluster decays like a Gaussian in the separation") {
  for (int m : {1, 2}) {
    KernelContext ctx = make_context(400, m);
    const double E = 0.5;
    for (double sep : {0.0, 1.0, 2.0, 3.0, 4.0, 6.0}) {
      KernelSample2x2 k = scaled_kernel(Regime::bulk, 0.0, sep, ctx, E);
      const double d0 =
          scaled_kernel(Regime::bulk, 0.0, 0.0, ctx, E).s_xy;
      const double ds =
          scaled_kernel(Regime::bulk, sep, sep, ctx, E).s_xy;
      const double r2n =
          (-(k.s_xy * k.s_yx) - k.d * k.i) / (d0 * ds);
      if (sep == 0.0) {
        CHECK(std::fabs(r2n) >= 0.1);  // O(1) on the diagonal scale
      } else {
        CHECK(std::fabs(r2n) <= 10.0 * std::exp(-0.2 * sep * sep) + 1e-6);
      }
    }
  }
}

TEST_CASE("cumulants: k=1 is the expected count, k=2 matches direct terms") {
  KernelContext ctx = make_context(50, 1);
  std::vector<std::pair<double, double>> region{{0.3, 0.5}};
  auto one = [](double) { return 1.0; };

  // independent diagonal quadrature for C1
  double c1_direct = 0;
  {
    std::vector<double> n, w;
    for (int p = 0; p < 24; ++p)
      gl_nodes(6, 0.3 + p * (0.2 / 24), 0.3 + (p + 1) * (0.2 / 24), n, w);
    for (size_t i = 0; i < n.size(); ++i)
      c1_direct += w[i] * s_kernel(n[i], n[i], ctx);
  }
  const double c1 = cumulant(1, one, ctx, region, 48);
  CHECK(c1 == doctest::Approx(c1_direct).epsilon(1e-6));

  // C2 against the direct three-term variance expression on the same region;
  // the off-diagonal combination is swap-symmetric, so only j > i is sampled
  double diag = 0, off = 0;
  {
    std::vector<double> n, w;
    for (int p = 0; p < 5; ++p)
      gl_nodes(8, 0.3 + p * (0.2 / 5), 0.3 + (p + 1) * (0.2 / 5), n, w);
    for (size_t i = 0; i < n.size(); ++i) {
      diag += w[i] * s_kernel(n[i], n[i], ctx);
      for (size_t j = i + 1; j < n.size(); ++j) {
        KernelSample2x2 k = matrix_kernel(n[i], n[j], ctx);
        off -= 2.0 * w[i] * w[j] * (k.s_xy * k.s_yx + k.d * k.i);
      }
    }
  }
  const double c2 = cumulant(2, one, ctx, region, 48);
  CHECK(c2 == doctest::Approx(diag + off).epsilon(0.01));
  CHECK_THROWS_AS(cumulant(4, one, ctx, region, 16), std::length_error);
}

TEST_CASE("k=3 cumulant of the count is O(sqrt(N))") {
  KernelContext ctx = make_context(100, 1);
  // truncation-style region
  std::vector<std::pair<double, double>> region{{-0.84, -0.07}, {0.07, 0.84}};
  auto one = [](double) { return 1.0; };
  const double c3 = cumulant(3, one, ctx, region, 24);
  CHECK(std::isfinite(c3));
  CHECK(std::fabs(c3) / std::sqrt(100.0) <= 5.0);
}
