#include "ginprod/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ginprod/pfaffian.hpp"
#include "ginprod/quad.hpp"

namespace ginprod {

namespace {

constexpr double kVarConst = 2.0 - M_SQRT2;  // the universal (2 - sqrt 2)

// Composite Gauss-Legendre over [a, b] with ~quad_order nodes.
double fixed_integral(const std::function<double(double)>& g, double a,
                      double b, int quad_order) {
  const int panels = std::max(1, quad_order / 16);
  std::vector<double> n, w;
  for (int p = 0; p < panels; ++p)
    gl_nodes(16, a + p * (b - a) / panels, a + (p + 1) * (b - a) / panels, n,
             w);
  double s = 0;
  for (size_t i = 0; i < n.size(); ++i) s += w[i] * g(n[i]);
  return s;
}

// Integral of g over [0, inf): unit panels extended until negligible.
double halfline_integral(const std::function<double(double)>& g,
                         int quad_order) {
  double total = 0;
  for (int p = 0; p < 64; ++p) {
    const double part = fixed_integral(g, p, p + 1.0, quad_order);
    total += part;
    if (p >= 2 && std::fabs(part) <= 1e-13 * std::max(1.0, std::fabs(total)))
      break;
  }
  return total;
}

}  // namespace

TruncationRegion truncation_region(int N, int m, double epsilon) {
  if (N < 2 || m < 1)
    throw std::invalid_argument("truncation_region: need N >= 2, m >= 1");
  if (epsilon <= 0 || epsilon >= std::min(0.5 * m, 0.5))
    throw PreconditionError(
        "truncation_region: epsilon outside (0, min(m/2, 1/2))",
        std::min(0.5 * m, 0.5));
  TruncationRegion r;
  r.N = N;
  r.m = m;
  r.epsilon = epsilon;
  r.lo = std::pow((double)N, -0.5 * m + epsilon);
  r.hi = 1.0 - std::pow((double)N, -0.5 + epsilon);
  if (!(r.lo < r.hi))
    throw PreconditionError("truncation_region: empty region at this N", 0.0);
  return r;
}

VariancePrediction variance_prediction(const VarianceRegime& regime,
                                       const std::function<double(double)>& f,
                                       int m, int quad_order) {
  if (m < 1) throw std::invalid_argument("variance_prediction: m >= 1");
  VariancePrediction out;
  out.regime = regime;
  switch (regime.kind) {
    case VarianceRegime::global: {
      // sqrt(2m/pi)(2-sqrt2) * int_{-1}^1 rho f^2; substitution x = t^m
      // turns rho dx into dt/2 on each sign
      const double i01 = fixed_integral(
          [&](double t) {
            const double x = std::pow(t, m);
            const double fp = f(x), fm = f(-x);
            return 0.5 * (fp * fp + fm * fm);
          },
          0.0, 1.0, quad_order);
      out.sigma2 = std::sqrt(2.0 * m / M_PI) * kVarConst * i01;
      out.normalization_exponent = 0.25;
      break;
    }
    case VarianceRegime::meso_bulk: {
      if (regime.E == 0.0)
        throw PreconditionError("meso_bulk: requires E != 0", 0.0);
      if (!(regime.tau > 0 && regime.tau < 0.5))
        throw PreconditionError("meso_bulk: requires 0 < tau < 1/2", 0.5);
      if (std::fabs(regime.E) >= 1.0)
        throw PreconditionError("meso_bulk: requires |E| < 1", 1.0);
      auto f2 = [&](double x) {
        const double v = f(x);
        return v * v;
      };
      const double i2 = halfline_integral(f2, quad_order) +
                        halfline_integral([&](double x) { return f2(-x); },
                                          quad_order);
      out.sigma2 = std::sqrt(2.0 * m / M_PI) * kVarConst *
                   rho_density(regime.E, m) * i2;
      out.normalization_exponent = (1.0 - 2.0 * regime.tau) / 4.0;
      break;
    }
    case VarianceRegime::meso_origin: {
      if (!(regime.tau > 0 && regime.tau < 0.5 * m))
        throw PreconditionError("meso_origin: requires 0 < tau < m/2",
                                0.5 * m);
      // int f(x)^2 |x|^{-1+1/m} dx = m int_0^inf [f(t^m)^2 + f(-t^m)^2] dt
      const double it = halfline_integral(
          [&](double t) {
            const double x = std::pow(t, m);
            const double fp = f(x), fm = f(-x);
            return fp * fp + fm * fm;
          },
          quad_order);
      out.sigma2 = (1.0 / std::sqrt(2.0 * m * M_PI)) * kVarConst * m * it;
      out.normalization_exponent = 0.25 - regime.tau / (2.0 * m);
      break;
    }
  }
  return out;
}

double finite_N_variance(const std::function<double(double)>& f,
                         const KernelContext& ctx,
                         const TruncationRegion& region, int quad_order) {
  return cumulant(2, f, ctx, region.intervals(), quad_order);
}

double expected_count(const KernelContext& ctx,
                      const std::vector<std::pair<double, double>>& region,
                      int quad_order) {
  std::vector<std::pair<double, double>> iv = region;
  const bool full_line = iv.empty();
  if (full_line) iv = {{-1.5, 0.0}, {0.0, 1.5}};
  const double inv_m = 1.0 / ctx.m;
  double total = 0;
  for (const auto& [a, b] : iv) {
    if (a >= b) throw std::invalid_argument("expected_count: empty interval");
    if (a < 0 && b > 0)
      throw std::invalid_argument(
          "expected_count: split intervals at the origin");
    // map to |x| in [lo, hi] and substitute x = t^m to absorb the
    // origin singularity of the density for m >= 2
    const double lo = std::min(std::fabs(a), std::fabs(b));
    const double hi = std::max(std::fabs(a), std::fabs(b));
    total += fixed_integral(
        [&](double t) {
          const double x = std::pow(t, ctx.m);
          return s_kernel(x, x, ctx) * ctx.m * std::pow(t, ctx.m - 1);
        },
        std::pow(lo, inv_m), std::pow(hi, inv_m), quad_order);
  }
  if (full_line) {
    // tail verification: extend in unit steps until the added mass is
    // negligible (matters for small N, where the support leaks past 1.5)
    double edge = 1.5;
    for (int step = 0; step < 40; ++step) {
      const double part =
          fixed_integral([&](double x) { return s_kernel(x, x, ctx); }, edge,
                         edge + 1.0, 16) +
          fixed_integral([&](double x) { return s_kernel(x, x, ctx); },
                         -edge - 1.0, -edge, 16);
      total += part;
      edge += 1.0;
      if (std::fabs(part) <= 1e-12 * std::max(1.0, total)) return total;
    }
    throw std::runtime_error("expected_count: full-line tail not negligible");
  }
  return total;
}

CltReport clt_report(const EnsembleSpec& spec,
                     const std::function<double(double)>& f,
                     const VarianceRegime& regime) {
  CltReport rep;
  rep.prediction = variance_prediction(regime, f, spec.m);

  Observable ob =
      regime.kind == VarianceRegime::global
          ? obs_linear("linstat", f)
          : obs_mesoscopic("mesostat", f, regime.E, regime.tau);
  RunSummary rs = run_ensemble(spec, {ob});
  rep.sample = rs.observables[0];

  const double norm =
      std::pow((double)spec.N, 2.0 * rep.prediction.normalization_exponent);
  if (rep.prediction.sigma2 <= 0 || rep.sample.variance <= 0) {
    rep.zero_variance = true;
    return rep;
  }
  rep.variance_ratio = rep.sample.variance / (norm * rep.prediction.sigma2);
  rep.skewness = rep.sample.skewness;
  rep.ex_kurtosis = rep.sample.ex_kurtosis;
  const double n = (double)rep.sample.n;
  rep.se_skewness = std::sqrt(6.0 / n);
  rep.se_kurtosis = std::sqrt(24.0 / n);

  // standardized by the sample's own location/scale: KS probes shape only,
  // the variance_ratio field carries the scale comparison
  std::vector<double> z = rep.sample.sorted_values;
  const double mu = rep.sample.mean;
  const double sd = std::sqrt(rep.sample.variance);
  for (double& v : z) v = (v - mu) / sd;
  rep.ks_normal = ks_distance(
      z, [](double x) { return 0.5 * std::erfc(-x / M_SQRT2); });

  rep.pass = std::fabs(rep.skewness) <= rep.skew_threshold &&
             std::fabs(rep.ex_kurtosis) <= rep.kurt_threshold &&
             rep.ks_normal <= rep.ks_threshold &&
             std::fabs(rep.variance_ratio - 1.0) <= rep.ratio_tolerance;
  return rep;
}

ClusteringReport clustering_report(const KernelContext& ctx, double E,
                                   const std::vector<double>& separations) {
  ClusteringReport rep;
  const double d0 = scaled_kernel(Regime::bulk, 0.0, 0.0, ctx, E).s_xy;
  double sxy = 0, sx2 = 0, sy = 0, sx4 = 0;
  long nfit = 0;
  for (double sep : separations) {
    const KernelSample2x2 k = scaled_kernel(Regime::bulk, 0.0, sep, ctx, E);
    const double ds = scaled_kernel(Regime::bulk, sep, sep, ctx, E).s_xy;
    const double g = std::sqrt(std::fabs(d0 * ds));
    ClusteringRow row;
    row.separation = sep;
    row.s_norm = std::fabs(k.s_xy) / g;
    row.d_norm = std::fabs(k.d) / g;
    row.i_norm = std::fabs(k.i) / g;
    rep.rows.push_back(row);
    const double mag = std::max({row.s_norm, row.d_norm, row.i_norm});
    if (sep > 0 && mag > 1e-14) {  // log-linear fit in sep^2
      const double x = sep * sep, y = std::log(mag);
      sxy += x * y;
      sx2 += x;
      sy += y;
      sx4 += x * x;
      ++nfit;
    }
  }
  if (nfit >= 2) {
    const double denom = nfit * sx4 - sx2 * sx2;
    if (denom != 0) rep.fitted_rate = -(nfit * sxy - sx2 * sy) / denom;
  }
  return rep;
}

}  // namespace ginprod
