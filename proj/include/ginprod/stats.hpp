#pragma once
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "ginprod/kernel.hpp"
#include "ginprod/montecarlo.hpp"

namespace ginprod {

/// Symmetric truncation region +/-[lo, hi] with lo = N^{-m/2+eps},
/// hi = 1 - N^{-1/2+eps}.
struct TruncationRegion {
  int N = 2;
  int m = 1;
  double epsilon = 0.1;
  double lo = 0;
  double hi = 0;
  std::vector<std::pair<double, double>> intervals() const {
    return {{-hi, -lo}, {lo, hi}};
  }
};

TruncationRegion truncation_region(int N, int m, double epsilon);

struct VarianceRegime {
  enum Kind { global, meso_bulk, meso_origin } kind = global;
  double E = 0;    // meso_bulk only
  double tau = 0;  // mesoscopic regimes
};

struct VariancePrediction {
  VarianceRegime regime;
  double sigma2 = 0;
  double normalization_exponent = 0;  // centered statistic divided by N^expo
};

/// Limiting variance of the (normalized) linear statistic in the given
/// regime. The origin singularity |x|^{1/m-1} is always removed by the
/// substitution x = t^m.
VariancePrediction variance_prediction(const VarianceRegime& regime,
                                       const std::function<double(double)>& f,
                                       int m, int quad_order = 64);

/// Exact finite-N variance of sum f(lambda_j) over the truncation region:
/// one diagonal and two banded off-diagonal kernel integrals.
double finite_N_variance(const std::function<double(double)>& f,
                         const KernelContext& ctx,
                         const TruncationRegion& region, int quad_order = 64);

/// E[#real eigenvalues in the region] = integral of the diagonal scalar
/// kernel; empty region list means the full line (+/-[0, 1.5]).
double expected_count(const KernelContext& ctx,
                      const std::vector<std::pair<double, double>>& region = {},
                      int quad_order = 64);

struct CltReport {
  VariancePrediction prediction;
  ObservableSummary sample;  // raw (unnormalized) statistic
  double variance_ratio = 0; // sample variance / (N^{2 expo} sigma2)
  double skewness = 0;
  double ex_kurtosis = 0;
  double ks_normal = 0;      // sample standardized by its own mean/sd
  double se_skewness = 0;
  double se_kurtosis = 0;
  bool zero_variance = false;
  bool pass = false;
  double skew_threshold = 0.1, kurt_threshold = 0.2, ks_threshold = 0.02,
         ratio_tolerance = 0.15;
};

/// Monte Carlo normality check of the linear statistic against the
/// predicted normalization. Always returns a report; `pass` summarizes the
/// declared thresholds.
CltReport clt_report(const EnsembleSpec& spec,
                     const std::function<double(double)>& f,
                     const VarianceRegime& regime);

struct ClusteringRow {
  double separation = 0;
  double s_norm = 0;  // |S| / geometric mean of the two densities
  double d_norm = 0;
  double i_norm = 0;
};

struct ClusteringReport {
  std::vector<ClusteringRow> rows;
  double fitted_rate = 0;  // c in |entry| ~ exp(-c sep^2), least squares
};

/// Normalized kernel-entry decay versus separation in bulk-rescaled
/// coordinates around energy E.
ClusteringReport clustering_report(const KernelContext& ctx, double E,
                                   const std::vector<double>& separations);

}  // namespace ginprod
