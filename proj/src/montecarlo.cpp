#include "ginprod/montecarlo.hpp"

#include <cblas.h>
#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>
#include <thread>

namespace ginprod {

namespace {

constexpr uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr uint32_t kPhiloxW1 = 0xBB67AE85u;

inline std::array<uint32_t, 4> philox_round(const std::array<uint32_t, 4>& c,
                                            const std::array<uint32_t, 2>& k) {
  const uint64_t p0 = (uint64_t)kPhiloxM0 * c[0];
  const uint64_t p1 = (uint64_t)kPhiloxM1 * c[2];
  return {(uint32_t)(p1 >> 32) ^ c[1] ^ k[0], (uint32_t)p1,
          (uint32_t)(p0 >> 32) ^ c[3] ^ k[1], (uint32_t)p0};
}

inline double to_unit(uint32_t x) {
  // (0,1), symmetric, never hits an endpoint
  return (x + 0.5) * 0x1p-32;
}

}  // namespace

std::array<uint32_t, 4> Philox4x32::block(std::array<uint32_t, 4> ctr,
                                          std::array<uint32_t, 2> k) {
  for (int round = 0; round < 10; ++round) {
    ctr = philox_round(ctr, k);
    k[0] += kPhiloxW0;
    k[1] += kPhiloxW1;
  }
  return ctr;
}

void Philox4x32::fill_normal(double* out, size_t n) {
  size_t i = 0;
  while (i < n) {
    const std::array<uint32_t, 4> b = next_block();
    double z[4];
    for (int p = 0; p < 2; ++p) {
      const double r = std::sqrt(-2.0 * std::log(to_unit(b[2 * p])));
      const double t = 2.0 * M_PI * to_unit(b[2 * p + 1]);
      z[2 * p] = r * std::cos(t);
      z[2 * p + 1] = r * std::sin(t);
    }
    for (int j = 0; j < 4 && i < n; ++j) out[i++] = z[j];
  }
}

namespace {

// One draw attempt; returns false on eigensolver failure.
bool try_spectrum(const EnsembleSpec& spec, long trial, int attempt,
                  std::vector<double>& eigs) {
  const int N = spec.N;
  const size_t nn = (size_t)N * N;
  std::vector<double> prod(nn), factor(nn), tmp(nn);
  for (int fidx = 0; fidx < spec.m; ++fidx) {
    Philox4x32 rng(spec.seed, (uint32_t)trial,
                   (uint32_t)(fidx + 1000 * attempt));
    rng.fill_normal(factor.data(), nn);
    if (fidx == 0) {
      prod = factor;
    } else {
      cblas_dgemm(CblasColMajor, CblasNoTrans, CblasNoTrans, N, N, N, 1.0,
                  prod.data(), N, factor.data(), N, 0.0, tmp.data(), N);
      prod.swap(tmp);
    }
  }
  const double scale = std::pow((double)N, -0.5 * spec.m);
  for (double& v : prod) v *= scale;

  std::vector<double> wr(N), wi(N);
  int sdim = 0;
  const int info =
      LAPACKE_dgees(LAPACK_COL_MAJOR, 'N', 'N', nullptr, N, prod.data(), N,
                    &sdim, wr.data(), wi.data(), nullptr, N);
  if (info != 0) return false;

  eigs.clear();
  for (int i = 0; i < N; ++i)
    if (wi[i] == 0.0) eigs.push_back(wr[i]);  // exact 1x1 Schur block
  std::sort(eigs.begin(), eigs.end());
  return true;
}

}  // namespace

SpectralSample sample_spectrum(const EnsembleSpec& spec, long trial) {
  SpectralSample s;
  s.trial_index = trial;
  s.N = spec.N;
  for (int attempt = 0;; ++attempt) {
    if (attempt > 16)
      throw std::runtime_error("sample_spectrum: eigensolver failed 16 times");
    if (try_spectrum(spec, trial, attempt, s.real_eigs)) {
      s.resample_attempts = attempt;
      break;
    }
  }
  s.n_real = (int)s.real_eigs.size();
  return s;
}

EnsembleResult run_trials(const EnsembleSpec& spec) {
  if (spec.N < 1 || spec.m < 1 || spec.trials < 1 || spec.workers < 1)
    throw std::invalid_argument("run_trials: invalid EnsembleSpec");
  EnsembleResult res;
  res.spec = spec;
  res.samples.resize(spec.trials);
  const int workers = (int)std::min<long>(spec.workers, spec.trials);
  auto work = [&](int w) {
    for (long t = w; t < spec.trials; t += workers)
      res.samples[t] = sample_spectrum(spec, t);
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (std::thread& th : pool) th.join();
  }
  for (const SpectralSample& s : res.samples)
    res.failed_factorizations += s.resample_attempts;
  return res;
}

double linear_statistic(const SpectralSample& sample,
                        const std::function<double(double)>& f) {
  double s = 0;
  for (double x : sample.real_eigs) {
    const double v = f(x);
    if (!std::isfinite(v))
      throw std::domain_error("linear_statistic: f non-finite at eigenvalue");
    s += v;
  }
  return s;
}

double mesoscopic_statistic(const SpectralSample& sample,
                            const std::function<double(double)>& f, double E,
                            double tau) {
  if (tau < 0) throw std::invalid_argument("mesoscopic_statistic: tau < 0");
  double s = 0;
  for (double x : sample.real_eigs) {
    const double v = f(std::pow((double)sample.N, tau) * (E - x));
    if (!std::isfinite(v))
      throw std::domain_error("mesoscopic_statistic: f non-finite");
    s += v;
  }
  return s;
}

Extremes extremes(const SpectralSample& sample) {
  Extremes e;
  if (!sample.real_eigs.empty()) e.lambda_max = sample.real_eigs.back();
  for (double x : sample.real_eigs)
    if (x > 0) {
      e.lambda_min_positive = x;
      break;
    }
  return e;
}

Observable obs_count() {
  return {"count", [](const SpectralSample& s) -> std::optional<double> {
            return (double)s.n_real;
          }};
}

Observable obs_linear(std::string name, std::function<double(double)> f) {
  return {std::move(name),
          [f = std::move(f)](const SpectralSample& s) -> std::optional<double> {
            return linear_statistic(s, f);
          }};
}

Observable obs_linear_region(double lo, double hi) {
  return {"count_region",
          [lo, hi](const SpectralSample& s) -> std::optional<double> {
            double c = 0;
            for (double x : s.real_eigs) {
              const double a = std::fabs(x);
              if (a >= lo && a <= hi) c += 1.0;
            }
            return c;
          }};
}

Observable obs_mesoscopic(std::string name, std::function<double(double)> f,
                          double E, double tau) {
  return {std::move(name),
          [f = std::move(f), E,
           tau](const SpectralSample& s) -> std::optional<double> {
            return mesoscopic_statistic(s, f, E, tau);
          }};
}

Observable obs_lambda_max() {
  return {"lambda_max", [](const SpectralSample& s) -> std::optional<double> {
            Extremes e = extremes(s);
            if (!e.lambda_max) return std::nullopt;
            return *e.lambda_max;
          }};
}

Observable obs_lambda_min_positive() {
  return {"lambda_min_positive",
          [](const SpectralSample& s) -> std::optional<double> {
            Extremes e = extremes(s);
            if (!e.lambda_min_positive) return std::nullopt;
            return *e.lambda_min_positive;
          }};
}

ObservableSummary summarize_values(std::string name,
                                   const std::vector<double>& values,
                                   long excluded) {
  ObservableSummary o;
  o.name = std::move(name);
  o.n = (long)values.size();
  o.excluded = excluded;
  if (values.empty()) return o;

  // fixed-order Kahan sums; trial order is already fixed by the caller
  auto ksum = [](const std::vector<double>& v,
                 const std::function<double(double)>& g) {
    double s = 0, c = 0;
    for (double x : v) {
      const double y = g(x) - c;
      const double t = s + y;
      c = (t - s) - y;
      s = t;
    }
    return s;
  };
  const double n = (double)values.size();
  o.mean = ksum(values, [](double x) { return x; }) / n;
  const double mu = o.mean;
  const double m2 = ksum(values, [mu](double x) {
                      const double d = x - mu;
                      return d * d;
                    }) / n;
  const double m3 = ksum(values, [mu](double x) {
                      const double d = x - mu;
                      return d * d * d;
                    }) / n;
  const double m4 = ksum(values, [mu](double x) {
                      const double d = x - mu;
                      return d * d * d * d;
                    }) / n;
  o.variance = n > 1 ? m2 * n / (n - 1) : 0.0;
  o.skewness = m2 > 0 ? m3 / std::pow(m2, 1.5) : 0.0;
  o.ex_kurtosis = m2 > 0 ? m4 / (m2 * m2) - 3.0 : 0.0;
  o.se_mean = n > 1 ? std::sqrt(o.variance / n) : 0.0;
  o.sorted_values = values;
  std::sort(o.sorted_values.begin(), o.sorted_values.end());
  return o;
}

RunSummary summarize(const EnsembleResult& result,
                     const std::vector<Observable>& observables) {
  RunSummary rs;
  rs.spec = result.spec;
  rs.failed_factorizations = result.failed_factorizations;
  for (const Observable& ob : observables) {
    std::vector<double> vals;
    vals.reserve(result.samples.size());
    long excluded = 0;
    for (const SpectralSample& s : result.samples) {
      const std::optional<double> v = ob.eval(s);
      if (v)
        vals.push_back(*v);
      else
        ++excluded;
    }
    rs.observables.push_back(summarize_values(ob.name, vals, excluded));
  }
  return rs;
}

RunSummary run_ensemble(const EnsembleSpec& spec,
                        const std::vector<Observable>& observables) {
  return summarize(run_trials(spec), observables);
}

double ks_distance(const std::vector<double>& sorted_samples,
                   const std::function<double(double)>& cdf) {
  if (sorted_samples.empty())
    throw std::invalid_argument("ks_distance: empty sample");
  const double n = (double)sorted_samples.size();
  double d = 0, prev_f = -1.0;
  for (size_t i = 0; i < sorted_samples.size(); ++i) {
    const double f = cdf(sorted_samples[i]);
    if (f < prev_f - 1e-9)
      throw std::invalid_argument("ks_distance: cdf not monotone");
    prev_f = std::max(prev_f, f);
    d = std::max(d, std::fabs(f - i / n));
    d = std::max(d, std::fabs((i + 1) / n - f));
  }
  return d;
}

}  // namespace ginprod
