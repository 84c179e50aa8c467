#pragma once
#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ginprod {

/// Philox4x32-10 counter-based generator. A stream is identified by
/// (key = 64-bit seed, counter words 2..3 = trial and factor index); counter
/// words 0..1 advance within the stream. Every consumer draws from a fresh
/// (trial, factor) substream, so trials are reproducible under any
/// parallel schedule.
struct Philox4x32 {
  std::array<uint32_t, 4> counter{};
  std::array<uint32_t, 2> key{};

  static std::array<uint32_t, 4> block(std::array<uint32_t, 4> ctr,
                                       std::array<uint32_t, 2> k);

  Philox4x32(uint64_t seed, uint32_t trial, uint32_t substream) {
    key = {(uint32_t)seed, (uint32_t)(seed >> 32)};
    counter = {0, 0, trial, substream};
  }

  std::array<uint32_t, 4> next_block() {
    std::array<uint32_t, 4> out = block(counter, key);
    if (++counter[0] == 0) ++counter[1];
    return out;
  }

  /// Fills with standard normals via Box-Muller on (0,1) uniforms
  /// (x + 1/2) * 2^-32. Exact stream semantics: each 4-word block yields
  /// 4 normals; a partial block at the end discards unused variates.
  void fill_normal(double* out, size_t n);
};

struct EnsembleSpec {
  int N = 2;
  int m = 1;
  long trials = 1;
  uint64_t seed = 0;
  int workers = 1;
};

struct SpectralSample {
  std::vector<double> real_eigs;  // sorted ascending
  int n_real = 0;                 // == real_eigs.size(), parity of N
  int N = 0;                      // matrix dimension (for rescaled statistics)
  long trial_index = 0;
  int resample_attempts = 0;  // >0 if the eigensolver needed a fresh substream
};

struct EnsembleResult {
  EnsembleSpec spec;
  std::vector<SpectralSample> samples;  // indexed by trial
  long failed_factorizations = 0;       // total resample attempts
};

/// Deterministic function of (spec.seed, trial): draws the m factors, forms
/// the N^{-m/2}-scaled product and takes its real Schur form; real
/// eigenvalues are exactly the 1x1 diagonal blocks.
SpectralSample sample_spectrum(const EnsembleSpec& spec, long trial);

/// All trials, parallel over spec.workers threads; result independent of the
/// worker count.
EnsembleResult run_trials(const EnsembleSpec& spec);

double linear_statistic(const SpectralSample& sample,
                        const std::function<double(double)>& f);

/// sum_j f(N^tau (E - lambda_j))
double mesoscopic_statistic(const SpectralSample& sample,
                            const std::function<double(double)>& f, double E,
                            double tau);

struct Extremes {
  std::optional<double> lambda_max;
  std::optional<double> lambda_min_positive;
};
Extremes extremes(const SpectralSample& sample);

/// Per-trial observable; returns nullopt to exclude the trial (e.g. an empty
/// real spectrum for an extreme-value observable).
struct Observable {
  std::string name;
  std::function<std::optional<double>(const SpectralSample&)> eval;
};

Observable obs_count();
Observable obs_linear(std::string name, std::function<double(double)> f);
Observable obs_linear_region(double lo, double hi);  // symmetric pair of
                                                     // intervals +/-[lo,hi]
Observable obs_mesoscopic(std::string name, std::function<double(double)> f,
                          double E, double tau);
Observable obs_lambda_max();
Observable obs_lambda_min_positive();

struct ObservableSummary {
  std::string name;
  long n = 0;         // trials contributing
  long excluded = 0;  // trials returning nullopt
  double mean = 0;
  double variance = 0;  // unbiased
  double skewness = 0;
  double ex_kurtosis = 0;
  double se_mean = 0;
  std::vector<double> sorted_values;  // empirical CDF support
};

struct RunSummary {
  EnsembleSpec spec;
  long failed_factorizations = 0;
  std::vector<ObservableSummary> observables;
};

RunSummary run_ensemble(const EnsembleSpec& spec,
                        const std::vector<Observable>& observables);
RunSummary summarize(const EnsembleResult& result,
                     const std::vector<Observable>& observables);

/// Moment summary of an arbitrary sample vector (fixed-order compensated
/// reduction; used by run_ensemble and the test harness).
ObservableSummary summarize_values(std::string name,
                                   const std::vector<double>& values,
                                   long excluded);

/// sup_x |F_n(x) - F(x)| over the sample points, both one-sided gaps.
double ks_distance(const std::vector<double>& sorted_samples,
                   const std::function<double(double)>& cdf);

}  // namespace ginprod
