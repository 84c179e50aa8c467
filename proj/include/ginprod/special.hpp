#pragma once
#include <stdexcept>

#include "ginprod/signed_log.hpp"

namespace ginprod {

struct WeightConfig {
  int m = 1;             // number of Ginibre factors
  int quad_order = 200;  // nodes per one-dimensional integral
  double domain_cut = 12.0;  // half-width about the integrand peak, in std devs

  void validate() const {
    if (m < 1) throw std::domain_error("WeightConfig: m must be positive");
    if (quad_order < 16) throw std::domain_error("WeightConfig: quad_order >= 16");
    if (domain_cut < 8) throw std::domain_error("WeightConfig: domain_cut >= 8");
  }
};

struct PreconditionError : std::domain_error {
  double threshold;
  PreconditionError(const std::string& msg, double thr)
      : std::domain_error(msg), threshold(thr) {}
};

/// log erfc(z); finite and accurate out to z ~ 1e4.
SignedLog log_erfc(double z);

/// The product-Gaussian weight w(x) = ∫_{R^m} e^{-|λ|²/2} δ(x - λ_1…λ_m) dλ.
/// m = 1 is exp(-x²/2) in closed form; m ≥ 2 by nested Gauss-Legendre in
/// log-λ coordinates, assembled in log-domain.
SignedLog weight(double x, const WeightConfig& cfg);

/// Leading-order large-N approximation of w(N^{m/2} x); valid |x| ≥ 10·N^{-m/2}.
SignedLog weight_asym(double x, int N, const WeightConfig& cfg);

/// f_{N-2}(a) = Σ_{j=0}^{N-2} a^j/(j!)^m
SignedLog f_series(SignedLog a, int N, int m);

/// f_∞(a) = Σ_{k≥0} a^k/(k!)^m, summed to relative tolerance tol.
SignedLog f_inf(SignedLog a, int m, double tol = 1e-14);

/// Tail Σ_{j≥N-1} a^j/(j!)^m = f_∞ - f_{N-2}, summed directly (no cancellation).
SignedLog f_tail(SignedLog a, int N, int m, double tol = 1e-14);

/// Leading order of f_∞(N^m x) away from the spectral edge; valid x > 10·N^{-m}.
SignedLog f_asym_bulk(double x, int N, int m);

/// Edge (Lemma-B.1-type) approximation of f_{N-2}(N^m x), uniform near x = 1.
SignedLog f_edge(double x, int N, int m, double window = 10.0);

/// Two-branch transition approximation of f_{N-2}(N^m x) away from the
/// ((1-ω)^m, (1+ω)^m) window, ω = N^{-1/2}.
SignedLog f_transition(double x, int N, int m);

double log_gamma(double x);

}  // namespace ginprod
