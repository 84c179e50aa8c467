#pragma once
#include <cmath>
#include <limits>
#include <vector>

namespace ginprod {

/// Sign + log-magnitude representation. Products of kernel factors straddle
/// hundreds of orders of magnitude before normalization; this keeps them finite.
struct SignedLog {
  int sign = 0;            // -1, 0, +1; sign 0 means exactly zero
  double log_mag = -std::numeric_limits<double>::infinity();

  SignedLog() = default;
  SignedLog(int s, double lm) : sign(s), log_mag(s == 0 ? -std::numeric_limits<double>::infinity() : lm) {}

  static SignedLog zero() { return SignedLog(); }
  static SignedLog one() { return SignedLog(1, 0.0); }

  static SignedLog from_real(double x) {
    if (x == 0.0) return zero();
    return SignedLog(x > 0 ? 1 : -1, std::log(std::fabs(x)));
  }
  /// exp(l), given as a log, with explicit sign.
  static SignedLog from_log(double l, int s = 1) { return SignedLog(s, l); }

  double to_real() const { return sign == 0 ? 0.0 : sign * std::exp(log_mag); }
  bool is_zero() const { return sign == 0; }

  SignedLog operator-() const { return SignedLog(-sign, log_mag); }
  SignedLog abs() const { return SignedLog(sign == 0 ? 0 : 1, log_mag); }

  friend SignedLog operator*(const SignedLog& a, const SignedLog& b) {
    if (a.sign == 0 || b.sign == 0) return zero();
    return SignedLog(a.sign * b.sign, a.log_mag + b.log_mag);
  }
  friend SignedLog operator/(const SignedLog& a, const SignedLog& b) {
    if (a.sign == 0) return zero();
    return SignedLog(a.sign * b.sign, a.log_mag - b.log_mag);
  }
  friend SignedLog operator+(const SignedLog& a, const SignedLog& b) {
    if (a.sign == 0) return b;
    if (b.sign == 0) return a;
    const SignedLog *hi = &a, *lo = &b;
    if (b.log_mag > a.log_mag) { hi = &b; lo = &a; }
    const double d = lo->log_mag - hi->log_mag;  // <= 0
    if (a.sign == b.sign) return SignedLog(a.sign, hi->log_mag + std::log1p(std::exp(d)));
    if (d == 0.0) return zero();
    return SignedLog(hi->sign, hi->log_mag + std::log1p(-std::exp(d)));
  }
  friend SignedLog operator-(const SignedLog& a, const SignedLog& b) { return a + (-b); }

  SignedLog pow_int(long k) const {
    if (sign == 0) return k == 0 ? one() : zero();
    int s = (sign < 0 && (k & 1L)) ? -1 : 1;
    return SignedLog(s, log_mag * static_cast<double>(k));
  }

  /// Total order consistent with the represented real values.
  friend bool operator<(const SignedLog& a, const SignedLog& b) {
    if (a.sign != b.sign) return a.sign < b.sign;
    if (a.sign == 0) return false;
    return a.sign > 0 ? a.log_mag < b.log_mag : a.log_mag > b.log_mag;
  }
};

/// Cancellation-aware accumulator: positive and negative parts are summed
/// separately in a scaled-linear domain anchored at the running max magnitude.
class SignedLogSum {
 public:
  void add(const SignedLog& t) {
    if (t.sign == 0) return;
    if (t.log_mag > anchor_) rescale(t.log_mag);
    const double v = std::exp(t.log_mag - anchor_);
    if (t.sign > 0) pos_ += v; else neg_ += v;
  }
  SignedLog value() const {
    const double d = pos_ - neg_;
    if (d == 0.0 || anchor_ == -std::numeric_limits<double>::infinity()) return SignedLog::zero();
    return SignedLog(d > 0 ? 1 : -1, anchor_ + std::log(std::fabs(d)));
  }
  /// log of the largest magnitude seen (for cancellation diagnostics)
  double anchor() const { return anchor_; }

 private:
  void rescale(double new_anchor) {
    const double f = std::exp(anchor_ - new_anchor);
    pos_ *= f; neg_ *= f;
    anchor_ = new_anchor;
  }
  double anchor_ = -std::numeric_limits<double>::infinity();
  double pos_ = 0.0, neg_ = 0.0;
};

}  // namespace ginprod
