#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

// Normal-distribution special functions with stable tail behaviour. Everything
// here is scalar double precision; accuracy ~1e-14 relative except where noted.
namespace elastid::sf {

inline constexpr double kSqrt2 = 1.4142135623730951;
inline constexpr double kSqrt2Pi = 2.5066282746310002;
inline constexpr double kLogSqrt2Pi = 0.9189385332046727;

// exp(x^2) * erfc(x). Finite for large positive x where erfc underflows.
inline double erfcx(double x) {
  if (x < 0.0) {
    // erfcx(-x) = 2 exp(x^2) - erfcx(x); overflows for x < -26, as it must.
    const double e = std::exp(x * x);
    return 2.0 * e - erfcx(-x);
  }
  if (x <= 25.0) return std::exp(x * x) * std::erfc(x);
  // Asymptotic series, relative error < 1e-16 for x > 25.
  const double ix2 = 1.0 / (x * x);
  double s = 1.0 + ix2 * (-0.5 + ix2 * (0.75 + ix2 * (-1.875 + ix2 * 6.5625)));
  return s / (x * 1.7724538509055159);
}

inline double norm_pdf(double x) { return std::exp(-0.5 * x * x) / kSqrt2Pi; }
inline double norm_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }
inline double norm_ccdf(double x) { return 0.5 * std::erfc(x / kSqrt2); }

// log(1 - Phi(x)), stable for arbitrarily large x.
inline double log_norm_ccdf(double x) {
  if (x <= 0.0) return std::log(0.5 * std::erfc(x / kSqrt2));
  return std::log(0.5 * erfcx(x / kSqrt2)) - 0.5 * x * x;
}

// Hazard rate phi(x) / (1 - Phi(x)); ~x + 1/x for large x, stable via erfcx.
inline double hazard(double x) { return 0.7978845608028654 / erfcx(x / kSqrt2); }

// Acklam's rational approximation to the probit function, polished below.
inline double inv_norm_cdf_approx(double p) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  if (p < plow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > 1.0 - plow) {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = p - 0.5, r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

// Phi^{-1}(p) to near machine precision (one Halley step on erfc).
inline double inv_norm_cdf(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("inv_norm_cdf: p outside (0,1)");
  double x = inv_norm_cdf_approx(p);
  const double e = norm_cdf(x) - p;
  const double u = e / norm_pdf(x);
  x -= u / (1.0 + 0.5 * x * u);
  return x;
}

// Solves log(1 - Phi(x)) = log_p. Handles log_p down past -1e8 (deep tail).
inline double inv_norm_ccdf_log(double log_p) {
  if (!(log_p < 0.0)) {
    if (log_p == 0.0) return -std::numeric_limits<double>::infinity();
    throw std::domain_error("inv_norm_ccdf_log: log_p must be < 0");
  }
  double x;
  if (log_p > -0.6931471805599453) {
    // Upper-tail prob > 1/2 means x < 0; Phi(x) = -expm1(log_p) is accurate.
    x = inv_norm_cdf_approx(-std::expm1(log_p));
  } else if (log_p > -690.0) {
    x = -inv_norm_cdf_approx(std::exp(log_p));
  } else {
    // Asymptotic: log ccdf ~ -x^2/2 - log(x sqrt(2 pi)); fixed point in x^2.
    double t = -2.0 * log_p;
    t = -2.0 * log_p - std::log(t) - 2.0 * kLogSqrt2Pi;
    t = -2.0 * log_p - std::log(t) - 2.0 * kLogSqrt2Pi;
    x = std::sqrt(std::max(t, 0.0));
  }
  for (int it = 0; it < 50; ++it) {
    const double f = log_norm_ccdf(x) - log_p;
    const double step = f / hazard(x);
    x += step;
    if (std::abs(step) < 1e-14 * (1.0 + std::abs(x))) break;
  }
  return x;
}

}  // namespace elastid::sf
