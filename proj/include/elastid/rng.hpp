#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>

#include "elastid/special.hpp"

namespace elastid {

// splitmix64 finalizer; decorrelates derived stream seeds.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Deterministic sub-stream seed from a master seed, a purpose tag, and an
// index (chain id, snapshot id, ...). FNV-1a over the tag keeps purposes apart.
inline std::uint64_t derive_stream(std::uint64_t master, const char* tag, std::uint64_t index) {
  std::uint64_t h = 1469598103934665603ull;
  for (const char* p = tag; *p; ++p) h = (h ^ static_cast<std::uint64_t>(*p)) * 1099511628211ull;
  return mix64(master ^ mix64(h ^ (index * 0x9e3779b97f4a7c15ull)));
}

// All randomness flows through this wrapper so that every draw is a documented
// function of the engine's uniform stream (bit-reproducible across platforms
// with the same IEEE doubles).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t raw() { return eng_(); }

  // Uniform on the open interval (0, 1); never returns an endpoint.
  double uniform() { return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Unbiased integer in [0, n) by rejection below 2^64 mod n.
  std::uint64_t uniform_index(std::uint64_t n) {
    if (n == 0) throw std::domain_error("uniform_index: n == 0");
    const std::uint64_t reject = (0 - n) % n;
    for (;;) {
      const std::uint64_t r = raw();
      if (r >= reject) return r % n;
    }
  }

  double normal() { return sf::inv_norm_cdf(uniform()); }

  // Marsaglia-Tsang for shape >= 1; boost to shape+1 otherwise.
  double gamma(double shape, double scale = 1.0) {
    if (!(shape > 0.0) || !(scale > 0.0)) throw std::domain_error("gamma: nonpositive parameter");
    if (shape < 1.0) {
      const double u = uniform();
      return gamma(shape + 1.0, scale) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return scale * d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return scale * d * v;
    }
  }

  // Inverse gamma with shape a and scale b: density ~ x^{-a-1} exp(-b/x).
  double inv_gamma(double shape, double scale) { return scale / gamma(shape, 1.0); }

  double beta(double a, double b) {
    const double x = gamma(a);
    const double y = gamma(b);
    return x / (x + y);
  }

  // Standard normal conditioned on >= a, by inverse CDF in log space; exact to
  // double precision for any a.
  double trunc_normal_lower(double a) {
    const double lv = sf::log_norm_ccdf(a) + std::log(uniform());
    double x = sf::inv_norm_ccdf_log(lv);
    return x < a ? a : x;
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace elastid
