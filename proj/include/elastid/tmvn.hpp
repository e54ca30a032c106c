#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>

#include "elastid/errors.hpp"
#include "elastid/rng.hpp"
#include "elastid/special.hpp"

// Exact sampling from a multivariate normal restricted to the nonnegative
// orthant. Strategy, in order:
//   1. plain rejection (cheap, exact; wins whenever the orthant mass is not
//      tiny),
//   2. minimax exponential tilting: sequential proposals tilted toward the
//      orthant, accepted against the saddle-point bound (exact),
//   3. coordinate-wise Gibbs within the orthant (approximate but unstoppable;
//      entered when the dimension is large or tilting stalls).
// Every path returns a strictly componentwise-nonnegative vector.
namespace elastid::tmvn {

struct Options {
  int plain_rejection_tries = 64;
  int tilt_proposal_cap = 2000;   // acceptance below ~1/cap triggers fallback
  int gibbs_dimension_cutoff = 10;
  int gibbs_sweeps = 50;
};

namespace detail {

// Saddle point of the tilted sequential proposal. Unknowns are w (length d)
// and tilting means mt (length d, last pinned to zero). Stationarity:
//   w_k  = mt_k + H(lt_k - mt_k)
//   mt_i = sum_{j>i} H(lt_j - mt_j) L_ji / L_jj
// with lt_k the running standardized lower bound and H the normal hazard.
struct Saddle {
  Eigen::VectorXd w, mt;
  double psi_star = 0.0;
  bool ok = false;
};

inline double psi_value(const Eigen::MatrixXd& L, const Eigen::VectorXd& l,
                        const Eigen::VectorXd& w, const Eigen::VectorXd& mt) {
  const int d = static_cast<int>(l.size());
  double psi = 0.0;
  for (int k = 0; k < d; ++k) {
    double acc = l[k];
    for (int i = 0; i < k; ++i) acc -= L(k, i) * w[i];
    const double lt = acc / L(k, k);
    psi += 0.5 * mt[k] * mt[k] - mt[k] * w[k] + sf::log_norm_ccdf(lt - mt[k]);
  }
  return psi;
}

inline Saddle solve_saddle(const Eigen::MatrixXd& L, const Eigen::VectorXd& l) {
  const int d = static_cast<int>(l.size());
  Saddle s;
  s.w = Eigen::VectorXd::Zero(d);
  s.mt = Eigen::VectorXd::Zero(d);

  auto lower_bounds = [&](const Eigen::VectorXd& w) {
    Eigen::VectorXd lt(d);
    for (int k = 0; k < d; ++k) {
      double acc = l[k];
      for (int i = 0; i < k; ++i) acc -= L(k, i) * w[i];
      lt[k] = acc / L(k, k);
    }
    return lt;
  };

  // Picard warm start.
  for (int round = 0; round < 3; ++round) {
    for (int k = 0; k < d; ++k) {
      double acc = l[k];
      for (int i = 0; i < k; ++i) acc -= L(k, i) * s.w[i];
      const double lt = acc / L(k, k);
      s.w[k] = s.mt[k] + sf::hazard(lt - s.mt[k]);
    }
    const Eigen::VectorXd lt = lower_bounds(s.w);
    for (int i = 0; i < d - 1; ++i) {
      double acc = 0.0;
      for (int j = i + 1; j < d; ++j) acc += sf::hazard(lt[j] - s.mt[j]) * L(j, i) / L(j, j);
      s.mt[i] = acc;
    }
  }

  const int n = 2 * d - 1;  // unknowns: w_0..w_{d-1}, mt_0..mt_{d-2}
  Eigen::VectorXd r(n);
  Eigen::MatrixXd J(n, n);

  auto residual = [&](const Eigen::VectorXd& w, const Eigen::VectorXd& mt, Eigen::VectorXd& out) {
    const Eigen::VectorXd lt = lower_bounds(w);
    for (int k = 0; k < d; ++k) out[k] = w[k] - mt[k] - sf::hazard(lt[k] - mt[k]);
    for (int i = 0; i < d - 1; ++i) {
      double acc = 0.0;
      for (int j = i + 1; j < d; ++j) acc += sf::hazard(lt[j] - mt[j]) * L(j, i) / L(j, j);
      out[d + i] = mt[i] - acc;
    }
  };

  residual(s.w, s.mt, r);
  double rn = r.norm();
  for (int it = 0; it < 100 && rn > 1e-10; ++it) {
    const Eigen::VectorXd lt = lower_bounds(s.w);
    Eigen::VectorXd H(d), Hp(d);
    for (int k = 0; k < d; ++k) {
      const double sk = lt[k] - s.mt[k];
      H[k] = sf::hazard(sk);
      Hp[k] = H[k] * (H[k] - sk);
    }
    J.setZero();
    for (int k = 0; k < d; ++k) {
      J(k, k) = 1.0;
      for (int i = 0; i < k; ++i) J(k, i) = Hp[k] * L(k, i) / L(k, k);
      if (k < d - 1) J(k, d + k) = -1.0 + Hp[k];
    }
    for (int i = 0; i < d - 1; ++i) {
      J(d + i, d + i) = 1.0;
      for (int j = i + 1; j < d - 1; ++j) J(d + i, d + j) = Hp[j] * L(j, i) / L(j, j);
      for (int m = 0; m < d; ++m) {
        double acc = 0.0;
        for (int j = std::max(i, m) + 1; j < d; ++j)
          acc += Hp[j] * L(j, i) * L(j, m) / (L(j, j) * L(j, j));
        J(d + i, m) += acc;
      }
    }
    const Eigen::VectorXd step = J.partialPivLu().solve(-r);
    if (!step.allFinite()) return s;
    double t = 1.0;
    Eigen::VectorXd wn(d), mtn(d), rn_vec(n);
    for (int half = 0; half < 30; ++half) {
      wn = s.w + t * step.head(d);
      mtn = s.mt;
      mtn.head(d - 1) += t * step.tail(d - 1);
      residual(wn, mtn, rn_vec);
      if (rn_vec.allFinite() && rn_vec.norm() < rn) break;
      t *= 0.5;
    }
    s.w = wn;
    s.mt = mtn;
    r = rn_vec;
    rn = r.norm();
  }
  if (rn > 1e-8) return s;
  s.psi_star = psi_value(L, l, s.w, s.mt) + 1e-10;  // slack keeps the bound an upper bound
  s.ok = true;
  return s;
}

inline Eigen::VectorXd gibbs_orthant(const Eigen::VectorXd& mu, const Eigen::MatrixXd& cov,
                                     Rng& rng, int sweeps) {
  const int d = static_cast<int>(mu.size());
  const Eigen::MatrixXd prec = cov.llt().solve(Eigen::MatrixXd::Identity(d, d));
  Eigen::VectorXd x(d);
  for (int i = 0; i < d; ++i) x[i] = std::max(mu[i], 0.1 * std::sqrt(cov(i, i)));
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    for (int i = 0; i < d; ++i) {
      double dot = 0.0;
      for (int j = 0; j < d; ++j)
        if (j != i) dot += prec(i, j) * (x[j] - mu[j]);
      const double cvar = 1.0 / prec(i, i);
      const double cmean = mu[i] - cvar * dot;
      const double csd = std::sqrt(cvar);
      x[i] = cmean + csd * rng.trunc_normal_lower(-cmean / csd);
      if (x[i] < 0.0) x[i] = 0.0;
    }
  }
  return x;
}

}  // namespace detail

inline Eigen::VectorXd sample(const Eigen::VectorXd& mu, const Eigen::MatrixXd& cov, Rng& rng,
                              const Options& opt = {}) {
  const int d = static_cast<int>(mu.size());
  if (d == 0) return Eigen::VectorXd();
  if (d == 1) {
    const double sd = std::sqrt(cov(0, 0));
    Eigen::VectorXd x(1);
    x[0] = std::max(mu[0] + sd * rng.trunc_normal_lower(-mu[0] / sd), 0.0);
    return x;
  }

  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success)
    throw NumericalError("sample_truncated_mvn: covariance not positive definite");
  const Eigen::MatrixXd L = llt.matrixL();

  // Plain rejection first: exact, and fast whenever the orthant is easy.
  Eigen::VectorXd z(d);
  for (int attempt = 0; attempt < opt.plain_rejection_tries; ++attempt) {
    for (int i = 0; i < d; ++i) z[i] = rng.normal();
    Eigen::VectorXd x = mu + L * z;
    if ((x.array() >= 0.0).all()) return x;
  }

  if (d <= opt.gibbs_dimension_cutoff) {
    const Eigen::VectorXd l = -mu;
    const detail::Saddle saddle = detail::solve_saddle(L, l);
    if (saddle.ok) {
      Eigen::VectorXd w(d);
      for (int attempt = 0; attempt < opt.tilt_proposal_cap; ++attempt) {
        double psi = 0.0;
        for (int k = 0; k < d; ++k) {
          double acc = l[k];
          for (int i = 0; i < k; ++i) acc -= L(k, i) * w[i];
          const double lt = acc / L(k, k);
          const double a = lt - saddle.mt[k];
          w[k] = saddle.mt[k] + rng.trunc_normal_lower(a);
          psi += 0.5 * saddle.mt[k] * saddle.mt[k] - saddle.mt[k] * w[k] + sf::log_norm_ccdf(a);
        }
        if (std::log(rng.uniform()) <= psi - saddle.psi_star) {
          Eigen::VectorXd x = mu + L * w;
          return x.cwiseMax(0.0);
        }
      }
    }
  }

  return detail::gibbs_orthant(mu, cov, rng, opt.gibbs_sweeps);
}

}  // namespace elastid::tmvn
