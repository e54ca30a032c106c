#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "elastid/assembly.hpp"
#include "elastid/errors.hpp"
#include "elastid/rng.hpp"
#include "elastid/tmvn.hpp"

namespace elastid {

inline constexpr int kNumFeatures = FeatureLibrary::n_features;

struct HyperParams {
  double a_nu = 0.5, b_nu = 0.5;      // slab-width inverse gamma
  double a_sigma = 1.0, b_sigma = 1.0;  // noise-variance inverse gamma
  double a_p = 0.1, b_p = 5.0;        // activation-probability beta

  void validate() const {
    for (double v : {a_nu, b_nu, a_sigma, b_sigma, a_p, b_p})
      if (!(v > 0.0)) throw ConfigError("HyperParams: all parameters must be strictly positive");
  }
};

// One Gibbs state. Inactive coefficients are pinned to zero after every sweep.
struct ChainState {
  Eigen::Matrix<double, kNumFeatures, 1> theta = Eigen::Matrix<double, kNumFeatures, 1>::Zero();
  std::array<bool, kNumFeatures> z{};
  double p0 = 0.1;
  double nu_s = 1.0;
  double sigma2 = 1.0;

  int active_count() const {
    int s = 0;
    for (bool zi : z) s += zi ? 1 : 0;
    return s;
  }
};

struct ChainConfig {
  int n_burn = 250;
  int n_g = 750;
  int n_chains = 4;
  std::uint64_t rng_seed = 0;

  void validate() const {
    if (n_burn <= 0 || n_g <= 0 || n_chains <= 0)
      throw ConfigError("ChainConfig: n_burn, n_g, and n_chains must be positive");
  }
};

// Post-burn-in record across all chains, in chain-major sweep order.
struct PosteriorSamples {
  std::vector<ChainState> states;
  std::vector<int> chain_ids;   // parallel to states
  std::vector<int> sweep_ids;   // sweep index within the chain, burn-in included

  std::size_t size() const { return states.size(); }
};

// Sufficient statistics of the regression likelihood: every conditional this
// sampler needs is a function of (A^T A, A^T b, b^T b, N) alone.
struct GramSystem {
  Eigen::Matrix<double, kNumFeatures, kNumFeatures> G;
  Eigen::Matrix<double, kNumFeatures, 1> Atb;
  double btb = 0.0;
  int n_rows = 0;

  GramSystem() { G.setZero(); Atb.setZero(); }
  explicit GramSystem(const LinearSystem& sys) {
    if (sys.cols() != kNumFeatures) throw ConfigError("GramSystem: column count mismatch");
    G = sys.A.transpose() * sys.A;
    Atb = sys.A.transpose() * sys.b;
    btb = sys.b.squaredNorm();
    n_rows = sys.rows();
  }
};

namespace detail {

inline std::vector<int> active_indices(const std::array<bool, kNumFeatures>& z) {
  std::vector<int> idx;
  for (int i = 0; i < kNumFeatures; ++i)
    if (z[i]) idx.push_back(i);
  return idx;
}

// Cholesky of the active-set precision G_rr + I/nu_s together with the
// quadratic form b^T A_r (G_rr + I/nu_s)^-1 A_r^T b shared by the theta,
// sigma^2, and marginal-likelihood conditionals.
struct ActiveModel {
  std::vector<int> idx;
  Eigen::LLT<Eigen::MatrixXd> llt;
  Eigen::VectorXd atb_r;
  double logdet_prec = 0.0;
  double quad = 0.0;
};

inline ActiveModel build_active(const GramSystem& gram, const std::array<bool, kNumFeatures>& z,
                                double nu_s) {
  if (!(nu_s > 0.0)) throw NumericalError("active model: nu_s must be positive");
  ActiveModel am;
  am.idx = active_indices(z);
  const int s = static_cast<int>(am.idx.size());
  if (s == 0) return am;
  Eigen::MatrixXd prec(s, s);
  am.atb_r.resize(s);
  for (int a = 0; a < s; ++a) {
    am.atb_r[a] = gram.Atb[am.idx[a]];
    for (int c = 0; c < s; ++c) prec(a, c) = gram.G(am.idx[a], am.idx[c]);
  }
  prec.diagonal().array() += 1.0 / nu_s;
  am.llt.compute(prec);
  if (am.llt.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "active model: Cholesky of the precision failed (s_z = " << s
        << ", nu_s = " << nu_s << ", diag range [" << prec.diagonal().minCoeff() << ", "
        << prec.diagonal().maxCoeff() << "])";
    throw NumericalError(msg.str());
  }
  for (int a = 0; a < s; ++a) am.logdet_prec += 2.0 * std::log(am.llt.matrixL()(a, a));
  am.quad = am.atb_r.dot(am.llt.solve(am.atb_r));
  return am;
}

inline std::string dump_state(const ChainState& st) {
  std::ostringstream os;
  os.precision(17);
  os << "theta=[";
  for (int i = 0; i < kNumFeatures; ++i) os << (i ? "," : "") << st.theta[i];
  os << "] z=[";
  for (int i = 0; i < kNumFeatures; ++i) os << (st.z[i] ? 1 : 0);
  os << "] p0=" << st.p0 << " nu_s=" << st.nu_s << " sigma2=" << st.sigma2;
  return os.str();
}

}  // namespace detail

// Draw of the active coefficients from the nonnegative-orthant-truncated
// normal N+(mu, sigma^2 Sigma), Sigma = (A_r^T A_r + I/nu_s)^-1; inactive
// coefficients come back exactly zero.
inline Eigen::Matrix<double, kNumFeatures, 1> sample_theta(const ChainState& state,
                                                           const GramSystem& gram, Rng& rng) {
  Eigen::Matrix<double, kNumFeatures, 1> theta = Eigen::Matrix<double, kNumFeatures, 1>::Zero();
  const auto am = detail::build_active(gram, state.z, state.nu_s);
  const int s = static_cast<int>(am.idx.size());
  if (s == 0) return theta;
  const Eigen::VectorXd mu = am.llt.solve(am.atb_r);
  const Eigen::MatrixXd cov =
      state.sigma2 * am.llt.solve(Eigen::MatrixXd::Identity(s, s));
  const Eigen::VectorXd draw = tmvn::sample(mu, cov, rng);
  for (int a = 0; a < s; ++a) theta[am.idx[a]] = draw[a];
  return theta;
}

inline Eigen::Matrix<double, kNumFeatures, 1> sample_theta(const ChainState& state,
                                                           const LinearSystem& sys, Rng& rng) {
  return sample_theta(state, GramSystem(sys), rng);
}

// Collapsed noise-variance conditional IG(a + N/2, b + (b^T b - mu^T Sigma^-1 mu)/2);
// theta is integrated out, so only the active set enters.
inline double sample_sigma2(const ChainState& state, const GramSystem& gram,
                            const HyperParams& hyper, Rng& rng) {
  const auto am = detail::build_active(gram, state.z, state.nu_s);
  double scale = hyper.b_sigma + 0.5 * (gram.btb - am.quad);
  if (!std::isfinite(scale)) throw NumericalError("sample_sigma2: non-finite scale");
  scale = std::max(scale, hyper.b_sigma * 1e-12);
  return rng.inv_gamma(hyper.a_sigma + 0.5 * gram.n_rows, scale);
}

inline double sample_sigma2(const ChainState& state, const LinearSystem& sys,
                            const HyperParams& hyper, Rng& rng) {
  return sample_sigma2(state, GramSystem(sys), hyper, rng);
}

inline double sample_nu_s(const ChainState& state, const HyperParams& hyper, Rng& rng) {
  double quad = 0.0;
  for (int i = 0; i < kNumFeatures; ++i)
    if (state.z[i]) quad += state.theta[i] * state.theta[i];
  return rng.inv_gamma(hyper.a_nu + 0.5 * state.active_count(),
                       hyper.b_nu + quad / (2.0 * state.sigma2));
}

inline double sample_p0(const ChainState& state, const HyperParams& hyper, Rng& rng,
                        int n_available = kNumFeatures) {
  const int s = state.active_count();
  return rng.beta(hyper.a_p + s, hyper.b_p + n_available - s);
}

// Log of the z-conditional evidence with theta and sigma^2 integrated out
// (untruncated Gaussian slab): log-gamma and log-determinant arithmetic only,
// the un-logged value overflows at this row count.
inline double log_marginal_likelihood(const std::array<bool, kNumFeatures>& z, double nu_s,
                                      const GramSystem& gram, const HyperParams& hyper) {
  const auto am = detail::build_active(gram, z, nu_s);
  const int s = static_cast<int>(am.idx.size());
  const double resid = std::max(gram.btb - am.quad, 0.0);
  double lp = std::lgamma(hyper.a_sigma + 0.5 * gram.n_rows) - std::lgamma(hyper.a_sigma) +
              hyper.a_sigma * std::log(hyper.b_sigma) -
              0.5 * gram.n_rows * std::log(2.0 * M_PI) -
              (hyper.a_sigma + 0.5 * gram.n_rows) * std::log(hyper.b_sigma + 0.5 * resid);
  if (s > 0) lp -= 0.5 * (s * std::log(nu_s) + am.logdet_prec);
  return lp;
}

inline double log_marginal_likelihood(const std::array<bool, kNumFeatures>& z, double nu_s,
                                      const LinearSystem& sys, const HyperParams& hyper) {
  return log_marginal_likelihood(z, nu_s, GramSystem(sys), hyper);
}

// One sweep over all indicators in a fresh random order. Each flip is scored
// by the evidence difference; the current configuration's value is carried
// along so every visit costs one Cholesky. Excluded features are pinned off
// without consuming randomness.
inline std::array<bool, kNumFeatures> sample_z(const ChainState& state, double nu_s, double p0,
                                               const GramSystem& gram, const HyperParams& hyper,
                                               Rng& rng,
                                               const std::array<bool, kNumFeatures>& excluded = {}) {
  std::array<bool, kNumFeatures> z = state.z;
  std::array<int, kNumFeatures> order;
  for (int i = 0; i < kNumFeatures; ++i) order[i] = i;
  for (int i = 0; i < kNumFeatures - 1; ++i) {
    const int j = i + static_cast<int>(rng.uniform_index(kNumFeatures - i));
    std::swap(order[i], order[j]);
  }

  double cur = log_marginal_likelihood(z, nu_s, gram, hyper);
  for (int i : order) {
    if (excluded[i]) {
      if (z[i]) {
        z[i] = false;
        cur = log_marginal_likelihood(z, nu_s, gram, hyper);
      }
      continue;
    }
    if (p0 >= 1.0 || p0 <= 0.0) {
      // Degenerate Bernoulli: the outcome ignores the data and draws nothing.
      const bool take = p0 >= 1.0;
      if (take != z[i]) {
        z[i] = take;
        cur = log_marginal_likelihood(z, nu_s, gram, hyper);
      }
      continue;
    }
    auto flipped = z;
    flipped[i] = !z[i];
    const double other = log_marginal_likelihood(flipped, nu_s, gram, hyper);
    const double on = z[i] ? cur : other;
    const double off = z[i] ? other : cur;
    // P(z_i = 1 | rest) through the log odds; overflow-safe in both tails.
    const double logodds = std::log(p0) - std::log1p(-p0) + on - off;
    const double xi = 1.0 / (1.0 + std::exp(-logodds));
    const bool take = rng.uniform() < xi;
    if (take != z[i]) {
      z[i] = take;
      cur = other;
    }
  }
  return z;
}

inline std::array<bool, kNumFeatures> sample_z(const ChainState& state, double nu_s, double p0,
                                               const LinearSystem& sys, const HyperParams& hyper,
                                               Rng& rng) {
  return sample_z(state, nu_s, p0, GramSystem(sys), hyper, rng);
}

// One full Gibbs sweep: theta, sigma^2, nu_s, p0, then z; switched-off
// coefficients are zeroed so the spike invariant holds between sweeps. The
// activation-probability posterior counts only non-excluded candidates.
inline void gibbs_sweep(ChainState& state, const GramSystem& gram, const HyperParams& hyper,
                        Rng& rng, const std::array<bool, kNumFeatures>& excluded = {}) {
  int n_available = 0;
  for (int i = 0; i < kNumFeatures; ++i) n_available += excluded[i] ? 0 : 1;
  state.theta = sample_theta(state, gram, rng);
  state.sigma2 = sample_sigma2(state, gram, hyper, rng);
  state.nu_s = sample_nu_s(state, hyper, rng);
  state.p0 = sample_p0(state, hyper, rng, n_available);
  state.z = sample_z(state, state.nu_s, state.p0, gram, hyper, rng, excluded);
  for (int i = 0; i < kNumFeatures; ++i)
    if (!state.z[i]) state.theta[i] = 0.0;
}

inline ChainState initial_state(Rng& rng, const std::array<bool, kNumFeatures>& excluded = {}) {
  ChainState st;
  st.theta.setZero();
  st.theta[0] = rng.uniform(0.95, 1.05);
  st.sigma2 = rng.uniform(0.95, 1.05);
  st.nu_s = rng.uniform(0.95, 1.05);
  st.p0 = rng.uniform(0.095, 0.105);
  st.z.fill(false);
  st.z[0] = rng.uniform() < 0.5;
  if (excluded[0]) {
    st.theta[0] = 0.0;
    st.z[0] = false;
  }
  return st;
}

// Independent chains with per-chain derived streams; post-burn-in states are
// concatenated chain-major. Any conditional failure aborts with the chain,
// sweep, and full state embedded in the message for replay.
inline PosteriorSamples run_chains(const LinearSystem& sys, const HyperParams& hyper,
                                   const ChainConfig& config,
                                   const std::array<bool, kNumFeatures>& excluded = {}) {
  hyper.validate();
  config.validate();
  const GramSystem gram(sys);
  PosteriorSamples out;
  out.states.reserve(static_cast<std::size_t>(config.n_g) * config.n_chains);
  for (int c = 0; c < config.n_chains; ++c) {
    Rng rng(derive_stream(config.rng_seed, "chain", static_cast<std::uint64_t>(c)));
    ChainState st = initial_state(rng, excluded);
    for (int sweep = 0; sweep < config.n_burn + config.n_g; ++sweep) {
      try {
        gibbs_sweep(st, gram, hyper, rng, excluded);
      } catch (const Error& e) {
        std::ostringstream msg;
        msg << "run_chains: chain " << c << " sweep " << sweep << ": " << e.what() << "; "
            << detail::dump_state(st);
        throw SolverError(msg.str());
      }
      if (sweep >= config.n_burn) {
        out.states.push_back(st);
        out.chain_ids.push_back(c);
        out.sweep_ids.push_back(sweep);
      }
    }
  }
  return out;
}

// Columnar record, one row per state: coefficients, indicator bits, the three
// scalars, then chain and sweep ids. Doubles are round-trip exact.
inline void save_samples_csv(const PosteriorSamples& samples, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoError("save_samples_csv: cannot open " + path);
  os.precision(17);
  for (int i = 1; i <= kNumFeatures; ++i) os << "theta_" << i << ",";
  for (int i = 1; i <= kNumFeatures; ++i) os << "z_" << i << ",";
  os << "p0,nu_s,sigma2,chain,sweep\n";
  for (std::size_t r = 0; r < samples.size(); ++r) {
    const auto& st = samples.states[r];
    for (int i = 0; i < kNumFeatures; ++i) os << st.theta[i] << ",";
    for (int i = 0; i < kNumFeatures; ++i) os << (st.z[i] ? 1 : 0) << ",";
    os << st.p0 << "," << st.nu_s << "," << st.sigma2 << "," << samples.chain_ids[r] << ","
       << samples.sweep_ids[r] << "\n";
  }
  if (!os) throw IoError("save_samples_csv: write failed for " + path);
}

inline PosteriorSamples load_samples_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("load_samples_csv: cannot open " + path);
  std::string line;
  if (!std::getline(is, line)) throw IoError("load_samples_csv: empty file " + path);
  PosteriorSamples out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    auto next = [&]() {
      if (!std::getline(ls, cell, ',')) throw IoError("load_samples_csv: short row in " + path);
      return cell;
    };
    ChainState st;
    for (int i = 0; i < kNumFeatures; ++i) st.theta[i] = std::stod(next());
    for (int i = 0; i < kNumFeatures; ++i) st.z[i] = std::stoi(next()) != 0;
    st.p0 = std::stod(next());
    st.nu_s = std::stod(next());
    st.sigma2 = std::stod(next());
    out.states.push_back(st);
    out.chain_ids.push_back(std::stoi(next()));
    out.sweep_ids.push_back(std::stoi(next()));
  }
  return out;
}

}  // namespace elastid
