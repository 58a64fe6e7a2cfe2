#pragma once

// Gibbs samplers for the augmented pseudo-posterior.
//
// Writing z_i = a_i x_i and w_i for the outcome weight, the augmented
// likelihood term of subject i is
//   lambda_i^{-1/2} exp{-(w_i + lambda_i - w_i z_i' beta)^2 / (2 lambda_i)}.
// As a function of beta this is Gaussian with
//   precision  (w_i^2 / lambda_i) z_i z_i'
//   linear     w_i (1 + w_i / lambda_i) z_i
// and as a function of lambda_i it is GIG(1/2, 1, w_i^2 (1 - z_i' beta)^2).
//
// Update order per iteration:
//   normal prior            beta | lambda, lambda | beta
//   exponential power       beta | lambda, omega, lambda | beta, omega | beta
//   spike and slab          lambda | beta, (gamma sweep, beta_gamma) | lambda

#include <cmath>
#include <cstdint>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "bowl/distributions.hpp"
#include "bowl/errors.hpp"
#include "bowl/model.hpp"
#include "bowl/parallel.hpp"
#include "bowl/rng.hpp"

namespace bowl {

// |beta_j| below this is treated as zero when drawing omega_j.
inline constexpr double kOmegaBetaFloor = 1e-12;

struct SuffStats {
  Eigen::MatrixXd precision_data;  // sum_i (w_i^2 / lambda_i) z_i z_i'
  Eigen::VectorXd linear_data;     // sum_i w_i (1 + w_i / lambda_i) z_i
};

// Per-dataset quantities that do not change across iterations.
struct PreparedData {
  Eigen::MatrixXd signed_features;  // rows z_i = a_i x_i
  Eigen::VectorXd weights;          // w_i

  explicit PreparedData(const Dataset& data)
      : signed_features(data.actions.asDiagonal() * data.features), weights(owl_weights(data)) {}

  Eigen::Index n() const noexcept { return signed_features.rows(); }
  Eigen::Index p() const noexcept { return signed_features.cols(); }
};

inline SuffStats build_suffstats(const Eigen::VectorXd& lambda, const PreparedData& prep) {
  if (lambda.size() != prep.n()) throw InputError("lambda has wrong length");
  if (!(lambda.array() > 0.0).all()) throw InputError("lambda must be positive");
  const Eigen::ArrayXd w = prep.weights.array();
  const Eigen::VectorXd quad = (w.square() / lambda.array()).matrix();
  const Eigen::VectorXd lin = (w * (1.0 + w / lambda.array())).matrix();
  SuffStats s;
  s.precision_data = prep.signed_features.transpose() * quad.asDiagonal() * prep.signed_features;
  s.linear_data = prep.signed_features.transpose() * lin;
  return s;
}

inline SuffStats build_suffstats(const Eigen::VectorXd& lambda, const Dataset& data) {
  return build_suffstats(lambda, PreparedData(data));
}

inline Eigen::VectorXd draw_lambda(const Eigen::VectorXd& beta, const PreparedData& prep, Rng& rng) {
  if (beta.size() != prep.p()) throw InputError("beta has wrong length");
  const Eigen::VectorXd margin = prep.signed_features * beta;
  Eigen::VectorXd lambda(prep.n());
  for (Eigen::Index i = 0; i < prep.n(); ++i) {
    const double u = prep.weights[i] * (1.0 - margin[i]);
    lambda[i] = sample_gig_half({1.0, u * u}, rng);
  }
  return lambda;
}

inline Eigen::VectorXd draw_lambda(const Eigen::VectorXd& beta, const Dataset& data, Rng& rng) {
  return draw_lambda(beta, PreparedData(data), rng);
}

// beta ~ N(B b, B) with B^{-1} = precision_data + I / sigma0^2, b = linear_data + mu0 / sigma0^2.
inline MvnParams beta_conditional_normal(const SuffStats& suff, const NormalPrior& prior) {
  const Eigen::Index p = suff.linear_data.size();
  const double tau = 1.0 / prior.sigma0_sq;
  Eigen::MatrixXd prec = suff.precision_data;
  prec.diagonal().array() += tau;
  Eigen::VectorXd lin = suff.linear_data;
  if (prior.mu0.size() == p) lin += tau * prior.mu0;
  return MvnParams::from_canonical(prec, lin);
}

inline Eigen::VectorXd draw_beta_normal(const SuffStats& suff, const NormalPrior& prior, Rng& rng) {
  return sample_mvn(beta_conditional_normal(suff, prior), rng);
}

// beta ~ N(B b, B) with B^{-1} = precision_data + nu^{-2} diag(1 / (sigma_j^2 omega_j)), b = linear_data.
inline MvnParams beta_conditional_ep(const SuffStats& suff, const Eigen::VectorXd& omega,
                                     const ExponentialPowerPrior& prior, const Eigen::VectorXd& sigma) {
  const Eigen::Index p = suff.linear_data.size();
  if (omega.size() != p || sigma.size() != p) throw InputError("omega/sigma have wrong length");
  Eigen::MatrixXd prec = suff.precision_data;
  const double inv_nu2 = 1.0 / (prior.nu * prior.nu);
  for (Eigen::Index j = 0; j < p; ++j) prec(j, j) += inv_nu2 / (sigma[j] * sigma[j] * omega[j]);
  return MvnParams::from_canonical(prec, suff.linear_data);
}

inline Eigen::VectorXd draw_beta_ep(const SuffStats& suff, const Eigen::VectorXd& omega,
                                    const ExponentialPowerPrior& prior, const Eigen::VectorXd& sigma, Rng& rng) {
  return sample_mvn(beta_conditional_ep(suff, omega, prior, sigma), rng);
}

// 1/omega_j ~ IG(nu sigma_j / |beta_j|, 1). At beta_j = 0 this is the chi = 0 limit
// of the equivalent GIG(1/2, 1, beta_j^2 / (nu sigma_j)^2), i.e. omega_j ~ Gamma(1/2, rate 1/2).
inline Eigen::VectorXd draw_omega(const Eigen::VectorXd& beta, const ExponentialPowerPrior& prior,
                                  const Eigen::VectorXd& sigma, Rng& rng) {
  if (sigma.size() != beta.size()) throw InputError("sigma has wrong length");
  Eigen::VectorXd omega(beta.size());
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    const double b = std::abs(beta[j]);
    if (b < kOmegaBetaFloor) {
      omega[j] = rng.gamma(0.5, 0.5);
    } else {
      omega[j] = 1.0 / sample_inverse_gaussian({prior.nu * sigma[j] / b, 1.0}, rng);
    }
  }
  return omega;
}

// Log marginal (beta integrated out) of the augmented model for inclusion vector
// gamma, up to a constant that does not depend on gamma:
//   (1/2) log|D_g| - (1/2) log|B_g^{-1}| + (1/2) b_g' B_g b_g + sum_j log p(gamma_j)
// with D_g = diag(1 / (nu^2 sigma_j^2)), B_g^{-1} = precision_data[g,g] + D_g, b_g = linear_data[g].
inline double ss_log_marginal(const SuffStats& suff, const Eigen::VectorXi& gamma, const SpikeSlabPrior& prior,
                              const Eigen::VectorXd& sigma) {
  const Eigen::Index p = suff.linear_data.size();
  std::vector<Eigen::Index> active;
  double lm = 0.0;
  for (Eigen::Index j = 0; j < p; ++j) {
    if (gamma[j] == 1) {
      active.push_back(j);
      lm += std::log(prior.pi_incl);
    } else {
      lm += std::log1p(-prior.pi_incl);
    }
  }
  if (active.empty()) return lm;
  const auto k = static_cast<Eigen::Index>(active.size());
  Eigen::MatrixXd prec(k, k);
  Eigen::VectorXd lin(k);
  for (Eigen::Index a = 0; a < k; ++a) {
    lin[a] = suff.linear_data[active[a]];
    for (Eigen::Index c = 0; c < k; ++c) prec(a, c) = suff.precision_data(active[a], active[c]);
    const double d = 1.0 / (prior.nu * prior.nu * sigma[active[a]] * sigma[active[a]]);
    prec(a, a) += d;
    lm += 0.5 * std::log(d);
  }
  const Eigen::LLT<Eigen::MatrixXd> llt(prec);
  if (llt.info() != Eigen::Success) throw NumericalError("spike-and-slab precision is not positive definite");
  const Eigen::MatrixXd l = llt.matrixL();
  lm -= l.diagonal().array().log().sum();
  lm += 0.5 * lin.dot(llt.solve(lin));
  return lm;
}

// Single-site sweep over gamma followed by beta_gamma ~ N(B_g b_g, B_g); inactive
// coordinates are set to exactly zero. Coordinates flagged in `fixed_in` are kept
// included and not swept (used for the intercept).
inline void draw_gamma_and_beta_ss(ChainState& state, const SuffStats& suff, const SpikeSlabPrior& prior,
                                   const Eigen::VectorXd& sigma, Rng& rng,
                                   const std::vector<bool>& fixed_in = {}) {
  const Eigen::Index p = suff.linear_data.size();
  if (state.gamma.size() != p || sigma.size() != p) throw InputError("gamma/sigma have wrong length");
  for (Eigen::Index j = 0; j < p; ++j) {
    if (static_cast<std::size_t>(j) < fixed_in.size() && fixed_in[static_cast<std::size_t>(j)]) {
      state.gamma[j] = 1;
      continue;
    }
    state.gamma[j] = 1;
    const double lm1 = ss_log_marginal(suff, state.gamma, prior, sigma);
    state.gamma[j] = 0;
    const double lm0 = ss_log_marginal(suff, state.gamma, prior, sigma);
    const double prob_in = 1.0 / (1.0 + std::exp(lm0 - lm1));
    state.gamma[j] = rng.uniform() < prob_in ? 1 : 0;
  }

  state.beta = Eigen::VectorXd::Zero(p);
  std::vector<Eigen::Index> active;
  for (Eigen::Index j = 0; j < p; ++j)
    if (state.gamma[j] == 1) active.push_back(j);
  if (active.empty()) return;
  const auto k = static_cast<Eigen::Index>(active.size());
  Eigen::MatrixXd prec(k, k);
  Eigen::VectorXd lin(k);
  for (Eigen::Index a = 0; a < k; ++a) {
    lin[a] = suff.linear_data[active[a]];
    for (Eigen::Index c = 0; c < k; ++c) prec(a, c) = suff.precision_data(active[a], active[c]);
    prec(a, a) += 1.0 / (prior.nu * prior.nu * sigma[active[a]] * sigma[active[a]]);
  }
  const Eigen::VectorXd draw = sample_mvn(MvnParams::from_canonical(prec, lin), rng);
  for (Eigen::Index a = 0; a < k; ++a) state.beta[active[a]] = draw[a];
}

enum class BetaInit { Zeros, Ridge };

struct GibbsConfig {
  int n_draws = 500;
  int burn_in = 150;
  int n_chains = 1;
  std::uint64_t seed = 0;
  BetaInit init = BetaInit::Zeros;
  bool intercept = false;  // column 0 of the features is the constant 1
  unsigned jobs = 1;       // threads used across chains; never affects results

  void validate() const {
    if (n_draws < 1) throw InputError("n_draws must be positive");
    if (burn_in < 0 || burn_in >= n_draws) throw InputError("burn_in must satisfy 0 <= burn_in < n_draws");
    if (n_chains < 1) throw InputError("n_chains must be positive");
  }

  int retained() const noexcept { return n_draws - burn_in; }
};

struct PosteriorDraws {
  Eigen::MatrixXd beta;   // (retained * n_chains) x p, chain-major
  Eigen::MatrixXi gamma;  // same shape, spike-and-slab only; otherwise empty
  int retained_per_chain = 0;
  int n_chains = 0;
  bool intercept = false;
  std::vector<std::uint64_t> chain_seeds;
  GibbsConfig config;
  std::string prior_name;

  Eigen::Index p() const noexcept { return beta.cols(); }
  Eigen::Index size() const noexcept { return beta.rows(); }

  auto chain(int k) const { return beta.middleRows(static_cast<Eigen::Index>(k) * retained_per_chain, retained_per_chain); }

  Eigen::VectorXd posterior_mean() const {
    if (beta.rows() == 0) throw InputError("no posterior draws");
    return beta.colwise().mean().transpose();
  }
};

// One Gibbs chain over a fixed dataset and prior.
class GibbsChain {
 public:
  GibbsChain(const Dataset& data, PriorSpec prior, const GibbsConfig& config)
      : prep_(data), prior_(std::move(prior)), config_(config) {
    if (prior_.sigma.size() == 0) prior_.sigma = feature_scales(data.features);
    prior_.validate(prep_.p());
    if (config_.intercept) {
      fixed_in_.assign(static_cast<std::size_t>(prep_.p()), false);
      fixed_in_[0] = true;
    }
  }

  ChainState initial_state() const {
    const Eigen::Index p = prep_.p();
    ChainState s;
    s.beta = Eigen::VectorXd::Zero(p);
    if (config_.init == BetaInit::Ridge && prep_.n() > 0) {
      const Eigen::MatrixXd& z = prep_.signed_features;
      Eigen::MatrixXd g = z.transpose() * prep_.weights.asDiagonal() * z;
      g.diagonal().array() += 1.0;
      s.beta = g.llt().solve(z.transpose() * prep_.weights);
    }
    s.lambda = Eigen::VectorXd::Ones(prep_.n());
    s.omega = Eigen::VectorXd::Ones(p);
    s.gamma = Eigen::VectorXi::Ones(p);
    return s;
  }

  // One full Gibbs cycle.
  void step(ChainState& s, Rng& rng) const {
    std::visit(
        [&](const auto& kind) {
          using K = std::decay_t<decltype(kind)>;
          if constexpr (std::is_same_v<K, NormalPrior>) {
            s.beta = draw_beta_normal(build_suffstats(s.lambda, prep_), kind, rng);
            s.lambda = draw_lambda(s.beta, prep_, rng);
          } else if constexpr (std::is_same_v<K, ExponentialPowerPrior>) {
            s.beta = draw_beta_ep(build_suffstats(s.lambda, prep_), s.omega, kind, prior_.sigma, rng);
            s.lambda = draw_lambda(s.beta, prep_, rng);
            s.omega = draw_omega(s.beta, kind, prior_.sigma, rng);
          } else {
            s.lambda = draw_lambda(s.beta, prep_, rng);
            draw_gamma_and_beta_ss(s, build_suffstats(s.lambda, prep_), kind, prior_.sigma, rng, fixed_in_);
          }
        },
        prior_.kind);
  }

  // Runs config.n_draws cycles, calling on_retained(row, state) for each
  // post-burn-in state.
  template <class OnRetained>
  void run(Rng& rng, OnRetained&& on_retained) const {
    ChainState s = initial_state();
    for (int it = 0; it < config_.n_draws; ++it) {
      try {
        step(s, rng);
      } catch (const NumericalError& e) {
        throw NumericalError(e.what(), it);
      }
      if (!s.beta.allFinite() || !s.lambda.allFinite() || !(s.lambda.array() > 0.0).all() ||
          !(s.omega.array() > 0.0).all() || !s.omega.allFinite())
        throw NumericalError("non-finite or non-positive chain state", it);
      if (it >= config_.burn_in) on_retained(static_cast<Eigen::Index>(it - config_.burn_in), s);
    }
  }

  const PriorSpec& prior() const noexcept { return prior_; }
  const PreparedData& prepared() const noexcept { return prep_; }

 private:
  PreparedData prep_;
  PriorSpec prior_;
  GibbsConfig config_;
  std::vector<bool> fixed_in_;
};

inline std::uint64_t chain_seed(std::uint64_t seed, int chain) {
  return derive_seed(seed, {0xc4a1ULL, static_cast<std::uint64_t>(chain)});
}

// Runs config.n_chains independent chains (in parallel when config.jobs > 1).
// Output is ordered by chain index and does not depend on jobs.
inline PosteriorDraws run_chain(const Dataset& data, const PriorSpec& prior, const GibbsConfig& config) {
  config.validate();
  data.validate();
  if (config.intercept && (data.n() > 0 && !(data.features.col(0).array() == 1.0).all()))
    throw InputError("intercept requested but column 0 is not constant 1");
  const GibbsChain chain(data, prior, config);
  const bool keep_gamma = std::holds_alternative<SpikeSlabPrior>(prior.kind);

  PosteriorDraws out;
  out.retained_per_chain = config.retained();
  out.n_chains = config.n_chains;
  out.intercept = config.intercept;
  out.config = config;
  out.prior_name = prior.name();
  const Eigen::Index rows = static_cast<Eigen::Index>(out.retained_per_chain) * config.n_chains;
  out.beta.resize(rows, data.p());
  if (keep_gamma) out.gamma.resize(rows, data.p());
  for (int c = 0; c < config.n_chains; ++c) out.chain_seeds.push_back(chain_seed(config.seed, c));

  parallel_for(static_cast<std::size_t>(config.n_chains), config.jobs, [&](std::size_t c) {
    Rng rng(out.chain_seeds[c]);
    const Eigen::Index offset = static_cast<Eigen::Index>(c) * out.retained_per_chain;
    chain.run(rng, [&](Eigen::Index row, const ChainState& s) {
      out.beta.row(offset + row) = s.beta.transpose();
      if (keep_gamma) out.gamma.row(offset + row) = s.gamma.transpose();
    });
  });
  return out;
}

}  // namespace bowl
