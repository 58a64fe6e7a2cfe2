#pragma once

// Independent numerical checks of the sampler building blocks. Everything here
// is computed by a route that does not go through the Gibbs kernels being
// checked: adaptive quadrature, closed forms, and a random-walk Metropolis
// chain on the lambda-marginalized pseudo-posterior.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <Eigen/Core>

#include "bowl/distributions.hpp"
#include "bowl/gibbs.hpp"
#include "bowl/model.hpp"
#include "bowl/rng.hpp"

namespace bowl::verify {

// int_0^inf f(x) dx by adaptive Gauss-Kronrod with the substitution x = t^2,
// which removes an x^{-1/2} singularity at the origin.
template <class F>
double integrate_half_line(F&& f, double* error_estimate = nullptr) {
  auto g = [&](double t) { return t > 0.0 ? 2.0 * t * f(t * t) : 0.0; };
  double err = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      g, 0.0, std::numeric_limits<double>::infinity(), 20, 1e-14, &err);
  if (error_estimate) *error_estimate = err;
  return value;
}

// int_0^inf (2 pi lambda)^{-1/2} exp(-(u + lambda)^2 / (2 lambda)) dlambda, which
// should equal exp(-2 max(u, 0)).
inline double mixture_integral(double u) {
  return integrate_half_line([u](double lam) {
    return std::exp(-(u + lam) * (u + lam) / (2.0 * lam)) / std::sqrt(2.0 * std::numbers::pi * lam);
  });
}

// Largest |mixture_integral(u) - exp(-2 max(u, 0))| over the given points.
inline double mixture_identity_max_error(const std::vector<double>& us) {
  double worst = 0.0;
  for (double u : us) worst = std::max(worst, std::abs(mixture_integral(u) - std::exp(-2.0 * std::max(u, 0.0))));
  return worst;
}

inline const std::vector<double>& mixture_identity_points() {
  static const std::vector<double> us{-3.0, -1.0, -0.25, 0.0, 0.25, 1.0, 3.0};
  return us;
}

// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|.
inline double ks_statistic(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw InputError("KS statistic of an empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= v) ++i;
    while (j < b.size() && b[j] <= v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

// Random-walk Metropolis on the pseudo-posterior of beta with lambda integrated
// out exactly: log pi(beta) = -2 sum_i w_i max(1 - a_i x_i' beta, 0) + log prior.
// Normal prior only. Returns every `thin`-th state after `burn` steps.
inline std::vector<Eigen::VectorXd> metropolis_beta(const Dataset& data, const NormalPrior& prior, long steps,
                                                    long burn, long thin, double step_size, Rng& rng,
                                                    double* acceptance = nullptr) {
  const Eigen::Index p = data.p();
  const Eigen::VectorXd mu0 = prior.mu0.size() == p ? prior.mu0 : Eigen::VectorXd::Zero(p);
  auto log_target = [&](const Eigen::VectorXd& b) {
    return log_pseudo_likelihood(b, data) - 0.5 * (b - mu0).squaredNorm() / prior.sigma0_sq;
  };
  Eigen::VectorXd cur = mu0;
  double cur_lp = log_target(cur);
  long accepted = 0;
  std::vector<Eigen::VectorXd> out;
  out.reserve(static_cast<std::size_t>((steps - burn) / std::max(thin, 1L) + 1));
  Eigen::VectorXd prop(p);
  for (long s = 0; s < steps; ++s) {
    for (Eigen::Index j = 0; j < p; ++j) prop[j] = cur[j] + step_size * rng.normal();
    const double prop_lp = log_target(prop);
    if (std::log(rng.uniform()) < prop_lp - cur_lp) {
      cur = prop;
      cur_lp = prop_lp;
      ++accepted;
    }
    if (s >= burn && (s - burn) % thin == 0) out.push_back(cur);
  }
  if (acceptance) *acceptance = static_cast<double>(accepted) / static_cast<double>(steps);
  return out;
}

// The two-observation, one-coefficient instance used by the exactness check.
inline Dataset exactness_instance() {
  Dataset d;
  d.features.resize(2, 1);
  d.features << 1.0, 0.5;
  d.actions.resize(2);
  d.actions << 1.0, -1.0;
  d.rewards.resize(2);
  d.rewards << 0.5, 0.75;
  d.rho = 0.5;
  return d;
}

struct CheckResult {
  std::string name;
  double measured = 0.0;
  double threshold = 0.0;
  bool passed = false;
  std::string detail;
};

struct Options {
  bool quick = false;
  // Tolerance of the quadrature checks. The Monte Carlo thresholds are scaled by
  // tol / 1e-6, so tightening tol tightens every check.
  double tol = 1e-6;
  std::uint64_t seed = 20240611;
};

inline CheckResult check_mixture_identity(const Options& opt) {
  const double err = mixture_identity_max_error(mixture_identity_points());
  return {"scale-mixture identity", err, opt.tol, err < opt.tol, "max |quadrature - exp(-2 max(u,0))| over 7 points"};
}

inline CheckResult check_gig_normalization(const Options& opt) {
  double worst = 0.0;
  for (double psi : {0.5, 1.0, 2.0})
    for (double chi : {0.5, 1.0, 2.0}) {
      const GigHalfParams gp{psi, chi};
      const double mass = integrate_half_line([&](double x) { return std::exp(log_density_gig_half(x, gp)); });
      worst = std::max(worst, std::abs(mass - 1.0));
    }
  return {"GIG(1/2) density normalization", worst, opt.tol, worst < opt.tol, "max |mass - 1| over (psi, chi) grid"};
}

// Largest |mean - expected| / SE over the GIG cases; passes when below 3.
inline CheckResult check_gig_moments(const Options& opt) {
  const long draws = opt.quick ? 20000 : 100000;
  const double scale = opt.tol / 1e-6;
  Rng rng(derive_seed(opt.seed, {11}));
  double worst = 0.0;
  for (double chi : {0.25, 1.0, 4.0}) {
    double sum = 0.0;
    for (long k = 0; k < draws; ++k) sum += 1.0 / sample_gig_half({1.0, chi}, rng);
    const double mu = 1.0 / std::sqrt(chi);
    const double se = std::sqrt(mu * mu * mu / static_cast<double>(draws));
    worst = std::max(worst, std::abs(sum / static_cast<double>(draws) - mu) / se);
  }
  {
    double sum = 0.0;
    for (long k = 0; k < draws; ++k) sum += sample_gig_half({1.0, 0.0}, rng);
    const double se = std::sqrt(2.0 / static_cast<double>(draws));
    worst = std::max(worst, std::abs(sum / static_cast<double>(draws) - 1.0) / se);
  }
  return {"GIG/IG moments", worst, 3.0 * scale, worst < 3.0 * scale, "max z-score of E[1/X] (chi>0) and E[X] (chi=0)"};
}

struct ConditionalMomentError {
  double mean_z = 0.0;        // max |mean - target| / SE over coordinates
  double cov_rel_err = 0.0;   // max |C_jk - B_jk| / sqrt(B_jj B_kk)
};

inline ConditionalMomentError conditional_moment_error(const MvnParams& target, long draws, Rng& rng,
                                                       const std::function<Eigen::VectorXd(Rng&)>& sampler) {
  const Eigen::Index p = target.dim();
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(p);
  Eigen::MatrixXd outer = Eigen::MatrixXd::Zero(p, p);
  for (long k = 0; k < draws; ++k) {
    const Eigen::VectorXd b = sampler(rng);
    sum += b;
    outer.noalias() += b * b.transpose();
  }
  const double n = static_cast<double>(draws);
  const Eigen::VectorXd mean = sum / n;
  const Eigen::MatrixXd cov = (outer - n * mean * mean.transpose()) / (n - 1.0);
  const Eigen::MatrixXd truth = target.covariance();
  ConditionalMomentError e;
  for (Eigen::Index j = 0; j < p; ++j) {
    e.mean_z = std::max(e.mean_z, std::abs(mean[j] - target.mean()[j]) / std::sqrt(truth(j, j) / n));
    for (Eigen::Index k = 0; k < p; ++k)
      e.cov_rel_err = std::max(e.cov_rel_err, std::abs(cov(j, k) - truth(j, k)) / std::sqrt(truth(j, j) * truth(k, k)));
  }
  return e;
}

// A fixed random (data, lambda) instance with p = 3.
inline Dataset conditional_instance(Rng& rng, Eigen::VectorXd& lambda) {
  const Eigen::Index n = 25, p = 3;
  Dataset d;
  d.features.resize(n, p);
  d.actions.resize(n);
  d.rewards.resize(n);
  d.rho = 0.4;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) d.features(i, j) = 2.0 * rng.uniform() - 1.0;
    d.actions[i] = rng.bernoulli(0.4) ? 1.0 : -1.0;
    d.rewards[i] = 0.2 + rng.uniform();
  }
  lambda.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) lambda[i] = 0.1 + 2.0 * rng.uniform();
  return d;
}

inline std::vector<CheckResult> check_beta_conditionals(const Options& opt) {
  const long draws = opt.quick ? 20000 : 100000;
  const double scale = opt.tol / 1e-6;
  Rng rng(derive_seed(opt.seed, {12}));
  Eigen::VectorXd lambda;
  const Dataset data = conditional_instance(rng, lambda);
  const SuffStats suff = build_suffstats(lambda, data);

  NormalPrior np;
  np.mu0 = Eigen::Vector3d(0.3, -0.2, 0.1);
  np.sigma0_sq = 2.0;
  const MvnParams normal_target = beta_conditional_normal(suff, np);
  const auto en = conditional_moment_error(normal_target, draws, rng,
                                           [&](Rng& r) { return draw_beta_normal(suff, np, r); });

  const ExponentialPowerPrior ep{0.8};
  const Eigen::VectorXd omega = Eigen::Vector3d(0.5, 1.5, 3.0);
  const Eigen::VectorXd sigma = feature_scales(data.features);
  const MvnParams ep_target = beta_conditional_ep(suff, omega, ep, sigma);
  const auto ee = conditional_moment_error(ep_target, draws, rng,
                                           [&](Rng& r) { return draw_beta_ep(suff, omega, ep, sigma, r); });

  return {
      {"beta|lambda normal: mean", en.mean_z, 3.0 * scale, en.mean_z < 3.0 * scale, "max z-score vs B1 b1"},
      {"beta|lambda normal: covariance", en.cov_rel_err, 0.1 * scale, en.cov_rel_err < 0.1 * scale,
       "max |C - B1| / sqrt(diag product)"},
      {"beta|lambda,omega EP: mean", ee.mean_z, 3.0 * scale, ee.mean_z < 3.0 * scale, "max z-score vs B2 b2"},
      {"beta|lambda,omega EP: covariance", ee.cov_rel_err, 0.1 * scale, ee.cov_rel_err < 0.1 * scale,
       "max |C - B2| / sqrt(diag product)"},
  };
}

// KS distance between the Gibbs beta-marginal and a Metropolis chain on the
// marginal pseudo-posterior, p = 1, n = 2, normal prior.
inline double gibbs_vs_metropolis_ks(long metropolis_steps, int gibbs_draws, std::uint64_t seed) {
  const Dataset data = exactness_instance();
  NormalPrior np;
  np.sigma0_sq = 1.0;
  Rng mh_rng(derive_seed(seed, {21}));
  const long thin = 10;
  const auto mh = metropolis_beta(data, np, metropolis_steps, 10000, thin, 1.2, mh_rng);
  std::vector<double> mh_beta;
  mh_beta.reserve(mh.size());
  for (const auto& b : mh) mh_beta.push_back(b[0]);

  PriorSpec prior;
  prior.kind = np;
  GibbsConfig gc;
  gc.n_draws = gibbs_draws + 1000;
  gc.burn_in = 1000;
  gc.seed = derive_seed(seed, {22});
  const PosteriorDraws draws = run_chain(data, prior, gc);
  std::vector<double> gibbs_beta(draws.beta.data(), draws.beta.data() + draws.beta.rows());
  return ks_statistic(std::move(gibbs_beta), std::move(mh_beta));
}

inline CheckResult check_sampler_exactness(const Options& opt) {
  const double scale = opt.tol / 1e-6;
  const double ks = opt.quick ? gibbs_vs_metropolis_ks(500000, 50000, opt.seed)
                              : gibbs_vs_metropolis_ks(2000000, 200000, opt.seed);
  const double thr = (opt.quick ? 0.05 : 0.03) * scale;
  return {"Gibbs vs Metropolis (p=1, n=2)", ks, thr, ks < thr, "two-sample KS statistic of beta"};
}

inline std::vector<CheckResult> run_all(const Options& opt) {
  std::vector<CheckResult> out;
  out.push_back(check_mixture_identity(opt));
  out.push_back(check_gig_normalization(opt));
  out.push_back(check_gig_moments(opt));
  for (auto& c : check_beta_conditionals(opt)) out.push_back(std::move(c));
  out.push_back(check_sampler_exactness(opt));
  return out;
}

}  // namespace bowl::verify
